use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{finite, non_negative, Error, Result};
use crate::lindblad::{JumpOperator, LindbladSystem};
use crate::tensor::{
    accumulate_ladder_product, mode_annihilation, CMatrix, CompositeSpace, Ladder, Operator,
};

/// Carrier angular frequency for 1552.5 nm light, rad/s.
pub const DEFAULT_OMEGA0: f64 = 2.0 * PI * 193.1e12;
/// Reduced Planck constant, J s.
pub const DEFAULT_HBAR: f64 = 1.0545718e-34;
/// Largest composite Hilbert-space dimension the multimode builder accepts by default.
pub const DEFAULT_MAX_DIM: usize = 4096;

/// One entry of a Raman response table at detuning `index * delta_w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RamanSample {
    pub index: i64,
    pub rr: f64,
    pub ri: f64,
}

/// Sampled Raman response; missing indices read as zero.
///
/// The real part must be even and the imaginary part odd in the detuning index,
/// and the imaginary part non-negative at positive detunings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<RamanSample>", into = "Vec<RamanSample>")]
pub struct RamanTable {
    samples: BTreeMap<i64, (f64, f64)>,
}

impl RamanTable {
    pub fn new(samples: Vec<RamanSample>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for s in &samples {
            finite("raman rr", s.rr)?;
            finite("raman ri", s.ri)?;
            if map.insert(s.index, (s.rr, s.ri)).is_some() {
                return Err(Error::InvalidParameter {
                    name: format!("raman[{}]", s.index),
                    value: s.index as f64,
                    reason: "duplicate detuning index",
                });
            }
        }
        let table = Self { samples: map };
        for &index in table.samples.keys() {
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0);
            if !close(table.rr(index), table.rr(-index)) {
                return Err(Error::InvalidParameter {
                    name: format!("raman[{index}].rr"),
                    value: table.rr(index),
                    reason: "real Raman response must be even in the detuning",
                });
            }
            if !close(table.ri(index), -table.ri(-index)) {
                return Err(Error::InvalidParameter {
                    name: format!("raman[{index}].ri"),
                    value: table.ri(index),
                    reason: "imaginary Raman response must be odd in the detuning",
                });
            }
            if index > 0 && table.ri(index) < 0.0 {
                return Err(Error::InvalidParameter {
                    name: format!("raman[{index}].ri"),
                    value: table.ri(index),
                    reason: "imaginary Raman response must be non-negative at positive detuning",
                });
            }
        }
        Ok(table)
    }

    /// Builds the symmetric table from `R^R(0)` and `(index > 0, R^R, R^I)` triples.
    pub fn from_positive(rr_zero: f64, positive: &[(i64, f64, f64)]) -> Result<Self> {
        let mut samples = vec![RamanSample {
            index: 0,
            rr: rr_zero,
            ri: 0.0,
        }];
        for &(index, rr, ri) in positive {
            if index <= 0 {
                return Err(Error::InvalidParameter {
                    name: "raman index".into(),
                    value: index as f64,
                    reason: "expected a positive detuning index",
                });
            }
            samples.push(RamanSample { index, rr, ri });
            samples.push(RamanSample {
                index: -index,
                rr,
                ri: -ri,
            });
        }
        Self::new(samples)
    }

    /// Instantaneous (Kerr-only) response: `R^R(0) = 1`, everything else zero.
    pub fn kerr_only() -> Self {
        Self::from_positive(1.0, &[]).expect("valid table")
    }

    pub fn rr(&self, index: i64) -> f64 {
        self.samples.get(&index).map_or(0.0, |s| s.0)
    }

    pub fn ri(&self, index: i64) -> f64 {
        self.samples.get(&index).map_or(0.0, |s| s.1)
    }

    /// Largest `|index|` with a non-zero entry.
    pub fn support(&self) -> i64 {
        self.samples
            .iter()
            .filter(|(_, (rr, ri))| *rr != 0.0 || *ri != 0.0)
            .map(|(i, _)| i.abs())
            .max()
            .unwrap_or(0)
    }

    pub fn samples(&self) -> Vec<RamanSample> {
        self.samples
            .iter()
            .map(|(&index, &(rr, ri))| RamanSample { index, rr, ri })
            .collect()
    }
}

impl TryFrom<Vec<RamanSample>> for RamanTable {
    type Error = Error;

    fn try_from(samples: Vec<RamanSample>) -> Result<Self> {
        Self::new(samples)
    }
}

impl From<RamanTable> for Vec<RamanSample> {
    fn from(table: RamanTable) -> Self {
        table.samples()
    }
}

/// Replaces the grid mode at `grid_index` by the classical field
/// `sqrt(2 pi P)/delta_w * exp(i k_pump z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpSubstitution {
    pub grid_index: i64,
    /// W
    pub power: f64,
    /// km^-1
    pub k_pump: f64,
}

/// Frequency-discretised fiber model on a grid of detunings `index * delta_w`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultimodeParams {
    /// Detuning index of each grid mode.
    pub grid: Vec<i64>,
    /// Grid spacing, rad/s.
    pub delta_w: f64,
    /// Carrier angular frequency, rad/s.
    pub omega0: f64,
    pub hbar: f64,
    /// Per-mode propagation constant and attenuation, km^-1, in grid order.
    pub beta: Vec<f64>,
    pub alpha: Vec<f64>,
    pub raman: RamanTable,
    pub gamma: f64,
    pub pumps: Vec<PumpSubstitution>,
    pub n_max: usize,
    /// Use `omega0` as the photon energy scale of every mode.
    pub narrowband: bool,
    pub max_dim: usize,
}

impl MultimodeParams {
    /// Grid with default physical constants, zero dispersion and loss, Kerr-only response.
    pub fn on_grid(grid: Vec<i64>, delta_w: f64, n_max: usize) -> Self {
        let m = grid.len();
        Self {
            grid,
            delta_w,
            omega0: DEFAULT_OMEGA0,
            hbar: DEFAULT_HBAR,
            beta: vec![0.0; m],
            alpha: vec![0.0; m],
            raman: RamanTable::kerr_only(),
            gamma: 1.0,
            pumps: Vec::new(),
            n_max,
            narrowband: true,
            max_dim: DEFAULT_MAX_DIM,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta_w.is_finite() && self.delta_w > 0.0) {
            return Err(Error::InvalidParameter {
                name: "delta_w".into(),
                value: self.delta_w,
                reason: "grid spacing must be positive",
            });
        }
        for (name, v) in [("omega0", self.omega0), ("hbar", self.hbar)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter {
                    name: name.into(),
                    value: v,
                    reason: "must be positive",
                });
            }
        }
        non_negative("gamma", self.gamma)?;
        if self.grid.is_empty() {
            return Err(Error::InvalidState("multimode grid is empty".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for &g in &self.grid {
            if !seen.insert(g) {
                return Err(Error::InvalidParameter {
                    name: "grid".into(),
                    value: g as f64,
                    reason: "duplicate grid index",
                });
            }
            if !self.narrowband && self.omega0 + g as f64 * self.delta_w <= 0.0 {
                return Err(Error::InvalidParameter {
                    name: "grid".into(),
                    value: g as f64,
                    reason: "mode frequency must be positive",
                });
            }
        }
        crate::error::ensure_dim("beta table length", self.grid.len(), self.beta.len())?;
        crate::error::ensure_dim("alpha table length", self.grid.len(), self.alpha.len())?;
        for (k, (&b, &a)) in self.beta.iter().zip(&self.alpha).enumerate() {
            finite(&format!("beta[{k}]"), b)?;
            non_negative(&format!("alpha[{k}]"), a)?;
        }
        let support = self.raman.support() as f64 * self.delta_w;
        if support >= 0.5 * self.omega0 {
            return Err(Error::InvalidParameter {
                name: "raman".into(),
                value: support,
                reason: "response table must vanish at detunings of omega0/2 and beyond",
            });
        }
        let mut pumped = std::collections::HashSet::new();
        for p in &self.pumps {
            if !self.grid.contains(&p.grid_index) {
                return Err(Error::InvalidParameter {
                    name: "pump grid_index".into(),
                    value: p.grid_index as f64,
                    reason: "pump must sit on a grid mode",
                });
            }
            if !pumped.insert(p.grid_index) {
                return Err(Error::InvalidParameter {
                    name: "pump grid_index".into(),
                    value: p.grid_index as f64,
                    reason: "mode substituted twice",
                });
            }
            non_negative("pump power", p.power)?;
            finite("pump k_pump", p.k_pump)?;
        }
        if pumped.len() == self.grid.len() {
            return Err(Error::InvalidState(
                "every grid mode is a classical pump".into(),
            ));
        }
        self.space().map(|_| ())
    }

    /// Grid indices of the modes kept as quantum operators, in grid order.
    pub fn quantum_modes(&self) -> Vec<i64> {
        self.grid
            .iter()
            .copied()
            .filter(|g| !self.pumps.iter().any(|p| p.grid_index == *g))
            .collect()
    }

    /// Composite space of the quantum modes; rejects dimensions above `max_dim`.
    pub fn space(&self) -> Result<CompositeSpace> {
        let space = CompositeSpace::uniform(self.quantum_modes().len(), self.n_max);
        let required = space.checked_total_dim().unwrap_or(usize::MAX);
        if required > self.max_dim {
            return Err(Error::CapExceeded {
                required,
                cap: self.max_dim,
            });
        }
        Ok(space)
    }

    fn photon_energy(&self, grid_index: i64) -> f64 {
        let omega = if self.narrowband {
            self.omega0
        } else {
            self.omega0 + grid_index as f64 * self.delta_w
        };
        self.hbar * omega
    }
}

/// How one grid mode enters an operator product.
#[derive(Clone, Copy)]
enum Slot {
    /// Quantum mode index and the `A = sqrt(hbar w / delta_w) a` scale.
    Quantum(usize, f64),
    /// Classical amplitude (already evaluated at the requested z).
    Classical(Complex64),
}

struct Expansion {
    space: CompositeSpace,
    slots: HashMap<i64, Slot>,
    substituted: bool,
}

impl Expansion {
    fn new(params: &MultimodeParams, z_km: f64) -> Result<Self> {
        let space = params.space()?;
        let mut slots = HashMap::new();
        for (mode, g) in params.quantum_modes().into_iter().enumerate() {
            let scale = (params.photon_energy(g) / params.delta_w).sqrt();
            slots.insert(g, Slot::Quantum(mode, scale));
        }
        for p in &params.pumps {
            let amp = (2.0 * PI * p.power).sqrt() / params.delta_w;
            slots.insert(
                p.grid_index,
                Slot::Classical(Complex64::from_polar(amp, p.k_pump * z_km)),
            );
        }
        Ok(Self {
            space,
            slots,
            substituted: !params.pumps.is_empty(),
        })
    }

    /// Adds `coef * F_1 .. F_k` where each `F` is `A^dag_g` or `A_g`. Classical modes
    /// contribute c-numbers; the term is kept only if its number of quantum
    /// factors equals `keep_order`.
    fn accumulate(
        &self,
        target: &mut CMatrix,
        factors: &[(i64, Ladder)],
        coef: Complex64,
        keep_order: usize,
    ) -> bool {
        let mut c = coef;
        let mut ladders = Vec::with_capacity(factors.len());
        for &(g, kind) in factors {
            match (self.slots[&g], kind) {
                (Slot::Quantum(mode, scale), _) => {
                    c *= scale;
                    ladders.push((mode, kind));
                }
                (Slot::Classical(amp), Ladder::Create) => c *= amp.conj(),
                (Slot::Classical(amp), Ladder::Annihilate) => c *= amp,
            }
        }
        if ladders.len() != keep_order || c == Complex64::new(0.0, 0.0) {
            return false;
        }
        accumulate_ladder_product(target, &self.space, &ladders, c);
        true
    }
}

/// Builds the discretised master equation at `z = 0`.
pub fn build_multimode(params: &MultimodeParams) -> Result<LindbladSystem> {
    build_multimode_at(params, 0.0)
}

/// Builds the discretised master equation with classical pump phases evaluated at `z_km`.
///
/// Without pump substitutions every quartic FWM term and every quadratic Raman
/// term is kept. With substitutions the expansion is linearised around the
/// undepleted pumps: the Hamiltonian keeps terms quadratic in the quantum
/// operators, the Raman jumps keep terms linear in them, and constants are dropped.
pub fn build_multimode_at(params: &MultimodeParams, z_km: f64) -> Result<LindbladSystem> {
    params.validate()?;
    let ex = Expansion::new(params, z_km)?;
    let space = ex.space.clone();
    let dim = space.total_dim();
    let (h_order, jump_order) = if ex.substituted { (2, 1) } else { (4, 2) };

    let mut h = CMatrix::zeros(dim, dim);
    for (mode, g) in params.quantum_modes().into_iter().enumerate() {
        let k = params.grid.iter().position(|&x| x == g).expect("grid mode");
        let beta = params.beta[k];
        // beta/(hbar w) * A^dag A * delta_w reduces to beta * a^dag a.
        accumulate_ladder_product(
            &mut h,
            &space,
            &[(mode, Ladder::Create), (mode, Ladder::Annihilate)],
            Complex64::new(beta, 0.0),
        );
    }

    let gamma_t = params.gamma / (2.0 * PI);
    let dw = params.delta_w;
    let fwm_prefactor = gamma_t / (2.0 * params.hbar * params.omega0) * dw.powi(3);
    for &m in &params.grid {
        for &n in &params.grid {
            for &p in &params.grid {
                let q = m + n - p;
                if !ex.slots.contains_key(&q) {
                    continue;
                }
                let rr = params.raman.rr(m - p);
                if rr == 0.0 {
                    continue;
                }
                let factors = [
                    (m, Ladder::Create),
                    (n, Ladder::Create),
                    (p, Ladder::Annihilate),
                    (q, Ladder::Annihilate),
                ];
                ex.accumulate(
                    &mut h,
                    &factors,
                    Complex64::new(fwm_prefactor * rr, 0.0),
                    h_order,
                );
            }
        }
    }
    h.hermitize();

    let mut jumps = Vec::new();
    for (mode, g) in params.quantum_modes().into_iter().enumerate() {
        let k = params.grid.iter().position(|&x| x == g).expect("grid mode");
        jumps.push(JumpOperator::new(
            format!("loss[{g}]"),
            params.alpha[k].sqrt(),
            mode_annihilation(&space, mode)?,
        ));
    }

    let span = params.grid.iter().max().unwrap() - params.grid.iter().min().unwrap();
    for shift in 1..=span {
        let ri = params.raman.ri(shift);
        if ri <= 0.0 {
            continue;
        }
        // The dissipator carries an extra delta_w; fold its square root into the scale.
        let scale = (2.0 * gamma_t * ri / (params.hbar * params.omega0)).sqrt() * dw * dw.sqrt();
        let mut base = CMatrix::zeros(dim, dim);
        let mut any = false;
        for &m in &params.grid {
            if ex.slots.contains_key(&(m - shift)) {
                let factors = [(m - shift, Ladder::Create), (m, Ladder::Annihilate)];
                any |= ex.accumulate(&mut base, &factors, Complex64::new(1.0, 0.0), jump_order);
            }
        }
        if any && !base.is_zero() {
            jumps.push(JumpOperator::new(
                format!("raman[{shift}]"),
                scale,
                Operator::new(space.clone(), base)?,
            ));
        }
    }

    LindbladSystem::new(Operator::new(space, h)?, jumps)
}
