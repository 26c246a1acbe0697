use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::system::{Generator, LindbladSystem, Workspace};
use crate::error::{Error, Result};
use crate::observables::ObservableRecord;
use crate::state::DensityMatrix;
use crate::tensor::{matrix_hermitian_eigenvalues, CMatrix};

/// Propagation aborts once `|Tr rho - 1|` exceeds this.
pub const TRACE_ABORT: f64 = 1e-6;
/// Propagation aborts once the smallest eigenvalue of `rho` drops below this.
pub const MIN_EIG_ABORT: f64 = -1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub step_km: f64,
    pub rehermitize: bool,
    pub monitor_every: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            step_km: 1e-3,
            rehermitize: false,
            monitor_every: 100,
        }
    }
}

impl IntegratorConfig {
    pub fn with_step(step_km: f64) -> Self {
        Self {
            step_km,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step_km.is_finite() && self.step_km > 0.0) {
            return Err(Error::InvalidParameter {
                name: "step_km".into(),
                value: self.step_km,
                reason: "step must be finite and positive",
            });
        }
        if self.monitor_every == 0 {
            return Err(Error::InvalidParameter {
                name: "monitor_every".into(),
                value: 0.0,
                reason: "must be a positive number of steps",
            });
        }
        Ok(())
    }
}

/// Scalar health diagnostics of a density matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantRecord {
    pub trace_err: f64,
    pub herm_err: f64,
    pub min_eig: f64,
}

pub fn monitor_invariants(rho: &DensityMatrix) -> InvariantRecord {
    matrix_invariants(rho.matrix())
}

fn matrix_invariants(m: &CMatrix) -> InvariantRecord {
    let mut sym = m.clone();
    sym.hermitize();
    // A non-finite state has no meaningful spectrum; report it as maximally broken.
    let min_eig = if sym.is_finite() {
        matrix_hermitian_eigenvalues(&sym)
            .ok()
            .and_then(|e| e.first().copied())
            .unwrap_or(f64::NEG_INFINITY)
    } else {
        f64::NEG_INFINITY
    };
    InvariantRecord {
        trace_err: (m.trace() - 1.0).norm(),
        herm_err: m.hermiticity_error(),
        min_eig,
    }
}

/// RK4 stepper holding the compiled generator and scratch buffers.
pub struct Integrator {
    generator: Generator,
    ws: Workspace,
    k: [CMatrix; 4],
    stage: CMatrix,
}

impl Integrator {
    pub fn new(system: &LindbladSystem) -> Self {
        let generator = Generator::new(system);
        let d = generator.dim;
        let z = || CMatrix::zeros(d, d);
        Self {
            ws: Workspace::new(d),
            k: [z(), z(), z(), z()],
            stage: z(),
            generator,
        }
    }

    /// Advances `rho` in place by one classical RK4 step of length `h`.
    pub fn step(&mut self, rho: &mut CMatrix, h: f64) {
        let g = &self.generator;
        rk4_stages(
            rho,
            h,
            [g, g, g],
            &mut self.ws,
            &mut self.k,
            &mut self.stage,
        );
    }
}

fn rk4_stages(
    rho: &mut CMatrix,
    h: f64,
    [start, mid, end]: [&Generator; 3],
    ws: &mut Workspace,
    k: &mut [CMatrix; 4],
    stage: &mut CMatrix,
) {
    let [k1, k2, k3, k4] = k;
    let half = Complex64::new(0.5 * h, 0.0);
    start.apply(rho, k1, ws);

    stage_from(stage, rho, half, k1);
    mid.apply(stage, k2, ws);

    stage_from(stage, rho, half, k2);
    mid.apply(stage, k3, ws);

    stage_from(stage, rho, Complex64::new(h, 0.0), k3);
    end.apply(stage, k4, ws);

    let w = h / 6.0;
    let out = rho.as_mut_slice();
    let (a, b, c, d) = (k1.as_slice(), k2.as_slice(), k3.as_slice(), k4.as_slice());
    for i in 0..out.len() {
        out[i] += (a[i] + (b[i] + c[i]) * 2.0 + d[i]) * w;
    }
}

/// RK4 for a generator that depends on position, rebuilt at the start, midpoint
/// and end of every step.
struct VaryingStepper<F> {
    build: F,
    cached: Option<(f64, Generator)>,
    ws: Workspace,
    k: [CMatrix; 4],
    stage: CMatrix,
}

impl<F: FnMut(f64) -> Result<LindbladSystem>> VaryingStepper<F> {
    fn generator_at(&mut self, z: f64) -> Result<Generator> {
        if let Some((cz, g)) = self.cached.take() {
            if cz == z {
                return Ok(g);
            }
        }
        Ok(Generator::new(&(self.build)(z)?))
    }

    fn step(&mut self, rho: &mut CMatrix, z: f64, h: f64) -> Result<()> {
        let start = self.generator_at(z)?;
        let mid = Generator::new(&(self.build)(z + 0.5 * h)?);
        let end = Generator::new(&(self.build)(z + h)?);
        rk4_stages(
            rho,
            h,
            [&start, &mid, &end],
            &mut self.ws,
            &mut self.k,
            &mut self.stage,
        );
        self.cached = Some((z + h, end));
        Ok(())
    }
}

fn stage_from(stage: &mut CMatrix, rho: &CMatrix, factor: Complex64, k: &CMatrix) {
    let dst = stage.as_mut_slice();
    let (r, k) = (rho.as_slice(), k.as_slice());
    for i in 0..dst.len() {
        dst[i] = r[i] + k[i] * factor;
    }
}

/// One RK4 step of the master equation, followed by an invariant check.
pub fn step_rk4(
    system: &LindbladSystem,
    rho: &DensityMatrix,
    h: f64,
    rehermitize: bool,
) -> Result<DensityMatrix> {
    if rho.space() != system.space() {
        return Err(Error::DimensionMismatch {
            context: "step_rk4",
            expected: system.space().total_dim(),
            found: rho.space().total_dim(),
        });
    }
    IntegratorConfig::with_step(h).validate()?;
    let mut m = rho.matrix().clone();
    Integrator::new(system).step(&mut m, h);
    if rehermitize {
        m.hermitize();
    }
    check_trace(&m, h)?;
    check_positivity(&m, h)?;
    Ok(DensityMatrix::from_matrix_unchecked(rho.space().clone(), m))
}

fn check_trace(m: &CMatrix, z_km: f64) -> Result<()> {
    let drift = (m.trace() - 1.0).norm();
    if drift.is_finite() && drift <= TRACE_ABORT {
        Ok(())
    } else {
        Err(Error::InvariantBreach {
            z_km,
            kind: "trace drift",
            value: drift,
        })
    }
}

fn check_positivity(m: &CMatrix, z_km: f64) -> Result<f64> {
    let min_eig = matrix_invariants(m).min_eig;
    if min_eig >= MIN_EIG_ABORT {
        Ok(min_eig)
    } else {
        Err(Error::InvariantBreach {
            z_km,
            kind: "negative eigenvalue",
            value: min_eig,
        })
    }
}

/// Sampled observables along the fiber.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub z_samples: Vec<f64>,
    pub records: Vec<ObservableRecord>,
}

/// Result of [`propagate`]: the sampled trajectory plus the state at the fiber output.
#[derive(Debug, Clone)]
pub struct Propagation {
    pub trajectory: Trajectory,
    pub final_state: DensityMatrix,
    pub steps_taken: usize,
    /// Worst diagnostics seen at any sample or monitor checkpoint.
    pub worst: InvariantRecord,
}

/// `count` evenly spaced points from 0 to `length_km` inclusive.
pub fn uniform_samples(length_km: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..count)
            .map(|i| length_km * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

/// Integrates `rho0` from `z = 0` to `length_km`, recording observables at `z = 0`
/// and at every requested sample point.
///
/// Within each interval between consecutive samples the step is shrunk just
/// enough to land exactly on the next sample.
pub fn propagate(
    system: &LindbladSystem,
    rho0: &DensityMatrix,
    length_km: f64,
    config: &IntegratorConfig,
    sample_points: &[f64],
) -> Result<Propagation> {
    check_space(system, rho0)?;
    let mut integrator = Integrator::new(system);
    drive(rho0, length_km, config, sample_points, |rho, _, h| {
        integrator.step(rho, h);
        Ok(())
    })
}

/// Like [`propagate`], for a master equation whose generator changes along the
/// fiber. `build(z)` must return systems on the space of `rho0`.
pub fn propagate_varying<F>(
    build: F,
    rho0: &DensityMatrix,
    length_km: f64,
    config: &IntegratorConfig,
    sample_points: &[f64],
) -> Result<Propagation>
where
    F: FnMut(f64) -> Result<LindbladSystem>,
{
    let mut stepper = VaryingStepper {
        build,
        cached: None,
        ws: Workspace::new(rho0.space().total_dim()),
        k: std::array::from_fn(|_| {
            CMatrix::zeros(rho0.space().total_dim(), rho0.space().total_dim())
        }),
        stage: CMatrix::zeros(rho0.space().total_dim(), rho0.space().total_dim()),
    };
    let first = (stepper.build)(0.0)?;
    check_space(&first, rho0)?;
    stepper.cached = Some((0.0, Generator::new(&first)));
    drive(rho0, length_km, config, sample_points, |rho, z, h| {
        stepper.step(rho, z, h)
    })
}

fn check_space(system: &LindbladSystem, rho0: &DensityMatrix) -> Result<()> {
    if rho0.space() != system.space() {
        return Err(Error::DimensionMismatch {
            context: "propagate",
            expected: system.space().total_dim(),
            found: rho0.space().total_dim(),
        });
    }
    Ok(())
}

fn drive<S>(
    rho0: &DensityMatrix,
    length_km: f64,
    config: &IntegratorConfig,
    sample_points: &[f64],
    mut step: S,
) -> Result<Propagation>
where
    S: FnMut(&mut CMatrix, f64, f64) -> Result<()>,
{
    config.validate()?;
    if !(length_km.is_finite() && length_km >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "length_km".into(),
            value: length_km,
            reason: "fiber length must be finite and non-negative",
        });
    }
    let targets = sample_targets(length_km, sample_points)?;

    let space = rho0.space().clone();
    let mut rho = rho0.matrix().clone();
    let first = ObservableRecord::from_state(rho0)?;
    let mut worst = first.invariants;
    let mut z_samples = vec![0.0];
    let mut records = vec![first];

    let mut z = 0.0;
    let mut steps = 0usize;
    let mut waypoints = targets.clone();
    if waypoints.last().is_none_or(|&last| last < length_km) {
        waypoints.push(length_km);
    }
    for &target in &waypoints {
        let span = target - z;
        if span <= 0.0 {
            continue;
        }
        let n = ((span / config.step_km) - 1e-9).ceil().max(1.0) as usize;
        let h = span / n as f64;
        for i in 1..=n {
            step(&mut rho, z + h * (i - 1) as f64, h)?;
            if config.rehermitize {
                rho.hermitize();
            }
            steps += 1;
            let zi = z + h * i as f64;
            check_trace(&rho, zi)?;
            if steps.is_multiple_of(config.monitor_every) {
                let min_eig = check_positivity(&rho, zi)?;
                worst.min_eig = worst.min_eig.min(min_eig);
            }
        }
        z = target;
        if targets.contains(&target) {
            let state = DensityMatrix::from_matrix_unchecked(space.clone(), rho.clone());
            let record = ObservableRecord::from_state(&state)?;
            if record.invariants.min_eig < MIN_EIG_ABORT {
                return Err(Error::InvariantBreach {
                    z_km: z,
                    kind: "negative eigenvalue",
                    value: record.invariants.min_eig,
                });
            }
            worst.trace_err = worst.trace_err.max(record.invariants.trace_err);
            worst.herm_err = worst.herm_err.max(record.invariants.herm_err);
            worst.min_eig = worst.min_eig.min(record.invariants.min_eig);
            z_samples.push(z);
            records.push(record);
        }
    }

    Ok(Propagation {
        trajectory: Trajectory { z_samples, records },
        final_state: DensityMatrix::from_matrix_unchecked(space, rho),
        steps_taken: steps,
        worst,
    })
}

/// Positive, strictly increasing sample points within `(0, length_km]`.
pub(crate) fn sample_targets(length_km: f64, sample_points: &[f64]) -> Result<Vec<f64>> {
    let tol = 1e-12 * length_km.max(1.0);
    let mut out: Vec<f64> = Vec::with_capacity(sample_points.len());
    for &p in sample_points {
        if !p.is_finite() || p < -tol || p > length_km + tol {
            return Err(Error::InvalidParameter {
                name: "sample point".into(),
                value: p,
                reason: "sample points must lie within [0, length]",
            });
        }
        if p <= tol {
            continue;
        }
        let p = p.min(length_km);
        if let Some(&last) = out.last() {
            if p <= last {
                return Err(Error::InvalidParameter {
                    name: "sample point".into(),
                    value: p,
                    reason: "sample points must be strictly increasing",
                });
            }
        }
        out.push(p);
    }
    Ok(out)
}
