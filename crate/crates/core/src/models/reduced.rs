use serde::{Deserialize, Serialize};

use crate::error::{non_negative, Result};
use crate::lindblad::{JumpOperator, LindbladSystem};
use crate::tensor::{
    ladder_product, mode_annihilation, mode_number, CompositeSpace, Ladder, Operator,
};

use super::PhaseMatchReport;

const SIGNAL: usize = 0;
const IDLER: usize = 1;

/// Degenerate spontaneous four-wave mixing: one classical pump creating
/// signal/idler pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpfwmParams {
    /// Nonlinear coefficient, W^-1 km^-1.
    pub gamma: f64,
    /// Pump power, W.
    pub pump_power: f64,
    /// Signal and idler attenuation, km^-1.
    pub alpha_s: f64,
    pub alpha_i: f64,
    /// Real and imaginary Raman response at the signal-pump detuning.
    pub rr_detuning: f64,
    pub ri_detuning: f64,
    /// Propagation constants, km^-1.
    pub beta_p: f64,
    pub beta_s: f64,
    pub beta_i: f64,
    pub length_km: f64,
    pub n_max: usize,
}

impl SpfwmParams {
    /// Loss and Raman values used for the lossy heralding scenario.
    pub fn lossy() -> Self {
        Self {
            gamma: 1.0,
            pump_power: 1.0,
            alpha_s: 0.01,
            alpha_i: 0.01,
            rr_detuning: 1.0,
            ri_detuning: 0.1,
            beta_p: 0.0,
            beta_s: 0.0,
            beta_i: 0.0,
            length_km: 5.0,
            n_max: 6,
        }
    }

    /// No loss, no Raman scattering.
    pub fn ideal() -> Self {
        Self {
            alpha_s: 0.0,
            alpha_i: 0.0,
            ri_detuning: 0.0,
            ..Self::lossy()
        }
    }

    /// Pair-generation coupling `gamma P R^R`, km^-1.
    pub fn coupling(&self) -> f64 {
        self.gamma * self.pump_power * self.rr_detuning
    }

    pub fn k_pump(&self) -> f64 {
        self.beta_p + self.gamma * self.pump_power
    }

    pub fn k_signal(&self) -> f64 {
        self.beta_s + self.gamma * self.pump_power * (1.0 + self.rr_detuning)
    }

    pub fn k_idler(&self) -> f64 {
        self.beta_i + self.gamma * self.pump_power * (1.0 + self.rr_detuning)
    }

    /// Chooses the propagation constants so that `k_s = k_i = k_p = 0`.
    pub fn with_zero_wavenumbers(mut self) -> Self {
        let gp = self.gamma * self.pump_power;
        self.beta_p = -gp;
        self.beta_s = -gp * (1.0 + self.rr_detuning);
        self.beta_i = self.beta_s;
        self
    }

    pub fn validate(&self) -> Result<()> {
        non_negative("gamma", self.gamma)?;
        non_negative("pump_power", self.pump_power)?;
        non_negative("alpha_s", self.alpha_s)?;
        non_negative("alpha_i", self.alpha_i)?;
        non_negative("ri_detuning", self.ri_detuning)?;
        non_negative("length_km", self.length_km)?;
        for (name, v) in [
            ("rr_detuning", self.rr_detuning),
            ("beta_p", self.beta_p),
            ("beta_s", self.beta_s),
            ("beta_i", self.beta_i),
        ] {
            crate::error::finite(name, v)?;
        }
        Ok(())
    }

    /// `2 k_p - k_s - k_i`
    pub fn phase_match(&self) -> PhaseMatchReport {
        let (kp, ks, ki) = (self.k_pump(), self.k_signal(), self.k_idler());
        PhaseMatchReport::new(
            vec![("p".into(), kp), ("s".into(), ks), ("i".into(), ki)],
            2.0 * kp - ks - ki,
            self.n_max,
        )
    }

    pub fn space(&self) -> CompositeSpace {
        CompositeSpace::uniform(2, self.n_max)
    }
}

/// Bragg-scattering frequency translation between signal and idler, driven by
/// two classical pumps of equal power.
///
/// Detuning labels: `pump_spacing` is the pump-pump separation (equal to the
/// signal-idler separation), `pair_offset` is the separation between the pump
/// pair and the signal/idler pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BsParams {
    pub gamma: f64,
    /// Power of each pump, W.
    pub pump_power: f64,
    pub alpha_s: f64,
    pub alpha_i: f64,
    pub rr_pump_spacing: f64,
    pub rr_pair_offset: f64,
    pub rr_offset_minus_spacing: f64,
    pub rr_offset_plus_spacing: f64,
    pub ri_pair_offset: f64,
    pub ri_offset_minus_spacing: f64,
    pub ri_offset_plus_spacing: f64,
    pub beta_s: f64,
    pub beta_i: f64,
    pub beta_p1: f64,
    pub beta_p2: f64,
    pub length_km: f64,
    pub n_max: usize,
}

impl BsParams {
    /// Loss and Raman values used for the lossy translation scenario.
    pub fn lossy() -> Self {
        Self {
            gamma: 1.0,
            pump_power: 1.0,
            alpha_s: 0.01,
            alpha_i: 0.01,
            rr_pump_spacing: 1.0,
            rr_pair_offset: 1.0,
            rr_offset_minus_spacing: 1.0,
            rr_offset_plus_spacing: 1.0,
            ri_pair_offset: 0.1,
            ri_offset_minus_spacing: 0.1,
            ri_offset_plus_spacing: 0.1,
            beta_s: 0.0,
            beta_i: 0.0,
            beta_p1: 0.0,
            beta_p2: 0.0,
            length_km: 5.0,
            n_max: 1,
        }
    }

    pub fn ideal() -> Self {
        Self {
            alpha_s: 0.0,
            alpha_i: 0.0,
            ri_pair_offset: 0.0,
            ri_offset_minus_spacing: 0.0,
            ri_offset_plus_spacing: 0.0,
            ..Self::lossy()
        }
    }

    /// Signal-idler exchange coupling `gamma P (R^R_spacing + R^R_offset)`, km^-1.
    pub fn coupling(&self) -> f64 {
        self.gamma * self.pump_power * (self.rr_pump_spacing + self.rr_pair_offset)
    }

    pub fn k_signal(&self) -> f64 {
        self.beta_s
            + 2.0
                * self.gamma
                * self.pump_power
                * (self.rr_pair_offset + self.rr_offset_minus_spacing)
    }

    pub fn k_idler(&self) -> f64 {
        self.beta_i
            + 2.0
                * self.gamma
                * self.pump_power
                * (self.rr_pair_offset + self.rr_offset_plus_spacing)
    }

    pub fn k_pump1(&self) -> f64 {
        self.beta_p1 + self.gamma * self.pump_power * (2.0 + self.rr_pump_spacing)
    }

    pub fn k_pump2(&self) -> f64 {
        self.beta_p2 + self.gamma * self.pump_power * (2.0 + self.rr_pump_spacing)
    }

    /// Chooses `beta_s`, `beta_i` so that `k_s = k_i = 0`; pumps get equal `beta`.
    pub fn with_zero_wavenumbers(mut self) -> Self {
        let gp2 = 2.0 * self.gamma * self.pump_power;
        self.beta_s = -gp2 * (self.rr_pair_offset + self.rr_offset_minus_spacing);
        self.beta_i = -gp2 * (self.rr_pair_offset + self.rr_offset_plus_spacing);
        self.beta_p2 = self.beta_p1;
        self
    }

    pub fn validate(&self) -> Result<()> {
        non_negative("gamma", self.gamma)?;
        non_negative("pump_power", self.pump_power)?;
        non_negative("alpha_s", self.alpha_s)?;
        non_negative("alpha_i", self.alpha_i)?;
        non_negative("ri_pair_offset", self.ri_pair_offset)?;
        non_negative("ri_offset_minus_spacing", self.ri_offset_minus_spacing)?;
        non_negative("ri_offset_plus_spacing", self.ri_offset_plus_spacing)?;
        non_negative("length_km", self.length_km)?;
        for (name, v) in [
            ("rr_pump_spacing", self.rr_pump_spacing),
            ("rr_pair_offset", self.rr_pair_offset),
            ("rr_offset_minus_spacing", self.rr_offset_minus_spacing),
            ("rr_offset_plus_spacing", self.rr_offset_plus_spacing),
            ("beta_s", self.beta_s),
            ("beta_i", self.beta_i),
            ("beta_p1", self.beta_p1),
            ("beta_p2", self.beta_p2),
        ] {
            crate::error::finite(name, v)?;
        }
        Ok(())
    }

    /// `k_p1 - k_p2 + k_i - k_s`
    pub fn phase_match(&self) -> PhaseMatchReport {
        let (p1, p2, s, i) = (
            self.k_pump1(),
            self.k_pump2(),
            self.k_signal(),
            self.k_idler(),
        );
        PhaseMatchReport::new(
            vec![
                ("p1".into(), p1),
                ("p2".into(), p2),
                ("s".into(), s),
                ("i".into(), i),
            ],
            p1 - p2 + i - s,
            self.n_max,
        )
    }

    pub fn space(&self) -> CompositeSpace {
        CompositeSpace::uniform(2, self.n_max)
    }
}

fn diagonal_part(space: &CompositeSpace, k_s: f64, k_i: f64) -> Result<Operator> {
    mode_number(space, SIGNAL)?
        .scale_real(k_s)
        .add(&mode_number(space, IDLER)?.scale_real(k_i))
}

/// Two-mode (signal, idler) pair-generation system.
pub fn build_spfwm(params: &SpfwmParams) -> Result<LindbladSystem> {
    params.validate()?;
    let space = params.space();
    let pair_up = ladder_product(&space, &[(SIGNAL, Ladder::Create), (IDLER, Ladder::Create)]);
    let pair_down = pair_up.dagger();
    let h = diagonal_part(&space, params.k_signal(), params.k_idler())?
        .add(&pair_up.add(&pair_down)?.scale_real(params.coupling()))?;

    let b_s = mode_annihilation(&space, SIGNAL)?;
    let b_i = mode_annihilation(&space, IDLER)?;
    let mut jumps = vec![
        JumpOperator::new("loss_s", params.alpha_s.sqrt(), b_s.clone()),
        JumpOperator::new("loss_i", params.alpha_i.sqrt(), b_i.clone()),
    ];
    let rate = 2.0 * params.gamma * params.pump_power * params.ri_detuning;
    if rate > 0.0 {
        jumps.push(JumpOperator::new(
            "raman",
            rate.sqrt(),
            b_s.add(&b_i.dagger())?,
        ));
    }
    LindbladSystem::new(h, jumps)
}

/// Two-mode (signal, idler) frequency-translation system.
pub fn build_bragg(params: &BsParams) -> Result<LindbladSystem> {
    params.validate()?;
    let space = params.space();
    let hop = ladder_product(
        &space,
        &[(SIGNAL, Ladder::Create), (IDLER, Ladder::Annihilate)],
    );
    let h = diagonal_part(&space, params.k_signal(), params.k_idler())?
        .add(&hop.add(&hop.dagger())?.scale_real(params.coupling()))?;

    let b_s = mode_annihilation(&space, SIGNAL)?;
    let b_i = mode_annihilation(&space, IDLER)?;
    let gp2 = 2.0 * params.gamma * params.pump_power;
    let mut jumps = vec![
        JumpOperator::new("loss_s", params.alpha_s.sqrt(), b_s.clone()),
        JumpOperator::new("loss_i", params.alpha_i.sqrt(), b_i.clone()),
    ];
    if gp2 * params.ri_offset_minus_spacing > 0.0 {
        let scale = (gp2 * params.ri_offset_minus_spacing).sqrt();
        jumps.push(JumpOperator::new("raman_s", scale, b_s.clone()));
    }
    if gp2 * params.ri_offset_plus_spacing > 0.0 {
        let scale = (gp2 * params.ri_offset_plus_spacing).sqrt();
        jumps.push(JumpOperator::new("raman_i", scale, b_i.clone()));
    }
    if gp2 * params.ri_pair_offset > 0.0 {
        let scale = (gp2 * params.ri_pair_offset).sqrt();
        jumps.push(JumpOperator::new("raman_si", scale, b_s.add(&b_i)?));
    }
    LindbladSystem::new(h, jumps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{CMatrix, ModeSpace};
    use num_complex::Complex64;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn jump<'a>(sys: &'a LindbladSystem, label: &str) -> Option<&'a JumpOperator> {
        sys.jumps().iter().find(|j| j.label == label)
    }

    fn comm_is_zero(a: &Operator, b: &Operator) -> bool {
        a.commutator(b).unwrap().matrix().max_abs() < 1e-13
    }

    #[test]
    fn spfwm_coupling_and_raman_scale() {
        let p = SpfwmParams::lossy();
        let sys = build_spfwm(&p).unwrap();
        assert_eq!(p.coupling(), 1.0);
        let l3 = jump(&sys, "raman").unwrap();
        assert!((l3.scale - 0.2f64.sqrt()).abs() < 1e-15);
        let space = p.space();
        let up = ladder_product(&space, &[(0, Ladder::Create), (1, Ladder::Create)]);
        // <1,1|H|0,0> is the pair coupling.
        let h = sys.hamiltonian().matrix();
        let (r, c0) = (
            space.index_of(&[1, 1]).unwrap(),
            space.index_of(&[0, 0]).unwrap(),
        );
        assert!((h[(r, c0)].re - 1.0).abs() < 1e-15);
        assert!(h.hermiticity_error() <= 1e-14);
        assert!(up.matrix()[(r, c0)].re == 1.0);
    }

    #[test]
    fn spfwm_without_nonlinearity_is_dispersion_only() {
        let p = SpfwmParams {
            gamma: 0.0,
            beta_s: 0.3,
            beta_i: -0.2,
            ..SpfwmParams::lossy()
        };
        let sys = build_spfwm(&p).unwrap();
        let expected = diagonal_part(&p.space(), 0.3, -0.2).unwrap();
        assert!(sys.hamiltonian().max_abs_diff(&expected) == 0.0);
        assert_eq!(sys.jumps().len(), 2);
        assert!(sys.jumps().iter().all(|j| !j.is_zero()));
    }

    #[test]
    fn negative_rates_are_rejected() {
        let mut p = SpfwmParams::lossy();
        p.alpha_s = -0.1;
        assert!(build_spfwm(&p).is_err());
        let mut b = BsParams::lossy();
        b.ri_pair_offset = -0.1;
        assert!(build_bragg(&b).is_err());
        b = BsParams::lossy();
        b.gamma = f64::NAN;
        assert!(build_bragg(&b).is_err());
    }

    #[test]
    fn bragg_with_lossy_parameters() {
        let p = BsParams::lossy();
        assert_eq!(p.coupling(), 2.0);
        let sys = build_bragg(&p).unwrap();
        for label in ["raman_s", "raman_i", "raman_si"] {
            assert!((jump(&sys, label).unwrap().scale - 0.2f64.sqrt()).abs() < 1e-15);
        }
        for label in ["loss_s", "loss_i"] {
            assert!((jump(&sys, label).unwrap().scale - 0.1).abs() < 1e-15);
        }
        assert!(sys.jumps().iter().all(|j| j.scale >= 0.0));
    }

    #[test]
    fn ideal_bragg_has_only_zero_loss_jumps() {
        let sys = build_bragg(&BsParams::ideal()).unwrap();
        assert_eq!(sys.jumps().len(), 2);
        assert!(sys.jumps().iter().all(JumpOperator::is_zero));
    }

    #[test]
    fn bragg_hamiltonian_on_single_photon() {
        let p = BsParams {
            beta_s: 0.7,
            ..BsParams::lossy()
        };
        let sys = build_bragg(&p).unwrap();
        let space = p.space();
        let h = sys.hamiltonian().matrix();
        let col = space.index_of(&[1, 0]).unwrap();
        let mut ket = CMatrix::zeros(space.total_dim(), 1);
        ket[(col, 0)] = c(1.0);
        let out = h * &ket;
        let mut expected = CMatrix::zeros(space.total_dim(), 1);
        expected[(col, 0)] = c(p.k_signal());
        expected[(space.index_of(&[0, 1]).unwrap(), 0)] = c(p.coupling());
        assert!(out.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn conservation_laws() {
        let bs = BsParams {
            n_max: 3,
            ..BsParams::ideal()
        };
        let sys = build_bragg(&bs).unwrap();
        let space = bs.space();
        let ns = mode_number(&space, 0).unwrap();
        let ni = mode_number(&space, 1).unwrap();
        assert!(comm_is_zero(sys.hamiltonian(), &ns.add(&ni).unwrap()));

        let sp = SpfwmParams {
            n_max: 4,
            ..SpfwmParams::lossy()
        };
        let sys = build_spfwm(&sp).unwrap();
        let space = sp.space();
        let diff = mode_number(&space, 0)
            .unwrap()
            .sub(&mode_number(&space, 1).unwrap())
            .unwrap();
        assert!(comm_is_zero(sys.hamiltonian(), &diff));
        let l3 = jump(&sys, "raman").unwrap().operator();
        let l3dl3 = l3.dagger().matmul(&l3).unwrap();
        assert!(comm_is_zero(&l3dl3, &diff));
    }

    #[test]
    fn phase_matching_arithmetic() {
        let p = SpfwmParams::ideal();
        let r = p.phase_match();
        assert_eq!(r.wavenumber("p"), Some(1.0));
        assert_eq!(r.wavenumber("s"), Some(2.0));
        assert_eq!(r.wavenumber("i"), Some(2.0));
        assert_eq!(r.mismatch, -2.0);
        assert!(!r.matched);

        for offset in [-3.0, 0.0, 0.25, 17.0] {
            let mut q = SpfwmParams::ideal().with_zero_wavenumbers();
            q.beta_p += offset;
            q.beta_s += offset;
            q.beta_i += offset;
            let r = q.phase_match();
            assert!(r.matched, "offset {offset}: mismatch {}", r.mismatch);
        }

        let b = BsParams {
            beta_s: 0.4,
            beta_i: 0.4,
            beta_p1: 0.9,
            beta_p2: 0.9,
            ..BsParams::lossy()
        };
        let r = b.phase_match();
        assert!(r.matched);
        assert_eq!(r.wavenumber("s"), r.wavenumber("i"));
    }

    #[test]
    fn frozen_modes_are_flagged() {
        let p = SpfwmParams {
            n_max: 0,
            ..SpfwmParams::ideal()
        };
        assert!(!p.phase_match().warnings.is_empty());
        let sys = build_spfwm(&p).unwrap();
        assert_eq!(sys.space().modes(), &[ModeSpace::new(0); 2]);
    }
}
