use num_complex::Complex64;

use crate::error::{ensure_dim, Result};
use crate::lindblad::{JumpOperator, LindbladSystem};
use crate::tensor::{CompositeSpace, Operator};

/// `sum_x k_x n_x` evaluated on each basis state.
fn diagonal_phases(space: &CompositeSpace, shifts: &[f64]) -> Vec<f64> {
    (0..space.total_dim())
        .map(|idx| {
            space
                .occupation(idx)
                .iter()
                .zip(shifts)
                .map(|(&n, k)| n as f64 * k)
                .sum()
        })
        .collect()
}

/// Moves to the frame `b_x = exp(-i k_x z) a_x`: subtracts `sum_x k_x n_x` from the
/// Hamiltonian and strips the global phase from every jump operator so that its
/// first non-negligible entry (row-major) is real and positive.
pub fn rotating_frame(system: &LindbladSystem, shifts: &[f64]) -> Result<LindbladSystem> {
    let space = system.space();
    ensure_dim("rotating_frame shifts", space.n_modes(), shifts.len())?;
    let mut h = system.hamiltonian().matrix().clone();
    for (idx, phase) in diagonal_phases(space, shifts).into_iter().enumerate() {
        h[(idx, idx)] -= phase;
    }
    let jumps = system
        .jumps()
        .iter()
        .map(|j| JumpOperator::new(j.label.clone(), j.scale, rephase(&j.base)))
        .collect();
    LindbladSystem::new(Operator::new(space.clone(), h)?, jumps)
}

fn rephase(op: &Operator) -> Operator {
    let m = op.matrix();
    let floor = 1e-12 * m.max_abs();
    match m.as_slice().iter().find(|z| z.norm() > floor) {
        Some(lead) if lead.im != 0.0 || lead.re < 0.0 => {
            op.scale(Complex64::from_polar(1.0, -lead.arg()))
        }
        _ => op.clone(),
    }
}

/// `D^dag X D` with `D = diag(exp(i z sum_x k_x n_x))`: expresses an operator
/// written in terms of `a_x` through the frame operators `b_x` at position `z`.
pub fn frame_conjugate(op: &Operator, shifts: &[f64], z_km: f64) -> Result<Operator> {
    let space = op.space();
    ensure_dim("frame_conjugate shifts", space.n_modes(), shifts.len())?;
    let phases: Vec<Complex64> = diagonal_phases(space, shifts)
        .into_iter()
        .map(|p| Complex64::from_polar(1.0, p * z_km))
        .collect();
    let mut m = op.matrix().clone();
    let d = m.rows();
    for r in 0..d {
        for c in 0..d {
            m[(r, c)] *= phases[r].conj() * phases[c];
        }
    }
    Operator::new(space.clone(), m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_bragg, build_spfwm, BsParams, SpfwmParams};
    use crate::tensor::{hermitian_eigenvalues, ladder_product, Ladder};

    #[test]
    fn zero_shift_is_identity() {
        let sys = build_bragg(&BsParams::lossy()).unwrap();
        let same = rotating_frame(&sys, &[0.0, 0.0]).unwrap();
        assert_eq!(same, sys);
    }

    #[test]
    fn shift_leaves_only_pair_term() {
        let p = SpfwmParams {
            beta_s: 0.4,
            beta_i: -1.1,
            beta_p: 0.0,
            n_max: 3,
            ..SpfwmParams::lossy()
        };
        let sys = build_spfwm(&p).unwrap();
        let framed = rotating_frame(&sys, &[p.k_signal(), p.k_idler()]).unwrap();
        let space = p.space();
        let up = ladder_product(&space, &[(0, Ladder::Create), (1, Ladder::Create)]);
        let expected = up.add(&up.dagger()).unwrap().scale_real(p.coupling());
        assert!(framed.hamiltonian().max_abs_diff(&expected) < 1e-14);
        assert_eq!(framed.jumps(), sys.jumps());
    }

    #[test]
    fn jumps_are_rephased_to_positive_lead() {
        let sys = build_spfwm(&SpfwmParams::lossy()).unwrap();
        let rotated: Vec<JumpOperator> = sys
            .jumps()
            .iter()
            .map(|j| {
                JumpOperator::new(
                    j.label.clone(),
                    j.scale,
                    j.base.scale(Complex64::from_polar(1.0, 0.7)),
                )
            })
            .collect();
        let twisted = LindbladSystem::new(sys.hamiltonian().clone(), rotated).unwrap();
        let back = rotating_frame(&twisted, &[0.0, 0.0]).unwrap();
        for (a, b) in back.jumps().iter().zip(sys.jumps()) {
            assert!(a.base.max_abs_diff(&b.base) < 1e-15);
        }
    }

    #[test]
    fn conjugation_preserves_spectrum() {
        let sys = build_bragg(&BsParams {
            n_max: 2,
            beta_s: 0.3,
            ..BsParams::lossy()
        })
        .unwrap();
        let h = sys.hamiltonian();
        let conj = frame_conjugate(h, &[1.7, -0.4], 2.3).unwrap();
        let (e0, e1) = (
            hermitian_eigenvalues(h).unwrap(),
            hermitian_eigenvalues(&conj).unwrap(),
        );
        for (a, b) in e0.iter().zip(&e1) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(conj.max_abs_diff(h) > 0.1);
        assert!(frame_conjugate(h, &[1.0], 0.0).is_err());
    }
}
