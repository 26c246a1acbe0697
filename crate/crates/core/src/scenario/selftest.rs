use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::lindblad::{lindblad_rhs, propagate, uniform_samples, IntegratorConfig};
use crate::models::{build_bragg, build_spfwm, BsParams, MultimodeParams, SpfwmParams};
use crate::observables::{heralding_metrics, joint_number_distribution};
use crate::semiclassical::{integrate_mean_field, pump_depletion, MeanFieldConfig, SpectralField};
use crate::state::DensityMatrix;
use crate::tensor::CMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, outcome: Result<(bool, String)>) -> CheckResult {
    match outcome {
        Ok((passed, detail)) => CheckResult {
            name,
            passed,
            detail,
        },
        Err(e) => CheckResult {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

/// Fast invariant suite behind the `validate` subcommand.
pub fn self_test() -> Vec<CheckResult> {
    vec![
        check(
            "master equation rhs is trace-free and Hermitian",
            rhs_structure(),
        ),
        check("ideal Bragg scattering follows sin^2(gz)", bragg_transfer()),
        check(
            "lossy Bragg run keeps trace, Hermiticity and positivity",
            lossy_invariants(),
        ),
        check(
            "ideal pair generation stays number-correlated",
            squeezing_correlation(),
        ),
        check("Raman-free mean field conserves power", mean_field_power()),
        check(
            "pump power is constant without Raman loss",
            depletion_free(),
        ),
    ]
}

fn rhs_structure() -> Result<(bool, String)> {
    let p = SpfwmParams {
        n_max: 3,
        ..SpfwmParams::lossy()
    };
    let sys = build_spfwm(&p)?;
    let space = p.space();
    let d = space.total_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let a = CMatrix::from_fn(d, d, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let m = &a * &a.dagger();
        let m = m.scale(m.trace().inv());
        let rho = DensityMatrix::from_matrix(space.clone(), m)?;
        let rhs = lindblad_rhs(&sys, &rho)?;
        worst = worst.max(rhs.trace().norm()).max(rhs.hermiticity_error());
    }
    Ok((
        worst < 1e-12,
        format!("max |Tr|, |X - X^dag| = {worst:.2e}"),
    ))
}

fn bragg_transfer() -> Result<(bool, String)> {
    let p = BsParams::ideal().with_zero_wavenumbers();
    let sys = build_bragg(&p)?;
    let rho0 = DensityMatrix::fock(p.space(), &[1, 0])?;
    let pts = uniform_samples(p.length_km, 51);
    let run = propagate(&sys, &rho0, p.length_km, &IntegratorConfig::default(), &pts)?;
    let err = run
        .trajectory
        .z_samples
        .iter()
        .zip(&run.trajectory.records)
        .map(|(z, r)| (r.mean_numbers[1] - (p.coupling() * z).sin().powi(2)).abs())
        .fold(0.0, f64::max);
    Ok((err <= 1e-6, format!("max error {err:.2e}")))
}

fn lossy_invariants() -> Result<(bool, String)> {
    let p = BsParams {
        n_max: 2,
        ..BsParams::lossy()
    };
    let sys = build_bragg(&p)?;
    let rho0 = DensityMatrix::fock(p.space(), &[1, 0])?;
    let pts = uniform_samples(p.length_km, 11);
    let run = propagate(&sys, &rho0, p.length_km, &IntegratorConfig::default(), &pts)?;
    let w = run.worst;
    let ok = w.trace_err <= 1e-9 && w.herm_err <= 1e-10 && w.min_eig >= -1e-8;
    Ok((
        ok,
        format!(
            "trace {:.2e}, hermiticity {:.2e}, min eigenvalue {:.2e}",
            w.trace_err, w.herm_err, w.min_eig
        ),
    ))
}

fn squeezing_correlation() -> Result<(bool, String)> {
    let p = SpfwmParams {
        n_max: 8,
        length_km: 0.5,
        ..SpfwmParams::ideal().with_zero_wavenumbers()
    };
    let sys = build_spfwm(&p)?;
    let run = propagate(
        &sys,
        &DensityMatrix::vacuum(p.space()),
        p.length_km,
        &IntegratorConfig::default(),
        &[],
    )?;
    let metrics = heralding_metrics(&joint_number_distribution(&run.final_state)?);
    let n_s = crate::observables::mode_number_mean(&run.final_state, 0);
    let err = (n_s - 0.5f64.sinh().powi(2)).abs();
    Ok((
        metrics.p_mismatch <= 1e-10 && err <= 1e-4,
        format!(
            "p_mismatch {:.2e}, <n_s> error {err:.2e}",
            metrics.p_mismatch
        ),
    ))
}

fn mean_field_power() -> Result<(bool, String)> {
    let params =
        MultimodeParams::on_grid(vec![-2, -1, 0, 1, 2], 2.0 * std::f64::consts::PI * 1e11, 1);
    let cfg = MeanFieldConfig {
        step_km: 1e-3,
        include_self_steepening: false,
        include_sprs_loss: false,
    };
    let initial = SpectralField::from_powers(&[0.1, 0.3, 1.0, 0.2, 0.05], params.delta_w)?;
    let traj = integrate_mean_field(&params, &initial, 1.0, &cfg, &[1.0])?;
    let (a, b) = (
        traj.fields[0].total_intensity(),
        traj.fields[1].total_intensity(),
    );
    let rel = (b - a).abs() / a;
    Ok((rel <= 1e-8, format!("relative drift {rel:.2e}")))
}

fn depletion_free() -> Result<(bool, String)> {
    let params = MultimodeParams::on_grid(vec![0], 1e12, 1);
    let p = pump_depletion(1.0, 10.0, &params)?;
    Ok((p == 1.0, format!("P(10 km) = {p}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_self_check_passes() {
        for r in self_test() {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
    }
}
