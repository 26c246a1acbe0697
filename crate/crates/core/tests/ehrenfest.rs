use fiberq::lindblad::{propagate, uniform_samples, IntegratorConfig};
use fiberq::models::{build_bragg, build_spfwm, BsParams, SpfwmParams};
use fiberq::observables::mode_field_mean;
use fiberq::semiclassical::{reduced_mean_field, ReducedModel};
use fiberq::state::DensityMatrix;
use num_complex::Complex64;

const AMP: f64 = 0.1;

fn max_moment_gap(
    sys: &fiberq::lindblad::LindbladSystem,
    model: ReducedModel<'_>,
    conj_idler: bool,
    n_max: usize,
    length: f64,
) -> f64 {
    let space = sys.space().clone();
    assert_eq!(space.modes()[0].n_max, n_max);
    let a = Complex64::new(AMP, 0.0);
    let rho0 = DensityMatrix::coherent(space, &[a, a]).unwrap();
    let pts = uniform_samples(length, 51);
    let run = propagate(sys, &rho0, length, &IntegratorConfig::default(), &pts).unwrap();
    let m0_s = mode_field_mean(&rho0, 0);
    let m0_i = mode_field_mean(&rho0, 1);
    let m0_i = if conj_idler { m0_i.conj() } else { m0_i };
    let ode = reduced_mean_field(model, [m0_s, m0_i], length, 1e-3, &pts).unwrap();
    let mut worst: f64 = 0.0;
    for (k, rec) in run.trajectory.records.iter().enumerate() {
        let (s, i) = (rec.mean_fields[0], rec.mean_fields[1]);
        let i = if conj_idler { i.conj() } else { i };
        worst = worst
            .max((s - ode.signal[k]).norm())
            .max((i - ode.idler[k]).norm());
    }
    worst
}

#[test]
fn spfwm_first_moments_follow_the_moment_equations() {
    // Spontaneous Raman noise fills the idler at 0.2 photons/km, so the Fock
    // cutoff has to sit well above the mean occupation for the moments to close.
    let p = SpfwmParams {
        n_max: 10,
        ..SpfwmParams::lossy()
    };
    let sys = build_spfwm(&p).unwrap();
    let gap = max_moment_gap(&sys, ReducedModel::Spfwm(&p), true, 10, 2.0);
    assert!(gap <= 1e-4, "gap {gap:e}");
}

#[test]
fn truncation_is_what_breaks_moment_closure() {
    let coarse = SpfwmParams {
        n_max: 4,
        ..SpfwmParams::lossy()
    };
    let fine = SpfwmParams {
        n_max: 8,
        ..coarse.clone()
    };
    let gap = |p: &SpfwmParams| {
        max_moment_gap(
            &build_spfwm(p).unwrap(),
            ReducedModel::Spfwm(p),
            true,
            p.n_max,
            1.0,
        )
    };
    assert!(gap(&fine) < 0.2 * gap(&coarse));
}

#[test]
fn bragg_first_moments_follow_the_moment_equations() {
    let p = BsParams {
        n_max: 6,
        ..BsParams::lossy()
    };
    let sys = build_bragg(&p).unwrap();
    let gap = max_moment_gap(&sys, ReducedModel::Bragg(&p), false, 6, p.length_km);
    assert!(gap <= 1e-4, "gap {gap:e}");
}
