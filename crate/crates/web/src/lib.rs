//! Browser bindings for the static demo page in `www/`.
//!
//! Every export returns a flat `Float64Array`; the layout is documented on
//! each function and mirrored in `www/app.js`.

use num_complex::Complex64;
use wasm_bindgen::prelude::*;

use fiberq::lindblad::{propagate, uniform_samples, IntegratorConfig};
use fiberq::models::{build_bragg, build_spfwm, BsParams, SpfwmParams};
use fiberq::observables::{heralding_metrics, joint_number_distribution};
use fiberq::semiclassical::{reduced_mean_field, ReducedModel};
use fiberq::state::DensityMatrix;

/// Larger cutoffs make the in-browser run sluggish.
pub const MAX_DEMO_NMAX: usize = 8;
const STEP_KM: f64 = 1e-3;

/// Shared knobs of the reduced models, in fiber units (W, km).
#[derive(Debug, Clone, Copy)]
pub struct FiberKnobs {
    pub gamma: f64,
    pub pump_power: f64,
    pub alpha: f64,
    pub raman_imag: f64,
    pub length_km: f64,
}

impl FiberKnobs {
    fn bragg(&self, n_max: usize) -> BsParams {
        BsParams {
            gamma: self.gamma,
            pump_power: self.pump_power,
            alpha_s: self.alpha,
            alpha_i: self.alpha,
            ri_pair_offset: self.raman_imag,
            ri_offset_minus_spacing: self.raman_imag,
            ri_offset_plus_spacing: self.raman_imag,
            length_km: self.length_km,
            n_max,
            ..BsParams::ideal()
        }
        .with_zero_wavenumbers()
    }

    fn spfwm(&self, n_max: usize) -> SpfwmParams {
        SpfwmParams {
            gamma: self.gamma,
            pump_power: self.pump_power,
            alpha_s: self.alpha,
            alpha_i: self.alpha,
            ri_detuning: self.raman_imag,
            length_km: self.length_km,
            n_max,
            ..SpfwmParams::ideal()
        }
    }
}

fn check_cutoff(n_max: usize) -> fiberq::Result<()> {
    if (1..=MAX_DEMO_NMAX).contains(&n_max) {
        Ok(())
    } else {
        Err(fiberq::Error::InvalidParameter {
            name: "n_max".into(),
            value: n_max as f64,
            reason: "demo cutoff must be between 1 and 8",
        })
    }
}

/// Single photon through phase-matched Bragg scattering.
/// Layout: `[z; n] ++ [P(1,0); n] ++ [P(0,1); n] ++ [P(0,0); n]`.
pub fn bragg_curves(knobs: FiberKnobs, samples: usize) -> fiberq::Result<Vec<f64>> {
    let p = knobs.bragg(1);
    let sys = build_bragg(&p)?;
    let rho0 = DensityMatrix::fock(p.space(), &[1, 0])?;
    let pts = uniform_samples(p.length_km, samples.max(2));
    let run = propagate(&sys, &rho0, p.length_km, &IntegratorConfig::default(), &pts)?;
    let tables: Vec<_> = run
        .trajectory
        .records
        .iter()
        .map(|r| r.joint.clone().expect("two modes"))
        .collect();
    let mut out = run.trajectory.z_samples.clone();
    for (s, i) in [(1, 0), (0, 1), (0, 0)] {
        out.extend(tables.iter().map(|t| t.get(s, i)));
    }
    Ok(out)
}

/// Joint photon-number table of pair generation from vacuum at the fiber end.
/// Layout: `[n_max + 1] ++ P(n_s, n_i) row-major ++ [coincidence, mismatch, false herald]`.
pub fn spfwm_table(knobs: FiberKnobs, n_max: usize) -> fiberq::Result<Vec<f64>> {
    check_cutoff(n_max)?;
    let p = knobs.spfwm(n_max);
    let sys = build_spfwm(&p)?;
    let cfg = IntegratorConfig::with_step(2.0 * STEP_KM);
    let run = propagate(
        &sys,
        &DensityMatrix::vacuum(p.space()),
        p.length_km,
        &cfg,
        &[],
    )?;
    let table = joint_number_distribution(&run.final_state)?;
    let m = heralding_metrics(&table);
    let mut out = vec![(n_max + 1) as f64];
    out.extend_from_slice(table.probs());
    out.extend([m.p_coincidence, m.p_mismatch, m.p_false_herald]);
    Ok(out)
}

/// `|<b_s>|` from the master equation and from the first-moment equations,
/// for weak coherent light (amplitude `amplitude` in both modes).
/// Layout: `[z; n] ++ [quantum; n] ++ [classical; n]`.
pub fn moment_curves(
    knobs: FiberKnobs,
    pair_generation: bool,
    n_max: usize,
    amplitude: f64,
    samples: usize,
) -> fiberq::Result<Vec<f64>> {
    check_cutoff(n_max)?;
    let (bs, sp) = (knobs.bragg(n_max), knobs.spfwm(n_max));
    let (sys, model) = if pair_generation {
        (build_spfwm(&sp)?, ReducedModel::Spfwm(&sp))
    } else {
        (build_bragg(&bs)?, ReducedModel::Bragg(&bs))
    };
    let a = Complex64::new(amplitude, 0.0);
    let rho0 = DensityMatrix::coherent(sys.space().clone(), &[a, a])?;
    let pts = uniform_samples(knobs.length_km, samples.max(2));
    let cfg = IntegratorConfig::with_step(2.0 * STEP_KM);
    let run = propagate(&sys, &rho0, knobs.length_km, &cfg, &pts)?;
    let first = &run.trajectory.records[0].mean_fields;
    let idler0 = if pair_generation {
        first[1].conj()
    } else {
        first[1]
    };
    let ode = reduced_mean_field(
        model,
        [first[0], idler0],
        knobs.length_km,
        cfg.step_km,
        &pts,
    )?;
    let mut out = run.trajectory.z_samples.clone();
    out.extend(
        run.trajectory
            .records
            .iter()
            .map(|r| r.mean_fields[0].norm()),
    );
    out.extend(ode.signal.iter().map(|b| b.norm()));
    Ok(out)
}

fn js(r: fiberq::Result<Vec<f64>>) -> Result<Vec<f64>, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = braggTransfer)]
pub fn bragg_transfer(
    gamma: f64,
    pump_power: f64,
    alpha: f64,
    raman_imag: f64,
    length_km: f64,
    samples: usize,
) -> Result<Vec<f64>, JsError> {
    let knobs = FiberKnobs {
        gamma,
        pump_power,
        alpha,
        raman_imag,
        length_km,
    };
    js(bragg_curves(knobs, samples))
}

#[wasm_bindgen(js_name = pairTable)]
pub fn pair_table(
    gamma: f64,
    pump_power: f64,
    alpha: f64,
    raman_imag: f64,
    length_km: f64,
    n_max: usize,
) -> Result<Vec<f64>, JsError> {
    let knobs = FiberKnobs {
        gamma,
        pump_power,
        alpha,
        raman_imag,
        length_km,
    };
    js(spfwm_table(knobs, n_max))
}

#[wasm_bindgen(js_name = momentComparison)]
#[allow(clippy::too_many_arguments)]
pub fn moment_comparison(
    pair_generation: bool,
    gamma: f64,
    pump_power: f64,
    alpha: f64,
    raman_imag: f64,
    length_km: f64,
    n_max: usize,
    samples: usize,
) -> Result<Vec<f64>, JsError> {
    let knobs = FiberKnobs {
        gamma,
        pump_power,
        alpha,
        raman_imag,
        length_km,
    };
    js(moment_curves(knobs, pair_generation, n_max, 0.1, samples))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_fiber() -> FiberKnobs {
        FiberKnobs {
            gamma: 1.0,
            pump_power: 1.0,
            alpha: 0.0,
            raman_imag: 0.0,
            length_km: 2.0,
        }
    }

    #[test]
    fn bragg_layout_and_rabi_curve() {
        let out = bragg_curves(unit_fiber(), 21).unwrap();
        assert_eq!(out.len(), 4 * 21);
        let (z, p01) = (&out[..21], &out[42..63]);
        for (z, p) in z.iter().zip(p01) {
            assert!((p - (2.0 * z).sin().powi(2)).abs() < 1e-8);
        }
    }

    #[test]
    fn pair_table_layout_and_metrics() {
        let knobs = FiberKnobs {
            length_km: 0.5,
            ..unit_fiber()
        };
        let out = spfwm_table(knobs, 4).unwrap();
        assert_eq!(out[0], 5.0);
        assert_eq!(out.len(), 1 + 25 + 3);
        let total: f64 = out[1..26].iter().sum();
        assert!((total - 1.0).abs() < 1e-8);
        assert!(out[27] < 1e-10, "ideal pairs never mismatch");
        assert!(spfwm_table(knobs, 9).is_err());
    }

    #[test]
    fn bragg_moments_agree() {
        let knobs = FiberKnobs {
            alpha: 0.01,
            raman_imag: 0.1,
            length_km: 1.0,
            ..unit_fiber()
        };
        let out = moment_curves(knobs, false, 5, 0.1, 11).unwrap();
        let (q, c) = (&out[11..22], &out[22..33]);
        for (a, b) in q.iter().zip(c) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }
}
