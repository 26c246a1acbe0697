use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::models::{BsParams, SpfwmParams};

/// Reduced two-mode model whose first moments obey a closed linear system.
#[derive(Debug, Clone, Copy)]
pub enum ReducedModel<'a> {
    Bragg(&'a BsParams),
    Spfwm(&'a SpfwmParams),
}

impl ReducedModel<'_> {
    /// `M` in `d/dz (x, y) = M (x, y)`, with `(x, y) = (<b_s>, <b_i>)` for Bragg
    /// scattering and `(<b_s>, <b_i^dag>)` for pair generation.
    pub fn moment_matrix(&self) -> [[Complex64; 2]; 2] {
        let i = Complex64::new(0.0, 1.0);
        let re = |x: f64| Complex64::new(x, 0.0);
        match *self {
            ReducedModel::Bragg(p) => {
                let gp2 = 2.0 * p.gamma * p.pump_power;
                let (minus, plus, pair) = (
                    gp2 * p.ri_offset_minus_spacing,
                    gp2 * p.ri_offset_plus_spacing,
                    gp2 * p.ri_pair_offset,
                );
                let g = p.coupling();
                [
                    [
                        i * p.k_signal() - re(0.5 * (p.alpha_s + minus + pair)),
                        i * g - re(0.5 * pair),
                    ],
                    [
                        i * g - re(0.5 * pair),
                        i * p.k_idler() - re(0.5 * (p.alpha_i + plus + pair)),
                    ],
                ]
            }
            ReducedModel::Spfwm(p) => {
                let raman = p.gamma * p.pump_power * p.ri_detuning;
                let g = p.coupling();
                [
                    [
                        i * p.k_signal() - re(0.5 * p.alpha_s + raman),
                        i * g - re(raman),
                    ],
                    [
                        -i * g + re(raman),
                        -i * p.k_idler() - re(0.5 * p.alpha_i - raman),
                    ],
                ]
            }
        }
    }
}

/// Sampled first moments. `idler` holds `<b_i>` (Bragg) or `<b_i^dag>` (pair generation).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentTrajectory {
    pub z_samples: Vec<f64>,
    pub signal: Vec<Complex64>,
    pub idler: Vec<Complex64>,
}

/// Integrates the first-moment equations of a reduced model with RK4.
pub fn reduced_mean_field(
    model: ReducedModel<'_>,
    initial: [Complex64; 2],
    length_km: f64,
    step_km: f64,
    sample_points: &[f64],
) -> Result<MomentTrajectory> {
    match model {
        ReducedModel::Bragg(p) => p.validate()?,
        ReducedModel::Spfwm(p) => p.validate()?,
    }
    let m = model.moment_matrix();
    let (z_samples, states) = super::rk4_sampled(
        initial.to_vec(),
        length_km,
        step_km,
        sample_points,
        |v, out| {
            out[0] = m[0][0] * v[0] + m[0][1] * v[1];
            out[1] = m[1][0] * v[0] + m[1][1] * v[1];
        },
    )?;
    Ok(MomentTrajectory {
        z_samples,
        signal: states.iter().map(|s| s[0]).collect(),
        idler: states.iter().map(|s| s[1]).collect(),
    })
}
