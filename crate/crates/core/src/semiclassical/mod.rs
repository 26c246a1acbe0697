//! Classical mean-field propagation and first-moment equations used to
//! cross-check the quantum engine.

mod depletion;
mod mean_field;
mod reduced;

pub use depletion::{depletion_rate, pump_depletion};
pub use mean_field::{
    integrate_mean_field, mean_field_rhs, MeanFieldConfig, MeanFieldTrajectory, SpectralField,
};
pub use reduced::{reduced_mean_field, MomentTrajectory, ReducedModel};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lindblad::sample_targets;

/// Classical RK4 for `y' = f(y)` over `[0, length_km]`, returning `y` at `z = 0` and
/// at each sample point. Steps are shrunk per interval to land on the samples.
pub(crate) fn rk4_sampled<F>(
    mut y: Vec<Complex64>,
    length_km: f64,
    step_km: f64,
    sample_points: &[f64],
    mut f: F,
) -> Result<(Vec<f64>, Vec<Vec<Complex64>>)>
where
    F: FnMut(&[Complex64], &mut [Complex64]),
{
    if !(step_km.is_finite() && step_km > 0.0) {
        return Err(Error::InvalidParameter {
            name: "step_km".into(),
            value: step_km,
            reason: "step must be finite and positive",
        });
    }
    if !(length_km.is_finite() && length_km >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "length_km".into(),
            value: length_km,
            reason: "fiber length must be finite and non-negative",
        });
    }
    let targets = sample_targets(length_km, sample_points)?;
    let n = y.len();
    let zero = Complex64::new(0.0, 0.0);
    let (mut k1, mut k2, mut k3, mut k4, mut stage) = (
        vec![zero; n],
        vec![zero; n],
        vec![zero; n],
        vec![zero; n],
        vec![zero; n],
    );
    let mut z_out = vec![0.0];
    let mut y_out = vec![y.clone()];
    let mut z = 0.0;
    for &target in &targets {
        let span = target - z;
        let steps = ((span / step_km) - 1e-9).ceil().max(1.0) as usize;
        let h = span / steps as f64;
        for _ in 0..steps {
            f(&y, &mut k1);
            for j in 0..n {
                stage[j] = y[j] + k1[j] * (0.5 * h);
            }
            f(&stage, &mut k2);
            for j in 0..n {
                stage[j] = y[j] + k2[j] * (0.5 * h);
            }
            f(&stage, &mut k3);
            for j in 0..n {
                stage[j] = y[j] + k3[j] * h;
            }
            f(&stage, &mut k4);
            for j in 0..n {
                y[j] += (k1[j] + (k2[j] + k3[j]) * 2.0 + k4[j]) * (h / 6.0);
            }
        }
        z = target;
        z_out.push(z);
        y_out.push(y.clone());
    }
    Ok((z_out, y_out))
}
