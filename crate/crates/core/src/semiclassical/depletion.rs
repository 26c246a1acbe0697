use std::f64::consts::PI;

use crate::error::{non_negative, Result};
use crate::models::MultimodeParams;

/// Power decay rate (km^-1) of a pump at the carrier from spontaneous Raman
/// scattering: `2 gamma~ sum_{n >= 1} R^I_n hbar (omega0 - n dw) dw`.
pub fn depletion_rate(params: &MultimodeParams) -> f64 {
    let gamma_t = params.gamma / (2.0 * PI);
    let dw = params.delta_w;
    let sum: f64 = (1..=params.raman.support())
        .map(|n| params.raman.ri(n) * params.hbar * (params.omega0 - n as f64 * dw) * dw)
        .sum();
    2.0 * gamma_t * sum
}

/// Pump power (W) after `z_km` of spontaneous-Raman depletion.
pub fn pump_depletion(p0: f64, z_km: f64, params: &MultimodeParams) -> Result<f64> {
    non_negative("pump power", p0)?;
    non_negative("z_km", z_km)?;
    params.validate()?;
    let rate = depletion_rate(params);
    if rate == 0.0 {
        return Ok(p0);
    }
    Ok(p0 * (-rate * z_km).exp())
}
