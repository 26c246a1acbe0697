use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_dim, Error, Result};
use crate::models::MultimodeParams;

/// Classical spectral amplitudes `A_w` on the grid of a [`MultimodeParams`],
/// in sqrt(W s / rad). Pump substitutions in the parameters are ignored: every
/// grid mode is a classical amplitude here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralField {
    pub amplitudes: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes
            .iter()
            .any(|a| !(a.re.is_finite() && a.im.is_finite()))
        {
            return Err(Error::InvalidState("non-finite spectral amplitude".into()));
        }
        Ok(Self { amplitudes })
    }

    /// Amplitudes of continuous-wave lines of the given powers (W): `sqrt(2 pi P)/delta_w`.
    pub fn from_powers(powers: &[f64], delta_w: f64) -> Result<Self> {
        Self::new(
            powers
                .iter()
                .map(|&p| Complex64::new((2.0 * PI * p).sqrt() / delta_w, 0.0))
                .collect(),
        )
    }

    /// Line powers in W.
    pub fn powers(&self, delta_w: f64) -> Vec<f64> {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr() * delta_w * delta_w / (2.0 * PI))
            .collect()
    }

    /// `sum_w |A_w|^2`
    pub fn total_intensity(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldConfig {
    pub step_km: f64,
    pub include_self_steepening: bool,
    pub include_sprs_loss: bool,
}

impl Default for MeanFieldConfig {
    fn default() -> Self {
        Self {
            step_km: 1e-3,
            include_self_steepening: true,
            include_sprs_loss: true,
        }
    }
}

impl MeanFieldConfig {
    pub fn validate(&self) -> Result<()> {
        if self.step_km.is_finite() && self.step_km > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidParameter {
                name: "step_km".into(),
                value: self.step_km,
                reason: "step must be finite and positive",
            })
        }
    }
}

/// Precomputed coefficients of the mean-field equations on one grid.
struct MeanFieldModel {
    linear: Vec<Complex64>,
    /// `i gamma~ s(w) Delta w^2`
    kerr: Vec<Complex64>,
    /// `(w', u, v, R)` terms for each mode `w`: `R A*_{w'} A_u A_v`.
    terms: Vec<Vec<(usize, usize, usize, Complex64)>>,
}

impl MeanFieldModel {
    fn new(params: &MultimodeParams, config: &MeanFieldConfig) -> Result<Self> {
        params.validate()?;
        let gamma_t = params.gamma / (2.0 * PI);
        let dw = params.delta_w;
        let position: HashMap<i64, usize> = params
            .grid
            .iter()
            .enumerate()
            .map(|(k, &g)| (g, k))
            .collect();
        let mut linear = Vec::new();
        let mut kerr = Vec::new();
        let mut terms = Vec::new();
        for (k, &g) in params.grid.iter().enumerate() {
            let detuning = g as f64 * dw;
            let steepening = if config.include_self_steepening {
                1.0 + detuning / params.omega0
            } else {
                1.0
            };
            let mut lin = Complex64::new(-0.5 * params.alpha[k], params.beta[k]);
            if config.include_sprs_loss {
                let omega = params.omega0 + detuning;
                let sprs: f64 = (1..=params.raman.support())
                    .map(|n| params.raman.ri(n) * params.hbar * (omega - n as f64 * dw) * dw)
                    .sum();
                lin -= gamma_t * steepening * sprs;
            }
            linear.push(lin);
            kerr.push(Complex64::new(0.0, gamma_t * steepening * dw * dw));

            let mut mode_terms = Vec::new();
            for (kp, &wp) in params.grid.iter().enumerate() {
                for (ku, &u) in params.grid.iter().enumerate() {
                    let shift = g - u;
                    if let Some(&kv) = position.get(&(wp + shift)) {
                        let r = Complex64::new(params.raman.rr(shift), params.raman.ri(shift));
                        if r != Complex64::new(0.0, 0.0) {
                            mode_terms.push((kp, ku, kv, r));
                        }
                    }
                }
            }
            terms.push(mode_terms);
        }
        Ok(Self {
            linear,
            kerr,
            terms,
        })
    }

    fn rhs(&self, a: &[Complex64], out: &mut [Complex64]) {
        for (k, slot) in out.iter_mut().enumerate() {
            let fwm: Complex64 = self.terms[k]
                .iter()
                .map(|&(kp, ku, kv, r)| r * a[kp].conj() * a[ku] * a[kv])
                .sum();
            *slot = self.linear[k] * a[k] + self.kerr[k] * fwm;
        }
    }
}

/// Right-hand side of the classical mean-field equations (triple moments factorised).
pub fn mean_field_rhs(
    params: &MultimodeParams,
    field: &SpectralField,
    config: &MeanFieldConfig,
) -> Result<SpectralField> {
    ensure_dim(
        "spectral field length",
        params.grid.len(),
        field.amplitudes.len(),
    )?;
    let model = MeanFieldModel::new(params, config)?;
    let mut out = vec![Complex64::new(0.0, 0.0); field.amplitudes.len()];
    model.rhs(&field.amplitudes, &mut out);
    Ok(SpectralField { amplitudes: out })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldTrajectory {
    pub z_samples: Vec<f64>,
    pub fields: Vec<SpectralField>,
}

/// Fixed-step RK4 integration of the mean field, sampled at `z = 0` and each requested point.
pub fn integrate_mean_field(
    params: &MultimodeParams,
    initial: &SpectralField,
    length_km: f64,
    config: &MeanFieldConfig,
    sample_points: &[f64],
) -> Result<MeanFieldTrajectory> {
    config.validate()?;
    ensure_dim(
        "spectral field length",
        params.grid.len(),
        initial.amplitudes.len(),
    )?;
    let model = MeanFieldModel::new(params, config)?;
    let (z_samples, states) = super::rk4_sampled(
        initial.amplitudes.clone(),
        length_km,
        config.step_km,
        sample_points,
        |a, out| model.rhs(a, out),
    )?;
    Ok(MeanFieldTrajectory {
        z_samples,
        fields: states
            .into_iter()
            .map(|amplitudes| SpectralField { amplitudes })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{RamanTable, DEFAULT_OMEGA0};

    const DW: f64 = 2.0 * PI * 50e9;

    fn cfg(ss: bool, sprs: bool) -> MeanFieldConfig {
        MeanFieldConfig {
            step_km: 1e-3,
            include_self_steepening: ss,
            include_sprs_loss: sprs,
        }
    }

    #[test]
    fn linear_fiber_is_diagonal() {
        let mut p = MultimodeParams::on_grid(vec![-1, 0, 2], DW, 1);
        p.gamma = 0.0;
        p.beta = vec![0.3, -0.2, 1.1];
        p.alpha = vec![0.01, 0.0, 0.2];
        let a0 = SpectralField::from_powers(&[0.5, 1.0, 0.2], DW).unwrap();
        let d = mean_field_rhs(&p, &a0, &cfg(true, true)).unwrap();
        for k in 0..3 {
            let expected = Complex64::new(-0.5 * p.alpha[k], p.beta[k]) * a0.amplitudes[k];
            assert!((d.amplitudes[k] - expected).norm() <= 1e-15 * expected.norm().max(1.0));
        }
        let traj = integrate_mean_field(&p, &a0, 2.0, &cfg(true, true), &[2.0]).unwrap();
        for k in 0..3 {
            let exact =
                a0.amplitudes[k] * (Complex64::new(-0.5 * p.alpha[k], p.beta[k]) * 2.0).exp();
            assert!((traj.fields[1].amplitudes[k] - exact).norm() < 1e-10 * exact.norm());
        }
    }

    #[test]
    fn single_line_self_phase_rotation() {
        let p = MultimodeParams::on_grid(vec![0], DW, 1);
        let a0 = SpectralField::from_powers(&[2.0], DW).unwrap();
        let d = mean_field_rhs(&p, &a0, &cfg(true, true)).unwrap();
        let a = a0.amplitudes[0];
        let expected = Complex64::new(0.0, p.gamma / (2.0 * PI)) * a.norm_sqr() * a * DW * DW;
        assert!((d.amplitudes[0] - expected).norm() < 1e-14 * expected.norm());
        // gamma~ |A|^2 dw^2 = gamma P: the familiar SPM rate.
        assert!((expected.norm() / a.norm() - p.gamma * 2.0).abs() < 1e-12);
        let traj = integrate_mean_field(&p, &a0, 1.0, &cfg(true, true), &[1.0]).unwrap();
        assert!((traj.fields[1].amplitudes[0].norm() - a.norm()).abs() < 1e-12 * a.norm());
    }

    #[test]
    fn three_mode_rhs_matches_hand_expansion() {
        let mut p = MultimodeParams::on_grid(vec![-1, 0, 1], DW, 1);
        p.raman = RamanTable::from_positive(1.0, &[(1, 0.6, 0.2), (2, 0.3, 0.1)]).unwrap();
        let a = SpectralField::new(vec![
            Complex64::new(1.0, 0.5),
            Complex64::new(-0.3, 2.0),
            Complex64::new(0.7, -0.4),
        ])
        .unwrap();
        let d = mean_field_rhs(&p, &a, &cfg(false, false)).unwrap();
        let r = |n: i64| Complex64::new(p.raman.rr(n), p.raman.ri(n));
        let x = |g: i64| a.amplitudes[(g + 1) as usize];
        let pref = Complex64::new(0.0, p.gamma / (2.0 * PI) * DW * DW);
        // Mode 0: sum over w', mu with w - mu and w' + mu on the grid.
        let mut hand = Complex64::new(0.0, 0.0);
        for wp in -1..=1i64 {
            for mu in -2..=2i64 {
                let (u, v) = (0 - mu, wp + mu);
                if (-1..=1).contains(&u) && (-1..=1).contains(&v) {
                    hand += r(mu) * x(wp).conj() * x(u) * x(v);
                }
            }
        }
        assert!((d.amplitudes[1] - pref * hand).norm() < 1e-13 * hand.norm());
    }

    #[test]
    fn lossless_kerr_grid_conserves_power() {
        let mut p = MultimodeParams::on_grid(vec![-2, -1, 0, 1, 2], DW, 1);
        p.raman = RamanTable::from_positive(1.0, &[(1, 0.5, 0.0), (2, 0.2, 0.0)]).unwrap();
        p.beta = vec![0.1, -0.3, 0.0, 0.2, 0.5];
        let a0 = SpectralField::from_powers(&[0.1, 0.4, 1.0, 0.3, 0.05], DW).unwrap();
        let traj = integrate_mean_field(&p, &a0, 1.0, &cfg(false, true), &[0.5, 1.0]).unwrap();
        let i0 = a0.total_intensity();
        for f in &traj.fields {
            assert!((f.total_intensity() - i0).abs() <= 1e-8 * i0);
        }
        // Energy actually moved between lines.
        let moved = (traj.fields[2].amplitudes[0].norm() - a0.amplitudes[0].norm()).abs();
        assert!(moved > 1e-3 * a0.amplitudes[0].norm());
    }

    #[test]
    fn self_steepening_scales_phase_rates() {
        let dw = 0.05 * DEFAULT_OMEGA0;
        let p = MultimodeParams::on_grid(vec![-1, 1], dw, 1);
        let a = SpectralField::from_powers(&[1.0, 1.0], dw).unwrap();
        let d = mean_field_rhs(&p, &a, &cfg(true, false)).unwrap();
        let rate = |k: usize| (d.amplitudes[k] / a.amplitudes[k]).im;
        let ratio = rate(1) / rate(0);
        assert!((ratio - 1.05 / 0.95).abs() < 1e-12);
        let flat = mean_field_rhs(&p, &a, &cfg(false, false)).unwrap();
        assert_eq!(flat.amplitudes[0], flat.amplitudes[1]);
    }

    #[test]
    fn sprs_term_damps_each_line() {
        let mut p = MultimodeParams::on_grid(vec![0], DW, 1);
        p.raman = RamanTable::from_positive(1.0, &[(3, 0.0, 0.1)]).unwrap();
        let a = SpectralField::from_powers(&[1.0], DW).unwrap();
        let with = mean_field_rhs(&p, &a, &cfg(false, true)).unwrap();
        let without = mean_field_rhs(&p, &a, &cfg(false, false)).unwrap();
        let damping = (with.amplitudes[0] - without.amplitudes[0]) / a.amplitudes[0];
        let expected = -p.gamma / (2.0 * PI) * 0.1 * p.hbar * (p.omega0 - 3.0 * DW) * DW;
        assert!((damping.re - expected).abs() < 1e-12 * expected.abs());
        assert!(damping.im.abs() < 1e-30);
    }

    #[test]
    fn field_length_must_match_grid() {
        let p = MultimodeParams::on_grid(vec![0, 1], DW, 1);
        let a = SpectralField::from_powers(&[1.0], DW).unwrap();
        assert!(mean_field_rhs(&p, &a, &cfg(true, true)).is_err());
        assert!(SpectralField::new(vec![Complex64::new(f64::NAN, 0.0)]).is_err());
    }
}
