//! Builders for the reduced signal/idler models and the discretised multimode model.

mod frame;
mod multimode;
mod reduced;

pub use frame::{frame_conjugate, rotating_frame};
pub use multimode::{
    build_multimode, build_multimode_at, MultimodeParams, PumpSubstitution, RamanSample,
    RamanTable, DEFAULT_HBAR, DEFAULT_MAX_DIM, DEFAULT_OMEGA0,
};
pub use reduced::{build_bragg, build_spfwm, BsParams, SpfwmParams};

use serde::{Deserialize, Serialize};

/// Mismatches smaller than this (km^-1) count as phase matched.
pub const PHASE_MATCH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseMatchReport {
    /// `(wave label, k)` in km^-1.
    pub wavenumbers: Vec<(String, f64)>,
    pub mismatch: f64,
    pub matched: bool,
    pub warnings: Vec<String>,
}

impl PhaseMatchReport {
    pub(crate) fn new(wavenumbers: Vec<(String, f64)>, mismatch: f64, n_max: usize) -> Self {
        let mut warnings = Vec::new();
        if n_max == 0 {
            warnings.push("n_max = 0: signal and idler are frozen in vacuum".to_string());
        }
        Self {
            wavenumbers,
            matched: mismatch.abs() <= PHASE_MATCH_TOL,
            mismatch,
            warnings,
        }
    }

    pub fn wavenumber(&self, label: &str) -> Option<f64> {
        self.wavenumbers
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, k)| *k)
    }
}

/// Model parameter sets that carry a phase-matching condition.
pub trait PhaseMatched {
    fn phase_match(&self) -> PhaseMatchReport;
}

impl PhaseMatched for SpfwmParams {
    fn phase_match(&self) -> PhaseMatchReport {
        SpfwmParams::phase_match(self)
    }
}

impl PhaseMatched for BsParams {
    fn phase_match(&self) -> PhaseMatchReport {
        BsParams::phase_match(self)
    }
}

pub fn phase_match(params: &impl PhaseMatched) -> PhaseMatchReport {
    params.phase_match()
}
