//! Density matrices over truncated Fock spaces.

use num_complex::Complex64;

use crate::error::{ensure_dim, Error, Result};
use crate::tensor::{matrix_hermitian_eigenvalues, CMatrix, CompositeSpace, ModeSpace};

pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-9;
pub const POSITIVITY_TOL: f64 = 1e-8;

/// Hermitian, positive-semidefinite, unit-trace operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    space: CompositeSpace,
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates the density-matrix invariants before wrapping `matrix`.
    pub fn from_matrix(space: CompositeSpace, matrix: CMatrix) -> Result<Self> {
        let dim = space.total_dim();
        ensure_dim("DensityMatrix rows", dim, matrix.rows())?;
        ensure_dim("DensityMatrix cols", dim, matrix.cols())?;
        let herm = matrix.hermiticity_error();
        if herm > HERMITICITY_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian: max |rho - rho^dag| = {herm:e}"
            )));
        }
        let trace_err = (matrix.trace() - 1.0).norm();
        if trace_err > TRACE_TOL {
            return Err(Error::InvalidState(format!(
                "trace differs from 1 by {trace_err:e}"
            )));
        }
        let mut sym = matrix.clone();
        sym.hermitize();
        let min_eig = matrix_hermitian_eigenvalues(&sym)?
            .first()
            .copied()
            .unwrap_or(0.0);
        if min_eig < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(Self { space, matrix })
    }

    /// Wraps a matrix without checking invariants. Used by the integrator, which
    /// monitors them separately.
    pub(crate) fn from_matrix_unchecked(space: CompositeSpace, matrix: CMatrix) -> Self {
        debug_assert_eq!(space.total_dim(), matrix.rows());
        Self { space, matrix }
    }

    /// `|psi><psi|` for a normalised copy of `amplitudes`.
    pub fn pure(space: CompositeSpace, amplitudes: &[Complex64]) -> Result<Self> {
        ensure_dim("pure state amplitudes", space.total_dim(), amplitudes.len())?;
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidState(
                "state vector has zero or non-finite norm".into(),
            ));
        }
        let psi: Vec<Complex64> = amplitudes.iter().map(|z| z / norm).collect();
        let d = psi.len();
        let matrix = CMatrix::from_fn(d, d, |r, c| psi[r] * psi[c].conj());
        Ok(Self { space, matrix })
    }

    pub fn fock(space: CompositeSpace, occupation: &[usize]) -> Result<Self> {
        let idx = space.index_of(occupation).ok_or_else(|| {
            Error::InvalidState(format!(
                "occupation {occupation:?} outside the truncated space"
            ))
        })?;
        let d = space.total_dim();
        let mut matrix = CMatrix::zeros(d, d);
        matrix[(idx, idx)] = Complex64::new(1.0, 0.0);
        Ok(Self { space, matrix })
    }

    pub fn vacuum(space: CompositeSpace) -> Self {
        let zeros = vec![0; space.n_modes()];
        Self::fock(space, &zeros).expect("vacuum is always inside the space")
    }

    /// Product of per-mode truncated coherent states, each renormalised after truncation.
    pub fn coherent(space: CompositeSpace, alphas: &[Complex64]) -> Result<Self> {
        ensure_dim("coherent amplitudes", space.n_modes(), alphas.len())?;
        let mut psi = vec![Complex64::new(1.0, 0.0)];
        for (mode, alpha) in space.modes().iter().zip(alphas) {
            let factor = truncated_coherent(*mode, *alpha);
            psi = psi
                .iter()
                .flat_map(|a| factor.iter().map(move |b| a * b))
                .collect();
        }
        Self::pure(space, &psi)
    }

    /// Convex combination `sum_k w_k rho_k`; weights are normalised.
    pub fn mixture(components: &[(f64, DensityMatrix)]) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidState("empty mixture".into()))?;
        let space = first.1.space.clone();
        let total: f64 = components.iter().map(|(w, _)| *w).sum();
        let d = space.total_dim();
        let mut matrix = CMatrix::zeros(d, d);
        for (w, rho) in components {
            if rho.space != space {
                return Err(Error::DimensionMismatch {
                    context: "mixture spaces differ",
                    expected: d,
                    found: rho.space.total_dim(),
                });
            }
            if *w < 0.0 {
                return Err(Error::InvalidState("negative mixture weight".into()));
            }
            matrix.axpy(Complex64::new(w / total, 0.0), &rho.matrix);
        }
        Ok(Self { space, matrix })
    }

    pub fn space(&self) -> &CompositeSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// `Tr(rho^2)`
    pub fn purity(&self) -> f64 {
        self.matrix.trace_product(&self.matrix).re
    }
}

/// Normalised amplitudes of the coherent state `|alpha>` truncated at `n_max`.
pub fn truncated_coherent(mode: ModeSpace, alpha: Complex64) -> Vec<Complex64> {
    let mut amps = Vec::with_capacity(mode.dim());
    let mut term = Complex64::new(1.0, 0.0);
    for n in 0..mode.dim() {
        if n > 0 {
            term = term * alpha / (n as f64).sqrt();
        }
        amps.push(term);
    }
    let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    amps.into_iter().map(|z| z / norm).collect()
}
