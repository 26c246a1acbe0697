use num_complex::Complex64;

use super::eigen;
use super::matrix::CMatrix;
use super::space::{CompositeSpace, ModeSpace};
use crate::error::{ensure_dim, Error, Result};
use crate::state::DensityMatrix;

/// A square matrix tagged with the composite Fock space it acts on.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    space: CompositeSpace,
    matrix: CMatrix,
}

impl Operator {
    pub fn new(space: CompositeSpace, matrix: CMatrix) -> Result<Self> {
        let dim = space.total_dim();
        ensure_dim("Operator::new rows", dim, matrix.rows())?;
        ensure_dim("Operator::new cols", dim, matrix.cols())?;
        Ok(Self { space, matrix })
    }

    pub fn zero(space: &CompositeSpace) -> Self {
        let d = space.total_dim();
        Self {
            space: space.clone(),
            matrix: CMatrix::zeros(d, d),
        }
    }

    pub fn identity(space: &CompositeSpace) -> Self {
        Self {
            space: space.clone(),
            matrix: CMatrix::identity(space.total_dim()),
        }
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

    pub fn dagger(&self) -> Self {
        Self {
            space: self.space.clone(),
            matrix: self.matrix.dagger(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            space: self.space.clone(),
            matrix: self.matrix.scale(s),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn add(&self, other: &Operator) -> Result<Self> {
        self.check_space(other)?;
        Ok(Self {
            space: self.space.clone(),
            matrix: &self.matrix + &other.matrix,
        })
    }

    pub fn sub(&self, other: &Operator) -> Result<Self> {
        self.check_space(other)?;
        Ok(Self {
            space: self.space.clone(),
            matrix: &self.matrix - &other.matrix,
        })
    }

    pub fn matmul(&self, other: &Operator) -> Result<Self> {
        self.check_space(other)?;
        Ok(Self {
            space: self.space.clone(),
            matrix: &self.matrix * &other.matrix,
        })
    }

    /// `AB - BA`
    pub fn commutator(&self, other: &Operator) -> Result<Self> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    /// `AB + BA`
    pub fn anticommutator(&self, other: &Operator) -> Result<Self> {
        self.matmul(other)?.add(&other.matmul(self)?)
    }

    pub fn hermiticity_error(&self) -> f64 {
        self.matrix.hermiticity_error()
    }

    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        self.matrix.max_abs_diff(&other.matrix)
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.is_zero()
    }

    fn check_space(&self, other: &Operator) -> Result<()> {
        if self.space == other.space {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                context: "operator spaces differ",
                expected: self.space.total_dim(),
                found: other.space.total_dim(),
            })
        }
    }
}

/// Truncated annihilation operator: `a[n-1, n] = sqrt(n)` for `1 <= n <= n_max`.
pub fn annihilation_op(mode: ModeSpace) -> Operator {
    let d = mode.dim();
    let mut m = CMatrix::zeros(d, d);
    for n in 1..d {
        m[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    Operator {
        space: CompositeSpace::single(mode),
        matrix: m,
    }
}

pub fn creation_op(mode: ModeSpace) -> Operator {
    annihilation_op(mode).dagger()
}

/// `diag(0, 1, .., n_max)`
pub fn number_op(mode: ModeSpace) -> Operator {
    let values: Vec<Complex64> = (0..mode.dim())
        .map(|n| Complex64::new(n as f64, 0.0))
        .collect();
    Operator {
        space: CompositeSpace::single(mode),
        matrix: CMatrix::diagonal(&values),
    }
}

/// Lifts a single-mode operator onto `composite` as `I ⊗ .. ⊗ op ⊗ .. ⊗ I`,
/// with `op` in slot `mode_index`.
pub fn embed(op: &Operator, mode_index: usize, composite: &CompositeSpace) -> Result<Operator> {
    if op.space.n_modes() != 1 {
        return Err(Error::DimensionMismatch {
            context: "embed expects a single-mode operator",
            expected: 1,
            found: op.space.n_modes(),
        });
    }
    if mode_index >= composite.n_modes() {
        return Err(Error::DimensionMismatch {
            context: "embed mode index",
            expected: composite.n_modes(),
            found: mode_index,
        });
    }
    let target = composite.modes()[mode_index];
    if op.space.modes()[0] != target {
        return Err(Error::DimensionMismatch {
            context: "embed mode truncation",
            expected: target.dim(),
            found: op.space.modes()[0].dim(),
        });
    }
    let mut acc = CMatrix::identity(1);
    for (k, m) in composite.modes().iter().enumerate() {
        let factor = if k == mode_index {
            op.matrix.clone()
        } else {
            CMatrix::identity(m.dim())
        };
        acc = acc.kron(&factor);
    }
    Ok(Operator {
        space: composite.clone(),
        matrix: acc,
    })
}

/// `a_k` on the composite space.
pub fn mode_annihilation(space: &CompositeSpace, mode: usize) -> Result<Operator> {
    let m = *space.modes().get(mode).ok_or(Error::DimensionMismatch {
        context: "mode index",
        expected: space.n_modes(),
        found: mode,
    })?;
    embed(&annihilation_op(m), mode, space)
}

/// `n_k` on the composite space.
pub fn mode_number(space: &CompositeSpace, mode: usize) -> Result<Operator> {
    let m = *space.modes().get(mode).ok_or(Error::DimensionMismatch {
        context: "mode index",
        expected: space.n_modes(),
        found: mode,
    })?;
    embed(&number_op(m), mode, space)
}

pub fn hermitian_eigenvalues(op: &Operator) -> Result<Vec<f64>> {
    eigen::hermitian_eigenvalues(&op.matrix)
}

/// `Tr(op * rho)`
pub fn expectation(op: &Operator, rho: &DensityMatrix) -> Result<Complex64> {
    if op.space() != rho.space() {
        return Err(Error::DimensionMismatch {
            context: "expectation",
            expected: op.space().total_dim(),
            found: rho.space().total_dim(),
        });
    }
    Ok(op.matrix.trace_product(rho.matrix()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ladder {
    Create,
    Annihilate,
}

/// Adds `coef * f_1 f_2 .. f_k` to `target`, where each factor is a truncated
/// ladder operator on a mode of `space`.
///
/// The product is built by acting on basis states (rightmost factor first), so the
/// cost is `O(dim * k)` regardless of how many modes the space has.
pub fn accumulate_ladder_product(
    target: &mut CMatrix,
    space: &CompositeSpace,
    factors: &[(usize, Ladder)],
    coef: Complex64,
) {
    let dim = space.total_dim();
    debug_assert_eq!((target.rows(), target.cols()), (dim, dim));
    let strides: Vec<usize> = (0..space.n_modes()).map(|k| space.stride(k)).collect();
    for col in 0..dim {
        let mut occ = space.occupation(col);
        let mut amp = 1.0f64;
        let mut alive = true;
        for &(mode, kind) in factors.iter().rev() {
            let n = occ[mode];
            match kind {
                Ladder::Annihilate => {
                    if n == 0 {
                        alive = false;
                        break;
                    }
                    amp *= (n as f64).sqrt();
                    occ[mode] = n - 1;
                }
                Ladder::Create => {
                    if n == space.modes()[mode].n_max {
                        alive = false;
                        break;
                    }
                    amp *= ((n + 1) as f64).sqrt();
                    occ[mode] = n + 1;
                }
            }
        }
        if !alive {
            continue;
        }
        let row: usize = occ.iter().zip(&strides).map(|(n, s)| n * s).sum();
        target[(row, col)] += coef * amp;
    }
}

/// Single ladder monomial as an operator.
pub fn ladder_product(space: &CompositeSpace, factors: &[(usize, Ladder)]) -> Operator {
    let mut op = Operator::zero(space);
    accumulate_ladder_product(&mut op.matrix, space, factors, Complex64::new(1.0, 0.0));
    op
}
