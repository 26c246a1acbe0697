use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::DensityMatrix;
use crate::tensor::{CMatrix, CompositeSpace, Operator, HERMITIAN_TOL};

/// A dissipative channel `L = scale * base`.
///
/// `scale` carries the rate (km^-1/2); `base` is the dimensionless operator
/// structure such as `b_s` or `b_s + b_i^dag`.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpOperator {
    pub label: String,
    pub scale: f64,
    pub base: Operator,
}

impl JumpOperator {
    pub fn new(label: impl Into<String>, scale: f64, base: Operator) -> Self {
        Self {
            label: label.into(),
            scale,
            base,
        }
    }

    /// The full operator `scale * base`.
    pub fn operator(&self) -> Operator {
        self.base.scale_real(self.scale)
    }

    pub fn is_zero(&self) -> bool {
        self.scale == 0.0 || self.base.is_zero()
    }
}

/// Hermitian generator plus jump operators: the full right-hand side of the
/// master equation `d rho/dz = i[H, rho] + sum_v D[L_v](rho)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladSystem {
    space: CompositeSpace,
    hamiltonian: Operator,
    jumps: Vec<JumpOperator>,
}

impl LindbladSystem {
    pub fn new(hamiltonian: Operator, jumps: Vec<JumpOperator>) -> Result<Self> {
        let deviation = hamiltonian.hermiticity_error();
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let space = hamiltonian.space().clone();
        for j in &jumps {
            if j.base.space() != &space {
                return Err(Error::DimensionMismatch {
                    context: "jump operator space",
                    expected: space.total_dim(),
                    found: j.base.space().total_dim(),
                });
            }
            if !(j.scale.is_finite() && j.scale >= 0.0) {
                return Err(Error::InvalidParameter {
                    name: format!("scale of jump `{}`", j.label),
                    value: j.scale,
                    reason: "jump scales must be finite and non-negative",
                });
            }
        }
        Ok(Self {
            space,
            hamiltonian,
            jumps,
        })
    }

    pub fn space(&self) -> &CompositeSpace {
        &self.space
    }

    pub fn hamiltonian(&self) -> &Operator {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[JumpOperator] {
        &self.jumps
    }
}

/// Evaluates `i(H rho - rho H) + sum_v (L rho L^dag - 1/2 {rho, L^dag L})`.
pub fn lindblad_rhs(system: &LindbladSystem, rho: &DensityMatrix) -> Result<CMatrix> {
    if rho.space() != system.space() {
        return Err(Error::DimensionMismatch {
            context: "lindblad_rhs",
            expected: system.space().total_dim(),
            found: rho.space().total_dim(),
        });
    }
    let generator = Generator::new(system);
    let mut ws = Workspace::new(generator.dim);
    let mut out = CMatrix::zeros(generator.dim, generator.dim);
    generator.apply(rho.matrix(), &mut out, &mut ws);
    Ok(out)
}

/// Precompiled form of a [`LindbladSystem`] for repeated evaluation.
///
/// With `G = iH - 1/2 sum L^dag L` the right-hand side is
/// `G rho + (G rho^dag)^dag + sum L (L rho^dag)^dag`, which only ever multiplies
/// by the (structurally sparse) generator matrices from the left.
#[derive(Debug, Clone)]
pub(crate) struct Generator {
    pub dim: usize,
    effective: CMatrix,
    jumps: Vec<CMatrix>,
}

pub(crate) struct Workspace {
    rho_dag: CMatrix,
    tmp: CMatrix,
    tmp_dag: CMatrix,
}

impl Workspace {
    pub fn new(dim: usize) -> Self {
        Self {
            rho_dag: CMatrix::zeros(dim, dim),
            tmp: CMatrix::zeros(dim, dim),
            tmp_dag: CMatrix::zeros(dim, dim),
        }
    }
}

impl Generator {
    pub fn new(system: &LindbladSystem) -> Self {
        let dim = system.space.total_dim();
        let i = Complex64::new(0.0, 1.0);
        let mut effective = system.hamiltonian.matrix().scale(i);
        let mut jumps = Vec::new();
        for j in system.jumps.iter().filter(|j| !j.is_zero()) {
            let l = j.operator().into_matrix();
            let ldl = &l.dagger() * &l;
            effective.axpy(Complex64::new(-0.5, 0.0), &ldl);
            jumps.push(l);
        }
        Self {
            dim,
            effective,
            jumps,
        }
    }

    pub fn apply(&self, rho: &CMatrix, out: &mut CMatrix, ws: &mut Workspace) {
        rho.dagger_into(&mut ws.rho_dag);
        self.effective.mul_into(rho, out);
        self.effective.mul_into(&ws.rho_dag, &mut ws.tmp);
        add_dagger(out, &ws.tmp);
        for l in &self.jumps {
            l.mul_into(&ws.rho_dag, &mut ws.tmp);
            ws.tmp.dagger_into(&mut ws.tmp_dag);
            l.mul_into(&ws.tmp_dag, &mut ws.tmp);
            *out += &ws.tmp;
        }
    }
}

/// `out += m^dagger`
fn add_dagger(out: &mut CMatrix, m: &CMatrix) {
    let n = out.rows();
    let src = m.as_slice();
    let dst = out.as_mut_slice();
    for r in 0..n {
        for c in 0..n {
            dst[r * n + c] += src[c * n + r].conj();
        }
    }
}
