//! Dense complex matrices and truncated Fock-space operators.

mod eigen;
mod matrix;
mod operator;
mod space;

pub use eigen::{hermitian_eigenvalues as matrix_hermitian_eigenvalues, HERMITIAN_TOL};
pub use matrix::CMatrix;
pub use operator::{
    accumulate_ladder_product, annihilation_op, creation_op, embed, expectation,
    hermitian_eigenvalues, ladder_product, mode_annihilation, mode_number, number_op, Ladder,
    Operator,
};
pub use space::{CompositeSpace, ModeSpace};
