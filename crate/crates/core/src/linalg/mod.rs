//! Exact small-dimension complex linear algebra: matrices, Hermitian
//! eigendecomposition, density matrices, observables and the standard
//! two-qubit state constructions (Bell basis, Werner family).
//!
//! Everything here is dense and row-major; dimensions in this crate never
//! exceed 36 (six optical modes), so there is no sparse machinery.

mod matrix;
mod state;

pub use matrix::{hermitian_eigen, tensor_product, ComplexMatrix, DEFAULT_TOL, EIGEN_TOL};
pub(crate) use state::bell_vector;
pub use state::{
    bell_state, expectation, expectation_complex, partial_trace_a, partial_trace_b, pauli,
    random_density_matrix, werner_state, DensityMatrix, Observable, Pauli,
};
