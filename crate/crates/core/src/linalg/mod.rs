//! Dense complex linear algebra for small bipartite systems.

pub mod bipartite;
pub mod eig;
pub mod matrix;
pub mod two_qubit;

pub use bipartite::{operator_abs, partial_transpose, schmidt_coefficients, trace_norm, BipartiteOperator, Side};
pub use eig::{eigenvalues, hermitian_eig, hermitian_eig_with, min_eigenvalue, EigenSystem};
pub use matrix::{inner, norm, norm_sqr, normalized, ComplexMatrix};
pub use two_qubit::{flip, pauli_x, pauli_y, pauli_z, paulis, tilde_local, tilde_state};
