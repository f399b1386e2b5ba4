//! Dense complex linear algebra: Hermitian eigendecomposition, spectral
//! exponentials, tensor products, partial traces and trace distance.
//!
//! Tensor-factor convention: the system S is always the left (slow) factor,
//! so the basis index of `|s> (x) |e>` is `s * d_E + e`.

mod eig;
mod matrix;
mod operator;
pub mod random;

pub use eig::{
    check_hermitian, eig_hermitian_matrix, hermitian_eigenvalues, EigDecomposition,
    HERMITIAN_TOLERANCE, MAX_SWEEPS, OFF_DIAGONAL_TOLERANCE,
};
pub use matrix::{inner, vec_norm, CMatrix, C64, ONE, ZERO};
pub use operator::{
    eig_hermitian, embed_env, embed_system, partial_trace, partial_trace_matrix, pauli_x,
    pauli_y, pauli_z, tensor, tensor_states, trace_distance, unitary_exp, Dims, Propagator,
    QOperator, QState, Subsystem, POSITIVITY_TOLERANCE, TRACE_TOLERANCE,
};

pub(crate) use operator::same_dims;

/// `max_eig - min_eig` of a Hermitian operator.
pub fn spectral_gap(h: &QOperator) -> crate::error::Result<f64> {
    let e = eig_hermitian(h)?;
    Ok(e.max() - e.min())
}
