//! Complex linear-algebra substrate: lattices, states, local operators,
//! embeddings, partial traces, and norms.
//!
//! Conventions used across the whole crate:
//!
//! - Site 0 is the leftmost (slowest) Kronecker factor. A full-space index
//!   decomposes as mixed-radix digits over sites in ascending order.
//! - Local operators carry their support as a sorted site list; their matrix
//!   is over the tensor product of those sites in ascending order.
//! - `vec` is column-stacking: `vec(A rho B) = (B^T (x) A) vec(rho)`.

pub mod dense;
pub mod geometry;
pub mod ket;
pub mod local;
pub mod sparse;
pub mod spectral;

pub use dense::{
    apply_local_left, apply_local_right, commutator, dagger, embed, hermitize, identity,
    is_hermitian, kron_list, one_norm, operator_norm, partial_trace, trace, trace_distance,
    trace_norm, unvec_col, vec_col, SupportMap,
};
pub use geometry::{LatticeGeometry, LatticeKind};
pub use ket::{
    apply_local_to_ket, basis_ket, fidelity_pure, inner, ket_from_digits, normalize, outer,
    tensor_kets,
};
pub use local::LocalOperator;
pub use sparse::{CsrMatrix, MonomialOp};
pub use spectral::{eigh, eigvalsh, expm_i_hermitian, func_hermitian, low_eigenspace_projector, min_eigval};

pub use num_complex::Complex64 as C64;

/// Dense complex matrix.
pub type CMat = ndarray::Array2<C64>;
/// Dense complex vector.
pub type CVec = ndarray::Array1<C64>;
