//! Gapped Hamiltonian paths and quasi-adiabatic ground-space transport.
//!
//! Two generator modes are provided. The exact-spectral generator is the
//! parallel-transport form `K_ex(s) = i [P(s), dP/ds]` built from the
//! ground-space projector; it is the oracle. The filtered generator
//!
//! ```text
//!   K(s) = integral dt W_lambda(t) e^(i H t) H'(s) e^(-i H t)
//! ```
//!
//! uses an odd sign-generating kernel with a Gaussian taper, evaluated in
//! closed form through the Dawson function and calibrated so that the weight
//! at the gap frequency is exactly `1/lambda`. The filtered form is what the
//! quasi-locality machinery (the Delta^n decomposition and the patch
//! operators) is built on.

pub mod bounds;
mod delta;
mod filter;
mod generator;
mod patch;
mod path;

pub use bounds::{i_lambda, u_mu, u_mu_clamped};
pub use delta::{delta_decomposition, reconstruct_generator, DeltaDecomposition};
pub use filter::{dawson, QaFilter};
pub use generator::{
    exact_qa_generator, filtered_conjugation, filtered_conjugation_eig, filtered_qa_generator,
    filtered_qa_generator_local, intertwining_residual, transport, QaMode, TransportReport,
};
pub use patch::{circuit_from_path, patch_split, CircuitFromPathReport, PatchReport};
pub use path::{paths, HamiltonianPath};
