//! Model states and channels: product-state drivers, GHZ families and their
//! condensation channel, Z_n quantum doubles on small tori, and 1D SPT
//! representatives with symmetry-covariant drivers.

pub mod double;
pub mod ghz;
mod product;
pub mod spt;

pub use double::{basis_generation_check, x_tilde, z_tilde, GenerationReport, QuantumDouble};
pub use ghz::{condensation_channel, condensation_driver, ghz_ket_levels, GhzFamily};
pub use product::{product_driver, product_state, SiteChannel, SiteChannelDriver};
pub use spt::{
    covariance_residual, pair_chain_ket, pauli_projective_rep, psi_plus_ket, trivial_rep,
    SptBridge, SymmetryRep,
};
