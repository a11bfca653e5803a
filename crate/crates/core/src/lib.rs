//! Dissipative quantum dynamics at desk scale.
//!
//! This crate provides the numerical substrate for studying which many-body
//! states can be driven into which others by *fast*, local, time-independent
//! Lindbladian evolution:
//!
//! - [`qstate`] — complex linear algebra on lattices: states, local operators,
//!   embeddings, partial traces, norms, and a sparse monomial/CSR layer.
//! - [`lindblad`] — Lindbladian assembly, dense superoperators, matrix
//!   exponentials, adaptive integration, Heisenberg duals, channel
//!   diagnostics, and convergence-rate fits.
//! - [`timer`] — the dissipative clock gadget: a birth chain over `T+1`
//!   levels whose top-level occupation flips a switch near `tau = T/gamma`,
//!   with exact occupation statistics and tail bounds.
//! - [`switchgear`] — switch-controlled composite evolutions realizing
//!   piecewise-constant generators with a time-independent Lindbladian, and
//!   the compilation of finite-depth circuits into such composites.
//! - [`quasiadiabatic`] — gapped Hamiltonian paths, ground-space transport
//!   generators (exact-spectral and filtered), quasi-locality decompositions,
//!   and patch-operator circuit splittings.
//! - [`models`] — product-state drivers, GHZ families and their condensation
//!   channel, Z_n quantum doubles on small tori, and symmetry-covariant
//!   drivers for 1D SPT representatives.
//! - [`nogo`] — operator-fattening diagnostics: light-cone probes,
//!   overlap-matrix rank witnesses, ground-space residuals, and the Schwarz
//!   multiplicative-defect check.
//!
//! Everything is dense-first and exact-oracle-driven: full Hilbert spaces up
//! to a few thousand dimensions, with block/sparse representations where the
//! structure makes that exact (classical timer registers, monomial stabilizer
//! operators).

pub(crate) mod blas;
pub mod error;
pub mod lindblad;
#[cfg(test)]
pub(crate) mod test_util;
pub mod models;
pub mod nogo;
pub mod policy;
pub mod qstate;
pub mod quasiadiabatic;
pub mod switchgear;
pub mod timer;

pub use error::{Error, Result};
pub use policy::NumericPolicy;
pub use qstate::{CMat, CVec, C64};
