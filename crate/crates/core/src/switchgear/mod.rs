//! Switch-controlled composite Lindbladians.
//!
//! A composite couples a system Lindbladian to dissipative timers so that the
//! *time-independent* joint generator realizes a piecewise-constant schedule
//! of stage generators on the system: stage `a` acts while the controlling
//! register sits in its level band. The production representation keeps the
//! timers as classical registers (the composite state is block-diagonal over
//! register configurations); the literal qubit-gadget form is built alongside
//! as a validation oracle at small `T`.

mod circuit;
mod composite;
mod gadget;
mod sequential;

pub use circuit::{compile_circuit, log_unitary, CircuitSchedule, Gate, GateLayer};
pub use composite::{
    build_switched, Attachment, CompositeState, ErrorBudget, SwitchedLindbladian, SwitchedRun,
    SwitchedTerm,
};
pub use gadget::{
    band_factorization_residual_compressed, band_factorization_residual_gadget,
    gadget_band_projector, gadget_lindbladian, midband_commutation_residual,
    register_band_projector,
};
pub use sequential::sequential_oracle;
