//! Fattened-logical-operator diagnostics.
//!
//! The no-go argument is asymptotic; at desk scale these are witness
//! experiments: with no noise every probe collapses to an exact ground-space
//! algebra identity (overlap Gram = reference, Schwarz defect = 0, residuals
//! = 0), and under noise the witnesses degrade monotonically in rate, time,
//! and fattening radius.

mod fatten;
mod lightcone;
mod overlap;

pub use fatten::{fatten, fatten_with_driver, FattenedOperator};
pub use lightcone::{lr_probe, LightConeReport, LrFit};
pub use overlap::{ghz_nogo_probe, ghz_parent_energy, overlap_probe, schwarz_inequality_defect, GhzNogoReport, OverlapReport};
