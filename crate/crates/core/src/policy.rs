/// Centralized numeric tolerances and dense-regime guards.
///
/// Every module reads its tolerances from here so that test expectations are
/// reproducible from one place.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericPolicy {
    /// Absolute tolerance for algebraic identities (commutators, adjoints,
    /// exact reconstructions).
    pub tol_algebra: f64,
    /// Absolute tolerance for integrated dynamics (trajectories, transported
    /// states, channel duality).
    pub tol_dynamics: f64,
    /// Largest Hilbert-space dimension handled with dense matrices.
    pub dense_guard: usize,
    /// Largest Hilbert-space dimension for which the D^2 x D^2 superoperator
    /// is assembled densely. Above this, use the matrix-free integrator.
    pub superop_guard: usize,
    /// Default local error target for the adaptive integrator.
    pub ode_tol: f64,
}

impl Default for NumericPolicy {
    fn default() -> Self {
        NumericPolicy {
            tol_algebra: 1e-10,
            tol_dynamics: 1e-8,
            dense_guard: 1 << 13,
            superop_guard: 64,
            ode_tol: 1e-10,
        }
    }
}
