use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unknown sites: {0:?} not in geometry")]
    UnknownSites(Vec<usize>),

    #[error("dense guard exceeded: dimension {dim} > guard {guard}; {advice}")]
    DenseGuard {
        dim: usize,
        guard: usize,
        advice: &'static str,
    },

    #[error("negative evolution time {0}: the dissipative semigroup is not invertible")]
    NegativeTime(f64),

    #[error("gap collapse at s = {s}: gap {gap:.3e} below tolerance {tol:.3e}")]
    GapCollapse { s: f64, gap: f64, tol: f64 },

    #[error("step size underflow at t = {t:.6e} (h = {h:.3e}); stiffness estimate |rhs|/|y| ~ {rate:.3e}")]
    StepSizeUnderflow { t: f64, h: f64, rate: f64 },

    #[error("filter tail bound {tail:.3e} exceeds budget {budget:.3e}; increase t_cut")]
    FilterTail { tail: f64, budget: f64 },

    #[error("system term over {support:?} has no attached timer")]
    UnattachedTerm { support: Vec<usize> },

    #[error("gates {0} and {1} in the same layer have overlapping supports")]
    OverlappingGates(usize, usize),

    #[error("linear algebra backend failure: {0}")]
    Linalg(String),

    #[error("{0}")]
    Invalid(String),
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}
