use thiserror::Error;

/// Result type used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced while building models or running solvers.
#[derive(Debug, Error)]
pub enum Error {
    /// Model parameters violate a precondition (non-positive coupling,
    /// undersized lattice, field vector of the wrong length, ...).
    #[error("invalid model: {0}")]
    InvalidSpec(String),

    /// Site index outside `0..N`.
    #[error("site index {index} out of range for {sites} sites")]
    IndexOutOfRange { index: usize, sites: usize },

    /// Problem size exceeds the configured cap (dense storage or the
    /// exact-diagonalization site limit).
    #[error("problem with {sites} sites exceeds cap of {cap}")]
    ResourceLimit { sites: usize, cap: usize },

    /// The eigensolver failed; carries condition diagnostics.
    #[error("eigensolver failure: {0}")]
    Eigensolver(String),

    /// A mode-truncation policy retained no modes.
    #[error("truncation policy retained zero modes")]
    EmptyTruncation,

    /// An operation that requires finite temperature was called at the
    /// zero-temperature sentinel (`beta = inf`).
    #[error("operation requires finite beta; use the zero-temperature path")]
    InfiniteBeta,

    /// Root finder or ascent failed to converge.
    #[error("solver did not converge: {0}")]
    NonConvergence(String),

    /// The fluctuation denominator `1 - 2 Y D_k` became non-positive:
    /// the evaluation point is at or past the transition on an unstable branch.
    #[error("susceptibility pole: 1 - 2 Y D_k = {value:.3e} at mode {mode}")]
    CriticalPole { mode: usize, value: f64 },

    /// Hessian eigenvalue vanished; maximum is degenerate.
    #[error("degenerate Hessian eigenvalue at mode {0}")]
    DegenerateHessian(usize),

    /// Power-law fit requested over a window containing non-positive data.
    #[error("fit domain error: {0}")]
    FitDomain(String),

    /// Malformed configuration file or missing/invalid key.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors that stem from a bad configuration rather than a
    /// numerical failure (used by the CLI to pick exit codes).
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::InvalidSpec(_))
    }
}
