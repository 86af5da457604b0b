use thiserror::Error;

/// Errors from fractional-parameter validation and diffusive-grid construction.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("alpha must lie strictly inside (0, 1), got {0}")]
    AlphaOutOfRange(f64),
    #[error("eta must be nonnegative and finite, got {0}")]
    BadEta(f64),
    #[error("grid needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("xi window must satisfy 0 < xi_min < xi_max, got [{0}, {1}]")]
    BadWindow(f64, f64),
    #[error("grid calibration failed: max relative error {err:.3e} exceeds tolerance {tol:.3e}")]
    Calibration { err: f64, tol: f64 },
    #[error("lambda + eta must be positive, got {0}")]
    BadLambda(f64),
    #[error("time series too short: need at least {need} samples, got {got}")]
    SeriesTooShort { need: usize, got: usize },
    #[error("integral order must lie in (0, 1], got {0}")]
    BadOrder(f64),
}

/// Errors from relaxation-kernel construction.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("g0 must be nonnegative and finite, got {0}")]
    BadG0(f64),
    #[error("kappa must be positive and finite, got {0}")]
    BadKappa(f64),
    #[error("residual mass l = 1 - g0/kappa must be positive, got {0}")]
    NonpositiveResidual(f64),
    #[error("convolution history is empty")]
    EmptyHistory,
    #[error("field length {got} does not match accumulator grid {want}")]
    GridMismatch { want: usize, got: usize },
}

/// Configuration parsing and validation errors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid config: {0}")]
    Validation(String),
}

/// Errors from trajectory diagnostics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiagnosticsError {
    #[error("series window too short: {0}")]
    WindowTooShort(String),
    #[error("decay fit requires strictly positive energies on the window")]
    NonpositiveEnergy,
    #[error("eigen iteration did not converge within {0} iterations")]
    NoConvergence(usize),
    #[error("domain constants require eta > 0")]
    EtaRequired,
    #[error("series is empty")]
    EmptySeries,
}

/// Umbrella error for the whole crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
}
