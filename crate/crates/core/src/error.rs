use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("outside Xi: potential energy vanishes (|V| = {0:e})")]
    OutsideXi(f64),

    #[error("not a snapshot")]
    NotASnapshot,

    #[error("unsupported version {0}")]
    UnsupportedVersion(u32),

    #[error("snapshot dimension mismatch: {0}")]
    SnapshotDimension(String),

    #[error("truncated snapshot payload: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },

    #[error("ground state iteration did not converge after {iterations} iterations (change {change:e}, residual {residual:e})")]
    NonConvergence {
        iterations: usize,
        change: f64,
        residual: f64,
    },

    #[error("collapse to zero")]
    Collapse,

    #[error("negative-part excess: minimum node value {0:e}")]
    NegativeExcess(f64),

    #[error("shooting bracket failure: {0}")]
    BracketFailure(String),

    #[error("dt exceeds stability cap ({dt:e} > {cap:e})")]
    StabilityCap { dt: f64, cap: f64 },

    #[error("blow-up detected at t = {0}")]
    BlowUp(f64),

    #[error("cannot normalize: energy {0:e} is not positive")]
    CannotNormalize(f64),

    #[error("normalization post-check failed: |M - E| / M = {0:e}")]
    NormalizationCheck(f64),

    #[error("cutoff parameter epsilon = {0} outside (0.01, 0.5)")]
    EpsilonRange(f64),

    #[error("support overflow: R = {radius} exceeds box half-width / 4 = {limit}")]
    SupportOverflow { radius: f64, limit: f64 },

    #[error("interval out of range: {0}")]
    IntervalOutOfRange(String),

    #[error("trajectory span too short: {0}")]
    SpanTooShort(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
