use thiserror::Error;

/// Failures raised by the numerical pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("gamma function pole at z = {0}")]
    GammaPole(f64),
    #[error("zero base in complex power")]
    ZeroBase,
    #[error("cannot sum an empty list of terms")]
    EmptySum,
    #[error("invalid parameters: {0}")]
    InvalidParameter(String),
    #[error("prefactor 1 - 2^(1-s) vanishes (|1 - 2^(1-s)| = {0:e})")]
    PrefactorSingular(f64),
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("phase function singular at w = {re} + {im}i")]
    Singularity { re: f64, im: f64 },
    #[error("degenerate saddle{}", .0.map(|(a, b)| format!(" (saddles {a} and {b} coalescing)")).unwrap_or_default())]
    DegenerateSaddle(Option<(usize, usize)>),
    #[error("saddle {k} left its index band (Im w = {im})")]
    IndexBand { k: usize, im: f64 },
    #[error("step failure while tracing from saddle {k}: {reason}")]
    StepFailure { k: usize, reason: String },
    #[error("no escaping descent path among the first {0} saddles")]
    NoEscape(usize),
    #[error("tracer failure: {0}")]
    Tracer(String),
    #[error("last contributory index jumps from {from} to {to} near a = {at}")]
    StokesRange { from: usize, to: usize, at: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
