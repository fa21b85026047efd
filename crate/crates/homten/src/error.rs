use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("even grid size unsupported: N = {0}")]
    EvenGridSize(usize),
    #[error("non-finite entries in input")]
    NonFinite,
    #[error("shape mismatch: {0:?} vs {1:?}")]
    ShapeMismatch(Vec<usize>, Vec<usize>),
    #[error("format mismatch: {0} vs {1}")]
    FormatMismatch(&'static str, &'static str),
    #[error("CP construction for d>=3 not supported")]
    CpHighOrder,
    #[error("requested rank must be at least 1")]
    ZeroRank,
    #[error("singular values must be non-negative and non-increasing")]
    BadSingularValues,
    #[error("dense size {0} exceeds cap {1}")]
    DenseCap(usize, usize),
    #[error("spatial dimension {0} unsupported; expected 2 or 3")]
    BadDimension(usize),
    #[error("input is not zero-mean: |coefficient at k=0| = {0:.3e}")]
    NotZeroMean(f64),
    #[error("oversampling grid of {0} points per axis exceeds cap {1}; reduce N")]
    OversamplingCap(usize, usize),
    #[error("minimal-residual breakdown: residual lies in the operator kernel")]
    Breakdown,
    #[error("negative curvature in conjugate gradients; operator is not positive definite")]
    IndefiniteOperator,
    #[error("Richardson iteration on low-rank tensors requires allow_lowrank_richardson")]
    LowRankRichardson,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("serialised tensor is malformed: {0}")]
    BadContainer(String),
    #[error("io error at {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
