//! Error type shared by all modules.

use num_rational::BigRational;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("malformed rational: {0:?}")]
    BadRational(String),

    #[error("invalid interval [{left}, {right})")]
    BadInterval { left: String, right: String },

    #[error("invalid cut fractions: {0}")]
    BadCutFractions(String),

    #[error("stack widths differ: {0} vs {1}")]
    WidthMismatch(String, String),

    #[error("stacks overlap at {0}")]
    Overlap(String),

    #[error("invalid stack family: {0}")]
    BadFamily(String),

    #[error("point {0} outside [0,1)")]
    OutOfDomain(String),

    #[error("classical map is singular at q = {0}")]
    SingularPoint(String),

    #[error("program stage {stage}: {msg}")]
    Stage { stage: usize, msg: String },

    #[error("map on Z_N is not a bijection (image {image} hit twice)")]
    NonBijective { image: usize },

    #[error("observable support {0} exceeds the aliasing-free range |n| < {1}")]
    SupportExceedsN(i64, usize),

    #[error("dense oracle limited to N <= {limit}, got N = {n}; use the q-only path")]
    OracleLimit { n: usize, limit: usize },

    #[error("gluing policy failed: {0}")]
    Gluing(String),

    #[error("eigenpair family is incomplete: {got} of {want}")]
    IncompleteBasis { got: usize, want: usize },

    #[error("need at least {need} sweep points, got {got}")]
    ShortSweep { need: usize, got: usize },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn singular(q: &BigRational) -> Self {
        Error::SingularPoint(crate::util::fmt_ratio(q))
    }
}
