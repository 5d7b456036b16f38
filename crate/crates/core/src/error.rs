use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("index {index} out of range for {bound} columns")]
    IndexOutOfRange { index: usize, bound: usize },

    #[error("non-finite entry at position {0}")]
    NonFinite(usize),

    #[error("rank deficiency at column {column}: pivot {pivot:e} below tolerance")]
    RankDeficient { column: usize, pivot: f64 },

    #[error("least-squares solve on support {support:?} is rank deficient (pivot {pivot:e})")]
    RankDeficientSupport { support: Vec<usize>, pivot: f64 },

    #[error("eigenvalue iteration did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is not RIP of order {k}: delta = {delta} >= 1")]
    NotRip { k: usize, delta: f64 },

    #[error("C(N, k) = {subsets} exceeds the enumeration limit {limit}; use rip_sampled instead")]
    EnumerationLimit { subsets: u128, limit: u128 },

    #[error("bound checks require an exhaustive RIP certificate")]
    SampledCertificate,

    #[error("{inequality} violated: observed {observed} against bound {bound}")]
    LemmaViolation {
        inequality: &'static str,
        observed: f64,
        bound: f64,
        witness: Vec<f64>,
    },

    #[error("residual proxy vanished")]
    ProxyVanished,

    #[error("residual vanished")]
    ResidualVanished,

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
