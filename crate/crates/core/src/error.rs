use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("section shape mismatch: (m, k) = ({m_a}, {k_a}) vs ({m_b}, {k_b})")]
    SectionShape {
        m_a: usize,
        k_a: usize,
        m_b: usize,
        k_b: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("zero vector cannot be normalized")]
    ZeroVector,

    #[error("tangent vector of norm {norm} lies outside the chart domain (limit {limit})")]
    OutsideChart { norm: f64, limit: f64 },

    #[error("chart rejected: sampled distortion {measured} >= declared gamma {declared}")]
    ChartRejected { measured: f64, declared: f64 },

    #[error("covering defect {defect} exceeds allowed slack {delta}")]
    Covering { defect: f64, delta: f64 },

    #[error("lattice spacing {a} violates {rule}: need more than {bound}")]
    Spacing { a: f64, bound: f64, rule: &'static str },

    #[error("frame is empty")]
    EmptyFrame,

    #[error("Neumann series diverges: off-diagonal row sum {eta_hat} >= 1")]
    Divergence { eta_hat: f64 },

    #[error("Gram matrix not positive definite: smallest eigenvalue {min_eigenvalue}")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("root bracket failure for {0}")]
    Bracket(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("incompatible manifests: {0}")]
    Incompatible(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
