use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported weight {0}: available one-dimensional weights are 12, 16, 18, 20, 22, 26")]
    UnsupportedWeight(u32),

    #[error("unsupported Eisenstein index {0}: supported k are 4, 6, 8, 10, 14")]
    UnsupportedEisenstein(u32),

    #[error("precision {have} too small: {need} coefficients required for {what}")]
    PrecisionShortfall {
        have: usize,
        need: usize,
        what: String,
    },

    #[error("exact division failed: coefficient of q^{index} is not divisible by {divisor}")]
    InexactDivision { index: usize, divisor: i64 },

    #[error("derivative order {0} exceeds the supported maximum {1}")]
    DerivativeOrder(u32, u32),

    #[error("quadrature tolerance not reached after {panels} panels (best {value}, error estimate {error:.3e})")]
    QuadratureTolerance {
        value: Complex64,
        error: f64,
        panels: usize,
    },

    #[error("arguments {a} and {q} are not coprime")]
    NotCoprime { a: i64, q: u32 },

    #[error("delta kernel calibration failed: non-positive weight sum {0}")]
    Calibration(f64),

    #[error("dual-sum tail {tail:.3e} above tolerance {tol:.3e} after {terms} terms")]
    TailAboveTolerance { tail: f64, tol: f64, terms: usize },

    #[error("grid too small: {have} points, at least {need} required for {what}")]
    GridTooSmall {
        have: usize,
        need: usize,
        what: String,
    },

    #[error("projected cost {projected} terms exceeds stage budget {budget}")]
    BudgetExceeded { projected: u64, budget: u64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("coefficient cache rejected: {0}")]
    CacheRejected(String),

    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}
