use thiserror::Error;

use crate::exprlang::ExprError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("metric is singular or ill-conditioned (condition number {condition:.3e})")]
    SingularMetric { condition: f64 },
    #[error("matrix is not symmetric (max asymmetry {asymmetry:.3e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("analytic derivatives of order {order} are not available for this metric")]
    DerivativeUnavailable { order: usize },
    #[error("metric is not positive definite; curvature requires a Riemannian metric")]
    NotPositiveDefinite,
    #[error("warp function must be positive, got {value} at {at:?}")]
    NonPositiveWarp { value: f64, at: Vec<f64> },
    #[error("epsilon must be nonzero")]
    ZeroEpsilon,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite coordinate in point {0:?}")]
    NonFinitePoint(Vec<f64>),
    #[error("leading symbol is not elliptic (positive definite)")]
    NotElliptic,
    #[error("truncation floor {requested} lies below what derivative order <= 2 can resolve (min {supported})")]
    TruncationTooDeep { requested: i32, supported: i32 },
    #[error("symbols live in different frames or dimensions: {0}")]
    FrameMismatch(String),
    #[error("residue density has imaginary part {imag:.3e}")]
    ImaginaryResidue { imag: f64 },
    #[error("total dimension m + n = {0} is odd")]
    OddTotalDimension(usize),
    #[error("quadrature did not converge: doubling nodes moved the total from {coarse} to {fine}")]
    QuadratureUnconverged { coarse: f64, fine: f64 },
    #[error("expression error: {0}")]
    Expr(#[from] ExprError),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
