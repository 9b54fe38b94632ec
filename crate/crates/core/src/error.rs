use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("weights must be non-increasing for this operation")]
    Unordered,

    #[error("invalid exponent: {0}")]
    InvalidExponent(String),

    #[error("exponent q = {0} is an even integer; use the smoothness route")]
    EvenIntegerExponent(f64),

    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("{what}: n = {n} exceeds the supported maximum {max}")]
    TooLarge { what: &'static str, n: usize, max: usize },

    #[error("unsupported parity: no closed-form one-dimensional transform for even n = {0}")]
    UnsupportedParity(usize),

    #[error("point is not in G: axis margin {margin_axes:e}, diagonal margin {margin_diag:e}, tolerance {tol:e}")]
    OutsideG {
        margin_axes: f64,
        margin_diag: f64,
        tol: f64,
    },

    #[error("the transform value is not real for even dimension {0}")]
    ComplexResult(usize),

    #[error("singular input: {0}")]
    SingularInput(String),

    #[error("weights are not an arithmetic progression (relative defect {defect:e})")]
    NotArithmeticProgression { defect: f64 },

    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e} after {subdivisions} subdivisions")]
    QuadratureNonConvergence {
        estimate: f64,
        error: f64,
        subdivisions: usize,
    },

    #[error("tail bound {bound:e} exceeds the budget {budget:e}")]
    TailBudget { bound: f64, budget: f64 },

    #[error("bump support violates the domain: {0}")]
    BumpSupport(String),

    #[error("eigen-solver did not converge: residual {residual:e} exceeds {limit:e}")]
    EigenNonConvergence { residual: f64, limit: f64 },

    #[error("degenerate face: {0}")]
    DegenerateFace(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for failures of a numerical routine (quadrature, eigen-solver,
    /// tail budget) as opposed to bad input.
    pub fn is_numeric_failure(&self) -> bool {
        matches!(
            self,
            Error::QuadratureNonConvergence { .. }
                | Error::TailBudget { .. }
                | Error::EigenNonConvergence { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
