use thiserror::Error;

/// Errors raised anywhere in the assembly, decomposition and evaluation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("precision of {0} bits is below the 53-bit minimum")]
    PrecisionTooLow(usize),

    #[error("square root of negative value {0:e}")]
    NegativeSqrt(f64),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("divergent moment: exponent {exponent} of variable {variable} is not greater than -1")]
    DivergentMoment { variable: usize, exponent: String },

    #[error("unknown basis family `{0}`")]
    UnknownBasis(String),

    #[error("basis family `{family}` is not defined in dimension {dim}")]
    UnsupportedDimension { family: String, dim: usize },

    #[error("basis must contain at least one function")]
    EmptyBasis,

    #[error("linearly dependent basis: non-positive Cholesky pivot {pivot:e} at index {index}")]
    DependentBasis { index: usize, pivot: f64 },

    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal residual {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },

    #[error("`{function}` is undefined at {values:?}")]
    Domain { function: String, values: Vec<f64> },

    #[error("matrix size mismatch: {left}x{left} vs {right}x{right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("product of zero factors")]
    EmptyProduct,

    #[error("matrix is not symmetric")]
    NotSymmetric,

    #[error("syntax error at byte {pos}: {message}")]
    Syntax { pos: usize, message: String },

    #[error("unknown identifier `{name}` at byte {pos}")]
    UnknownIdentifier { name: String, pos: usize },

    #[error("`{name}` at byte {pos} takes exactly one argument")]
    Arity { name: String, pos: usize },

    #[error("unresolved inner function `{0}`")]
    UnresolvedSymbol(String),

    #[error("`{0}` is applied to a non-symmetric product; enable symmetrization")]
    NonSymmetricArgument(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
