use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure mode of the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("antisymmetry violated for brackets of {a:?} and {b:?}")]
    AntisymmetryViolation { a: (usize, usize), b: (usize, usize) },
    #[error("grading violated: [{a:?}, {b:?}] has output in layer {out_layer}")]
    GradingViolation {
        a: (usize, usize),
        b: (usize, usize),
        out_layer: usize,
    },
    #[error("Jacobi identity fails on basis triple {triple:?}")]
    JacobiViolation { triple: [(usize, usize); 3] },
    #[error("not bracket-generating: rank of phi_{layer} is {rank} < {dim}")]
    NotBracketGenerating { layer: usize, rank: usize, dim: usize },
    #[error("unknown algebra family `{0}`")]
    UnknownFamily(String),
    #[error("unsupported parameters: {0}")]
    UnsupportedParams(String),
    #[error("vector does not belong to this algebra (expected {expected} coordinates, got {got})")]
    AlgebraMismatch { expected: usize, got: usize },
    #[error("layer {layer} out of range 1..={step}")]
    LayerOutOfRange { layer: usize, step: usize },
    #[error("dilation factor must be positive")]
    NonpositiveScale,
    #[error("product of zero factors")]
    EmptyProduct,
    #[error("iterated commutator needs at least 2 arguments, got {0}")]
    ArityTooSmall(usize),
    #[error("commutator arity {arity} outside 2..={step}")]
    ArityOutOfRange { arity: usize, step: usize },
    #[error("work {work} exceeds cap {cap}")]
    CapExceeded { work: u128, cap: u128 },
    #[error("radius must be positive")]
    NonpositiveRadius,
    #[error("basis is singular")]
    SingularBasis,
    #[error("Malcev basis is not filtration-adapted: {0}")]
    NotFiltrationAdapted(String),
    #[error("enumeration exceeded {cap} elements")]
    ExplosionGuard { cap: usize },
    #[error("epsilon recursion failed at level {level}: {reason}")]
    RecursionFailure { level: usize, reason: String },
    #[error("certificate check failed: {0}")]
    Certificate(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
