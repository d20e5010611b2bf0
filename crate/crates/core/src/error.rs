use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("modulus `{0}` is not integrable near 0")]
    NonIntegrableModulus(String),

    #[error("{name} = {value} is outside {expected}")]
    Domain {
        name: &'static str,
        value: f64,
        expected: String,
    },

    #[error("quadrature did not converge on [{a}, {b}] (error estimate {abs_err:e})")]
    Quadrature { a: f64, b: f64, abs_err: f64 },

    #[error("bound `{bound}` violated at r = {at}: margin {margin:e}")]
    BoundViolation {
        bound: &'static str,
        at: f64,
        margin: f64,
    },

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("Isaacs family has no members")]
    EmptyFamily,

    #[error("CFL violated at t = {t}: dt * stencil weight = {value} > {limit}")]
    CflViolation { t: f64, value: f64, limit: f64 },

    #[error("cross-derivative stencil not monotone at x = {x:?}: q = {q:?} is not diagonally dominant; refine the grid or rotate the fixture")]
    NonMonotoneStencil { x: Vec<f64>, q: Vec<f64> },

    #[error("unsupported oracle kind `{0}`")]
    UnsupportedKind(String),

    #[error("interior margin {margin} leaves no interior nodes")]
    NoInteriorNodes { margin: f64 },

    #[error("ball B({radius}) around {center:?} leaves the interior subgrid")]
    BallOutsideGrid { center: Vec<f64>, radius: f64 },

    #[error("coupling matrix undefined for coincident points")]
    CoincidentPoints,

    #[error("increment {increment} on path {path} exceeds {limit}; reduce dt")]
    StepTooLarge {
        path: usize,
        increment: f64,
        limit: f64,
    },

    #[error("sample point lies on the diagonal x = y")]
    SamplePointOnDiagonal,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    Invalid(String),
}
