use thiserror::Error;

/// Errors raised by the analysis pipeline.
///
/// Verification failures are not errors: they are reported as data in the
/// various report types. Errors here mean an operation could not produce a
/// meaningful result at all.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DvError {
    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),

    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),

    #[error("polynomial is not essentially T^2-symmetric")]
    NotSymmetric,

    #[error("fiber degenerate at z = {0}")]
    FiberDegenerate(String),

    #[error("zero on fiber circle at z = {0}")]
    ZeroOnFiberCircle(String),

    #[error("quadrature unresolved, increase quad_points ({0})")]
    QuadratureUnresolved(String),

    #[error("zero on torus: {0}")]
    ZeroOnTorus(String),

    #[error("subspace degenerate: {0}")]
    SubspaceDegenerate(String),

    #[error("polynomial has zeros in the bidisk: {0}")]
    NotStable(String),

    #[error("reflected-derivative combination vanishes: {0}")]
    ReflectedDerivativeVanishes(String),

    #[error("insufficient span: {0}")]
    InsufficientSpan(String),

    #[error("isometry violated: {0}")]
    IsometryViolated(String),

    #[error("unimodular D eigenvalue: {0}")]
    UnimodularDEigenvalue(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("not a distinguished variety: {0}")]
    NotDistinguished(String),

    #[error("polynomial is not squarefree: {0}")]
    NotSquarefree(String),

    #[error("theorem violation: {0}")]
    TheoremViolation(String),

    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

pub type Result<T> = std::result::Result<T, DvError>;
