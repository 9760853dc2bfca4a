use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported grading order p = {0} (p must be at least 1)")]
    UnsupportedGrading(usize),

    #[error("invalid twist roots: {0}")]
    InvalidRoots(String),

    #[error("elements belong to different algebras ({0} vs {1})")]
    Incompatible(u64, u64),

    #[error("side violation: {0}")]
    SideViolation(String),

    #[error("grading error: {0}")]
    Grading(String),

    #[error("numeric overflow: {0}")]
    NumericOverflow(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("invalid group data: {0}")]
    InvalidGroup(String),

    #[error("constraint violation: {0}")]
    ConstraintViolation(String),

    #[error("background functional is not strictly positive (min eigenvalue {0:e})")]
    StrictPositivity(f64),

    #[error("background functional does not factorize (deviation {0:e}); coupling extraction is unavailable")]
    NonFactorizing(f64),

    #[error("decomposition unavailable: J0 has eigenvalue {0:e}")]
    DecompositionUnavailable(f64),

    #[error("resource guard: {0}")]
    Resource(String),

    #[error("invalid field variables: {0}")]
    InvalidField(String),

    #[error("invalid model parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("cannot quantize: Gram block of degree {degree} has eigenvalue {min_eig:e}")]
    NotReflectionPositive { degree: usize, min_eig: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param(field: &str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field: field.to_string(),
        reason: reason.into(),
    }
}
