use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,
    #[error("order statistic {k} out of range 1..={n}")]
    IndexOutOfRange { k: usize, n: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("dimension {0} is not supported here")]
    DimUnsupported(usize),
    #[error("projective denominator vanishes")]
    DenominatorVanishes,
    #[error("map is not invertible")]
    SingularMap,
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("invalid density: {0}")]
    InvalidDensity(String),
    #[error("density vanishes inside its support near {0}")]
    DensityVanishesInside(f64),
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    #[error("covariance matrix is singular")]
    SingularCovariance,
    #[error("aggregator incompatible with data: {0}")]
    IncompatibleAggregator(String),
    #[error("Jacobian is singular")]
    SingularJacobian,
    #[error("Jacobian is rank deficient")]
    RankDeficient,
    #[error("gradient vanishes")]
    VanishingGradient,
    #[error("unstable time step: {0}")]
    UnstableStep(String),
    #[error("curve became self-intersecting")]
    CurveSelfIntersection,
    #[error("density is not positive inside the support")]
    NonPositiveDensity,
}

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse { location: location.into(), message: message.into() }
    }

    /// True for errors caused by bad input rather than numerical breakdown.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::UnstableStep(_) | Error::CurveSelfIntersection | Error::Io(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
