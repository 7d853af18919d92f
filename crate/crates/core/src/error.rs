use thiserror::Error;

/// Failures raised by model validation and the numerical pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("initial distribution is not a probability vector: {0}")]
    SimplexViolation(String),
    #[error("hyperexponential rates must be strictly increasing and positive: {0}")]
    NonIncreasingRates(String),
    #[error("phase-type generator is not a valid nonsingular sub-generator: {0}")]
    SingularGenerator(String),
    #[error("sigma = 0 requires a strictly positive drift (got mu = {mu}); negative subordinators are not supported")]
    NegativeSubordinator { mu: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("evaluation at or too close to a pole at s = {pole}")]
    PoleEvaluation { pole: f64 },
    #[error("root bracketing failed: {0}")]
    BracketingFailure(String),
    #[error("repeated roots detected near {location}; supply multiplicities explicitly")]
    RepeatedRootsDetected { location: f64 },
    #[error("exponent {exponent} coincides with a jump rate")]
    ExponentAtPole { exponent: f64 },
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),
    #[error("model file error: {0}")]
    ModelFile(String),
}

pub type Result<T> = std::result::Result<T, Error>;
