use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("singular potential: distance {distance:e} below threshold")]
    Singular { distance: f64 },
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("estimation failed: {0}")]
    EstimationFailed(String),
    #[error("sign-dominated estimate: mean denominator {mean:e} is within two standard errors ({std_error:e}) of zero")]
    SignDominated { mean: f64, std_error: f64 },
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error("refusing permutation sum for n = {n}: n! terms per sample is too many (limit n <= {max}); use the determinant estimator instead")]
    TooManyParticles { n: usize, max: usize },
    #[error("precision error: {0}")]
    Precision(String),
}

pub type Result<T> = std::result::Result<T, Error>;
