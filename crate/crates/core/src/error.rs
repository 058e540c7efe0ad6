use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("stationarity violated: |rho| = {0} must be < 1")]
    Stationarity(f64),

    #[error("empty sample")]
    EmptySample,

    #[error("quantile not attained: p = {p} exceeds sup of the estimate ({sup})")]
    QuantileNotAttained { p: f64, sup: f64 },

    #[error("grid point {t} lies outside the admissible range [0, {tau}]")]
    OutOfRange { t: f64, tau: f64 },

    #[error("quadrature did not converge: estimate {estimate}, error {error} after {intervals} subintervals")]
    Quadrature { estimate: f64, error: f64, intervals: usize },

    #[error("covariance factorization failed (smallest eigenvalue {min_eigenvalue:e})")]
    Factorization { min_eigenvalue: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("row {row}: {message}")]
    MalformedRow { row: usize, message: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
