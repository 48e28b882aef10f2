use thiserror::Error;

/// Errors produced while building models and certificates.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid signal: {0}")]
    InvalidSignal(String),

    #[error("invalid quadrature grid: {0}")]
    InvalidGrid(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("pendulum reduction needs amplitude a < length l (a = {a}, l = {l})")]
    AmplitudeTooLarge { a: f64, l: f64 },

    #[error("no global quadratic remainder bound exists for {0}; a radius rho is required")]
    NoGlobalRemainderBound(&'static str),

    #[error("matrix is not Hurwitz (trace = {trace}, det = {det})")]
    NotHurwitz { trace: f64, det: f64 },

    #[error("averaging transform degenerates: 1 + mu*a(t) = {value} at t = {t}")]
    DegenerateTransform { t: f64, value: f64 },

    #[error("monodromy spectral radius {0} is not below 1")]
    NotAsymptoticallyStable(f64),

    #[error("singular matrix (det = {0:e})")]
    Singular(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
