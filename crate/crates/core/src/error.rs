use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("E below vacuum energy 0.5 (got {0})")]
    BelowVacuumEnergy(f64),

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("covariance violates the uncertainty bound: alpha_q * alpha_p = {product} < 1/4")]
    InvalidCovariance { product: f64 },

    #[error("not normalized: total mass {mass}")]
    NotNormalized { mass: f64 },

    #[error("negative density value {value} at index {index}")]
    NegativeDensity { index: usize, value: f64 },

    #[error("density vanishes at index {index}; its logarithm is undefined")]
    ZeroDensity { index: usize },

    #[error("under-resolved on grid: {0}")]
    UnderResolved(String),

    #[error("heat kernel of variance {variance} does not fit the grid of half-width {half_width}")]
    KernelTooWide { variance: f64, half_width: f64 },

    #[error("grids do not match")]
    GridMismatch,

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason,
        }
    }
}
