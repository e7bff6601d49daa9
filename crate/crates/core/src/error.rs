use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degree overflow: {0} + {1} > 4")]
    DegreeOverflow(usize, usize),

    #[error("invalid degree {degree} for {what}")]
    InvalidDegree { degree: usize, what: &'static str },

    #[error("not a definite triple: {0}")]
    NotDefinite(String),

    #[error("metric is not symmetric positive definite: {0}")]
    NotSpd(String),

    #[error("map is not calibrated (gap {gap:e} > tol {tol:e})")]
    NotCalibrated { gap: f64, tol: f64 },

    #[error("A = 0: no reconstruction exists")]
    ZeroMap,

    #[error("point {point:?} lies on the pole at {pole:?}")]
    AtPole { point: [f64; 3], pole: [f64; 3] },

    #[error("point {0:?} is not a pole of the configuration")]
    NotAPole([f64; 3]),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("GH triple not hyper-Kähler here: h = {0:e} <= 0")]
    NotHyperKahler(f64),

    #[error("invalid Ewald parameters: {0}")]
    Ewald(String),

    #[error("invalid integration region: {0}")]
    Region(String),

    #[error("invalid perturbation: {0}")]
    Perturbation(String),

    #[error("fit failed: {0}")]
    Fit(String),
}

pub type Result<T> = std::result::Result<T, Error>;
