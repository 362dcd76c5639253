use thiserror::Error;

use crate::forcefield::CrossSection;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point ({r}, {z}) lies outside the {cross_section} cross-section")]
    OutsideDomain { r: f64, z: f64, cross_section: CrossSection },

    #[error("unsupported aspect ratio W/H = {0} (only 2 and 1/2 are modelled)")]
    UnsupportedAspectRatio(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("step size underflow at t = {t}, (r, z) = ({r}, {z}); implicit fallback also failed")]
    Stiffness { t: f64, r: f64, z: f64 },

    #[error("step limit of {steps} reached at t = {t}, (r, z) = ({r}, {z})")]
    StepLimit { steps: usize, t: f64, r: f64, z: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Stiffness { .. } | Error::StepLimit { .. })
    }
}
