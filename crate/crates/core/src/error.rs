use thiserror::Error;

use crate::kinematics::EnergyZone;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad classification used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// The caller asked for something outside the domain of the model.
    Input,
    /// A numerical procedure failed on otherwise valid input.
    Numeric,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("energy {energy} lies within {tolerance:e} of the branch point {boundary}")]
    BranchPoint {
        energy: f64,
        boundary: f64,
        tolerance: f64,
    },

    #[error("energy {energy} is at or below the rest mass {mass}: no incident channel")]
    SubThresholdEnergy { energy: f64, mass: f64 },

    #[error("solver requires the {expected:?} zone but energy {energy} is in the {found:?} zone")]
    WrongZone {
        expected: EnergyZone,
        found: EnergyZone,
        energy: f64,
    },

    #[error("barrier width must be positive, got {0}")]
    NonpositiveWidth(f64),

    #[error("step size underflow at x = {x} (h = {step:e})")]
    StiffnessFailure { x: f64, step: f64 },

    #[error("asymptotic projection is ill-conditioned (condition estimate {0:e})")]
    ProjectionIllConditioned(f64),

    #[error("invalid smoothing sequence: {0}")]
    InvalidSequence(String),

    #[error("extrapolation did not converge: {0}")]
    NoConvergence(String),

    #[error("x-grid too narrow: {missing:e} of the norm lies outside at t = {time}")]
    GridTooNarrow { missing: f64, time: f64 },

    #[error("invalid packet: {0}")]
    InvalidPacket(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidParams(_)
            | Error::BranchPoint { .. }
            | Error::SubThresholdEnergy { .. }
            | Error::WrongZone { .. }
            | Error::NonpositiveWidth(_)
            | Error::InvalidSequence(_)
            | Error::InvalidPacket(_) => ErrorKind::Input,
            Error::StiffnessFailure { .. }
            | Error::ProjectionIllConditioned(_)
            | Error::NoConvergence(_)
            | Error::GridTooNarrow { .. } => ErrorKind::Numeric,
        }
    }
}
