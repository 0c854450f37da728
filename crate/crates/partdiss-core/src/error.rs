//! Crate-wide error type.

use alloc::string::String;
use core::fmt;

/// Errors reported by construction, validation, and stepping routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Spatial dimension outside {1, 2}.
    UnsupportedDim(usize),
    /// Collocation grid has fewer points per axis than retained modes.
    GridTooCoarse { modes: usize, grid: usize },
    /// A scalar parameter is outside its admissible range.
    InvalidParam { name: &'static str, value: f64, expected: &'static str },
    /// Two fields (or a field and an operator) belong to different bases.
    BasisMismatch,
    /// A time is not a multiple of the noise step within tolerance.
    NonCommensurate { t: f64, h: f64 },
    /// A time or step index leaves the realized noise horizon.
    OutOfHorizon { t: f64, t_min: f64, t_max: f64 },
    /// An explicit covariance list does not cover the basis modes.
    CovarianceLength { expected: usize, got: usize },
    /// Exact diagonal OU initialization requested with non-constant damping.
    NonConstantDamping,
    /// Burn-in window does not fit inside the noise horizon.
    BurnInTooLong { burn_in: f64, span: f64 },
    /// Damping coefficient is not strictly positive everywhere.
    DampingNotPositive { min: f64 },
    /// Growth-constant fitting found no admissible constants.
    Infeasible { condition: &'static str, detail: String },
    /// A trajectory left the finite range.
    BlowUp { t: f64 },
    /// Diagnostic input was empty or non-positive where positivity is required.
    BadSeries(&'static str),
    /// Record produced without snapshots where snapshots are required.
    MissingSnapshots,
    /// Solver step is not a positive multiple of the noise step.
    StepMismatch { h_step: f64, h_noise: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::UnsupportedDim(n) => write!(f, "unsupported spatial dimension {n} (need 1 or 2)"),
            Error::GridTooCoarse { modes, grid } => {
                write!(f, "grid has {grid} points per axis but {modes} modes are retained")
            }
            Error::InvalidParam { name, value, expected } => {
                write!(f, "parameter {name} = {value} invalid (expected {expected})")
            }
            Error::BasisMismatch => write!(f, "fields belong to different bases"),
            Error::NonCommensurate { t, h } => {
                write!(f, "time {t} is not a multiple of the noise step {h}")
            }
            Error::OutOfHorizon { t, t_min, t_max } => {
                write!(f, "time {t} outside realized noise horizon [{t_min}, {t_max}]")
            }
            Error::CovarianceLength { expected, got } => {
                write!(f, "explicit covariance list has {got} entries, basis has {expected} modes")
            }
            Error::NonConstantDamping => {
                write!(f, "exact diagonal initialization requires constant damping")
            }
            Error::BurnInTooLong { burn_in, span } => {
                write!(f, "burn-in {burn_in} exceeds noise horizon span {span}")
            }
            Error::DampingNotPositive { min } => {
                write!(f, "damping-range violated: min sigma = {min} (must be > 0)")
            }
            Error::Infeasible { condition, detail } => {
                write!(f, "no admissible constants for condition {condition}: {detail}")
            }
            Error::BlowUp { t } => write!(f, "trajectory left the finite range at t = {t}"),
            Error::BadSeries(what) => write!(f, "diagnostic series invalid: {what}"),
            Error::MissingSnapshots => write!(f, "trajectory record carries no snapshots"),
            Error::StepMismatch { h_step, h_noise } => {
                write!(f, "solver step {h_step} is not a positive multiple of noise step {h_noise}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
