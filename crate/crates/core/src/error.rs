//! Error types shared across the solver crates.

use crate::state::Formulation;

/// Field identifier used in positivity diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum FieldId {
    SpecificVolume,
    Temperature,
}

impl std::fmt::Display for FieldId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FieldId::SpecificVolume => write!(f, "u"),
            FieldId::Temperature => write!(f, "theta"),
        }
    }
}

/// Why a single step attempt was rejected by the controller.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub enum RejectReason {
    /// A field dropped to or below the positivity floor.
    NonPositive {
        field: FieldId,
        index: usize,
        value: f64,
    },
    /// The nonlinear sweep did not reach the requested tolerance.
    PicardStall { residual: f64 },
    /// The tridiagonal solve hit a zero pivot.
    SingularSolve { row: usize },
}

impl std::fmt::Display for RejectReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RejectReason::NonPositive {
                field,
                index,
                value,
            } => write!(f, "{field} = {value:.3e} at cell {index}"),
            RejectReason::PicardStall { residual } => {
                write!(f, "Picard iteration stalled at residual {residual:.3e}")
            }
            RejectReason::SingularSolve { row } => {
                write!(f, "singular tridiagonal system at row {row}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("grid needs at least 4 cells, got {0}")]
    GridTooCoarse(usize),

    #[error("{what}: expected length {expected}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("expected a {expected:?} state, got {got:?}")]
    WrongFormulation {
        expected: Formulation,
        got: Formulation,
    },

    #[error("{field} must stay positive: min {min:.6e} at cell {index}")]
    NonPositiveField {
        field: FieldId,
        min: f64,
        index: usize,
    },

    #[error("original time must be nonnegative, got {0}")]
    NegativeTime(f64),

    #[error("states live on different grids: {0} vs {1} cells")]
    GridMismatch(usize, usize),

    #[error("mean of w must vanish, got {0:.3e}")]
    NonZeroWMean(f64),

    #[error("zero pivot in tridiagonal elimination at row {0}")]
    SingularSystem(usize),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("root bracketing failed for {0}")]
    RootBracketing(String),

    #[error("step failed at t = {time:.6}: {reason} (dt floor {dt_min:.3e} reached)")]
    StepFailed {
        time: f64,
        dt_min: f64,
        reason: RejectReason,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
