use thiserror::Error;

use crate::dynamics::MotionState;
use crate::executor::Trajectory;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("non-finite input to {context}")]
    NonFinite { context: &'static str },

    #[error("state (t={}, x={}, v={}) is not on the {guard} guard within tolerance {tol}", .state.t, .state.x, .state.v)]
    GuardMismatch {
        guard: &'static str,
        state: MotionState,
        tol: f64,
    },

    #[error("numerical divergence at t={}: x={}, v={}", .state.t, .state.x, .state.v)]
    Divergence { state: MotionState },

    /// The jump cap was hit; the partial trajectory up to the cap is attached.
    #[error("Zeno suspicion: more than {max_jumps} jumps before t={t}")]
    ZenoSuspected {
        max_jumps: usize,
        t: f64,
        partial: Box<Trajectory>,
    },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("scenario format: {0}")]
    Format(String),

    #[error("override `{path}`: {reason}")]
    Override { path: String, reason: String },
}

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field,
        reason: reason.into(),
    }
}
