//! Error type shared by every module of the engine.

use thiserror::Error;

/// Typed error for all fallible engine operations.
///
/// Panics are reserved for internal invariant violations; everything a caller
/// can trigger with bad input or ill-conditioned data surfaces as one of
/// these variants.
#[derive(Debug, Clone, Error)]
pub enum CoreError {
    /// An argument violated its documented precondition.
    #[error("invalid {field}: {reason}")]
    Validation {
        /// Name of the offending parameter or field.
        field: &'static str,
        /// Human-readable description of the violated constraint.
        reason: String,
    },

    /// Two grid-shaped inputs that must share a shape do not.
    #[error("shape mismatch in {context}: {expected_h}x{expected_w} vs {got_h}x{got_w}")]
    ShapeMismatch {
        context: &'static str,
        expected_h: usize,
        expected_w: usize,
        got_h: usize,
        got_w: usize,
    },

    /// A special function was evaluated outside its real domain.
    #[error("{function} is undefined for x = {value} (requires x > 0)")]
    Domain { function: &'static str, value: f64 },

    /// The dense operator materialization cap was exceeded.
    #[error("dense operator capped at {cap} cells, grid has {cells}")]
    DenseCap { cells: usize, cap: usize },

    /// An iterative routine produced non-finite values.
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    /// A metric against an identically-zero reference map is undefined.
    #[error("reference map is identically zero; normalized error is undefined")]
    AllZeroReference,

    /// A windowed metric was asked for on a map smaller than its window.
    #[error("map of {h}x{w} is smaller than the {side}x{side} metric window")]
    WindowExceedsMap { h: usize, w: usize, side: usize },
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, CoreError>;

impl CoreError {
    /// Shorthand for a [`CoreError::Validation`] with a formatted reason.
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        CoreError::Validation {
            field,
            reason: reason.into(),
        }
    }
}
