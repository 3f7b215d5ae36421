//! Uncertainty tube widths for robust constraint tightening.
//!
//! Prediction error around a nominal trajectory is bounded by a tube whose
//! half-width grows each step by a geometric recursion: a fresh disturbance
//! bound is added while feedback contracts the accumulated term.

use crate::scalar::Scalar;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum TubeError {
    /// Tube widths are defined strictly ahead of the anchor step.
    #[error("prediction step {step} is not ahead of anchor step {anchor}")]
    StepNotAhead { step: u64, anchor: u64 },
}

/// Tube half-width at prediction step `step`, anchored at `anchor`.
///
/// Width follows w = base * sum_{i=0}^{step-anchor-1} (1 - contraction)^i,
/// so one step ahead the width is exactly `base` and the sequence is
/// nondecreasing, saturating at base / contraction.
pub fn tube_width<S: Scalar>(
    base: S,
    contraction: S,
    anchor: u64,
    step: u64,
) -> Result<S, TubeError> {
    if step <= anchor {
        return Err(TubeError::StepNotAhead { step, anchor });
    }
    debug_assert!(base >= S::zero());
    debug_assert!(contraction > S::zero() && contraction <= S::one());
    let decay = S::one() - contraction;
    let mut width = S::zero();
    let mut term = base;
    for _ in 0..(step - anchor) {
        width = width + term;
        term = term * decay;
    }
    Ok(width)
}
