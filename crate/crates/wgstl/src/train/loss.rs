//! Exponential classification loss.
//!
//! A sample with label `l ∈ {−1, +1}` and weighted robustness `r` costs
//! `e^(−η·l·r)`: tiny when the signed margin `l·r` is large and positive,
//! explosive when a sample sits far on the wrong side. The temperature `η`
//! scales how sharply margins are rewarded.
//!
//! Exponents are capped at [`EXP_CAP`] so a hopeless sample cannot overflow
//! to infinity (which would poison the optimizer's running moments): the
//! optimized objective is the capped loss, whose derivative on the plateau
//! is zero, and saturation is counted so callers can surface it.

use crate::error::{Error, Result};

/// Upper bound on the loss exponent; `e^300 ≈ 1.9e130` stays comfortably
/// finite even after the optimizer squares the resulting gradients.
pub const EXP_CAP: f64 = 300.0;

/// One sample's contribution to the loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossTerm {
    /// `e^(min(−η·l·r, EXP_CAP))`.
    pub value: f64,
    /// `∂value/∂r` — the seed for backpropagation through this sample
    /// (zero on the saturated plateau).
    pub grad_coeff: f64,
    /// Whether the exponent hit [`EXP_CAP`].
    pub saturated: bool,
}

/// Evaluate one sample's loss term and its derivative in `r`.
pub fn loss_term(robustness: f64, label: i32, eta: f64) -> LossTerm {
    let exponent = -eta * f64::from(label) * robustness;
    if exponent > EXP_CAP {
        LossTerm {
            value: EXP_CAP.exp(),
            grad_coeff: 0.0,
            saturated: true,
        }
    } else {
        let value = exponent.exp();
        LossTerm {
            value,
            grad_coeff: -eta * f64::from(label) * value,
            saturated: false,
        }
    }
}

/// Total loss over a batch of robustness values and labels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossOutcome {
    /// `Σ_i e^(−η·l_i·r_i)` (with capped exponents).
    pub value: f64,
    /// How many terms saturated the exponent cap.
    pub saturated: usize,
}

/// Sum the exponential loss over matched robustness/label vectors.
pub fn loss(r_values: &[f64], labels: &[i32], eta: f64) -> Result<LossOutcome> {
    if r_values.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: r_values.len(),
            right: labels.len(),
        });
    }
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::BadConfig(format!(
            "loss temperature eta must be positive and finite, got {eta}"
        )));
    }
    let mut value = 0.0;
    let mut saturated = 0;
    for (&r, &l) in r_values.iter().zip(labels) {
        let term = loss_term(r, l, eta);
        value += term.value;
        saturated += usize::from(term.saturated);
    }
    Ok(LossOutcome { value, saturated })
}
