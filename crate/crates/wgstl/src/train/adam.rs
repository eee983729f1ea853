//! Adam optimizer: per-coordinate adaptive steps from exponentially decayed
//! first and second gradient moments, with the standard bias correction.

use crate::error::{Error, Result};

/// Optimizer state: running moments `m`, `v` and the step counter `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl AdamState {
    /// Fresh state for `len` parameters.
    pub fn new(len: usize) -> Self {
        AdamState {
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }

    /// Number of steps taken so far.
    pub fn steps(&self) -> u64 {
        self.t
    }

    /// Apply one update in place:
    ///
    /// ```text
    /// m ← β₁·m + (1−β₁)·g        m̂ = m / (1 − β₁ᵗ)
    /// v ← β₂·v + (1−β₂)·g²       v̂ = v / (1 − β₂ᵗ)
    /// θ ← θ − lr · m̂ / (√v̂ + ε)
    /// ```
    pub fn step(
        &mut self,
        params: &mut [f64],
        grads: &[f64],
        lr: f64,
        beta1: f64,
        beta2: f64,
        eps: f64,
    ) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::LengthMismatch {
                left: self.m.len(),
                right: params.len().max(grads.len()),
            });
        }
        self.t += 1;
        let bias1 = 1.0 - beta1.powi(self.t as i32);
        let bias2 = 1.0 - beta2.powi(self.t as i32);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = beta1 * self.m[i] + (1.0 - beta1) * g;
            self.v[i] = beta2 * self.v[i] + (1.0 - beta2) * g * g;
            let m_hat = self.m[i] / bias1;
            let v_hat = self.v[i] / bias2;
            params[i] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
        Ok(())
    }
}
