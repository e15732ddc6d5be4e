//! AdamW: Adam with bias-corrected moments and weight decay applied directly
//! to the parameters instead of through the gradient.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamWParams {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub weight_decay: f64,
}

impl Default for AdamWParams {
    fn default() -> Self {
        AdamWParams {
            learning_rate: 1e-2,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            weight_decay: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamWState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl AdamWState {
    pub fn new(len: usize) -> Self {
        AdamWState {
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }
}

/// One AdamW update of `params` in place:
///
/// ```text
/// m ← β1·m + (1−β1)·g          v ← β2·v + (1−β2)·g²
/// m̂ = m / (1−β1ᵗ)              v̂ = v / (1−β2ᵗ)
/// θ ← θ − lr·( m̂ / (√v̂ + ε) + λ·θ )
/// ```
pub fn adamw_step(params: &mut [f64], grads: &[f64], state: &mut AdamWState, hp: &AdamWParams) -> Result<()> {
    if grads.len() != params.len() || state.m.len() != params.len() || state.v.len() != params.len() {
        return Err(Error::ShapeMismatch(format!(
            "params {}, grads {}, m {}, v {}",
            params.len(),
            grads.len(),
            state.m.len(),
            state.v.len()
        )));
    }
    state.t += 1;
    let t = i32::try_from(state.t).unwrap_or(i32::MAX);
    let bias1 = 1.0 - hp.beta1.powi(t);
    let bias2 = 1.0 - hp.beta2.powi(t);
    for (((theta, &g), m), v) in params.iter_mut().zip(grads).zip(&mut state.m).zip(&mut state.v) {
        *m = hp.beta1 * *m + (1.0 - hp.beta1) * g;
        *v = hp.beta2 * *v + (1.0 - hp.beta2) * g * g;
        let m_hat = *m / bias1;
        let v_hat = *v / bias2;
        *theta -= hp.learning_rate * (m_hat / (v_hat.sqrt() + hp.epsilon) + hp.weight_decay * *theta);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_without_decay_is_fixed_point() {
        let mut params = vec![1.0, -2.0, 0.5];
        let mut state = AdamWState::new(3);
        let hp = AdamWParams {
            weight_decay: 0.0,
            ..Default::default()
        };
        adamw_step(&mut params, &[0.0; 3], &mut state, &hp).unwrap();
        assert_eq!(params, vec![1.0, -2.0, 0.5]);
        assert_eq!(state.t, 1);
    }

    #[test]
    fn pure_decay_step() {
        let mut params = vec![1.0, -2.0, 0.5];
        let mut state = AdamWState::new(3);
        let hp = AdamWParams {
            learning_rate: 0.1,
            weight_decay: 0.01,
            ..Default::default()
        };
        adamw_step(&mut params, &[0.0; 3], &mut state, &hp).unwrap();
        for (p, orig) in params.iter().zip([1.0, -2.0, 0.5]) {
            assert!((p - orig * 0.999).abs() < 1e-15);
        }
    }

    /// First step: m̂ = g = 1 and v̂ = g² = 1, so θ ← 1 − 0.1·1/(1 + 1e-8).
    #[test]
    fn first_step_oracle() {
        let mut params = vec![1.0];
        let mut state = AdamWState::new(1);
        let hp = AdamWParams {
            learning_rate: 0.1,
            weight_decay: 0.0,
            ..Default::default()
        };
        adamw_step(&mut params, &[1.0], &mut state, &hp).unwrap();
        assert!((params[0] - 0.9).abs() < 1e-8);
        assert!((params[0] - (1.0 - 0.1 / (1.0 + 1e-8))).abs() < 1e-15);
    }

    #[test]
    fn shape_mismatch() {
        let mut params = vec![0.0; 2];
        let mut state = AdamWState::new(2);
        assert!(adamw_step(&mut params, &[0.0; 3], &mut state, &AdamWParams::default()).is_err());
        let mut state = AdamWState::new(1);
        assert!(adamw_step(&mut params, &[0.0; 2], &mut state, &AdamWParams::default()).is_err());
    }
}
