use serde::{Deserialize, Serialize};

use super::AdError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn with_lr(lr: f64) -> Self {
        AdamConfig {
            lr,
            ..Default::default()
        }
    }
}

/// First/second moment estimates for one flat parameter buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        AdamState {
            m: vec![0.0; len],
            v: vec![0.0; len],
            step: 0,
        }
    }
}

/// One bias-corrected Adam update, in place.
pub fn adam_step(
    params: &mut [f64],
    grads: &[f64],
    state: &mut AdamState,
    cfg: &AdamConfig,
) -> Result<(), AdError> {
    if grads.len() != params.len() || state.m.len() != params.len() || state.v.len() != params.len() {
        return Err(AdError::BadValue {
            len: grads.len(),
            shape: super::Shape::vector(params.len()),
        });
    }
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - cfg.beta1.powi(t);
    let c2 = 1.0 - cfg.beta2.powi(t);
    for i in 0..params.len() {
        let g = grads[i];
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
        let m_hat = state.m[i] / c1;
        let v_hat = state.v[i] / c2;
        params[i] -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params_and_decays_moments() {
        let mut p = vec![1.0, -2.0];
        let mut s = AdamState::new(2);
        s.m = vec![0.5, 0.5];
        s.v = vec![0.25, 0.25];
        let cfg = AdamConfig::default();
        adam_step(&mut p, &[0.0, 0.0], &mut s, &cfg).unwrap();
        // m_hat is nonzero from history, so only check the decay
        assert!((s.m[0] - 0.45).abs() < 1e-15);
        assert!((s.v[0] - 0.25 * 0.999).abs() < 1e-15);

        let mut fresh = vec![1.0, -2.0];
        let mut s0 = AdamState::new(2);
        adam_step(&mut fresh, &[0.0, 0.0], &mut s0, &cfg).unwrap();
        assert_eq!(fresh, vec![1.0, -2.0]);
    }

    #[test]
    fn first_step_is_a_unit_step_of_size_lr() {
        // m_hat = 1, v_hat = 1 -> delta = -lr / (1 + eps)
        let mut p = vec![0.0];
        let mut s = AdamState::new(1);
        adam_step(&mut p, &[1.0], &mut s, &AdamConfig::with_lr(0.1)).unwrap();
        assert!((p[0] + 0.1 / (1.0 + 1e-8)).abs() < 1e-15);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let mut p = vec![0.0; 3];
        let mut s = AdamState::new(3);
        assert!(adam_step(&mut p, &[1.0], &mut s, &AdamConfig::default()).is_err());
    }

    #[test]
    fn identical_runs_are_bitwise_identical() {
        let run = || {
            let mut p = vec![0.3, -0.7, 1.1];
            let mut s = AdamState::new(3);
            for k in 0..50 {
                let g: Vec<f64> = p.iter().map(|x| 2.0 * x + (k as f64).sin()).collect();
                adam_step(&mut p, &g, &mut s, &AdamConfig::default()).unwrap();
            }
            p
        };
        let (a, b) = (run(), run());
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
}
