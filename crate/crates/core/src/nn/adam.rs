use serde::{Deserialize, Serialize};

use super::NnError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn with_learning_rate(learning_rate: f64) -> Self {
        Self {
            learning_rate,
            ..Self::default()
        }
    }
}

/// Moment accumulators for one parameter set, one entry per tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
    step: u64,
}

impl AdamState {
    /// State for tensors of the given lengths.
    pub fn new(config: AdamConfig, shapes: &[usize]) -> Self {
        Self {
            config,
            first: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            second: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            step: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// One bias-corrected Adam update of `params` from `grads`.
    pub fn step(&mut self, params: &mut [&mut [f64]], grads: &[&[f64]]) -> Result<(), NnError> {
        if params.len() != self.first.len() || grads.len() != self.first.len() {
            return Err(NnError::Shape(format!(
                "{} parameter tensors and {} gradients for optimizer over {}",
                params.len(),
                grads.len(),
                self.first.len()
            )));
        }
        for (i, (p, g)) in params.iter().zip(grads).enumerate() {
            if p.len() != self.first[i].len() || g.len() != p.len() {
                return Err(NnError::Shape(format!("tensor {i} shape mismatch")));
            }
        }
        self.step += 1;
        let AdamConfig {
            learning_rate,
            beta1,
            beta2,
            epsilon,
        } = self.config;
        let t = self.step as i32;
        let correction1 = 1.0 - beta1.powi(t);
        let correction2 = 1.0 - beta2.powi(t);
        for (i, (p, g)) in params.iter_mut().zip(grads).enumerate() {
            let (m, v) = (&mut self.first[i], &mut self.second[i]);
            for j in 0..p.len() {
                m[j] = beta1 * m[j] + (1.0 - beta1) * g[j];
                v[j] = beta2 * v[j] + (1.0 - beta2) * g[j] * g[j];
                let m_hat = m[j] / correction1;
                let v_hat = v[j] / correction2;
                p[j] -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params() {
        let mut state = AdamState::new(AdamConfig::default(), &[3]);
        let mut p = vec![1.0, -2.0, 0.5];
        let before = p.clone();
        state.step(&mut [p.as_mut_slice()], &[&[0.0, 0.0, 0.0]]).unwrap();
        assert_eq!(p, before);
        assert_eq!(state.step_count(), 1);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let lr = 0.01;
        let mut state = AdamState::new(AdamConfig::with_learning_rate(lr), &[4]);
        let mut p = vec![0.0; 4];
        let g = [0.3, -2.0, 1e3, -1e-2];
        state.step(&mut [p.as_mut_slice()], &[&g]).unwrap();
        for (pj, gj) in p.iter().zip(&g) {
            // m̂ = g, v̂ = g², so the step is lr · g / (|g| + ε).
            let expected = -lr * gj / (gj.abs() + 1e-8);
            assert!((pj - expected).abs() < 1e-15);
            assert!((pj.abs() - lr).abs() < lr * 1e-5);
        }
    }

    #[test]
    fn deterministic_and_shape_checked() {
        let run = || {
            let mut state = AdamState::new(AdamConfig::default(), &[2, 1]);
            let mut a = vec![0.1, 0.2];
            let mut b = vec![0.3];
            for k in 0..10 {
                let ga = [0.5 - k as f64 * 0.1, 0.01 * k as f64];
                let gb = [(k as f64).sin()];
                state
                    .step(&mut [a.as_mut_slice(), b.as_mut_slice()], &[&ga, &gb])
                    .unwrap();
            }
            (a, b)
        };
        assert_eq!(run(), run());
        let mut state = AdamState::new(AdamConfig::default(), &[2]);
        let mut p = vec![0.0; 3];
        assert!(state.step(&mut [p.as_mut_slice()], &[&[0.0; 3]]).is_err());
    }
}
