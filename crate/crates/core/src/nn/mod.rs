//! A small dense-network engine in `f64`.
//!
//! Layers carry hand-derived backward passes; [`grad_check`] verifies them
//! against central finite differences. Probabilities are clamped to
//! `[EPS, 1 − EPS]` before any logarithm.

mod adam;
pub mod checkpoint;
mod matrix;
mod mlp;

use thiserror::Error;

pub use adam::{AdamConfig, AdamState};
pub use matrix::Matrix;
pub use mlp::{Activation, DenseLayer, ForwardCache, Gradients, Mlp};

/// Clamp applied to probabilities before taking logs.
pub const EPS: f64 = 1e-7;

#[derive(Debug, Error, PartialEq)]
pub enum NnError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite value at layer {layer}")]
    NonFinite { layer: usize },
}

/// Logistic function, evaluated without overflow for large `|x|`.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn relu(x: f64) -> f64 {
    x.max(0.0)
}

/// `clamp(p, EPS, 1 − EPS)`.
pub fn clamp_prob(p: f64) -> f64 {
    p.clamp(EPS, 1.0 - EPS)
}

/// Mean binary cross-entropy with clamped predictions.
pub fn bce(predictions: &[f64], targets: &[f64]) -> Result<f64, NnError> {
    if predictions.len() != targets.len() {
        return Err(NnError::Shape(format!(
            "{} predictions for {} targets",
            predictions.len(),
            targets.len()
        )));
    }
    if predictions.is_empty() {
        return Ok(0.0);
    }
    let total: f64 = predictions
        .iter()
        .zip(targets)
        .map(|(&p, &t)| {
            let p = clamp_prob(p);
            -(t * p.ln() + (1.0 - t) * (1.0 - p).ln())
        })
        .sum();
    Ok(total / predictions.len() as f64)
}

/// Gradient of `bce(σ(logits), targets)` with respect to the logits, in the
/// unclamped form `(σ(z) − t) / n`. It equals the exact derivative wherever
/// the clamp is inactive, and keeps pushing saturated wrong logits back.
pub fn bce_logits_grad(logits: &[f64], targets: &[f64]) -> Result<Vec<f64>, NnError> {
    if logits.len() != targets.len() {
        return Err(NnError::Shape(format!(
            "{} logits for {} targets",
            logits.len(),
            targets.len()
        )));
    }
    let n = logits.len().max(1) as f64;
    Ok(logits
        .iter()
        .zip(targets)
        .map(|(&z, &t)| (sigmoid(z) - t) / n)
        .collect())
}

/// Compares the analytic gradient returned by `loss` at `params` with central
/// differences of its value and returns the maximum elementwise relative
/// error `|a − n| / max(|a|, |n|, 1e-8)`.
///
/// `loss` maps a parameter vector to `(value, gradient)`.
pub fn grad_check<F>(mut loss: F, params: &[f64], h: f64) -> f64
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let (_, analytic) = loss(params);
    assert_eq!(analytic.len(), params.len(), "gradient length mismatch");
    let mut theta = params.to_vec();
    let mut worst = 0.0f64;
    for i in 0..params.len() {
        theta[i] = params[i] + h;
        let (up, _) = loss(&theta);
        theta[i] = params[i] - h;
        let (down, _) = loss(&theta);
        theta[i] = params[i];
        let numeric = (up - down) / (2.0 * h);
        let a = analytic[i];
        let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
        worst = worst.max(err);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_properties() {
        assert_eq!(sigmoid(0.0), 0.5);
        for &x in &[0.1, 1.0, 3.7, 12.0, 49.0] {
            assert!((sigmoid(-x) - (1.0 - sigmoid(x))).abs() < 1e-12);
        }
        assert!(sigmoid(50.0).is_finite() && sigmoid(-50.0) > 0.0);
        assert_eq!(clamp_prob(sigmoid(50.0)), 1.0 - EPS);
        assert_eq!(clamp_prob(sigmoid(-50.0)), EPS);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
        assert_eq!(relu(-2.0), 0.0);
        assert_eq!(relu(2.5), 2.5);
    }

    #[test]
    fn bce_values() {
        let t = [1.0, 0.0, 1.0];
        assert!(bce(&t, &t).unwrap() < 2e-7);
        let half = bce(&[0.5; 4], &[1.0, 0.0, 0.0, 1.0]).unwrap();
        assert!((half - std::f64::consts::LN_2).abs() < 1e-12);
        let worst = bce(&[0.0], &[1.0]).unwrap();
        assert!((worst + EPS.ln()).abs() < 1e-12);
        assert!((worst - 16.118).abs() < 1e-3);
        assert!(bce(&[0.5], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn bce_logits_grad_matches_finite_difference() {
        let z = [0.3, -1.2, 2.5, 0.0];
        let t = [1.0, 0.0, 0.0, 1.0];
        let err = grad_check(
            |zs| {
                let p: Vec<f64> = zs.iter().map(|&v| sigmoid(v)).collect();
                (bce(&p, &t).unwrap(), bce_logits_grad(zs, &t).unwrap())
            },
            &z,
            1e-5,
        );
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn grad_check_quadratic() {
        let theta = [0.5, -1.5, 3.0, -2.25];
        let err = grad_check(
            |t| (0.5 * t.iter().map(|v| v * v).sum::<f64>(), t.to_vec()),
            &theta,
            1e-5,
        );
        assert!(err < 1e-9, "{err}");
    }
}
