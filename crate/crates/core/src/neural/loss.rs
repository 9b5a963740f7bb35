//! Loss functions with their gradients.

use super::tensor::Tensor;
use crate::error::{Error, Result};

pub const PROB_CLAMP: f64 = 1e-7;

fn clamp_p(p: f64) -> f64 {
    p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP)
}

/// −y·ln p − (1−y)·ln(1−p), with p clamped to [1e-7, 1−1e-7].
pub fn bce_loss(p: f64, y: f64) -> f64 {
    let p = clamp_p(p);
    -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
}

/// d/dp of [`bce_loss`] (zero where the clamp is active).
pub fn bce_grad(p: f64, y: f64) -> f64 {
    if p <= PROB_CLAMP || p >= 1.0 - PROB_CLAMP {
        // outside the clamp the loss is flat in p; use the clamped slope so
        // saturated sigmoids still receive a signal
        let pc = clamp_p(p);
        return (pc - y) / (pc * (1.0 - pc));
    }
    (p - y) / (p * (1.0 - p))
}

/// Mean squared element difference.
pub fn mse_loss(a: &Tensor, b: &Tensor) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::invalid(format!(
            "mse shapes differ: {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        / a.len() as f64)
}

/// −ln p[class] for a probability vector.
pub fn cross_entropy(probs: &[f64], class: usize) -> f64 {
    -clamp_p(probs[class]).ln()
}

pub fn cross_entropy_grad(probs: &[f64], class: usize) -> Vec<f64> {
    let mut g = vec![0.0; probs.len()];
    g[class] = -1.0 / clamp_p(probs[class]);
    g
}
