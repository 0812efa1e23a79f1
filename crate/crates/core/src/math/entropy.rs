use serde::{Deserialize, Serialize};

use super::{MathError, Result};

const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// The attacker's posterior over candidate senders.
///
/// Construction checks each probability and that they sum to one within
/// `1e-9`, then renormalizes the residual away.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnonymityProfile {
    sender_probs: Vec<f64>,
}

impl AnonymityProfile {
    pub fn new(sender_probs: Vec<f64>) -> Result<Self> {
        if sender_probs.len() < 2 {
            return Err(MathError::UndefinedDegree(sender_probs.len()));
        }
        if let Some(bad) = sender_probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(MathError::InvalidParams(format!("{bad} is not a probability")));
        }
        let sum: f64 = sender_probs.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(MathError::Unnormalized(sum));
        }
        let sender_probs = sender_probs.into_iter().map(|p| p / sum).collect();
        Ok(AnonymityProfile { sender_probs })
    }

    /// Posterior proportional to non-negative weights (e.g. observed activity).
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !total.is_finite() || total <= 0.0 || weights.iter().any(|w| w.is_nan() || *w < 0.0) {
            return Err(MathError::InvalidParams("weights must be non-negative with a positive sum".into()));
        }
        Self::new(weights.iter().map(|w| w / total).collect())
    }

    pub fn uniform(candidates: usize) -> Result<Self> {
        Self::new(vec![1.0 / candidates as f64; candidates])
    }

    pub fn candidate_count(&self) -> usize {
        self.sender_probs.len()
    }

    pub fn sender_probs(&self) -> &[f64] {
        &self.sender_probs
    }
}

/// `H(X) = -sum p_i log2 p_i`, with `0 log 0 = 0`.
pub fn shannon_entropy(profile: &AnonymityProfile) -> f64 {
    -profile.sender_probs.iter().filter(|&&p| p > 0.0).map(|&p| p * p.log2()).sum::<f64>()
}

/// Degree of anonymity `d = H(X) / H_m` with `H_m = log2 N`.
///
/// Evaluated as `1 - D(p || uniform) / log2 N`, which is algebraically the
/// same ratio but stays accurate near 1; uniform profiles short-circuit to
/// exactly 1.
pub fn entropy_degree(profile: &AnonymityProfile) -> f64 {
    let probs = &profile.sender_probs;
    if probs.iter().all(|&p| p == probs[0]) {
        return 1.0;
    }
    let n = profile.candidate_count() as f64;
    let max_entropy = n.log2();
    let divergence: f64 = profile.sender_probs.iter().filter(|&&p| p > 0.0).map(|&p| p * (n * p).log2()).sum();
    (1.0 - divergence / max_entropy).clamp(0.0, 1.0)
}
