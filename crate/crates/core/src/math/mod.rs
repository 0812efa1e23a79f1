//! Exact closed forms for the tip-selection attack.
//!
//! These functions are the ground truth the simulator is checked against.
//! All of them are pure and thread-safe.

mod attack;
mod entropy;
mod mixer;
mod sizing;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use attack::{deanon_probability, hypergeom_pmf};
pub use entropy::{entropy_degree, shannon_entropy, AnonymityProfile};
pub use mixer::{mixer_chain_probability, mixer_expected_identified, ExpectationMode, MixerParams};
pub use sizing::{continental_takeover_rate, required_full_nodes, RegionAction};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MathError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("degree of anonymity is undefined for {0} candidate(s); at least 2 are required")]
    UndefinedDegree(usize),
    #[error("sender probabilities sum to {0}, expected 1")]
    Unnormalized(f64),
    #[error("the expected chain length diverges for link probability 1")]
    Divergent,
    #[error("target rate 0 cannot be reached by any network size")]
    Infeasible,
}

pub type Result<T> = std::result::Result<T, MathError>;

/// A probability in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Probability(f64);

impl Probability {
    pub const ZERO: Probability = Probability(0.0);
    pub const ONE: Probability = Probability(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Probability(value))
        } else {
            Err(MathError::InvalidParams(format!("{value} is not a probability")))
        }
    }

    /// Clamps tiny floating-point excursions back into `[0, 1]`.
    pub(crate) fn clamped(value: f64) -> Self {
        Probability(value.clamp(0.0, 1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Population parameters of the attack: `N` full nodes of which `C` are
/// adversarial, and a light node querying `M` distinct full nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttackParams {
    total_full_nodes: u64,
    adversary_count: u64,
    request_count: u64,
}

impl AttackParams {
    pub fn new(total_full_nodes: u64, adversary_count: u64, request_count: u64) -> Result<Self> {
        if total_full_nodes == 0 {
            return Err(MathError::InvalidParams("N must be positive".into()));
        }
        if request_count == 0 {
            return Err(MathError::InvalidParams("M must be positive".into()));
        }
        if adversary_count > total_full_nodes {
            return Err(MathError::InvalidParams(format!("C = {adversary_count} exceeds N = {total_full_nodes}")));
        }
        if request_count > total_full_nodes {
            return Err(MathError::InvalidParams(format!(
                "M = {request_count} exceeds N = {total_full_nodes}; requests go to distinct full nodes"
            )));
        }
        Ok(AttackParams { total_full_nodes, adversary_count, request_count })
    }

    pub fn total_full_nodes(&self) -> u64 {
        self.total_full_nodes
    }

    pub fn adversary_count(&self) -> u64 {
        self.adversary_count
    }

    pub fn request_count(&self) -> u64 {
        self.request_count
    }

    /// The adversary ratio `p = C / N`.
    pub fn adversary_ratio(&self) -> f64 {
        self.adversary_count as f64 / self.total_full_nodes as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_reject_inconsistent_counts() {
        assert!(AttackParams::new(10, 11, 3).is_err());
        assert!(AttackParams::new(10, 1, 11).is_err());
        assert!(AttackParams::new(0, 0, 1).is_err());
        assert!(AttackParams::new(10, 0, 0).is_err());
        assert!(AttackParams::new(10, 10, 10).is_ok());
    }

    #[test]
    fn probability_bounds() {
        assert!(Probability::new(-0.1).is_err());
        assert!(Probability::new(1.0 + 1e-12).is_err());
        assert!(Probability::new(f64::NAN).is_err());
        assert_eq!(Probability::new(0.25).unwrap().value(), 0.25);
    }
}
