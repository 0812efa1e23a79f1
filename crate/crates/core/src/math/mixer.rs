//! Chain identification inside a mixer transaction.
//!
//! Knowing the owner of one input address, the attacker extends the chain of
//! co-participants one hop at a time; each hop needs two independent
//! address-to-identity mappings, each found with the link probability `p`.

use serde::{Deserialize, Serialize};

use super::{MathError, Probability, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixerParams {
    link_prob: f64,
    chain_length: u32,
}

impl MixerParams {
    pub fn new(link_prob: f64, chain_length: u32) -> Result<Self> {
        if !(0.0..=1.0).contains(&link_prob) {
            return Err(MathError::InvalidParams(format!("link probability {link_prob} outside [0, 1]")));
        }
        if chain_length == 0 {
            return Err(MathError::InvalidParams("chain length must be at least 1".into()));
        }
        Ok(MixerParams { link_prob, chain_length })
    }

    pub fn link_prob(&self) -> f64 {
        self.link_prob
    }

    pub fn chain_length(&self) -> u32 {
        self.chain_length
    }
}

/// `P(x) = p^(2(x-1))`: probability of identifying at least `x` participants.
pub fn mixer_chain_probability(params: &MixerParams) -> Probability {
    let hops = 2.0 * (params.chain_length as f64 - 1.0);
    Probability::clamped(params.link_prob.powf(hops))
}

/// How the expected number of identified participants is normalized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExpectationMode {
    /// `sum_{i>=1} i p^(2(i-1)) = 1 / (1 - p^2)^2`.
    Raw,
    /// The raw series divided by `sum_{i>=1} p^(2(i-1)) = 1 / (1 - p^2)`,
    /// giving `1 / (1 - p^2)`. At `p = 0.1` this is the commonly quoted 1.01.
    Normalized,
}

impl std::str::FromStr for ExpectationMode {
    type Err = MathError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(ExpectationMode::Raw),
            "normalized" => Ok(ExpectationMode::Normalized),
            other => Err(MathError::InvalidParams(format!("unknown expectation mode `{other}`"))),
        }
    }
}

pub fn mixer_expected_identified(link_prob: f64, mode: ExpectationMode) -> Result<f64> {
    if link_prob == 1.0 {
        return Err(MathError::Divergent);
    }
    if !(0.0..1.0).contains(&link_prob) {
        return Err(MathError::InvalidParams(format!("link probability {link_prob} outside [0, 1)")));
    }
    let q = 1.0 - link_prob * link_prob;
    Ok(match mode {
        ExpectationMode::Raw => 1.0 / (q * q),
        ExpectationMode::Normalized => 1.0 / q,
    })
}
