use rand::Rng;

use crate::config::{ConfigError, Settings};
use crate::math::{mixer_chain_probability, mixer_expected_identified, ExpectationMode, MixerParams};
use crate::rng::{self, purpose};

use super::{label, ExperimentError, ExperimentResult};

pub(crate) const SCHEMA: &[(&str, &str)] =
    &[("mixer.p_values", "0.1,0.3,0.5"), ("mixer.max_chain", "5"), ("mixer.participants", "100000")];

/// Monte Carlo chain lengths for one mixer round.
#[derive(Clone, Debug, PartialEq)]
pub struct MixerSample {
    pub participants: usize,
    pub link_prob: f64,
    /// `at_least[x - 1]` counts starting participants whose identified chain
    /// reaches at least `x` participants.
    pub at_least: Vec<u64>,
    pub mean_length: f64,
}

impl MixerSample {
    pub fn empirical(&self, x: usize) -> f64 {
        self.at_least[x - 1] as f64 / self.participants as f64
    }

    /// Standard error of [`Self::empirical`]. Chains from neighbouring
    /// starts share hops, so the counts are positively correlated; the
    /// variance adds those covariances back in.
    pub fn std_error(&self, x: usize) -> f64 {
        let r = self.link_prob * self.link_prob;
        let q = r.powi(x as i32 - 1);
        let mut var = q * (1.0 - q);
        for j in 1..x.saturating_sub(1) {
            var += 2.0 * (r.powi((x - 1 + j) as i32) - q * q);
        }
        (var / self.participants as f64).sqrt()
    }
}

/// Participants sit on a ring in mixing order. Continuing an identified chain
/// from one participant to the next takes two independent revelations, each
/// with probability `p`: the link from an input address to its mixer output,
/// and the link from that output onward to the next participant's input.
/// Every participant is tried as a starting point; chains are cut at
/// `max_chain`.
pub fn simulate_mixer(participants: usize, link_prob: f64, max_chain: usize, seed: u64) -> MixerSample {
    let mut r = rng::stream(seed, &[purpose::MIXER, link_prob.to_bits()]);
    let hop: Vec<bool> = (0..participants).map(|_| r.gen_bool(link_prob) & r.gen_bool(link_prob)).collect();
    let mut at_least = vec![0u64; max_chain];
    let mut total_len = 0u64;
    for start in 0..participants {
        let mut len = 1;
        while len < max_chain && len < participants && hop[(start + len - 1) % participants] {
            len += 1;
        }
        total_len += len as u64;
        for c in at_least.iter_mut().take(len) {
            *c += 1;
        }
    }
    MixerSample { participants, link_prob, at_least, mean_length: total_len as f64 / participants as f64 }
}

pub(crate) fn run(
    settings: &Settings,
    seed: u64,
    _workers: Option<usize>,
    out: &mut ExperimentResult,
) -> Result<(), ExperimentError> {
    let ps: Vec<f64> = settings.list("mixer.p_values")?;
    let max_chain: usize = settings.parse("mixer.max_chain")?;
    let participants: usize = settings.parse("mixer.participants")?;
    if max_chain == 0 || participants == 0 {
        return Err(ConfigError::InvalidValue {
            key: "mixer.max_chain".into(),
            value: format!("{max_chain} / {participants}"),
            reason: "chain length and participant count must be positive".into(),
        }
        .into());
    }
    for &p in &ps {
        if !(0.0..1.0).contains(&p) {
            return Err(ConfigError::InvalidValue {
                key: "mixer.p_values".into(),
                value: p.to_string(),
                reason: "link probabilities must lie in [0, 1)".into(),
            }
            .into());
        }
        let sample = simulate_mixer(participants, p, max_chain + 1, seed);
        let pl = label(&[("p", p.to_string())]);
        out.push(&pl, "expected_raw", mixer_expected_identified(p, ExpectationMode::Raw)?, None);
        out.push(&pl, "expected_normalized", mixer_expected_identified(p, ExpectationMode::Normalized)?, None);
        for x in 1..=max_chain {
            let l = label(&[("p", p.to_string()), ("x", x.to_string())]);
            let analytic = mixer_chain_probability(&MixerParams::new(p, x as u32)?).value();
            let se = sample.std_error(x);
            out.push(&l, "analytic", analytic, None);
            out.push(&l, "empirical", sample.empirical(x), Some(se));
            let z = if se > 0.0 { (sample.empirical(x) - analytic) / se } else { 0.0 };
            out.push(&l, "z", z, None);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_probability_means_single_participant_chains() {
        let s = simulate_mixer(1000, 0.0, 5, 1);
        assert_eq!(s.at_least[0], 1000);
        assert!(s.at_least[1..].iter().all(|&c| c == 0));
        assert_eq!(s.mean_length, 1.0);
    }

    #[test]
    fn certain_links_run_to_the_cap() {
        let s = simulate_mixer(50, 1.0 - 1e-12, 4, 1);
        assert_eq!(s.at_least, vec![50; 4]);
    }

    #[test]
    fn standard_error_matches_independent_case_for_two() {
        let s = simulate_mixer(10_000, 0.3, 5, 1);
        let q = 0.09;
        assert!((s.std_error(2) - (q * (1.0 - q) / 10_000.0f64).sqrt()).abs() < 1e-15);
        assert!(s.std_error(3) > (0.0081f64 * (1.0 - 0.0081) / 10_000.0).sqrt());
    }
}
