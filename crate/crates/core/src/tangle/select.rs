use std::collections::HashMap;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Ledger, TransactionId};

/// Ordered pair of tips a new transaction approves.
pub type TipPair = [TransactionId; 2];

/// Tip-selection algorithm run by full nodes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum TipSelection {
    /// Uniform random tip selection.
    Urts,
    /// Cumulative-weight biased random walk from genesis (experimental).
    WeightedWalk { bias: f64 },
}

impl TipSelection {
    pub fn select<R: Rng + ?Sized>(&self, ledger: &Ledger, rng: &mut R) -> TipPair {
        match *self {
            TipSelection::Urts => urts_select(ledger, rng),
            TipSelection::WeightedWalk { bias } => weighted_walk_select(ledger, bias, rng),
        }
    }
}

impl FromStr for TipSelection {
    type Err = String;

    /// `urts`, `walk` or `walk:<bias>`.
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "urts" => Ok(TipSelection::Urts),
            "walk" => Ok(TipSelection::WeightedWalk { bias: 0.0 }),
            _ => {
                let bias = s
                    .strip_prefix("walk:")
                    .and_then(|b| b.parse::<f64>().ok())
                    .filter(|b| *b >= 0.0 && b.is_finite())
                    .ok_or_else(|| format!("unknown tip selection `{s}`"))?;
                Ok(TipSelection::WeightedWalk { bias })
            }
        }
    }
}

/// Two distinct tips drawn uniformly without replacement, in draw order; a
/// single-tip set yields that tip twice.
pub fn urts_select<R: Rng + ?Sized>(ledger: &Ledger, rng: &mut R) -> TipPair {
    let tips = ledger.tips();
    let pick = |i: usize| *tips.get_index(i).expect("index within tip set");
    match tips.len() {
        0 => unreachable!("a ledger always has at least one tip"),
        1 => [pick(0); 2],
        k => {
            let (i, j) = distinct_pair(k, rng);
            [pick(i), pick(j)]
        }
    }
}

/// URTS over an explicit tip list (e.g. a light node's recent-tip cache).
pub fn urts_from_tips<R: Rng + ?Sized>(tips: &[TransactionId], rng: &mut R) -> Option<TipPair> {
    match tips.len() {
        0 => None,
        1 => Some([tips[0]; 2]),
        k => {
            let (i, j) = distinct_pair(k, rng);
            Some([tips[i], tips[j]])
        }
    }
}

fn distinct_pair<R: Rng + ?Sized>(k: usize, rng: &mut R) -> (usize, usize) {
    let i = rng.gen_range(0..k);
    let mut j = rng.gen_range(0..k - 1);
    if j >= i {
        j += 1;
    }
    (i, j)
}

/// Two independent walks from genesis. At each step the walker moves to an
/// approver chosen with probability proportional to
/// `exp(bias * cumulative_weight)`; it stops on a tip.
pub fn weighted_walk_select<R: Rng + ?Sized>(ledger: &Ledger, bias: f64, rng: &mut R) -> TipPair {
    let mut weights: HashMap<TransactionId, usize> = HashMap::new();
    let a = walk(ledger, bias, rng, &mut weights);
    let b = walk(ledger, bias, rng, &mut weights);
    [a, b]
}

fn walk<R: Rng + ?Sized>(
    ledger: &Ledger,
    bias: f64,
    rng: &mut R,
    weights: &mut HashMap<TransactionId, usize>,
) -> TransactionId {
    let mut current = TransactionId::GENESIS;
    loop {
        let children = ledger.approvers(current);
        if children.is_empty() {
            return current;
        }
        if children.len() == 1 {
            current = children[0];
            continue;
        }
        let cw: Vec<f64> =
            children.iter().map(|&c| *weights.entry(c).or_insert_with(|| ledger.cumulative_weight(c)) as f64).collect();
        let top = cw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = cw.iter().map(|x| (bias * (x - top)).exp()).collect();
        let total: f64 = w.iter().sum();
        let mut u = rng.gen::<f64>() * total;
        let mut next = children[children.len() - 1];
        for (c, wi) in children.iter().zip(&w) {
            if u < *wi {
                next = *c;
                break;
            }
            u -= wi;
        }
        current = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::tangle::Address;
    use std::collections::BTreeMap;

    const G: TransactionId = TransactionId::GENESIS;

    fn ledger_with_tips(k: usize) -> (Ledger, Vec<TransactionId>) {
        let mut l = Ledger::new();
        let tips = (0..k).map(|i| l.attach([G, G], Address(i as u64 + 1), None, 1).unwrap()).collect();
        (l, tips)
    }

    #[test]
    fn single_tip_is_duplicated() {
        let l = Ledger::new();
        let mut r = rng::stream(1, &[0]);
        assert_eq!(urts_select(&l, &mut r), [G, G]);
        assert_eq!(weighted_walk_select(&l, 0.0, &mut r), [G, G]);
    }

    #[test]
    fn two_tips_come_in_either_order() {
        let (l, tips) = ledger_with_tips(2);
        let mut r = rng::stream(2, &[0]);
        let draws = 100_000;
        let mut first_is_a = 0;
        for _ in 0..draws {
            let pair = urts_select(&l, &mut r);
            assert_ne!(pair[0], pair[1]);
            if pair[0] == tips[0] {
                first_is_a += 1;
            }
        }
        // Chi-square with one degree of freedom at the 0.01 level.
        let e = draws as f64 / 2.0;
        let o = first_is_a as f64;
        let chi2 = (o - e).powi(2) / e + ((draws as f64 - o) - e).powi(2) / e;
        assert!(chi2 < 6.635, "chi2 = {chi2}");
    }

    #[test]
    fn unordered_pairs_are_uniform() {
        let k = 5;
        let (l, _) = ledger_with_tips(k);
        let mut r = rng::stream(3, &[0]);
        let draws = 100_000;
        let mut counts: BTreeMap<(TransactionId, TransactionId), u32> = BTreeMap::new();
        for _ in 0..draws {
            let [a, b] = urts_select(&l, &mut r);
            *counts.entry((a.min(b), a.max(b))).or_default() += 1;
        }
        assert_eq!(counts.len(), k * (k - 1) / 2);
        let p = 2.0 / (k * (k - 1)) as f64;
        let sd = (draws as f64 * p * (1.0 - p)).sqrt();
        for c in counts.values() {
            assert!((*c as f64 - draws as f64 * p).abs() < 4.0 * sd);
        }
    }

    #[test]
    fn same_stream_same_selections() {
        let (l, _) = ledger_with_tips(10);
        let a: Vec<TipPair> = {
            let mut r = rng::stream(9, &[1]);
            (0..50).map(|_| urts_select(&l, &mut r)).collect()
        };
        let b: Vec<TipPair> = {
            let mut r = rng::stream(9, &[1]);
            (0..50).map(|_| urts_select(&l, &mut r)).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn unbiased_walk_splits_a_diamond_evenly() {
        let (l, tips) = ledger_with_tips(2);
        let mut r = rng::stream(4, &[0]);
        let walks = 100_000;
        let mut hits_a = 0;
        for _ in 0..walks / 2 {
            for t in weighted_walk_select(&l, 0.0, &mut r) {
                if t == tips[0] {
                    hits_a += 1;
                }
            }
        }
        let freq = hits_a as f64 / walks as f64;
        assert!((freq - 0.5).abs() < 0.01, "{freq}");
    }

    #[test]
    fn bias_favours_the_heavier_branch() {
        // genesis <- single ; genesis <- c1 <- c2 <- c3
        let mut l = Ledger::new();
        l.attach([G, G], Address(1), None, 1).unwrap();
        let c1 = l.attach([G, G], Address(2), None, 1).unwrap();
        let c2 = l.attach([c1, c1], Address(3), None, 2).unwrap();
        let c3 = l.attach([c2, c2], Address(4), None, 3).unwrap();
        let mut freqs = Vec::new();
        for bias in [0.0f64, 0.5, 2.0] {
            let mut r = rng::stream(5, &[bias.to_bits()]);
            let n = 20_000;
            let heavy = (0..n).filter(|_| weighted_walk_select(&l, bias, &mut r)[0] == c3).count();
            freqs.push(heavy as f64 / n as f64);
        }
        assert!((freqs[0] - 0.5).abs() < 0.02);
        assert!(freqs[0] < freqs[1] && freqs[1] < freqs[2], "{freqs:?}");
        // exp(2*3) / (exp(2*3) + exp(2*1))
        let expected = 1.0 / (1.0 + (-4.0f64).exp());
        assert!((freqs[2] - expected).abs() < 0.01);
    }

    #[test]
    fn parse_tip_selection() {
        assert_eq!("urts".parse::<TipSelection>().unwrap(), TipSelection::Urts);
        assert_eq!("walk:0.5".parse::<TipSelection>().unwrap(), TipSelection::WeightedWalk { bias: 0.5 });
        assert!("walk:-1".parse::<TipSelection>().is_err());
        assert!("mcmc".parse::<TipSelection>().is_err());
    }
}
