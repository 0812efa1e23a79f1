use std::collections::BTreeSet;

use rand::seq::index;

use crate::config::Settings;
use crate::math::{continental_takeover_rate, RegionAction};
use crate::network::RegionDistribution;
use crate::rng::{self, purpose};
use crate::stats::{mean, quantile};

use super::{label, load_regions, ExperimentError, ExperimentResult};

pub(crate) const SCHEMA: &[(&str, &str)] = &[
    ("realworld.samples", "100"),
    ("realworld.max_adversaries", "16"),
    ("realworld.weights", ""),
    ("realworld.regions_file", ""),
];

/// Per-region and aggregate deanonymization probability for one adversary placement.
#[derive(Clone, Debug, PartialEq)]
pub struct RealworldRates {
    /// `(region, adversaries in region, rate)` in distribution order.
    pub regions: Vec<(String, u64, f64)>,
    pub weighted: f64,
}

/// Light nodes only ask full nodes on their own continent, so a region with
/// `c` adversaries among `n` full nodes leaks `c / n` of its transactions.
/// `adversaries` are indices into the region-ordered node list; `weights`
/// (one per region) default to equal.
pub fn region_weighted_rate(dist: &RegionDistribution, adversaries: &[u64], weights: Option<&[f64]>) -> RealworldRates {
    let mut counts = vec![0u64; dist.regions.len()];
    for &a in adversaries {
        let name = dist.region_of_index(a).expect("adversary index within the distribution");
        let i = dist.regions.iter().position(|(r, _)| r == name).expect("known region");
        counts[i] += 1;
    }
    let regions: Vec<(String, u64, f64)> =
        dist.regions.iter().zip(&counts).map(|((name, n), &c)| (name.clone(), c, c as f64 / *n as f64)).collect();
    let equal = vec![1.0; regions.len()];
    let w = weights.unwrap_or(&equal);
    let total: f64 = w.iter().sum();
    let weighted = regions.iter().zip(w).map(|((_, _, r), w)| r * w).sum::<f64>() / total;
    RealworldRates { regions, weighted }
}

fn parse_weights(settings: &Settings, dist: &RegionDistribution) -> Result<Option<Vec<f64>>, ExperimentError> {
    let raw = settings.raw("realworld.weights");
    if raw.is_empty() {
        return Ok(None);
    }
    let bad = |reason: String| crate::config::ConfigError::InvalidValue {
        key: "realworld.weights".into(),
        value: raw.into(),
        reason,
    };
    let mut w = vec![0.0; dist.regions.len()];
    for part in raw.split(',') {
        let (name, value) = part.split_once(':').ok_or_else(|| bad(format!("expected region:weight, got `{part}`")))?;
        let i = dist
            .regions
            .iter()
            .position(|(r, _)| r == name.trim())
            .ok_or_else(|| bad(format!("unknown region `{}`", name.trim())))?;
        w[i] = value.trim().parse::<f64>().map_err(|e| bad(e.to_string()))?;
    }
    if w.iter().any(|x| *x < 0.0) || w.iter().sum::<f64>() <= 0.0 {
        return Err(bad("weights must be non-negative with a positive sum".into()).into());
    }
    Ok(Some(w))
}

fn binomial_at_most(n: u64, k: u64, cap: u64) -> bool {
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) as u128 / (i + 1) as u128;
        if c > cap as u128 {
            return false;
        }
    }
    true
}

/// Every `k`-subset of `0..n` in lexicographic order.
fn all_subsets(n: u64, k: u64) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut idx: Vec<u64> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let Some(i) = (0..k as usize).rev().find(|&i| idx[i] < n - k + i as u64) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..k as usize {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

pub(crate) fn run(
    settings: &Settings,
    seed: u64,
    _workers: Option<usize>,
    out: &mut ExperimentResult,
) -> Result<(), ExperimentError> {
    let dist = load_regions(settings, "realworld.regions_file")?;
    let samples: u64 = settings.parse("realworld.samples")?;
    let max_adv: u64 = settings.parse("realworld.max_adversaries")?;
    let weights = parse_weights(settings, &dist)?;
    let n = dist.total();
    if max_adv > n {
        return Err(crate::config::ConfigError::InvalidValue {
            key: "realworld.max_adversaries".into(),
            value: max_adv.to_string(),
            reason: format!("only {n} full nodes exist"),
        }
        .into());
    }

    for (name, count) in &dist.regions {
        let l = label(&[("region", name.clone())]);
        out.push(&l, "full_nodes", *count as f64, None);
        out.push(&l, "takeover_1", continental_takeover_rate(*count, RegionAction::Takeover(1))?.value(), None);
        out.push(&l, "add_1", continental_takeover_rate(*count, RegionAction::Add(1))?.value(), None);
        if *count > 1 {
            let k = count - 1;
            out.push(
                &l,
                &format!("collude_{k}"),
                continental_takeover_rate(*count, RegionAction::Collude(k))?.value(),
                None,
            );
        }
    }

    for a in 1..=max_adv {
        let subsets: Vec<Vec<u64>> = if binomial_at_most(n, a, samples) {
            all_subsets(n, a)
        } else {
            let mut r = rng::stream(seed, &[purpose::REALWORLD, a]);
            let mut seen = BTreeSet::new();
            let mut picked = Vec::new();
            while (picked.len() as u64) < samples {
                let mut s: Vec<u64> =
                    index::sample(&mut r, n as usize, a as usize).into_iter().map(|i| i as u64).collect();
                s.sort_unstable();
                if seen.insert(s.clone()) {
                    picked.push(s);
                }
            }
            picked
        };
        let mut rates: Vec<f64> =
            subsets.iter().map(|s| region_weighted_rate(&dist, s, weights.as_deref()).weighted).collect();
        let m = mean(&rates);
        rates.sort_by(f64::total_cmp);
        let l = label(&[("adversaries", a.to_string())]);
        out.push(&l, "samples", rates.len() as f64, None);
        out.push(&l, "min", rates[0], None);
        out.push(&l, "q1", quantile(&rates, 0.25), None);
        out.push(&l, "median", quantile(&rates, 0.5), None);
        out.push(&l, "q3", quantile(&rates, 0.75), None);
        out.push(&l, "max", rates[rates.len() - 1], None);
        out.push(&l, "mean", m, None);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist() -> RegionDistribution {
        RegionDistribution::embedded_2020()
    }

    fn index_in(region: &str, k: u64) -> u64 {
        let d = dist();
        let mut start = 0;
        for (name, n) in &d.regions {
            if name == region {
                assert!(k < *n);
                return start + k;
            }
            start += n;
        }
        panic!("no region {region}");
    }

    #[test]
    fn single_adversary_rates() {
        let d = dist();
        let sa = region_weighted_rate(&d, &[index_in("south_america", 0)], None);
        assert_eq!(sa.regions.iter().find(|r| r.0 == "south_america").unwrap().2, 1.0);
        let eu = region_weighted_rate(&d, &[index_in("europe", 3)], None);
        assert!((eu.regions.iter().find(|r| r.0 == "europe").unwrap().2 - 1.0 / 31.0).abs() < 1e-15);
        assert!((eu.weighted - (1.0 / 31.0) / 5.0).abs() < 1e-15);
    }

    #[test]
    fn four_in_europe_matches_one_in_north_america() {
        let d = dist();
        let eu: Vec<u64> = (0..4).map(|k| index_in("europe", k)).collect();
        let eu = region_weighted_rate(&d, &eu, None).regions[1].2;
        let na = region_weighted_rate(&d, &[index_in("north_america", 0)], None).regions[0].2;
        // 4/31 - 1/8 = 1/248, just over 0.004.
        assert!((eu - na - 1.0 / 248.0).abs() < 1e-15);
    }

    #[test]
    fn everyone_adversarial_gives_rate_one_everywhere() {
        let d = dist();
        let all: Vec<u64> = (0..d.total()).collect();
        let r = region_weighted_rate(&d, &all, None);
        assert!(r.regions.iter().all(|(_, _, rate)| *rate == 1.0));
        assert_eq!(r.weighted, 1.0);
    }

    #[test]
    fn subset_enumeration() {
        let s = all_subsets(5, 2);
        assert_eq!(s.len(), 10);
        assert_eq!(s[0], vec![0, 1]);
        assert_eq!(s[9], vec![3, 4]);
        assert!(binomial_at_most(47, 1, 100));
        assert!(!binomial_at_most(47, 2, 100));
    }

    #[test]
    fn box_statistics_are_ordered() {
        let r = super::super::Experiment::Realworld.run_default(7, &[("samples", "50")]).unwrap();
        for a in 1..=16 {
            let l = format!("adversaries={a}");
            let v: Vec<f64> = ["min", "q1", "median", "q3", "max"].iter().map(|m| r.value(&l, m).unwrap()).collect();
            assert!(v.windows(2).all(|w| w[0] <= w[1]), "{l}: {v:?}");
        }
        assert_eq!(r.value("adversaries=1", "samples"), Some(47.0));
        assert_eq!(r.value("region=asia", "collude_5").map(|v| (v * 1e4).round() / 1e4), Some(0.8333));
    }
}
