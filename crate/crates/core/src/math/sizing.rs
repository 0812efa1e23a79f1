use serde::{Deserialize, Serialize};

use super::{MathError, Probability, Result};

/// Smallest network size `N` with `budget / N < target`.
///
/// The inequality is strict: "below 1%" with 10 adversaries needs 1001 nodes,
/// not 1000.
pub fn required_full_nodes(adversary_budget: u64, target_rate: f64) -> Result<u64> {
    if adversary_budget == 0 {
        return Err(MathError::InvalidParams("adversary budget must be positive".into()));
    }
    if target_rate == 0.0 {
        return Err(MathError::Infeasible);
    }
    if !(target_rate > 0.0 && target_rate <= 1.0) {
        return Err(MathError::InvalidParams(format!("target rate {target_rate} outside (0, 1]")));
    }
    let below = |n: u64| (adversary_budget as f64) / (n as f64) < target_rate;
    let mut n = ((adversary_budget as f64 / target_rate).floor() as u64).max(1);
    // The quotient is only an estimate in floating point; settle on the exact
    // boundary of the predicate.
    while n > 1 && below(n - 1) {
        n -= 1;
    }
    while !below(n) {
        n += 1;
    }
    Ok(n)
}

/// How the adversary gains a foothold in a region.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegionAction {
    /// Compromise `k` of the region's existing full nodes.
    Takeover(u64),
    /// Deploy `k` new adversarial full nodes into the region.
    Add(u64),
    /// `k` of the region's operators collude.
    Collude(u64),
}

/// Share of a region's light-node transactions exposed to the adversary when
/// light nodes only request tip selection within their region.
pub fn continental_takeover_rate(region_node_count: u64, action: RegionAction) -> Result<Probability> {
    if region_node_count == 0 {
        return Err(MathError::InvalidParams("region must contain at least one full node".into()));
    }
    let n = region_node_count as f64;
    let rate = match action {
        RegionAction::Takeover(k) | RegionAction::Collude(k) => {
            if k > region_node_count {
                return Err(MathError::InvalidParams(format!(
                    "{k} nodes requested but the region only has {region_node_count}"
                )));
            }
            k as f64 / n
        }
        RegionAction::Add(k) => k as f64 / (n + k as f64),
    };
    Probability::new(rate)
}
