use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::NodeId;

use super::{NodeDescriptor, Population, Position};

/// Which full nodes a requester may send tip-selection requests to.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum RequestScope {
    /// Every full node in the network.
    Global,
    /// Full nodes within a closed ball of this radius.
    Radius(f64),
    /// Full nodes sharing the requester's region label.
    Region,
}

impl FromStr for RequestScope {
    type Err = String;

    /// `global`, `region`, or a radius such as `3` / `radius:3`.
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "global" => Ok(RequestScope::Global),
            "region" => Ok(RequestScope::Region),
            _ => {
                let r = s.strip_prefix("radius:").unwrap_or(s);
                r.parse::<f64>()
                    .ok()
                    .filter(|r| *r > 0.0 && r.is_finite())
                    .map(RequestScope::Radius)
                    .ok_or_else(|| format!("unknown request scope `{s}`"))
            }
        }
    }
}

/// Full nodes (adversaries included) within distance `radius` of `position`,
/// boundary included. `None` means unbounded.
pub fn reachable_within(position: Position, population: &Population, radius: Option<f64>) -> Vec<NodeId> {
    population
        .full_nodes()
        .filter(|n| radius.is_none_or(|r| n.position.distance(&position) <= r))
        .map(|n| n.node_id)
        .collect()
}

/// Full nodes carrying the given region label.
pub fn reachable_in_region(region: Option<&str>, population: &Population) -> Vec<NodeId> {
    population.full_nodes().filter(|n| region.is_some() && n.region.as_deref() == region).map(|n| n.node_id).collect()
}

pub fn reachable_full_nodes(origin: &NodeDescriptor, population: &Population, scope: RequestScope) -> Vec<NodeId> {
    match scope {
        RequestScope::Global => reachable_within(origin.position, population, None),
        RequestScope::Radius(r) => reachable_within(origin.position, population, Some(r)),
        RequestScope::Region => reachable_in_region(origin.region.as_deref(), population),
    }
}
