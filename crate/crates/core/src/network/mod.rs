//! Node populations, the tip-selection request protocol, the passive
//! matching attack and the proxy / direct-selection mitigations.

mod attack;
mod placement;
mod proxy;
mod reach;
mod regions;
mod sim;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::NodeId;

pub use attack::{
    match_responses, InferredLink, LinkRecord, LoggedResponse, MatchMode, ResponseNonce, TipSelectionResponse,
};
pub use placement::{full_node_positions, place_nodes, Placement};
pub use proxy::proxy_assign;
pub use reach::{reachable_full_nodes, reachable_in_region, reachable_within, RequestScope};
pub use regions::RegionDistribution;
pub use sim::{run_simulation, AdversarySpec, LightNodeStats, Routing, SimConfig, SimResult, Simulation};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("configuration error: {0}")]
    Config(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    Full,
    Light,
    AdversaryFull,
    Proxy,
}

impl NodeKind {
    /// Full nodes answer tip-selection requests; adversaries are full nodes too.
    pub fn is_full(self) -> bool {
        matches!(self, NodeKind::Full | NodeKind::AdversaryFull)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn new(x: f64, y: f64) -> Self {
        Position { x, y }
    }

    pub fn distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeDescriptor {
    pub node_id: NodeId,
    pub kind: NodeKind,
    pub position: Position,
    pub region: Option<String>,
}

/// All participants of a simulated network. Node ids are dense indices:
/// full nodes first, then light nodes, then proxies.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Population {
    nodes: Vec<NodeDescriptor>,
}

impl Population {
    pub fn new(nodes: Vec<NodeDescriptor>) -> Result<Self, SimError> {
        for (i, n) in nodes.iter().enumerate() {
            if n.node_id.0 as usize != i {
                return Err(SimError::Config(format!("node {} stored at index {i}", n.node_id)));
            }
        }
        Ok(Population { nodes })
    }

    pub fn nodes(&self) -> &[NodeDescriptor] {
        &self.nodes
    }

    pub fn get(&self, id: NodeId) -> Option<&NodeDescriptor> {
        self.nodes.get(id.0 as usize)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn of_kind(&self, kind: NodeKind) -> impl Iterator<Item = &NodeDescriptor> + '_ {
        self.nodes.iter().filter(move |n| n.kind == kind)
    }

    pub fn full_nodes(&self) -> impl Iterator<Item = &NodeDescriptor> + '_ {
        self.nodes.iter().filter(|n| n.kind.is_full())
    }

    pub fn light_nodes(&self) -> impl Iterator<Item = &NodeDescriptor> + '_ {
        self.of_kind(NodeKind::Light)
    }

    pub fn proxies(&self) -> impl Iterator<Item = &NodeDescriptor> + '_ {
        self.of_kind(NodeKind::Proxy)
    }

    pub fn is_adversary(&self, id: NodeId) -> bool {
        self.get(id).is_some_and(|n| n.kind == NodeKind::AdversaryFull)
    }

    pub fn adversary_count(&self) -> usize {
        self.of_kind(NodeKind::AdversaryFull).count()
    }
}
