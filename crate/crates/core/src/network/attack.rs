use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::tangle::{Address, LedgerEntry, TipPair, TransactionId};
use crate::NodeId;

/// Token distinguishing one tip-selection response from every other.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ResponseNonce(pub u64);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TipSelectionResponse {
    pub responder: NodeId,
    pub tips: TipPair,
    pub request_round: u64,
    pub nonce: ResponseNonce,
}

/// A response an adversary sent, together with the network identity that
/// asked for it (a light node, or the proxy standing in for one).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LoggedResponse {
    pub response: TipSelectionResponse,
    pub requester: NodeId,
}

/// How an adversary decides that a ledger entry was built on its response.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatchMode {
    /// Every response is unique, so a match on the response token is exact.
    #[default]
    AssumeUnique,
    /// Only the approved tips are compared, so identical tip pairs handed out
    /// by other full nodes produce false links.
    CollisionAware,
}

impl FromStr for MatchMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "assume_unique" => Ok(MatchMode::AssumeUnique),
            "collision_aware" => Ok(MatchMode::CollisionAware),
            other => Err(format!("unknown matching mode `{other}`")),
        }
    }
}

/// What the attacker concludes, before anyone checks it against ground truth.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InferredLink {
    pub transaction: TransactionId,
    pub address: Address,
    pub claimed_identity: NodeId,
    pub matched_response: ResponseNonce,
    pub round: u64,
}

/// An inferred link scored against ground truth.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkRecord {
    pub adversary: NodeId,
    pub transaction: TransactionId,
    pub address: Address,
    pub claimed_identity: NodeId,
    pub matched_response: ResponseNonce,
    pub correct: bool,
    pub round: u64,
}

fn same_tips(a: TipPair, b: TipPair) -> bool {
    a == b || a == [b[1], b[0]]
}

/// Scans ledger entries for transactions approving a logged response's tips.
///
/// The attacker sees only public ledger entries. Collision-aware matching
/// compares the set of approved tips, since the order of the two approvals
/// carries no information an attacker could rely on.
pub fn match_responses(log: &[LoggedResponse], entries: &[LedgerEntry], mode: MatchMode) -> Vec<InferredLink> {
    let mut links = Vec::new();
    for entry in entries {
        for logged in log {
            let r = &logged.response;
            let hit = match mode {
                MatchMode::AssumeUnique => entry.marker == Some(r.nonce.0) && entry.parents == r.tips,
                MatchMode::CollisionAware => same_tips(entry.parents, r.tips),
            };
            if hit {
                links.push(InferredLink {
                    transaction: entry.id,
                    address: entry.address,
                    claimed_identity: logged.requester,
                    matched_response: r.nonce,
                    round: entry.round,
                });
            }
        }
    }
    links
}
