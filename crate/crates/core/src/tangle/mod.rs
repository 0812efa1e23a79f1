//! The DAG ledger ("Tangle") and the tip-selection algorithms full nodes run.

mod select;
mod snapshot;

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use indexmap::IndexSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::NodeId;

pub use select::{urts_from_tips, urts_select, weighted_walk_select, TipPair, TipSelection};
pub use snapshot::{export_snapshot, import_snapshot, SnapshotError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TransactionId(pub u64);

impl TransactionId {
    pub const GENESIS: TransactionId = TransactionId(0);
}

impl fmt::Display for TransactionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "tx{}", self.0)
    }
}

/// Opaque address token. Light nodes use a fresh one per transaction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Address(pub u64);

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "addr{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Transaction {
    pub id: TransactionId,
    pub parents: TipPair,
    pub issuer_address: Address,
    pub round: u64,
    /// Distinguishing token left by the tip-selection response this
    /// transaction was built on, when that response was unique.
    pub marker: Option<u64>,
    issuer_identity: Option<NodeId>,
}

impl Transaction {
    /// Ground truth about who issued the transaction. Only evaluation code
    /// reads this; the attacker works on [`LedgerEntry`] views.
    pub fn issuer_identity(&self) -> Option<NodeId> {
        self.issuer_identity
    }

    pub fn entry(&self) -> LedgerEntry {
        LedgerEntry {
            id: self.id,
            parents: self.parents,
            address: self.issuer_address,
            round: self.round,
            marker: self.marker,
        }
    }
}

/// What any full node can see of a transaction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LedgerEntry {
    pub id: TransactionId,
    pub parents: TipPair,
    pub address: Address,
    pub round: u64,
    pub marker: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AttachError {
    #[error("parent {0} is not in the ledger")]
    UnknownParent(TransactionId),
}

/// Append-only DAG of transactions with a maintained tip set.
#[derive(Clone, Debug)]
pub struct Ledger {
    transactions: Vec<Transaction>,
    approvers: Vec<Vec<TransactionId>>,
    tips: IndexSet<TransactionId>,
    round: u64,
}

impl Default for Ledger {
    fn default() -> Self {
        Self::new()
    }
}

impl Ledger {
    /// A ledger holding only the genesis transaction, which is also the only tip.
    pub fn new() -> Self {
        let genesis = Transaction {
            id: TransactionId::GENESIS,
            parents: [TransactionId::GENESIS; 2],
            issuer_address: Address(0),
            round: 0,
            marker: None,
            issuer_identity: None,
        };
        let mut tips = IndexSet::new();
        tips.insert(TransactionId::GENESIS);
        Ledger { transactions: vec![genesis], approvers: vec![Vec::new()], tips, round: 0 }
    }

    pub fn len(&self) -> usize {
        self.transactions.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn set_round(&mut self, round: u64) {
        self.round = round;
    }

    pub fn contains(&self, id: TransactionId) -> bool {
        (id.0 as usize) < self.transactions.len()
    }

    pub fn get(&self, id: TransactionId) -> Option<&Transaction> {
        self.transactions.get(id.0 as usize)
    }

    pub fn transactions(&self) -> &[Transaction] {
        &self.transactions
    }

    /// Public view of every transaction from `first` onward.
    pub fn entries_since(&self, first: TransactionId) -> impl Iterator<Item = LedgerEntry> + '_ {
        self.transactions.iter().skip(first.0 as usize).map(Transaction::entry)
    }

    /// Direct approvers of `id`, in attach order.
    pub fn approvers(&self, id: TransactionId) -> &[TransactionId] {
        self.approvers.get(id.0 as usize).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Transactions not yet approved by anyone.
    pub fn tips(&self) -> &IndexSet<TransactionId> {
        &self.tips
    }

    pub fn tip_count(&self) -> usize {
        self.tips.len()
    }

    pub fn attach(
        &mut self,
        parents: TipPair,
        issuer_address: Address,
        issuer_identity: Option<NodeId>,
        round: u64,
    ) -> Result<TransactionId, AttachError> {
        self.attach_marked(parents, issuer_address, issuer_identity, round, None)
    }

    pub fn attach_marked(
        &mut self,
        parents: TipPair,
        issuer_address: Address,
        issuer_identity: Option<NodeId>,
        round: u64,
        marker: Option<u64>,
    ) -> Result<TransactionId, AttachError> {
        for p in parents {
            if !self.contains(p) {
                return Err(AttachError::UnknownParent(p));
            }
        }
        let id = TransactionId(self.transactions.len() as u64);
        self.transactions.push(Transaction { id, parents, issuer_address, round, marker, issuer_identity });
        self.approvers.push(Vec::new());
        self.approvers[parents[0].0 as usize].push(id);
        if parents[1] != parents[0] {
            self.approvers[parents[1].0 as usize].push(id);
        }
        for p in parents {
            self.tips.swap_remove(&p);
        }
        self.tips.insert(id);
        Ok(id)
    }

    /// Tip set recomputed from scratch: every transaction with no approver.
    pub fn recompute_tips(&self) -> BTreeSet<TransactionId> {
        let mut approved = vec![false; self.transactions.len()];
        for tx in &self.transactions[1..] {
            for p in tx.parents {
                approved[p.0 as usize] = true;
            }
        }
        approved.iter().enumerate().filter(|(_, &a)| !a).map(|(i, _)| TransactionId(i as u64)).collect()
    }

    /// Kahn-style topological order over approval edges (parent before
    /// approver), or `None` if the reference graph has a cycle. The genesis
    /// self-reference is not an edge.
    pub fn topological_order(&self) -> Option<Vec<TransactionId>> {
        let n = self.transactions.len();
        let mut indegree = vec![0usize; n];
        for tx in &self.transactions[1..] {
            let distinct = if tx.parents[0] == tx.parents[1] { 1 } else { 2 };
            indegree[tx.id.0 as usize] = distinct;
        }
        let mut queue: VecDeque<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = queue.pop_front() {
            order.push(TransactionId(i as u64));
            for a in &self.approvers[i] {
                let j = a.0 as usize;
                indegree[j] -= 1;
                if indegree[j] == 0 {
                    queue.push_back(j);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    /// Number of direct and indirect approvers of `id`, plus one.
    pub fn cumulative_weight(&self, id: TransactionId) -> usize {
        let mut seen = vec![false; self.transactions.len()];
        let mut stack = vec![id];
        let mut count = 0;
        while let Some(t) = stack.pop() {
            let i = t.0 as usize;
            if seen[i] {
                continue;
            }
            seen[i] = true;
            count += 1;
            stack.extend(self.approvers[i].iter().copied());
        }
        count
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tips(l: &Ledger) -> BTreeSet<TransactionId> {
        l.tips().iter().copied().collect()
    }

    #[test]
    fn new_ledger_is_genesis_only() {
        let l = Ledger::new();
        assert_eq!(l.len(), 1);
        assert_eq!(tips(&l), BTreeSet::from([TransactionId::GENESIS]));
    }

    #[test]
    fn attach_approving_genesis_twice() {
        let mut l = Ledger::new();
        let g = TransactionId::GENESIS;
        let t = l.attach([g, g], Address(1), None, 1).unwrap();
        assert_eq!(l.len(), 2);
        assert_eq!(tips(&l), BTreeSet::from([t]));
        assert_eq!(l.approvers(g), &[t]);
    }

    #[test]
    fn two_attaches_on_the_same_pair_leave_two_tips() {
        let mut l = Ledger::new();
        let g = TransactionId::GENESIS;
        let a = l.attach([g, g], Address(1), None, 1).unwrap();
        let b = l.attach([g, g], Address(2), None, 1).unwrap();
        let n1 = l.attach([a, b], Address(3), None, 2).unwrap();
        let n2 = l.attach([a, b], Address(4), None, 2).unwrap();
        assert_eq!(tips(&l), BTreeSet::from([n1, n2]));
        assert_eq!(tips(&l), l.recompute_tips());
    }

    #[test]
    fn unknown_parent_is_rejected() {
        let mut l = Ledger::new();
        let bogus = TransactionId(42);
        assert_eq!(
            l.attach([TransactionId::GENESIS, bogus], Address(1), None, 1),
            Err(AttachError::UnknownParent(bogus))
        );
        assert_eq!(l.len(), 1);
    }

    #[test]
    fn cumulative_weight_counts_shared_descendants_once() {
        let mut l = Ledger::new();
        let g = TransactionId::GENESIS;
        let a = l.attach([g, g], Address(1), None, 1).unwrap();
        let b = l.attach([g, g], Address(2), None, 1).unwrap();
        let c = l.attach([a, b], Address(3), None, 2).unwrap();
        assert_eq!(l.cumulative_weight(c), 1);
        assert_eq!(l.cumulative_weight(a), 2);
        assert_eq!(l.cumulative_weight(g), 4);
    }

    #[test]
    fn topological_order_puts_parents_first() {
        let mut l = Ledger::new();
        let g = TransactionId::GENESIS;
        let a = l.attach([g, g], Address(1), None, 1).unwrap();
        let b = l.attach([a, g], Address(2), None, 1).unwrap();
        l.attach([b, a], Address(3), None, 2).unwrap();
        let order = l.topological_order().unwrap();
        let pos = |t: TransactionId| order.iter().position(|&x| x == t).unwrap();
        for tx in &l.transactions()[1..] {
            for p in tx.parents {
                assert!(pos(p) < pos(tx.id));
            }
        }
    }

    #[test]
    fn ground_truth_is_kept_out_of_entries() {
        let mut l = Ledger::new();
        let g = TransactionId::GENESIS;
        let t = l.attach_marked([g, g], Address(9), Some(NodeId(5)), 3, Some(77)).unwrap();
        let e = l.get(t).unwrap().entry();
        assert_eq!(e.address, Address(9));
        assert_eq!(e.marker, Some(77));
        assert_eq!(l.get(t).unwrap().issuer_identity(), Some(NodeId(5)));
    }
}
