//! Tip-selection deanonymization toolkit for Tangle-style DAG ledgers.
//!
//! Light nodes that delegate tip selection to full nodes leak a link between
//! their network identity and the transaction they attach: an adversarial full
//! node only has to remember the tip pair it answered with and watch for it in
//! the ledger. This crate provides
//!
//! * [`math`]: exact closed forms for the attack probability, anonymity
//!   degree, mixer chain analysis and network sizing,
//! * [`tangle`]: the DAG ledger with uniform and weighted tip selection,
//! * [`network`]: node populations, the request protocol, the attack engine
//!   and the proxy / direct-selection mitigations,
//! * [`experiments`]: preset scenario runners emitting result tables,
//! * [`config`], [`output`] and [`validation`]: the plumbing used by the CLI.

pub mod config;
pub mod experiments;
pub mod math;
pub mod network;
pub mod output;
pub mod par;
pub mod rng;
pub mod stats;
pub mod tangle;
pub mod validation;

mod ids;

pub use ids::NodeId;

/// Seed used when the caller does not supply one.
pub const DEFAULT_SEED: u64 = 2024;

/// Version string embedded in every output file.
pub const TOOL_VERSION: &str = concat!("tipsel ", env!("CARGO_PKG_VERSION"));
