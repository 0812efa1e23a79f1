use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::math::{entropy_degree, AnonymityProfile};
use crate::par::Workers;
use crate::rng::{self, purpose};
use crate::tangle::{urts_from_tips, Address, Ledger, LedgerEntry, TipPair, TipSelection, TransactionId};
use crate::{NodeId, DEFAULT_SEED};

use super::{
    match_responses, place_nodes, proxy_assign, reachable_full_nodes, LinkRecord, LoggedResponse, MatchMode,
    NodeDescriptor, Placement, Population, RequestScope, ResponseNonce, SimError, TipSelectionResponse,
};

/// How light nodes obtain their tips.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Routing {
    /// Light nodes ask full nodes directly.
    #[default]
    Baseline,
    /// Requests and attaches go through the nearest proxy.
    Proxy,
    /// Light nodes select tips themselves from a local tip cache.
    Direct,
}

impl FromStr for Routing {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "baseline" => Ok(Routing::Baseline),
            "proxy" => Ok(Routing::Proxy),
            "direct" | "direct_tip_selection" => Ok(Routing::Direct),
            other => Err(format!("unknown routing mode `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum AdversarySpec {
    /// Fraction of full nodes, rounded to the nearest count (halves away from zero).
    Ratio(f64),
    Count(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub full_nodes: usize,
    pub adversaries: AdversarySpec,
    /// Number of full nodes each request goes to (M).
    pub fanout: usize,
    pub rounds: usize,
    pub light_nodes: usize,
    pub plane_size: f64,
    pub scope: RequestScope,
    pub placement: Placement,
    pub routing: Routing,
    pub matching: MatchMode,
    pub proxies: usize,
    /// Size of a light node's local tip cache in direct mode.
    pub tip_cache: usize,
    pub tip_selection: TipSelection,
    /// Extra transactions approving genesis before the first round, so the
    /// ledger starts with this many tips.
    pub initial_tips: usize,
    pub seed: u64,
    pub workers: Option<usize>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            full_nodes: 100,
            adversaries: AdversarySpec::Ratio(0.1),
            fanout: 3,
            rounds: 100,
            light_nodes: 100,
            plane_size: 10.0,
            scope: RequestScope::Radius(3.0),
            placement: Placement::UniformRandom,
            routing: Routing::Baseline,
            matching: MatchMode::AssumeUnique,
            proxies: 1,
            tip_cache: 32,
            tip_selection: TipSelection::Urts,
            initial_tips: 0,
            seed: DEFAULT_SEED,
            workers: None,
        }
    }
}

impl SimConfig {
    pub fn full_node_count(&self) -> usize {
        self.full_nodes
    }

    pub fn adversary_count(&self) -> usize {
        match self.adversaries {
            AdversarySpec::Ratio(p) => (p * self.full_nodes as f64).round() as usize,
            AdversarySpec::Count(c) => c,
        }
    }

    pub fn proxy_count(&self) -> usize {
        if self.routing == Routing::Proxy {
            self.proxies
        } else {
            0
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let fail = |m: String| Err(SimError::Config(m));
        if self.full_nodes == 0 {
            return fail("at least one full node is required".into());
        }
        if let AdversarySpec::Ratio(p) = self.adversaries {
            if !(0.0..=1.0).contains(&p) {
                return fail(format!("adversary ratio {p} is outside [0, 1]"));
            }
        }
        if self.adversary_count() > self.full_nodes {
            return fail(format!("{} adversaries exceed {} full nodes", self.adversary_count(), self.full_nodes));
        }
        if self.fanout == 0 {
            return fail("request fanout must be at least 1".into());
        }
        if !(self.plane_size > 0.0 && self.plane_size.is_finite()) {
            return fail(format!("plane size {} must be positive", self.plane_size));
        }
        if self.routing == Routing::Proxy && self.proxies == 0 {
            return fail("proxy routing needs at least one proxy node".into());
        }
        if self.routing == Routing::Direct && self.tip_cache == 0 {
            return fail("direct tip selection needs a tip cache of at least one".into());
        }
        if self.full_nodes + self.light_nodes + self.proxy_count() > u32::MAX as usize {
            return fail("population too large".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LightNodeStats {
    pub light: NodeId,
    pub transactions: u64,
    /// Transactions of this light node that some adversary linked correctly.
    pub linked: u64,
    pub unreachable_rounds: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub total_transactions: u64,
    pub linked_count: u64,
    pub correct_link_count: u64,
    pub false_positive_count: u64,
    /// Distinct transactions with at least one link.
    pub linked_transactions: u64,
    /// Distinct transactions with at least one correct link.
    pub correctly_linked_transactions: u64,
    pub link_rate: f64,
    pub correct_link_rate: f64,
    /// Share of transactions correctly linked to the issuing light node itself.
    pub deanonymization_rate: f64,
    /// Mean degree of anonymity over linked addresses; 1 when nothing was linked.
    pub anonymity_degree: f64,
    /// Light nodes that could not reach any full node.
    pub unreachable_light_nodes: u64,
    pub per_light: Vec<LightNodeStats>,
    pub links: Vec<LinkRecord>,
}

/// What one light node does in one round, decided without touching shared state.
enum Plan {
    Unreachable,
    Direct(TipPair),
    Requested { requester: NodeId, responses: Vec<(NodeId, TipPair)>, chosen: usize },
}

/// A running simulation: population, shared ledger and accumulated statistics.
pub struct Simulation {
    config: SimConfig,
    population: Population,
    ledger: Ledger,
    lights: Vec<NodeId>,
    /// Full nodes each light node's requests can reach (through its proxy
    /// in proxy mode).
    reach: Vec<Vec<NodeId>>,
    proxy_of: BTreeMap<NodeId, NodeId>,
    pool: Workers,
    round: u64,
    next_address: u64,
    next_nonce: u64,
    total_transactions: u64,
    links: Vec<LinkRecord>,
    per_light: Vec<LightNodeStats>,
    /// Degree of anonymity for each linked transaction.
    degrees: Vec<f64>,
    deanonymized: u64,
    linked_tx: u64,
    correct_tx: u64,
}

impl Simulation {
    pub fn new(config: SimConfig) -> Result<Self, SimError> {
        let population = place_nodes(&config)?;
        Self::with_population(config, population, None)
    }

    /// Starts from an existing ledger instead of a fresh one.
    pub fn with_ledger(config: SimConfig, ledger: Ledger) -> Result<Self, SimError> {
        let population = place_nodes(&config)?;
        Self::with_population(config, population, Some(ledger))
    }

    /// Runs on a hand-built population. Node placement settings in `config`
    /// are ignored; everything else applies.
    pub fn with_population(
        config: SimConfig,
        population: Population,
        ledger: Option<Ledger>,
    ) -> Result<Self, SimError> {
        config.validate()?;
        let proxy_of = if config.routing == Routing::Proxy { proxy_assign(&population)? } else { BTreeMap::new() };
        let lights: Vec<NodeId> = population.light_nodes().map(|n| n.node_id).collect();
        let reach = lights
            .iter()
            .map(|id| {
                let light = population.get(*id).expect("light node exists");
                match proxy_of.get(id) {
                    Some(proxy) => {
                        // The proxy asks on the light node's behalf from its
                        // own position, within the light node's region.
                        let p = population.get(*proxy).expect("proxy exists");
                        let origin = NodeDescriptor { region: light.region.clone(), ..p.clone() };
                        reachable_full_nodes(&origin, &population, config.scope)
                    }
                    None => reachable_full_nodes(light, &population, config.scope),
                }
            })
            .collect();
        let mut ledger = ledger.unwrap_or_default();
        let mut next_address = ledger.len() as u64;
        for _ in 0..config.initial_tips {
            ledger
                .attach([TransactionId::GENESIS; 2], Address(next_address), None, 0)
                .expect("genesis is always present");
            next_address += 1;
        }
        let per_light = lights.iter().map(|&light| LightNodeStats { light, ..Default::default() }).collect();
        let pool = Workers::new(config.workers);
        Ok(Simulation {
            round: ledger.round(),
            config,
            population,
            ledger,
            lights,
            reach,
            proxy_of,
            pool,
            next_address,
            next_nonce: 0,
            total_transactions: 0,
            links: Vec::new(),
            per_light,
            degrees: Vec::new(),
            deanonymized: 0,
            linked_tx: 0,
            correct_tx: 0,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn population(&self) -> &Population {
        &self.population
    }

    pub fn ledger(&self) -> &Ledger {
        &self.ledger
    }

    pub fn proxy_of(&self, light: NodeId) -> Option<NodeId> {
        self.proxy_of.get(&light).copied()
    }

    /// The newest `tip_cache` tips, which a light node selecting on its own
    /// keeps locally.
    fn tip_cache(&self) -> Vec<TransactionId> {
        let mut cache: Vec<TransactionId> = self.ledger.tips().iter().copied().collect();
        let keep = self.config.tip_cache.min(cache.len());
        if keep < cache.len() {
            let cut = cache.len() - keep;
            cache.select_nth_unstable(cut);
            cache.drain(..cut);
        }
        cache.sort_unstable();
        cache
    }

    fn plan(&self, slot: usize, round: u64, cache: &[TransactionId]) -> Plan {
        let light = self.lights[slot];
        let seed = self.config.seed;
        if self.config.routing == Routing::Direct {
            let mut r = rng::stream(seed, &[purpose::DIRECT, light.0 as u64, round]);
            let pair = urts_from_tips(cache, &mut r).expect("a ledger always has a tip");
            return Plan::Direct(pair);
        }
        let reach = &self.reach[slot];
        if reach.is_empty() {
            return Plan::Unreachable;
        }
        let mut r = rng::stream(seed, &[purpose::REQUEST, light.0 as u64, round]);
        let m = self.config.fanout.min(reach.len());
        let responders: Vec<NodeId> = index::sample(&mut r, reach.len(), m).into_iter().map(|i| reach[i]).collect();
        let chosen = r.gen_range(0..m);
        let responses = responders
            .into_iter()
            .map(|f| {
                let mut rr = rng::stream(seed, &[purpose::RESPONSE, f.0 as u64, light.0 as u64, round]);
                (f, self.config.tip_selection.select(&self.ledger, &mut rr))
            })
            .collect();
        let requester = self.proxy_of.get(&light).copied().unwrap_or(light);
        Plan::Requested { requester, responses, chosen }
    }

    /// Plays one round and returns the links adversaries found in it.
    pub fn run_round(&mut self) -> Vec<LinkRecord> {
        self.round += 1;
        let round = self.round;
        self.ledger.set_round(round);
        let first_new = TransactionId(self.ledger.len() as u64);

        let cache = if self.config.routing == Routing::Direct { self.tip_cache() } else { Vec::new() };
        let plans = self.pool.map_indexed(self.lights.len(), |slot| self.plan(slot, round, &cache));

        let mut logs: BTreeMap<NodeId, Vec<LoggedResponse>> = BTreeMap::new();
        // Which light nodes hid behind each requester identity this round.
        let mut behind: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
        for (slot, plan) in plans.into_iter().enumerate() {
            let light = self.lights[slot];
            let (parents, marker) = match plan {
                Plan::Unreachable => {
                    self.per_light[slot].unreachable_rounds += 1;
                    continue;
                }
                Plan::Direct(pair) => (pair, None),
                Plan::Requested { requester, responses, chosen } => {
                    behind.entry(requester).or_default().push(light);
                    let mut followed = None;
                    for (i, (responder, tips)) in responses.into_iter().enumerate() {
                        let nonce = ResponseNonce(self.next_nonce);
                        self.next_nonce += 1;
                        if i == chosen {
                            followed = Some((tips, nonce));
                        }
                        if self.population.is_adversary(responder) {
                            let response = TipSelectionResponse { responder, tips, request_round: round, nonce };
                            logs.entry(responder).or_default().push(LoggedResponse { response, requester });
                        }
                    }
                    let (tips, nonce) = followed.expect("chosen index is within the responses");
                    (tips, Some(nonce.0))
                }
            };
            let address = Address(self.next_address);
            self.next_address += 1;
            self.ledger
                .attach_marked(parents, address, Some(light), round, marker)
                .expect("responses only name transactions already in the ledger");
            self.per_light[slot].transactions += 1;
            self.total_transactions += 1;
        }

        let entries: Vec<LedgerEntry> = self.ledger.entries_since(first_new).collect();
        let mut found = Vec::new();
        for (adversary, log) in &logs {
            for link in match_responses(log, &entries, self.config.matching) {
                let issuer = self.ledger.get(link.transaction).and_then(|t| t.issuer_identity());
                let correct = issuer
                    .is_some_and(|i| i == link.claimed_identity || self.proxy_of(i) == Some(link.claimed_identity));
                found.push(LinkRecord {
                    adversary: *adversary,
                    transaction: link.transaction,
                    address: link.address,
                    claimed_identity: link.claimed_identity,
                    matched_response: link.matched_response,
                    correct,
                    round: link.round,
                });
            }
        }
        self.score_round(&found, &behind);
        self.links.extend_from_slice(&found);
        found
    }

    fn score_round(&mut self, found: &[LinkRecord], behind: &BTreeMap<NodeId, Vec<NodeId>>) {
        let mut by_tx: BTreeMap<TransactionId, Vec<&LinkRecord>> = BTreeMap::new();
        for l in found {
            by_tx.entry(l.transaction).or_default().push(l);
        }
        let slot_of: BTreeMap<NodeId, usize> = self.lights.iter().enumerate().map(|(i, l)| (*l, i)).collect();
        for (tx, links) in by_tx {
            self.linked_tx += 1;
            let issuer = self.ledger.get(tx).and_then(|t| t.issuer_identity());
            if links.iter().any(|l| l.correct) {
                self.correct_tx += 1;
                if let Some(slot) = issuer.and_then(|i| slot_of.get(&i)) {
                    self.per_light[*slot].linked += 1;
                }
            }
            if links.iter().any(|l| Some(l.claimed_identity) == issuer) {
                self.deanonymized += 1;
            }
            // Attacker's posterior: each distinct claimed identity is equally
            // likely, spread evenly over the light nodes behind it.
            let claims: BTreeSet<NodeId> = links.iter().map(|l| l.claimed_identity).collect();
            let mut weights: BTreeMap<NodeId, f64> = BTreeMap::new();
            for c in &claims {
                let candidates = behind.get(c).map(Vec::as_slice).unwrap_or(std::slice::from_ref(c));
                for light in candidates {
                    *weights.entry(*light).or_default() += 1.0 / (claims.len() * candidates.len()) as f64;
                }
            }
            let w: Vec<f64> = weights.into_values().collect();
            let degree = AnonymityProfile::from_weights(&w).map(|p| entropy_degree(&p)).unwrap_or(0.0);
            self.degrees.push(degree);
        }
    }

    /// Runs the configured number of rounds.
    pub fn run(&mut self) {
        for _ in 0..self.config.rounds {
            self.run_round();
        }
    }

    pub fn result(&self) -> SimResult {
        let total = self.total_transactions;
        let rate = |k: u64| if total == 0 { 0.0 } else { k as f64 / total as f64 };
        let correct = self.links.iter().filter(|l| l.correct).count() as u64;
        let degree =
            if self.degrees.is_empty() { 1.0 } else { self.degrees.iter().sum::<f64>() / self.degrees.len() as f64 };
        SimResult {
            total_transactions: total,
            linked_count: self.links.len() as u64,
            correct_link_count: correct,
            false_positive_count: self.links.len() as u64 - correct,
            linked_transactions: self.linked_tx,
            correctly_linked_transactions: self.correct_tx,
            link_rate: rate(self.linked_tx),
            correct_link_rate: rate(self.correct_tx),
            deanonymization_rate: rate(self.deanonymized),
            anonymity_degree: degree,
            unreachable_light_nodes: self.reach.iter().filter(|r| r.is_empty()).count() as u64
                * u64::from(self.config.routing != Routing::Direct),
            per_light: self.per_light.clone(),
            links: self.links.clone(),
        }
    }
}

/// Places nodes, runs every round and aggregates the outcome.
pub fn run_simulation(config: &SimConfig) -> Result<SimResult, SimError> {
    let mut sim = Simulation::new(config.clone())?;
    sim.run();
    Ok(sim.result())
}
