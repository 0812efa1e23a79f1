use crate::config::Settings;
use crate::math::required_full_nodes;
use crate::network::{run_simulation, AdversarySpec, Placement, RequestScope, Routing, SimConfig};
use crate::par;
use crate::rng::{self, purpose};
use crate::stats::proportion_se;

use super::{label, ExperimentError, ExperimentResult};

pub(crate) const SCHEMA: &[(&str, &str)] = &[
    ("mitigations.full_nodes", "100"),
    ("mitigations.adversaries", "10"),
    ("mitigations.fanout", "3"),
    ("mitigations.light_nodes", "100"),
    ("mitigations.transactions", "100000"),
    ("mitigations.target_rate", "0.01"),
    ("mitigations.proxies", "4"),
    ("mitigations.scope", "global"),
];

pub(crate) fn run(
    settings: &Settings,
    seed: u64,
    workers: Option<usize>,
    out: &mut ExperimentResult,
) -> Result<(), ExperimentError> {
    let n: usize = settings.parse("mitigations.full_nodes")?;
    let c: usize = settings.parse("mitigations.adversaries")?;
    let light_nodes: usize = settings.parse("mitigations.light_nodes")?;
    let transactions: usize = settings.parse("mitigations.transactions")?;
    let target: f64 = settings.parse("mitigations.target_rate")?;
    let scaled = required_full_nodes(c as u64, target)? as usize;

    let base = SimConfig {
        full_nodes: n,
        adversaries: AdversarySpec::Count(c),
        fanout: settings.parse("mitigations.fanout")?,
        rounds: transactions.div_ceil(light_nodes.max(1)),
        light_nodes,
        scope: settings.parse::<RequestScope>("mitigations.scope")?,
        placement: Placement::UniformRandom,
        proxies: settings.parse("mitigations.proxies")?,
        workers: Some(1),
        ..SimConfig::default()
    };
    // One seed family: every scenario shares the root, each gets its own branch.
    let scenarios = [
        ("baseline", SimConfig { routing: Routing::Baseline, ..base.clone() }),
        ("scaling", SimConfig { full_nodes: scaled, ..base.clone() }),
        ("proxy", SimConfig { routing: Routing::Proxy, ..base.clone() }),
        ("direct", SimConfig { routing: Routing::Direct, ..base.clone() }),
    ]
    .into_iter()
    .enumerate()
    .map(|(i, (name, cfg))| (name, SimConfig { seed: rng::derive(seed, &[purpose::SCENARIO, i as u64]), ..cfg }))
    .collect::<Vec<_>>();
    for (_, cfg) in &scenarios {
        cfg.validate()?;
    }
    let results = par::map_indexed(scenarios.len(), workers, |i| run_simulation(&scenarios[i].1));

    for ((name, cfg), result) in scenarios.iter().zip(results) {
        let r = result?;
        let total = r.total_transactions as usize;
        let l = label(&[("scenario", name.to_string())]);
        out.push(&l, "full_nodes", cfg.full_nodes as f64, None);
        out.push(&l, "adversaries", cfg.adversary_count() as f64, None);
        out.push(&l, "transactions", r.total_transactions as f64, None);
        out.push(&l, "link_rate", r.link_rate, Some(proportion_se(r.link_rate, total)));
        out.push(&l, "correct_link_rate", r.correct_link_rate, Some(proportion_se(r.correct_link_rate, total)));
        out.push(
            &l,
            "deanonymization_rate",
            r.deanonymization_rate,
            Some(proportion_se(r.deanonymization_rate, total)),
        );
        out.push(&l, "anonymity_degree", r.anonymity_degree, None);
        out.push(&l, "false_positive_count", r.false_positive_count as f64, None);
        if *name == "scaling" {
            out.push(&l, "required_full_nodes", scaled as f64, None);
            out.push(&l, "target_rate", target, None);
            out.push(&l, "below_target", f64::from(r.link_rate < target), None);
        }
    }
    Ok(())
}
