use crate::config::Settings;
use crate::network::{run_simulation, AdversarySpec, Placement, SimConfig};

use super::{load_regions, ExperimentError, ExperimentResult, Table};

pub(crate) const SCHEMA: &[(&str, &str)] = &[
    ("sim.full_nodes", ""),
    ("sim.adversary_ratio", "0.1"),
    ("sim.adversary_count", ""),
    ("sim.fanout", "3"),
    ("sim.rounds", "100"),
    ("sim.light_nodes", "100"),
    ("sim.plane_size", "10"),
    ("sim.scope", "3"),
    ("sim.placement", "uniform_random"),
    ("sim.clusters", "3"),
    ("sim.cluster_spread", "1.5"),
    ("sim.regions_file", ""),
    ("sim.mode", "baseline"),
    ("sim.matching", "assume_unique"),
    ("sim.proxies", "1"),
    ("sim.tip_cache", "32"),
    ("sim.tip_selection", "urts"),
    ("sim.initial_tips", "0"),
];

/// Builds a simulation configuration from `sim.*` settings.
pub fn sim_config_from(settings: &Settings, seed: u64, workers: Option<usize>) -> Result<SimConfig, ExperimentError> {
    let adversaries = match settings.optional::<usize>("sim.adversary_count")? {
        Some(c) => AdversarySpec::Count(c),
        None => AdversarySpec::Ratio(settings.parse("sim.adversary_ratio")?),
    };
    let placement = match settings.raw("sim.placement") {
        "clustered" => Placement::Clustered {
            clusters: settings.parse("sim.clusters")?,
            spread: settings.parse("sim.cluster_spread")?,
        },
        "regions" => Placement::Regions(load_regions(settings, "sim.regions_file")?),
        _ => settings.parse("sim.placement")?,
    };
    // Left empty, the node count is 100, or whatever the region data lists.
    let full_nodes = match (settings.optional::<usize>("sim.full_nodes")?, &placement) {
        (Some(n), _) => n,
        (None, Placement::Regions(d)) => d.total() as usize,
        (None, _) => 100,
    };
    Ok(SimConfig {
        full_nodes,
        adversaries,
        fanout: settings.parse("sim.fanout")?,
        rounds: settings.parse("sim.rounds")?,
        light_nodes: settings.parse("sim.light_nodes")?,
        plane_size: settings.parse("sim.plane_size")?,
        scope: settings.parse("sim.scope")?,
        placement,
        routing: settings.parse("sim.mode")?,
        matching: settings.parse("sim.matching")?,
        proxies: settings.parse("sim.proxies")?,
        tip_cache: settings.parse("sim.tip_cache")?,
        tip_selection: settings.parse("sim.tip_selection")?,
        initial_tips: settings.parse("sim.initial_tips")?,
        seed,
        workers,
    })
}

pub(crate) fn run(
    settings: &Settings,
    seed: u64,
    workers: Option<usize>,
    out: &mut ExperimentResult,
) -> Result<(), ExperimentError> {
    let cfg = sim_config_from(settings, seed, workers)?;
    let r = run_simulation(&cfg)?;
    let total = r.total_transactions as usize;
    let se = |p: f64| Some(crate::stats::proportion_se(p, total)).filter(|s| s.is_finite());
    let label = "sim";
    out.push(label, "full_nodes", cfg.full_nodes as f64, None);
    out.push(label, "adversaries", cfg.adversary_count() as f64, None);
    out.push(label, "total_transactions", r.total_transactions as f64, None);
    out.push(label, "linked_count", r.linked_count as f64, None);
    out.push(label, "correct_link_count", r.correct_link_count as f64, None);
    out.push(label, "false_positive_count", r.false_positive_count as f64, None);
    out.push(label, "link_rate", r.link_rate, se(r.link_rate));
    out.push(label, "correct_link_rate", r.correct_link_rate, se(r.correct_link_rate));
    out.push(label, "deanonymization_rate", r.deanonymization_rate, se(r.deanonymization_rate));
    out.push(label, "anonymity_degree", r.anonymity_degree, None);
    out.push(label, "unreachable_light_nodes", r.unreachable_light_nodes as f64, None);
    out.tables.push(Table {
        name: "light_nodes".into(),
        columns: ["light", "transactions", "linked", "unreachable_rounds"].map(String::from).to_vec(),
        rows: r
            .per_light
            .iter()
            .map(|l| vec![l.light.0 as f64, l.transactions as f64, l.linked as f64, l.unreachable_rounds as f64])
            .collect(),
    });
    Ok(())
}
