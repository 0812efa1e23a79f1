use crate::config::Settings;
use crate::math::{deanon_probability, AttackParams};
use crate::network::{run_simulation, AdversarySpec, MatchMode, Placement, RequestScope, Routing, SimConfig};
use crate::par;
use crate::rng::{self, purpose};
use crate::stats::proportion_se;

use super::{label, ExperimentError, ExperimentResult};

pub(crate) const SCHEMA: &[(&str, &str)] = &[
    ("decentralized.n_values", "50,100,200"),
    ("decentralized.m_values", "1,3,5"),
    ("decentralized.p_values", "0.05,0.1,0.2,0.33"),
    ("decentralized.transactions", "20000"),
    ("decentralized.light_nodes", "100"),
    ("decentralized.tolerance_se", "4"),
];

struct Cell {
    n: usize,
    m: usize,
    p: f64,
}

pub(crate) fn run(
    settings: &Settings,
    seed: u64,
    workers: Option<usize>,
    out: &mut ExperimentResult,
) -> Result<(), ExperimentError> {
    let ns: Vec<usize> = settings.list("decentralized.n_values")?;
    let ms: Vec<usize> = settings.list("decentralized.m_values")?;
    let ps: Vec<f64> = settings.list("decentralized.p_values")?;
    let transactions: usize = settings.parse("decentralized.transactions")?;
    let light_nodes: usize = settings.parse("decentralized.light_nodes")?;
    let tolerance: f64 = settings.parse("decentralized.tolerance_se")?;

    let mut cells = Vec::new();
    for &p in &ps {
        for &n in &ns {
            for &m in &ms {
                cells.push(Cell { n, m, p });
            }
        }
    }
    let rounds = transactions.div_ceil(light_nodes.max(1));
    let configs: Vec<SimConfig> = cells
        .iter()
        .enumerate()
        .map(|(i, c)| SimConfig {
            full_nodes: c.n,
            adversaries: AdversarySpec::Ratio(c.p),
            fanout: c.m,
            rounds,
            light_nodes,
            scope: RequestScope::Global,
            placement: Placement::UniformRandom,
            routing: Routing::Baseline,
            matching: MatchMode::AssumeUnique,
            seed: rng::derive(seed, &[purpose::SCENARIO, i as u64]),
            workers: Some(1),
            ..SimConfig::default()
        })
        .collect();
    for cfg in &configs {
        cfg.validate()?;
    }
    let results = par::map_indexed(configs.len(), workers, |i| run_simulation(&configs[i]));

    let mut worst_z: f64 = 0.0;
    let mut analytic_by_p: Vec<(f64, f64, f64)> = ps.iter().map(|&p| (p, f64::INFINITY, f64::NEG_INFINITY)).collect();
    for ((cell, cfg), result) in cells.iter().zip(&configs).zip(results) {
        let r = result?;
        let c = cfg.adversary_count() as u64;
        let analytic = deanon_probability(&AttackParams::new(cell.n as u64, c, cell.m.min(cell.n) as u64)?)?.value();
        let se = proportion_se(analytic, r.total_transactions as usize);
        let z = if se > 0.0 {
            (r.link_rate - analytic) / se
        } else if r.link_rate == analytic {
            0.0
        } else {
            f64::INFINITY
        };
        worst_z = worst_z.max(z.abs());
        let entry = analytic_by_p.iter_mut().find(|(p, _, _)| *p == cell.p).expect("p listed");
        entry.1 = entry.1.min(analytic);
        entry.2 = entry.2.max(analytic);

        let l = label(&[("N", cell.n.to_string()), ("M", cell.m.to_string()), ("p", cell.p.to_string())]);
        out.push(&l, "adversaries", c as f64, None);
        out.push(&l, "analytic", analytic, None);
        out.push(&l, "empirical", r.link_rate, Some(proportion_se(r.link_rate, r.total_transactions as usize)));
        out.push(&l, "transactions", r.total_transactions as f64, None);
        out.push(&l, "within_tolerance", f64::from(z.abs() <= tolerance), None);
    }
    for (p, lo, hi) in analytic_by_p {
        // Spread of the analytic value over N and M at fixed p; only the
        // rounding of C = pN moves it.
        out.push(label(&[("p", p.to_string())]), "analytic_spread", hi - lo, None);
    }
    out.push("summary", "max_abs_z", worst_z, None);
    out.push("summary", "all_within_tolerance", f64::from(worst_z <= tolerance), None);
    Ok(())
}
