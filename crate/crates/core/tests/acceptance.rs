//! Acceptance criteria. Each test prints one `criterion N ...: PASS|FAIL` line
//! with the measured numbers, then asserts.
//!
//! Run with `cargo test -p tipsel-core --test acceptance -- --nocapture
//! --test-threads 1` to see the lines in order.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use tipsel_core::experiments::{heatmap_for_layout, Experiment, HeatmapParams};
use tipsel_core::math::{
    continental_takeover_rate, deanon_probability, hypergeom_pmf, mixer_expected_identified, required_full_nodes,
    AnonymityProfile, AttackParams, ExpectationMode, RegionAction,
};
use tipsel_core::network::{
    full_node_positions, run_simulation, AdversarySpec, MatchMode, NodeDescriptor, NodeKind, Placement, Population,
    Position, RequestScope, Routing, SimConfig, Simulation,
};
use tipsel_core::output::{self, OutputFormat};
use tipsel_core::rng;
use tipsel_core::stats::two_proportion_z;
use tipsel_core::tangle::{urts_select, Address, Ledger, TransactionId};
use tipsel_core::{math, NodeId, DEFAULT_SEED};

/// Tag for streams owned by this file, away from the library's purposes.
const ACCEPT: u64 = 0xACCE;

fn report(n: u32, title: &str, passed: bool, detail: &str, elapsed: Duration, budget: Option<Duration>) {
    let in_time = budget.is_none_or(|b| elapsed < b);
    let ok = passed && in_time;
    let budget = budget.map(|b| format!(" / budget {:.0}s", b.as_secs_f64())).unwrap_or_default();
    println!(
        "criterion {n:>2} [{title}]: {} ({detail}; {:.2}s{budget})",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    assert!(passed, "criterion {n} failed: {detail}");
    assert!(in_time, "criterion {n} exceeded its runtime budget");
}

#[test]
fn criterion_01_analytic_identity() {
    let t = Instant::now();
    let mut r = rng::stream(DEFAULT_SEED, &[ACCEPT, 1]);
    let (mut worst_mean, mut worst_sum) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let n = r.gen_range(1..=10_000u64);
        let c = r.gen_range(0..=n);
        let m = r.gen_range(1..=n.min(10));
        let params = AttackParams::new(n, c, m).unwrap();
        let d = deanon_probability(&params).unwrap().value();
        worst_mean = worst_mean.max((d - c as f64 / n as f64).abs());
        let sum: f64 = (0..=m).map(|k| hypergeom_pmf(&params, k).unwrap().value()).sum();
        worst_sum = worst_sum.max((sum - 1.0).abs());
    }
    let passed = worst_mean < 1e-12 && worst_sum < 1e-12;
    let detail = format!("max |P - C/N| = {worst_mean:.2e}, max |sum pmf - 1| = {worst_sum:.2e}");
    report(1, "analytic identity", passed, &detail, t.elapsed(), Some(Duration::from_secs(5)));
}

#[test]
fn criterion_02_continental_rates() {
    let t = Instant::now();
    let cases = [
        (8, RegionAction::Takeover(1), 0.125),
        (31, RegionAction::Takeover(1), 0.0323),
        (6, RegionAction::Takeover(1), 0.1667),
        (6, RegionAction::Add(1), 0.1429),
        (6, RegionAction::Collude(5), 0.8333),
    ];
    let mut got = Vec::new();
    let mut passed = true;
    for (nodes, action, want) in cases {
        let v = continental_takeover_rate(nodes, action).unwrap().value();
        let four = (v * 1e4).round() / 1e4;
        passed &= (four - want).abs() < 1e-12;
        got.push(format!("{four:.4}"));
    }
    report(2, "continental rates", passed, &format!("got {}", got.join(" ")), t.elapsed(), None);
}

#[test]
fn criterion_03_mixer() {
    let t = Instant::now();
    let normalized = mixer_expected_identified(0.1, ExpectationMode::Normalized).unwrap();
    let mut raw_err = 0.0f64;
    for p in [0.1, 0.3, 0.5, 0.9] {
        let raw = mixer_expected_identified(p, ExpectationMode::Raw).unwrap();
        let partial: f64 = (1..=1000).map(|x| x as f64 * f64::powi(p, 2 * (x - 1))).sum();
        raw_err = raw_err.max((raw - partial).abs());
    }
    let mut worst_z = 0.0f64;
    for p in [0.1, 0.3, 0.5] {
        let sample = tipsel_core::experiments::simulate_mixer(100_000, p, 5, DEFAULT_SEED);
        for x in 1..=5usize {
            let analytic = math::mixer_chain_probability(&math::MixerParams::new(p, x as u32).unwrap()).value();
            let se = sample.std_error(x);
            let diff = sample.empirical(x) - analytic;
            let z = if se > 0.0 {
                diff.abs() / se
            } else if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            worst_z = worst_z.max(z);
        }
    }
    let passed = (normalized - 1.0101).abs() <= 1e-4 && raw_err < 1e-9 && worst_z < 3.0;
    let detail = format!("E_norm(0.1) = {normalized:.6}, raw vs partial sum {raw_err:.1e}, max |z| = {worst_z:.2}");
    report(3, "mixer", passed, &detail, t.elapsed(), Some(Duration::from_secs(30)));
}

#[test]
fn criterion_04_simulation_convergence() {
    let t = Instant::now();
    let mut counts = Vec::new();
    for m in [1, 3, 5] {
        let cfg = SimConfig {
            full_nodes: 100,
            adversaries: AdversarySpec::Count(10),
            fanout: m,
            light_nodes: 100,
            rounds: 1000,
            scope: RequestScope::Global,
            matching: MatchMode::AssumeUnique,
            seed: rng::derive(DEFAULT_SEED, &[ACCEPT, 4, m as u64]),
            ..SimConfig::default()
        };
        let r = run_simulation(&cfg).unwrap();
        counts.push((m, r.linked_transactions as usize, r.total_transactions as usize));
    }
    let within = counts.iter().all(|&(_, k, n)| n >= 100_000 && (k as f64 / n as f64 - 0.1).abs() < 0.01);
    let mut max_z = 0.0f64;
    for i in 0..counts.len() {
        for j in i + 1..counts.len() {
            max_z = max_z.max(two_proportion_z(counts[i].1, counts[i].2, counts[j].1, counts[j].2).abs());
        }
    }
    let rates: Vec<String> = counts.iter().map(|(m, k, n)| format!("M={m}: {:.4}", *k as f64 / *n as f64)).collect();
    let detail = format!("{}, max pairwise |z| = {max_z:.2}", rates.join(", "));
    report(4, "simulation convergence", within && max_z < 3.0, &detail, t.elapsed(), Some(Duration::from_secs(60)));
}

#[test]
fn criterion_05_null_and_mitigations() {
    let t = Instant::now();
    let base = SimConfig { rounds: 200, scope: RequestScope::Global, ..SimConfig::default() };
    let no_adv = run_simulation(&SimConfig { adversaries: AdversarySpec::Count(0), ..base.clone() }).unwrap();
    let direct = run_simulation(&SimConfig { routing: Routing::Direct, ..base.clone() }).unwrap();

    let proxy_cfg = SimConfig { routing: Routing::Proxy, proxies: 4, ..base };
    let mut sim = Simulation::new(proxy_cfg).unwrap();
    sim.run();
    let proxy = sim.result();
    let proxies: Vec<NodeId> = sim.population().proxies().map(|n| n.node_id).collect();
    let only_proxies = proxy.links.iter().all(|l| proxies.contains(&l.claimed_identity));
    let min_behind = proxies
        .iter()
        .map(|p| sim.population().light_nodes().filter(|l| sim.proxy_of(l.node_id) == Some(*p)).count())
        .min()
        .unwrap_or(0);
    // Oracle: a uniform posterior over k candidates has degree exactly 1.
    let uniform = math::entropy_degree(&AnonymityProfile::uniform(min_behind.max(2)).unwrap());

    let required = required_full_nodes(10, 0.01).unwrap();
    let mitigations = Experiment::Mitigations.run_default(DEFAULT_SEED, &[]).unwrap();
    let scaled_n = mitigations.value("scenario=scaling", "full_nodes").unwrap();
    let scaled_rate = mitigations.value("scenario=scaling", "link_rate").unwrap();
    let scaled_se = mitigations.row("scenario=scaling", "link_rate").unwrap().dispersion.unwrap();

    let checks = [
        ("C=0 links", no_adv.linked_count == 0),
        ("direct links", direct.linked_count == 0),
        ("proxy links", !proxy.links.is_empty() && only_proxies),
        ("proxy degree", (proxy.anonymity_degree - 1.0).abs() < 1e-9 && (uniform - 1.0).abs() < 1e-9),
        ("required", required == 1001 && scaled_n == 1001.0),
        ("scaled rate", scaled_rate < 0.01),
    ];
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    let detail = format!(
        "C=0 links {}, direct links {}, proxy links {} all to proxies {only_proxies}, proxy degree {:.9} (>= {min_behind} lights per proxy), required N {required}, N=1001 rate {scaled_rate:.5} +- {scaled_se:.5} vs 10/1001 = {:.5}{}",
        no_adv.linked_count,
        direct.linked_count,
        proxy.links.len(),
        proxy.anonymity_degree,
        10.0 / 1001.0,
        if failed.is_empty() { String::new() } else { format!("; failing: {}", failed.join(", ")) }
    );
    report(5, "null and mitigations", failed.is_empty(), &detail, t.elapsed(), Some(Duration::from_secs(60)));
}

fn grid_probabilities(result: &tipsel_core::experiments::ExperimentResult) -> Vec<f64> {
    result.rows.iter().filter(|r| r.metric == "probability").map(|r| r.value).collect()
}

#[test]
fn criterion_06_heatmap() {
    let t = Instant::now();
    let grid = Experiment::Heatmap.run_default(DEFAULT_SEED, &[("placement", "uniform_grid")]).unwrap();
    let uniform = grid_probabilities(&grid);
    let uniform_ok = uniform.len() == 9 && uniform.iter().all(|p| (p - 0.1).abs() <= 0.05);

    let params = HeatmapParams::default();
    let mut max_sparse = 0.0f64;
    let mut worst_dense_dev = 0.0f64;
    for i in 0..20u64 {
        let layout_seed = rng::derive(DEFAULT_SEED, &[ACCEPT, 6, i]);
        let positions =
            full_node_positions(&Placement::Clustered { clusters: 3, spread: 1.5 }, 50, 10.0, layout_seed).unwrap();
        let h = heatmap_for_layout(&positions, &params, layout_seed, None).unwrap();
        max_sparse = h.sparse_probabilities().into_iter().fold(max_sparse, f64::max);
        let dense = h.dense_probabilities();
        if !dense.is_empty() {
            let mean = dense.iter().sum::<f64>() / dense.len() as f64;
            worst_dense_dev = worst_dense_dev.max((mean - 0.1).abs());
        }
    }
    let clustered_ok = max_sparse > 0.15 && worst_dense_dev <= 0.05;

    // Same grid without conditioning on an adversary in the cell, for reference.
    let free = Experiment::Heatmap
        .run_default(DEFAULT_SEED, &[("placement", "uniform_grid"), ("require_adversary_in_cell", "false")])
        .unwrap();
    let free = grid_probabilities(&free);
    let range = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        format!("[{lo:.3}, {hi:.3}]")
    };
    let detail = format!(
        "uniform grid cells {} (unconditioned {}), clustered max sparse {max_sparse:.3}, worst dense-mean deviation {worst_dense_dev:.3}",
        range(&uniform),
        range(&free)
    );
    report(6, "heatmap", uniform_ok && clustered_ok, &detail, t.elapsed(), Some(Duration::from_secs(120)));
}

#[test]
fn criterion_07_variance() {
    let t = Instant::now();
    let r = Experiment::Variance.run_default(DEFAULT_SEED, &[]).unwrap();
    let rho = |m: &str| r.value(&format!("variance_vs={m}"), "spearman_rho").unwrap();
    let p = |m: &str| r.value(&format!("variance_vs={m}"), "p_positive").unwrap();
    let passed = rho("min_probability") > 0.0 && p("min_probability") < 0.05;
    let detail = format!(
        "min-cell rho {:.3} (p {:.2e}); sparsest-cell rho {:.3} (p {:.2e}); max-cell rho {:.3}",
        rho("min_probability"),
        p("min_probability"),
        rho("sparsest_cell_probability"),
        p("sparsest_cell_probability"),
        rho("max_probability")
    );
    report(7, "variance study", passed, &detail, t.elapsed(), Some(Duration::from_secs(120)));
}

fn small_overrides(e: Experiment) -> Vec<(String, String)> {
    let pairs: &[(&str, &str)] = match e {
        Experiment::Decentralized => &[
            ("n_values", "50,100"),
            ("m_values", "1,3"),
            ("p_values", "0.1"),
            ("transactions", "2000"),
            ("light_nodes", "50"),
        ],
        Experiment::Heatmap => &[("samples", "200")],
        Experiment::Variance => &[("runs", "8"), ("samples", "200")],
        Experiment::Mixer => &[("participants", "20000")],
        Experiment::Mitigations => &[("transactions", "5000")],
        Experiment::Custom => &[("rounds", "20"), ("mode", "proxy"), ("proxies", "3")],
        Experiment::Realworld => &[],
    };
    pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

#[test]
fn criterion_08_determinism() {
    let t = Instant::now();
    let mut mismatches = Vec::new();
    let mut files = 0;
    for e in Experiment::ALL {
        let settings = e.settings(None, &small_overrides(e)).unwrap();
        let mut outputs: Vec<BTreeMap<String, Vec<u8>>> = Vec::new();
        for workers in [Some(1), Some(3), None] {
            let dir = tempfile::tempdir().unwrap();
            let result = e.run(&settings, 99, workers).unwrap();
            let mut written = BTreeMap::new();
            for format in [OutputFormat::Csv, OutputFormat::Structured] {
                for path in output::write_result(&result, dir.path(), format).unwrap() {
                    let name = path.file_name().unwrap().to_string_lossy().into_owned();
                    written.insert(name, std::fs::read(&path).unwrap());
                }
            }
            outputs.push(written);
        }
        files += outputs[0].len();
        if outputs.iter().any(|o| o != &outputs[0]) {
            mismatches.push(e.name());
        }
    }
    let detail =
        format!("{files} files per worker count compared across workers 1, 3 and default; mismatches {mismatches:?}");
    report(8, "determinism", mismatches.is_empty(), &detail, t.elapsed(), None);
}

#[test]
fn criterion_09_dag_integrity() {
    let t = Instant::now();
    let mut r = rng::stream(DEFAULT_SEED, &[ACCEPT, 9]);
    let mut ledger = Ledger::new();
    for i in 0..10_000u64 {
        let len = ledger.len() as u64;
        let parents = [TransactionId(r.gen_range(0..len)), TransactionId(r.gen_range(0..len))];
        ledger.attach(parents, Address(i + 1), None, i / 100).unwrap();
    }
    let maintained: std::collections::BTreeSet<TransactionId> = ledger.tips().iter().copied().collect();
    let tips_ok = maintained == ledger.recompute_tips();
    let order = ledger.topological_order();
    let order_ok = order.as_ref().is_some_and(|order| {
        let pos: BTreeMap<TransactionId, usize> = order.iter().enumerate().map(|(i, id)| (*id, i)).collect();
        order.len() == ledger.len()
            && ledger
                .transactions()
                .iter()
                .filter(|tx| tx.id != TransactionId::GENESIS)
                .all(|tx| tx.parents.iter().all(|p| pos[p] < pos[&tx.id]))
    });

    let mut tips10 = Ledger::new();
    for i in 0..10 {
        tips10.attach([TransactionId::GENESIS; 2], Address(i + 1), None, 0).unwrap();
    }
    assert_eq!(tips10.tip_count(), 10);
    let mut counts: BTreeMap<(TransactionId, TransactionId), u64> = BTreeMap::new();
    let draws = 100_000u64;
    let mut r = rng::stream(DEFAULT_SEED, &[ACCEPT, 90]);
    for _ in 0..draws {
        let [a, b] = urts_select(&tips10, &mut r);
        assert_ne!(a, b);
        *counts.entry((a.min(b), a.max(b))).or_default() += 1;
    }
    let cells = 45.0;
    let expected = draws as f64 / cells;
    let observed_cells = counts.len();
    let chi2: f64 = counts.values().map(|&o| (o as f64 - expected).powi(2) / expected).sum::<f64>()
        + (cells - observed_cells as f64) * expected;
    let p_value = 1.0 - ChiSquared::new(cells - 1.0).unwrap().cdf(chi2);
    let passed = tips_ok && order_ok && observed_cells == 45 && p_value > 0.01;
    let detail = format!(
        "tip set consistent {tips_ok}, topological order valid {order_ok}, URTS chi2 = {chi2:.1} on 44 dof, p = {p_value:.3}"
    );
    report(9, "DAG integrity", passed, &detail, t.elapsed(), Some(Duration::from_secs(30)));
}

fn node(id: u32, kind: NodeKind) -> NodeDescriptor {
    NodeDescriptor { node_id: NodeId(id), kind, position: Position::new(5.0, 5.0), region: None }
}

#[test]
fn criterion_10_collision_aware() {
    let t = Instant::now();
    // One adversarial and one honest full node on a two-tip ledger: every
    // response names the same two tips, so every transaction matches every
    // logged request.
    let lights = 4u32;
    let mut nodes = vec![node(0, NodeKind::AdversaryFull), node(1, NodeKind::Full)];
    nodes.extend((2..2 + lights).map(|i| node(i, NodeKind::Light)));
    let cfg = SimConfig {
        fanout: 2,
        rounds: 1,
        initial_tips: 2,
        matching: MatchMode::CollisionAware,
        scope: RequestScope::Global,
        ..SimConfig::default()
    };
    let mut sim = Simulation::with_population(cfg, Population::new(nodes).unwrap(), None).unwrap();
    sim.run();
    let res = sim.result();
    // Ground truth straight from the ledger, independent of the engine's tally.
    let truth_fp = res
        .links
        .iter()
        .filter(|l| sim.ledger().get(l.transaction).unwrap().issuer_identity() != Some(l.claimed_identity))
        .count() as u64;
    let expected_fp = u64::from(lights * (lights - 1));
    let constructed_ok = res.false_positive_count == truth_fp && truth_fp == expected_fp;

    let (mut fp, mut linked) = (0u64, 0u64);
    for s in 0..20u64 {
        let cfg = SimConfig {
            initial_tips: 1000,
            light_nodes: 200,
            rounds: 1,
            scope: RequestScope::Global,
            matching: MatchMode::CollisionAware,
            seed: rng::derive(DEFAULT_SEED, &[ACCEPT, 10, s]),
            ..SimConfig::default()
        };
        let r = run_simulation(&cfg).unwrap();
        fp += r.false_positive_count;
        linked += r.linked_count;
    }
    let rate = fp as f64 / linked.max(1) as f64;
    let passed = constructed_ok && linked > 0 && rate < 0.01;
    let detail = format!(
        "2-tip ledger: {} links, {} false positives (ground truth {truth_fp}, expected {expected_fp}); 1000-tip ledger: {fp}/{linked} false positives = {rate:.4}",
        res.linked_count, res.false_positive_count
    );
    report(10, "collision-aware matching", passed, &detail, t.elapsed(), None);
}
