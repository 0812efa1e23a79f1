//! Fast self-checks: analytic identities, determinism, null results and the
//! bundled (or supplied) real-world distribution.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::experiments::Experiment;
use crate::math::{
    continental_takeover_rate, deanon_probability, entropy_degree, hypergeom_pmf, mixer_expected_identified,
    required_full_nodes, AnonymityProfile, AttackParams, ExpectationMode, RegionAction,
};
use crate::network::{run_simulation, AdversarySpec, RegionDistribution, RequestScope, Routing, SimConfig};
use crate::output;
use crate::rng::{self, purpose};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum CheckGroup {
    Analytic,
    Determinism,
    Null,
    Realworld,
}

impl CheckGroup {
    pub const ALL: [CheckGroup; 4] =
        [CheckGroup::Analytic, CheckGroup::Determinism, CheckGroup::Null, CheckGroup::Realworld];

    pub fn name(self) -> &'static str {
        match self {
            CheckGroup::Analytic => "analytic",
            CheckGroup::Determinism => "determinism",
            CheckGroup::Null => "null",
            CheckGroup::Realworld => "realworld",
        }
    }
}

impl fmt::Display for CheckGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckGroup {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        CheckGroup::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| format!("unknown check group `{s}` (expected analytic, determinism, null or realworld)"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub group: CheckGroup,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn outcome(group: CheckGroup, name: &str, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome { group, name: name.to_string(), passed, detail }
}

fn analytic(out: &mut Vec<CheckOutcome>) {
    let g = CheckGroup::Analytic;
    let mut r = rng::stream(0, &[purpose::VALIDATION]);
    let mut worst_mean: f64 = 0.0;
    let mut worst_sum: f64 = 0.0;
    for _ in 0..200 {
        let n = r.gen_range(1..=2_000u64);
        let c = r.gen_range(0..=n);
        let m = r.gen_range(1..=n.min(10));
        let params = AttackParams::new(n, c, m).expect("valid by construction");
        let d = deanon_probability(&params).expect("valid params").value();
        worst_mean = worst_mean.max((d - c as f64 / n as f64).abs());
        let total: f64 = (0..=m).map(|k| hypergeom_pmf(&params, k).expect("k <= m").value()).sum();
        worst_sum = worst_sum.max((total - 1.0).abs());
    }
    out.push(outcome(g, "deanon_equals_ratio", worst_mean < 1e-12, format!("max |P - C/N| = {worst_mean:.3e}")));
    out.push(outcome(g, "pmf_sums_to_one", worst_sum < 1e-12, format!("max |sum - 1| = {worst_sum:.3e}")));

    let d = AnonymityProfile::uniform(4).map(|p| entropy_degree(&p)).unwrap_or(f64::NAN);
    out.push(outcome(g, "uniform_degree_is_one", d == 1.0, format!("d = {d}")));
    let e = mixer_expected_identified(0.1, ExpectationMode::Normalized).unwrap_or(f64::NAN);
    out.push(outcome(g, "mixer_normalized", (e - 1.0101).abs() < 1e-4, format!("E = {e:.6}")));
    let req = required_full_nodes(10, 0.01).ok();
    out.push(outcome(g, "required_full_nodes", req == Some(1001), format!("N = {req:?}")));
}

fn determinism(out: &mut Vec<CheckOutcome>) {
    let g = CheckGroup::Determinism;
    let overrides = [
        ("n_values", "50"),
        ("m_values", "1,3"),
        ("p_values", "0.1,0.2"),
        ("transactions", "1000"),
        ("light_nodes", "50"),
    ];
    let ov: Vec<(String, String)> = overrides.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
    let rendered = |workers| -> Result<String, String> {
        let exp = Experiment::Decentralized;
        let settings = exp.settings(None, &ov).map_err(|e| e.to_string())?;
        let result = exp.run(&settings, 7, Some(workers)).map_err(|e| e.to_string())?;
        Ok(output::to_csv(&result))
    };
    let (a, b) = (rendered(1), rendered(4));
    let passed = matches!((&a, &b), (Ok(x), Ok(y)) if x == y);
    out.push(outcome(g, "workers_1_vs_4", passed, format!("{} bytes", a.map(|s| s.len()).unwrap_or(0))));

    let sim = SimConfig { rounds: 10, scope: RequestScope::Global, ..SimConfig::default() };
    let same = run_simulation(&sim).ok() == run_simulation(&sim).ok();
    out.push(outcome(g, "same_seed_same_result", same, String::new()));
}

fn null(out: &mut Vec<CheckOutcome>) {
    let g = CheckGroup::Null;
    let base = SimConfig { rounds: 20, scope: RequestScope::Global, ..SimConfig::default() };
    let no_adv = run_simulation(&SimConfig { adversaries: AdversarySpec::Count(0), ..base.clone() });
    let links = no_adv.as_ref().map(|r| r.linked_count).ok();
    out.push(outcome(g, "no_adversaries_no_links", links == Some(0), format!("links = {links:?}")));
    let direct =
        run_simulation(&SimConfig { routing: Routing::Direct, adversaries: AdversarySpec::Ratio(0.5), ..base });
    let links = direct.as_ref().map(|r| r.linked_count).ok();
    out.push(outcome(g, "direct_selection_no_links", links == Some(0), format!("links = {links:?}")));
}

fn realworld(out: &mut Vec<CheckOutcome>, dist: &RegionDistribution) {
    let g = CheckGroup::Realworld;
    let rate = |region: &str, action: fn(u64) -> RegionAction| {
        dist.count(region).and_then(|n| continental_takeover_rate(n, action(n)).ok()).map(|p| p.value())
    };
    let checks: [(&str, Option<f64>, f64); 7] = [
        ("north_america_takeover_1", rate("north_america", |_| RegionAction::Takeover(1)), 0.125),
        ("europe_takeover_1", rate("europe", |_| RegionAction::Takeover(1)), 1.0 / 31.0),
        ("asia_takeover_1", rate("asia", |_| RegionAction::Takeover(1)), 1.0 / 6.0),
        ("asia_add_1", rate("asia", |_| RegionAction::Add(1)), 1.0 / 7.0),
        ("asia_collude_5", rate("asia", |n| RegionAction::Collude(n.saturating_sub(1).min(5))), 5.0 / 6.0),
        ("south_america_takeover_1", rate("south_america", |_| RegionAction::Takeover(1)), 1.0),
        ("africa_takeover_1", rate("africa", |_| RegionAction::Takeover(1)), 1.0),
    ];
    for (name, got, want) in checks {
        let passed = got.is_some_and(|v| (v - want).abs() < 5e-5);
        out.push(outcome(g, name, passed, format!("got {got:?}, expected {want:.4}")));
    }
    out.push(outcome(g, "total_full_nodes", dist.total() == 47, format!("{} full nodes", dist.total())));
}

/// Runs the selected groups (all when `only` is empty).
pub fn run_checks(only: &[CheckGroup], regions: Option<&RegionDistribution>) -> Vec<CheckOutcome> {
    let selected = |g| only.is_empty() || only.contains(&g);
    let mut out = Vec::new();
    if selected(CheckGroup::Analytic) {
        analytic(&mut out);
    }
    if selected(CheckGroup::Determinism) {
        determinism(&mut out);
    }
    if selected(CheckGroup::Null) {
        null(&mut out);
    }
    if selected(CheckGroup::Realworld) {
        let embedded = RegionDistribution::embedded_2020();
        realworld(&mut out, regions.unwrap_or(&embedded));
    }
    out
}
