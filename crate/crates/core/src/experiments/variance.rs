use rand::Rng;

use crate::config::{ConfigError, Settings};
use crate::network::{full_node_positions, Placement, SimError};
use crate::par;
use crate::rng::{self, purpose};
use crate::stats::spearman;

use super::heatmap::{heatmap_for_layout, params_from, HeatmapParams};
use super::{label, ExperimentError, ExperimentResult};

pub use super::heatmap::layout_variance;

pub(crate) const SCHEMA: &[(&str, &str)] = &[
    ("variance.runs", "100"),
    ("variance.full_nodes", "100"),
    ("variance.adversary_ratio", "0.1"),
    ("variance.fanout", "3"),
    ("variance.radius", "3"),
    ("variance.plane_size", "10"),
    ("variance.grid", "3"),
    ("variance.samples", "1000"),
    ("variance.require_adversary_in_cell", "true"),
    ("variance.layout", "spread_sweep"),
    ("variance.clusters", "3"),
    ("variance.spread_min", "0.8"),
    ("variance.spread_max", "6"),
];

/// How each run's random layout is drawn.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum VarianceLayout {
    UniformRandom,
    /// Clustered layouts whose spread is drawn uniformly from the range, so
    /// runs cover everything from tight clumps to near-uniform scatter.
    SpreadSweep {
        clusters: usize,
        min: f64,
        max: f64,
    },
}

/// One random layout and its heatmap extremes.
#[derive(Clone, Debug, PartialEq)]
pub struct VarianceRun {
    pub spread: Option<f64>,
    pub variance: f64,
    pub min_probability: f64,
    pub max_probability: f64,
    pub sparsest_cell_probability: f64,
    pub densest_cell_probability: f64,
}

pub fn variance_runs(
    full_nodes: usize,
    params: &HeatmapParams,
    layout: VarianceLayout,
    runs: usize,
    seed: u64,
    workers: Option<usize>,
) -> Result<Vec<VarianceRun>, SimError> {
    let results = par::map_indexed(runs, workers, |i| {
        let layout_seed = rng::derive(seed, &[purpose::LAYOUT, i as u64]);
        let (placement, spread) = match layout {
            VarianceLayout::UniformRandom => (Placement::UniformRandom, None),
            VarianceLayout::SpreadSweep { clusters, min, max } => {
                let mut r = rng::stream(seed, &[purpose::LAYOUT, i as u64, 1]);
                let spread = min + (max - min) * r.gen::<f64>();
                (Placement::Clustered { clusters, spread }, Some(spread))
            }
        };
        let positions = full_node_positions(&placement, full_nodes, params.plane_size, layout_seed)?;
        let map =
            heatmap_for_layout(&positions, params, rng::derive(seed, &[purpose::HEATMAP_SAMPLE, i as u64]), Some(1))?;
        let missing = || SimError::Config("no cell of the layout reached a full node".into());
        Ok(VarianceRun {
            spread,
            variance: map.layout_variance(),
            min_probability: map.min_probability().ok_or_else(missing)?,
            max_probability: map.max_probability().ok_or_else(missing)?,
            sparsest_cell_probability: map.sparsest_cell_probability().ok_or_else(missing)?,
            densest_cell_probability: map.densest_cell_probability().ok_or_else(missing)?,
        })
    });
    results.into_iter().collect()
}

pub(crate) fn run(
    settings: &Settings,
    seed: u64,
    workers: Option<usize>,
    out: &mut ExperimentResult,
) -> Result<(), ExperimentError> {
    let (n, params) = params_from(settings, "variance")?;
    let runs: usize = settings.parse("variance.runs")?;
    if runs < 2 {
        return Err(ConfigError::InvalidValue {
            key: "variance.runs".into(),
            value: runs.to_string(),
            reason: "at least two runs are needed for a correlation".into(),
        }
        .into());
    }
    let layout = match settings.raw("variance.layout") {
        "uniform_random" => VarianceLayout::UniformRandom,
        "spread_sweep" => VarianceLayout::SpreadSweep {
            clusters: settings.parse("variance.clusters")?,
            min: settings.parse("variance.spread_min")?,
            max: settings.parse("variance.spread_max")?,
        },
        other => {
            return Err(ConfigError::InvalidValue {
                key: "variance.layout".into(),
                value: other.into(),
                reason: "expected spread_sweep or uniform_random".into(),
            }
            .into())
        }
    };
    let ratio: f64 = settings.parse("variance.adversary_ratio")?;
    let rows = variance_runs(n, &params, layout, runs, seed, workers)?;

    for (i, r) in rows.iter().enumerate() {
        let l = label(&[("run", i.to_string())]);
        if let Some(s) = r.spread {
            out.push(&l, "cluster_spread", s, None);
        }
        out.push(&l, "variance", r.variance, None);
        out.push(&l, "min_probability", r.min_probability, None);
        out.push(&l, "max_probability", r.max_probability, None);
        out.push(&l, "sparsest_cell_probability", r.sparsest_cell_probability, None);
        out.push(&l, "densest_cell_probability", r.densest_cell_probability, None);
    }
    let var: Vec<f64> = rows.iter().map(|r| r.variance).collect();
    let col = |f: fn(&VarianceRun) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    for (name, ys) in [
        ("min_probability", col(|r| r.min_probability)),
        ("max_probability", col(|r| r.max_probability)),
        ("sparsest_cell_probability", col(|r| r.sparsest_cell_probability)),
    ] {
        let c = spearman(&var, &ys);
        let l = label(&[("variance_vs", name.to_string())]);
        out.push(&l, "spearman_rho", c.rho, None);
        out.push(&l, "p_positive", c.p_positive, None);
        out.push(&l, "p_two_sided", c.p_two_sided, None);
    }
    let excess: Vec<f64> = rows.iter().map(|r| r.sparsest_cell_probability - ratio).collect();
    out.push("summary", "max_sparse_excess", excess.iter().copied().fold(f64::NEG_INFINITY, f64::max), None);
    out.push("summary", "min_sparse_excess", excess.iter().copied().fold(f64::INFINITY, f64::min), None);
    Ok(())
}
