use rand::seq::index;
use rand::Rng;
use serde::Serialize;

use crate::config::Settings;
use crate::network::{full_node_positions, Placement, Position, SimError};
use crate::par;
use crate::rng::{self, purpose};
use crate::stats::proportion_se;

use super::{label, ExperimentError, ExperimentResult};

pub(crate) const SCHEMA: &[(&str, &str)] = &[
    ("heatmap.placement", "uniform_random"),
    ("heatmap.full_nodes", "50"),
    ("heatmap.adversary_ratio", "0.1"),
    ("heatmap.fanout", "3"),
    ("heatmap.radius", "3"),
    ("heatmap.plane_size", "10"),
    ("heatmap.grid", "3"),
    ("heatmap.samples", "1000"),
    ("heatmap.require_adversary_in_cell", "true"),
    ("heatmap.clusters", "3"),
    ("heatmap.cluster_spread", "1.5"),
];

#[derive(Clone, Debug, PartialEq)]
pub struct HeatmapParams {
    pub adversaries: usize,
    pub fanout: usize,
    pub radius: f64,
    pub plane_size: f64,
    /// Cells per side.
    pub grid: usize,
    /// Light-node samples per cell.
    pub samples: usize,
    /// Redraw adversary assignments until one sits in the observed cell.
    pub require_adversary_in_cell: bool,
}

impl Default for HeatmapParams {
    fn default() -> Self {
        HeatmapParams {
            adversaries: 5,
            fanout: 3,
            radius: 3.0,
            plane_size: 10.0,
            grid: 3,
            samples: 1000,
            require_adversary_in_cell: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CellClass {
    Empty,
    /// Fewer full nodes than an even share.
    Sparse,
    Dense,
}

/// Per-cell adversary-selection probabilities on a square grid, row-major
/// with row 0 at the bottom of the plane.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridHeatmap {
    pub grid: usize,
    pub full_nodes: usize,
    pub node_counts: Vec<usize>,
    /// Samples whose light node reached at least one full node.
    pub trials: Vec<u64>,
    /// Samples in which the followed response came from an adversary.
    pub hits: Vec<u64>,
    /// False where the cell holds no full node, so the adversary-in-cell
    /// condition could not be imposed.
    pub constraint_met: Vec<bool>,
}

impl GridHeatmap {
    pub fn cells(&self) -> usize {
        self.grid * self.grid
    }

    /// `None` for a cell where no sample reached a full node.
    pub fn probability(&self, cell: usize) -> Option<f64> {
        (self.trials[cell] > 0).then(|| self.hits[cell] as f64 / self.trials[cell] as f64)
    }

    pub fn std_error(&self, cell: usize) -> Option<f64> {
        self.probability(cell).map(|p| proportion_se(p, self.trials[cell] as usize))
    }

    pub fn class(&self, cell: usize) -> CellClass {
        let share = self.full_nodes as f64 / self.cells() as f64;
        match self.node_counts[cell] {
            0 => CellClass::Empty,
            k if (k as f64) < share => CellClass::Sparse,
            _ => CellClass::Dense,
        }
    }

    pub fn layout_variance(&self) -> f64 {
        layout_variance(&self.node_counts, self.full_nodes)
    }

    fn reachable_probs(&self, keep: impl Fn(usize) -> bool) -> Vec<f64> {
        (0..self.cells()).filter(|&c| keep(c)).filter_map(|c| self.probability(c)).collect()
    }

    pub fn min_probability(&self) -> Option<f64> {
        self.reachable_probs(|_| true).into_iter().reduce(f64::min)
    }

    pub fn max_probability(&self) -> Option<f64> {
        self.reachable_probs(|_| true).into_iter().reduce(f64::max)
    }

    /// Probability in the non-empty cell holding the fewest full nodes
    /// (averaged over ties).
    pub fn sparsest_cell_probability(&self) -> Option<f64> {
        let fewest = (0..self.cells())
            .filter(|&c| self.node_counts[c] > 0 && self.trials[c] > 0)
            .map(|c| self.node_counts[c])
            .min()?;
        let ps = self.reachable_probs(|c| self.node_counts[c] == fewest);
        Some(ps.iter().sum::<f64>() / ps.len() as f64)
    }

    /// Same for the cell holding the most full nodes.
    pub fn densest_cell_probability(&self) -> Option<f64> {
        let most = (0..self.cells()).filter(|&c| self.trials[c] > 0).map(|c| self.node_counts[c]).max()?;
        let ps = self.reachable_probs(|c| self.node_counts[c] == most);
        Some(ps.iter().sum::<f64>() / ps.len() as f64)
    }

    pub fn sparse_probabilities(&self) -> Vec<f64> {
        self.reachable_probs(|c| self.class(c) == CellClass::Sparse)
    }

    pub fn dense_probabilities(&self) -> Vec<f64> {
        self.reachable_probs(|c| self.class(c) == CellClass::Dense)
    }
}

/// Mean squared deviation of per-cell node counts from an even share.
pub fn layout_variance(counts: &[usize], total: usize) -> f64 {
    let share = total as f64 / counts.len() as f64;
    counts.iter().map(|&k| (k as f64 - share).powi(2)).sum::<f64>() / counts.len() as f64
}

/// Grid cell containing `p`; points on the far edge belong to the last cell.
pub fn cell_of(p: Position, plane: f64, grid: usize) -> usize {
    let idx = |v: f64| ((v / plane * grid as f64).floor().max(0.0) as usize).min(grid - 1);
    idx(p.y) * grid + idx(p.x)
}

/// Samples light nodes in every cell of a fixed full-node layout.
///
/// Each sample draws a light-node position uniformly in the cell and a fresh
/// set of adversaries among the full nodes (conditioned on the cell when
/// required), sends one request to `min(fanout, reachable)` distinct full
/// nodes within the radius and follows one response chosen uniformly.
pub fn heatmap_for_layout(
    positions: &[Position],
    params: &HeatmapParams,
    seed: u64,
    workers: Option<usize>,
) -> Result<GridHeatmap, SimError> {
    let n = positions.len();
    let g = params.grid;
    if g == 0 || params.samples == 0 || params.fanout == 0 {
        return Err(SimError::Config("grid, samples and fanout must all be positive".into()));
    }
    if params.adversaries > n {
        return Err(SimError::Config(format!("{} adversaries exceed {n} full nodes", params.adversaries)));
    }
    if params.require_adversary_in_cell && params.adversaries == 0 {
        return Err(SimError::Config("an adversary-in-cell requirement needs at least one adversary".into()));
    }
    let plane = params.plane_size;
    let node_cell: Vec<usize> = positions.iter().map(|p| cell_of(*p, plane, g)).collect();
    let mut node_counts = vec![0; g * g];
    for &c in &node_cell {
        node_counts[c] += 1;
    }
    let width = plane / g as f64;

    let per_cell = par::map_indexed(g * g, workers, |cell| {
        let (row, col) = (cell / g, cell % g);
        let constrained = params.require_adversary_in_cell && node_counts[cell] > 0;
        let mut trials = 0u64;
        let mut hits = 0u64;
        let mut adversary = vec![false; n];
        let mut reach = Vec::with_capacity(n);
        for s in 0..params.samples {
            let mut r = rng::stream(seed, &[purpose::HEATMAP_SAMPLE, cell as u64, s as u64]);
            let light = Position::new((col as f64 + r.gen::<f64>()) * width, (row as f64 + r.gen::<f64>()) * width);
            loop {
                adversary.iter_mut().for_each(|a| *a = false);
                let mut in_cell = false;
                for i in index::sample(&mut r, n, params.adversaries) {
                    adversary[i] = true;
                    in_cell |= node_cell[i] == cell;
                }
                if in_cell || !constrained {
                    break;
                }
            }
            reach.clear();
            reach.extend((0..n).filter(|&i| positions[i].distance(&light) <= params.radius));
            if reach.is_empty() {
                continue;
            }
            let m = params.fanout.min(reach.len());
            let asked = index::sample(&mut r, reach.len(), m);
            let followed = reach[asked.index(r.gen_range(0..m))];
            trials += 1;
            hits += u64::from(adversary[followed]);
        }
        (trials, hits, !params.require_adversary_in_cell || node_counts[cell] > 0)
    });

    Ok(GridHeatmap {
        grid: g,
        full_nodes: n,
        trials: per_cell.iter().map(|c| c.0).collect(),
        hits: per_cell.iter().map(|c| c.1).collect(),
        constraint_met: per_cell.iter().map(|c| c.2).collect(),
        node_counts,
    })
}

pub(crate) fn params_from(settings: &Settings, prefix: &str) -> Result<(usize, HeatmapParams), ExperimentError> {
    let key = |k: &str| format!("{prefix}.{k}");
    let n: usize = settings.parse(&key("full_nodes"))?;
    let ratio: f64 = settings.parse(&key("adversary_ratio"))?;
    if !(0.0..=1.0).contains(&ratio) {
        return Err(SimError::Config(format!("adversary ratio {ratio} is outside [0, 1]")).into());
    }
    Ok((
        n,
        HeatmapParams {
            adversaries: (ratio * n as f64).round() as usize,
            fanout: settings.parse(&key("fanout"))?,
            radius: settings.parse(&key("radius"))?,
            plane_size: settings.parse(&key("plane_size"))?,
            grid: settings.parse(&key("grid"))?,
            samples: settings.parse(&key("samples"))?,
            require_adversary_in_cell: settings.flag(&key("require_adversary_in_cell"))?,
        },
    ))
}

pub(crate) fn run(
    settings: &Settings,
    seed: u64,
    workers: Option<usize>,
    out: &mut ExperimentResult,
) -> Result<(), ExperimentError> {
    let (n, params) = params_from(settings, "heatmap")?;
    let placement = match settings.raw("heatmap.placement") {
        "clustered" => Placement::Clustered {
            clusters: settings.parse("heatmap.clusters")?,
            spread: settings.parse("heatmap.cluster_spread")?,
        },
        "uniform_grid" => Placement::UniformGrid,
        "uniform_random" => Placement::UniformRandom,
        other => {
            return Err(crate::config::ConfigError::InvalidValue {
                key: "heatmap.placement".into(),
                value: other.into(),
                reason: "expected uniform_grid, uniform_random or clustered".into(),
            }
            .into())
        }
    };
    let layout_seed = rng::derive(seed, &[purpose::LAYOUT, 0]);
    let positions = full_node_positions(&placement, n, params.plane_size, layout_seed)?;
    let map = heatmap_for_layout(&positions, &params, seed, workers)?;

    for cell in 0..map.cells() {
        let l = label(&[("row", (cell / map.grid).to_string()), ("col", (cell % map.grid).to_string())]);
        out.push(&l, "full_nodes", map.node_counts[cell] as f64, None);
        out.push(&l, "trials", map.trials[cell] as f64, None);
        match map.probability(cell) {
            Some(p) => out.push(&l, "probability", p, map.std_error(cell)),
            None => out.push(&l, "unreachable", 1.0, None),
        }
        out.push(&l, "constraint_met", f64::from(map.constraint_met[cell]), None);
    }
    let summary = [
        ("min_probability", map.min_probability()),
        ("max_probability", map.max_probability()),
        ("sparsest_cell_probability", map.sparsest_cell_probability()),
        ("densest_cell_probability", map.densest_cell_probability()),
    ];
    for (metric, v) in summary {
        if let Some(v) = v {
            out.push("summary", metric, v, None);
        }
    }
    let dense = map.dense_probabilities();
    if !dense.is_empty() {
        out.push("summary", "dense_cell_mean", dense.iter().sum::<f64>() / dense.len() as f64, None);
    }
    out.push("summary", "layout_variance", map.layout_variance(), None);
    Ok(())
}
