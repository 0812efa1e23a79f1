use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::rng::{self, purpose};
use crate::NodeId;

use super::{NodeDescriptor, NodeKind, Population, Position, RegionDistribution, SimConfig, SimError};

/// How full nodes are laid out on the plane.
#[derive(Clone, Debug, PartialEq)]
pub enum Placement {
    /// Evenly spaced lattice covering the plane.
    UniformGrid,
    UniformRandom,
    /// Gaussian clusters around uniformly placed centres.
    Clustered {
        clusters: usize,
        spread: f64,
    },
    Explicit(Vec<Position>),
    /// Nodes tagged by region, counts taken from the distribution.
    Regions(RegionDistribution),
}

impl FromStr for Placement {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "uniform_grid" => Ok(Placement::UniformGrid),
            "uniform_random" => Ok(Placement::UniformRandom),
            "clustered" => Ok(Placement::Clustered { clusters: 3, spread: 1.5 }),
            "regions" => Ok(Placement::Regions(RegionDistribution::embedded_2020())),
            other => Err(format!("unknown placement `{other}`")),
        }
    }
}

/// Lattice positions for `n` nodes: the smallest near-square grid that fits
/// them, with empty slots spread evenly rather than bunched at the end.
pub(crate) fn lattice(n: usize, plane: f64) -> Vec<Position> {
    if n == 0 {
        return Vec::new();
    }
    let cols = (n as f64).sqrt().ceil() as usize;
    let rows = n.div_ceil(cols);
    let slots = rows * cols;
    (0..n)
        .map(|k| {
            let s = k * slots / n;
            let (r, c) = (s / cols, s % cols);
            Position::new((c as f64 + 0.5) * plane / cols as f64, (r as f64 + 0.5) * plane / rows as f64)
        })
        .collect()
}

pub(crate) fn uniform_point<R: Rng + ?Sized>(rng: &mut R, plane: f64) -> Position {
    Position::new(rng.gen::<f64>() * plane, rng.gen::<f64>() * plane)
}

pub(crate) fn clustered<R: Rng + ?Sized>(
    n: usize,
    clusters: usize,
    spread: f64,
    plane: f64,
    rng: &mut R,
) -> Vec<Position> {
    let clusters = clusters.max(1);
    let centres: Vec<Position> = (0..clusters).map(|_| uniform_point(rng, plane)).collect();
    let offset = Normal::new(0.0, spread.max(1e-9)).expect("positive spread");
    (0..n)
        .map(|_| {
            let c = centres[rng.gen_range(0..clusters)];
            // Redraw points that land outside the plane; give up on wild
            // spreads and fall back to a uniform point.
            for _ in 0..1000 {
                let p = Position::new(c.x + offset.sample(rng), c.y + offset.sample(rng));
                if (0.0..plane).contains(&p.x) && (0.0..plane).contains(&p.y) {
                    return p;
                }
            }
            uniform_point(rng, plane)
        })
        .collect()
}

/// Full-node positions (and region labels) for a placement strategy.
pub(crate) fn full_node_layout(
    placement: &Placement,
    n: usize,
    plane: f64,
    seed: u64,
) -> Result<Vec<(Position, Option<String>)>, SimError> {
    let mut r = rng::stream(seed, &[purpose::FULL_PLACEMENT]);
    let unlabeled = |ps: Vec<Position>| ps.into_iter().map(|p| (p, None)).collect();
    Ok(match placement {
        Placement::UniformGrid => unlabeled(lattice(n, plane)),
        Placement::UniformRandom => unlabeled((0..n).map(|_| uniform_point(&mut r, plane)).collect()),
        Placement::Clustered { clusters, spread } => unlabeled(clustered(n, *clusters, *spread, plane, &mut r)),
        Placement::Explicit(ps) => {
            if ps.len() != n {
                return Err(SimError::Config(format!(
                    "explicit placement lists {} positions for {n} full nodes",
                    ps.len()
                )));
            }
            if let Some(p) = ps.iter().find(|p| !(0.0..=plane).contains(&p.x) || !(0.0..=plane).contains(&p.y)) {
                return Err(SimError::Config(format!("position ({}, {}) lies outside the plane", p.x, p.y)));
            }
            unlabeled(ps.clone())
        }
        Placement::Regions(dist) => {
            if dist.total() != n as u64 {
                return Err(SimError::Config(format!(
                    "region data lists {} full nodes but the configuration asks for {n}",
                    dist.total()
                )));
            }
            (0..n as u64).map(|i| (uniform_point(&mut r, plane), dist.region_of_index(i).map(str::to_string))).collect()
        }
    })
}

/// Full-node positions alone, for analyses that do not need a population.
pub fn full_node_positions(placement: &Placement, n: usize, plane: f64, seed: u64) -> Result<Vec<Position>, SimError> {
    Ok(full_node_layout(placement, n, plane, seed)?.into_iter().map(|(p, _)| p).collect())
}

/// Lays out full nodes, marks `C` of them adversarial uniformly at random,
/// then scatters light nodes (and proxies, if any) uniformly on the plane.
pub fn place_nodes(config: &SimConfig) -> Result<Population, SimError> {
    config.validate()?;
    let n = config.full_node_count();
    let c = config.adversary_count();
    let plane = config.plane_size;
    let seed = config.seed;

    let layout = full_node_layout(&config.placement, n, plane, seed)?;
    let mut adversary = vec![false; n];
    let mut r = rng::stream(seed, &[purpose::ADVERSARY]);
    for i in index::sample(&mut r, n, c) {
        adversary[i] = true;
    }

    let mut nodes = Vec::with_capacity(n + config.light_nodes + config.proxy_count());
    for (i, (position, region)) in layout.into_iter().enumerate() {
        let kind = if adversary[i] { NodeKind::AdversaryFull } else { NodeKind::Full };
        nodes.push(NodeDescriptor { node_id: NodeId(i as u32), kind, position, region });
    }

    let region_names: Vec<String> = match &config.placement {
        Placement::Regions(d) => d.names().map(str::to_string).collect(),
        _ => Vec::new(),
    };
    let mut r = rng::stream(seed, &[purpose::LIGHT_PLACEMENT]);
    for j in 0..config.light_nodes {
        let id = NodeId(nodes.len() as u32);
        let region = (!region_names.is_empty()).then(|| region_names[j % region_names.len()].clone());
        nodes.push(NodeDescriptor {
            node_id: id,
            kind: NodeKind::Light,
            position: uniform_point(&mut r, plane),
            region,
        });
    }

    let mut r = rng::stream(seed, &[purpose::PROXY_PLACEMENT]);
    for _ in 0..config.proxy_count() {
        let id = NodeId(nodes.len() as u32);
        nodes.push(NodeDescriptor {
            node_id: id,
            kind: NodeKind::Proxy,
            position: uniform_point(&mut r, plane),
            region: None,
        });
    }
    Population::new(nodes)
}
