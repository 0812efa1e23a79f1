//! Browser demo. Each export takes plain numbers, runs the corresponding
//! library computation and returns a JSON string for the page to render.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use tipsel_core::experiments::{heatmap_for_layout, simulate_mixer, HeatmapParams};
use tipsel_core::math::{deanon_probability, hypergeom_pmf, mixer_chain_probability, AttackParams, MixerParams};
use tipsel_core::network::{full_node_positions, Placement};

#[derive(Serialize)]
struct HeatmapView {
    grid: usize,
    plane_size: f64,
    nodes: Vec<[f64; 2]>,
    node_counts: Vec<usize>,
    /// `None` for cells no sample could reach.
    probabilities: Vec<Option<f64>>,
    std_errors: Vec<Option<f64>>,
    layout_variance: f64,
}

/// Lays out `full_nodes` nodes, then estimates each grid cell's chance that a
/// light node there follows an adversary's response.
pub fn heatmap_json(
    placement: &str,
    full_nodes: usize,
    adversaries: usize,
    samples: usize,
    require_adversary_in_cell: bool,
    seed: u64,
) -> Result<String, String> {
    let placement: Placement = placement.parse()?;
    let params = HeatmapParams { adversaries, samples, require_adversary_in_cell, ..HeatmapParams::default() };
    let positions = full_node_positions(&placement, full_nodes, params.plane_size, seed).map_err(|e| e.to_string())?;
    // The browser has one thread.
    let h = heatmap_for_layout(&positions, &params, seed, Some(1)).map_err(|e| e.to_string())?;
    let cells = 0..h.cells();
    let view = HeatmapView {
        grid: h.grid,
        plane_size: params.plane_size,
        nodes: positions.iter().map(|p| [p.x, p.y]).collect(),
        probabilities: cells.clone().map(|c| h.probability(c)).collect(),
        std_errors: cells.map(|c| h.std_error(c)).collect(),
        layout_variance: h.layout_variance(),
        node_counts: h.node_counts,
    };
    Ok(serde_json::to_string(&view).expect("plain data serializes"))
}

#[derive(Serialize)]
struct AttackView {
    probability: f64,
    adversary_ratio: f64,
    /// `pmf[k]`: chance that exactly `k` of the `m` responders are adversarial.
    pmf: Vec<f64>,
}

pub fn attack_json(n: u64, c: u64, m: u64) -> Result<String, String> {
    let params = AttackParams::new(n, c, m).map_err(|e| e.to_string())?;
    let pmf = (0..=m)
        .map(|k| hypergeom_pmf(&params, k).map(|p| p.value()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let view = AttackView {
        probability: deanon_probability(&params).map_err(|e| e.to_string())?.value(),
        adversary_ratio: params.adversary_ratio(),
        pmf,
    };
    Ok(serde_json::to_string(&view).expect("plain data serializes"))
}

#[derive(Serialize)]
struct MixerRow {
    length: usize,
    analytic: f64,
    empirical: f64,
    std_error: f64,
}

pub fn mixer_json(p: f64, max_chain: usize, participants: usize, seed: u64) -> Result<String, String> {
    if max_chain == 0 || participants == 0 {
        return Err("chain length and participants must be positive".into());
    }
    let rows = (1..=max_chain)
        .map(|x| MixerParams::new(p, x as u32).map(|params| mixer_chain_probability(&params).value()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let sample = simulate_mixer(participants, p, max_chain, seed);
    let rows: Vec<MixerRow> = rows
        .into_iter()
        .enumerate()
        .map(|(i, analytic)| MixerRow {
            length: i + 1,
            analytic,
            empirical: sample.empirical(i + 1),
            std_error: sample.std_error(i + 1),
        })
        .collect();
    Ok(serde_json::to_string(&rows).expect("plain data serializes"))
}

#[wasm_bindgen]
pub fn heatmap(
    placement: &str,
    full_nodes: usize,
    adversaries: usize,
    samples: usize,
    require_adversary_in_cell: bool,
    seed: u32,
) -> Result<String, JsValue> {
    heatmap_json(placement, full_nodes, adversaries, samples, require_adversary_in_cell, seed.into())
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn attack(n: u32, c: u32, m: u32) -> Result<String, JsValue> {
    attack_json(n.into(), c.into(), m.into()).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn mixer(p: f64, max_chain: usize, participants: usize, seed: u32) -> Result<String, JsValue> {
    mixer_json(p, max_chain, participants, seed.into()).map_err(|e| JsValue::from_str(&e))
}
