//! Preset scenarios. Each one reads its [`Settings`], runs, and reports a
//! flat table of `(label, metric, value, dispersion)` rows.

mod custom;
mod decentralized;
mod heatmap;
mod mitigations;
mod mixer;
mod realworld;
mod variance;

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigError, ConfigMap, Settings};
use crate::math::MathError;
use crate::network::{RegionDistribution, SimError};

pub use custom::sim_config_from;
pub use heatmap::{cell_of, heatmap_for_layout, CellClass, GridHeatmap, HeatmapParams};
pub use mixer::{simulate_mixer, MixerSample};
pub use realworld::{region_weighted_rate, RealworldRates};
pub use variance::{layout_variance, variance_runs, VarianceLayout, VarianceRun};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Math(#[from] MathError),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub label: String,
    pub metric: String,
    pub value: f64,
    /// Standard error (or spread) of Monte Carlo estimates.
    pub dispersion: Option<f64>,
}

/// Secondary table written next to the main result (e.g. per light node).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub name: String,
    pub seed: u64,
    pub config_hash: String,
    pub params: BTreeMap<String, String>,
    pub rows: Vec<Row>,
    pub tables: Vec<Table>,
}

impl ExperimentResult {
    fn new(name: &str, seed: u64, settings: &Settings) -> Self {
        ExperimentResult {
            name: name.to_string(),
            seed,
            config_hash: settings.hash(),
            params: settings.values().clone(),
            rows: Vec::new(),
            tables: Vec::new(),
        }
    }

    pub(crate) fn push(&mut self, label: impl Into<String>, metric: &str, value: f64, dispersion: Option<f64>) {
        self.rows.push(Row { label: label.into(), metric: metric.to_string(), value, dispersion });
    }

    /// First row with this label and metric.
    pub fn value(&self, label: &str, metric: &str) -> Option<f64> {
        self.row(label, metric).map(|r| r.value)
    }

    pub fn row(&self, label: &str, metric: &str) -> Option<&Row> {
        self.rows.iter().find(|r| r.label == label && r.metric == metric)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Experiment {
    Decentralized,
    Realworld,
    Heatmap,
    Variance,
    Mixer,
    Mitigations,
    Custom,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::Decentralized,
        Experiment::Realworld,
        Experiment::Heatmap,
        Experiment::Variance,
        Experiment::Mixer,
        Experiment::Mitigations,
        Experiment::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Decentralized => "decentralized",
            Experiment::Realworld => "realworld",
            Experiment::Heatmap => "heatmap",
            Experiment::Variance => "variance",
            Experiment::Mixer => "mixer",
            Experiment::Mitigations => "mitigations",
            Experiment::Custom => "custom",
        }
    }

    /// Every key this experiment reads, with its default.
    pub fn schema(self) -> &'static [(&'static str, &'static str)] {
        match self {
            Experiment::Decentralized => decentralized::SCHEMA,
            Experiment::Realworld => realworld::SCHEMA,
            Experiment::Heatmap => heatmap::SCHEMA,
            Experiment::Variance => variance::SCHEMA,
            Experiment::Mixer => mixer::SCHEMA,
            Experiment::Mitigations => mitigations::SCHEMA,
            Experiment::Custom => custom::SCHEMA,
        }
    }

    /// Resolves defaults, an optional config file and overrides.
    pub fn settings(self, file: Option<&ConfigMap>, overrides: &[(String, String)]) -> Result<Settings, ConfigError> {
        let known = known_keys();
        Settings::resolve(self.name(), self.schema(), &known, file, overrides)
    }

    pub fn run(
        self,
        settings: &Settings,
        seed: u64,
        workers: Option<usize>,
    ) -> Result<ExperimentResult, ExperimentError> {
        let mut result = ExperimentResult::new(self.name(), seed, settings);
        match self {
            Experiment::Decentralized => decentralized::run(settings, seed, workers, &mut result)?,
            Experiment::Realworld => realworld::run(settings, seed, workers, &mut result)?,
            Experiment::Heatmap => heatmap::run(settings, seed, workers, &mut result)?,
            Experiment::Variance => variance::run(settings, seed, workers, &mut result)?,
            Experiment::Mixer => mixer::run(settings, seed, workers, &mut result)?,
            Experiment::Mitigations => mitigations::run(settings, seed, workers, &mut result)?,
            Experiment::Custom => custom::run(settings, seed, workers, &mut result)?,
        }
        Ok(result)
    }

    /// Runs with defaults plus overrides.
    pub fn run_default(self, seed: u64, overrides: &[(&str, &str)]) -> Result<ExperimentResult, ExperimentError> {
        let ov: Vec<(String, String)> = overrides.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        self.run(&self.settings(None, &ov)?, seed, None)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Experiment::ALL.into_iter().find(|e| e.name() == s).ok_or_else(|| {
            let names: Vec<_> = Experiment::ALL.iter().map(|e| e.name()).collect();
            format!("unknown experiment `{s}` (expected one of {})", names.join(", "))
        })
    }
}

/// Union of every experiment's keys.
pub fn known_keys() -> Vec<&'static str> {
    let mut keys: Vec<&str> = Experiment::ALL.iter().flat_map(|e| e.schema().iter().map(|(k, _)| *k)).collect();
    keys.sort_unstable();
    keys.dedup();
    keys
}

/// The embedded 2020 distribution, or the file named by `key` if set.
pub(crate) fn load_regions(settings: &Settings, key: &str) -> Result<RegionDistribution, ExperimentError> {
    match settings.raw(key) {
        "" => Ok(RegionDistribution::embedded_2020()),
        path => read_regions(Path::new(path)),
    }
}

pub fn read_regions(path: &Path) -> Result<RegionDistribution, ExperimentError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ExperimentError::Io { path: path.display().to_string(), message: e.to_string() })?;
    Ok(RegionDistribution::parse(&text)?)
}

/// `N=100 M=3 p=0.1` style labels.
pub(crate) fn label(parts: &[(&str, String)]) -> String {
    parts.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ")
}
