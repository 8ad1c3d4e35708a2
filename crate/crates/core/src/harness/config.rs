use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::environment::{NoiseKind, NoiseModel, PriorConfig};
use crate::policies::AscentSettings;

use super::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSpec {
    /// `layers` layers of `d` nodes, fully connected between neighbours.
    Hierarchical { d: usize, layers: usize },
    /// Reward with `nodes - 1` parents, each non-root given one random parent.
    EnhancedParallel { nodes: usize, structure_seed: u64 },
    /// Graph file; its weights act as the prior center. `intervenable`
    /// lists 1-based labels and defaults to every non-root, non-reward node.
    File {
        path: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        intervenable: Option<Vec<usize>>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    LinsemUcb,
    LinsemTsGaussian,
    BaselineUcb,
    KnownDist,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum KnownModeKind {
    #[default]
    Ts,
    Ucb,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    /// Decision rule of the known-distributions variant.
    pub mode: KnownModeKind,
    /// Posterior scale for the sampling policies.
    pub sigma: f64,
    /// Exploration scale of the baseline; defaults to `run.obs_bound`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    /// Confidence radius; defaults to the theoretical `beta_T`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Radius from the running maximum of `||X||` instead of `run.obs_bound`.
    pub adaptive_obs_bound: bool,
    pub max_sweeps: usize,
    pub restarts: usize,
    pub improvement_tol: f64,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        let a = AscentSettings::default();
        Self {
            kind: PolicyKind::LinsemTsGaussian,
            mode: KnownModeKind::Ts,
            sigma: 1.0,
            scale: None,
            beta: None,
            adaptive_obs_bound: false,
            max_sweeps: a.max_sweeps,
            restarts: a.restarts,
            improvement_tol: a.improvement_tol,
        }
    }
}

impl PolicyConfig {
    pub fn ascent(&self) -> AscentSettings {
        AscentSettings { max_sweeps: self.max_sweeps, restarts: self.restarts, improvement_tol: self.improvement_tol }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub horizon: usize,
    pub instances: usize,
    pub reps: usize,
    pub base_seed: u64,
    /// Observation bound `m`.
    pub obs_bound: f64,
    pub parallel: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            label: None,
            horizon: 5000,
            instances: 20,
            reps: 20,
            base_seed: 0,
            obs_bound: 10.0,
            parallel: true,
            output: None,
        }
    }
}

/// The same mean and variance on every node; `truncation` bounds `||eps||`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    pub mean: f64,
    pub variance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation: Option<f64>,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self { mean: 1.0, variance: 1.0, truncation: None }
    }
}

impl NoiseConfig {
    pub fn model(&self, nodes: usize) -> Result<NoiseModel, HarnessError> {
        let kind = match self.truncation {
            Some(bound) => NoiseKind::TruncatedGaussian { bound },
            None => NoiseKind::Gaussian,
        };
        Ok(NoiseModel::new(vec![self.mean; nodes], vec![self.variance; nodes], kind)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub graph: GraphSpec,
    #[serde(default)]
    pub policy: PolicyConfig,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub prior: PriorConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
}

fn config_err(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

/// Parses the right-hand side of a `key=value` override as a TOML value,
/// falling back to a plain string.
fn override_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.to_string())),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

impl ExperimentConfig {
    /// Parses TOML text, applying `section.key=value` overrides first.
    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self, HarnessError> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| config_err(e.to_string()))?;
        for item in overrides {
            let (key, raw) = item.split_once('=').ok_or_else(|| config_err(format!("override `{item}` lacks `=`")))?;
            let (section, field) = key
                .trim()
                .split_once('.')
                .ok_or_else(|| config_err(format!("override key `{key}` must look like section.key")))?;
            let entry = table.entry(section.to_string()).or_insert_with(|| toml::Value::Table(Default::default()));
            let sub = entry.as_table_mut().ok_or_else(|| config_err(format!("`{section}` is not a section")))?;
            sub.insert(field.to_string(), override_value(raw.trim()));
        }
        let config: Self = table.try_into().map_err(|e: toml::de::Error| config_err(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Reads a config file; a relative graph path resolves against the
    /// file's directory.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let mut config = Self::from_toml_str(&text, overrides)?;
        if let GraphSpec::File { path: graph, .. } = &mut config.graph {
            if graph.is_relative() {
                if let Some(dir) = path.parent() {
                    *graph = dir.join(&*graph);
                }
            }
        }
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn label(&self) -> String {
        if let Some(l) = &self.run.label {
            return l.clone();
        }
        let graph = match &self.graph {
            GraphSpec::Hierarchical { d, layers } => format!("hierarchical-d{d}-L{layers}"),
            GraphSpec::EnhancedParallel { nodes, structure_seed } => format!("enhanced-parallel-N{nodes}-s{structure_seed}"),
            GraphSpec::File { path, .. } => {
                format!("file-{}", path.file_stem().and_then(|s| s.to_str()).unwrap_or("graph"))
            }
        };
        let policy = match self.policy.kind {
            PolicyKind::LinsemUcb => "linsem_ucb".to_string(),
            PolicyKind::LinsemTsGaussian => "linsem_ts_gaussian".to_string(),
            PolicyKind::BaselineUcb => "baseline_ucb".to_string(),
            PolicyKind::KnownDist => format!("known_dist_{}", if self.policy.mode == KnownModeKind::Ts { "ts" } else { "ucb" }),
        };
        format!("{graph}/{policy}")
    }

    /// Baseline exploration scale after defaulting.
    pub fn baseline_scale(&self) -> f64 {
        self.policy.scale.unwrap_or(self.run.obs_bound)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        match &self.graph {
            GraphSpec::Hierarchical { d, layers } if *d == 0 || *layers == 0 => {
                return Err(config_err("hierarchical graphs need d >= 1 and layers >= 1"));
            }
            GraphSpec::EnhancedParallel { nodes, .. } if *nodes < 3 => {
                return Err(config_err("enhanced parallel graphs need at least 3 nodes"));
            }
            _ => {}
        }
        let r = &self.run;
        if r.horizon == 0 || r.instances == 0 || r.reps == 0 {
            return Err(config_err("horizon, instances and reps must all be at least 1"));
        }
        if !(r.obs_bound > 0.0 && r.obs_bound.is_finite()) {
            return Err(config_err(format!("obs_bound must be positive, got {}", r.obs_bound)));
        }
        let p = &self.policy;
        if !(p.sigma >= 0.0 && p.sigma.is_finite()) {
            return Err(config_err(format!("sigma must be finite and non-negative, got {}", p.sigma)));
        }
        if let Some(c) = p.scale {
            if !(c >= 0.0 && c.is_finite()) {
                return Err(config_err(format!("scale must be finite and non-negative, got {c}")));
            }
        }
        if let Some(b) = p.beta {
            if !(b >= 0.0 && b.is_finite()) {
                return Err(config_err(format!("beta must be finite and non-negative, got {b}")));
            }
        }
        p.ascent().validate().map_err(|e| config_err(e.to_string()))?;
        self.prior.validate()?;
        if !(self.noise.variance > 0.0 && self.noise.variance.is_finite() && self.noise.mean.is_finite()) {
            return Err(config_err("noise needs a finite mean and positive variance"));
        }
        Ok(())
    }
}
