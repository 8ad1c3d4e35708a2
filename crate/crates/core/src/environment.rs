//! Stochastic data generation: noise models, forward sampling under an
//! intervention, random SEM instances, and exact regret oracles.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sem::{
    expected_reward, graph_stats, DagStructure, GraphStats, InterventionAction, SemError, WeightMatrix,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvironmentError {
    #[error("noise mean has length {got}, graph has {expected} nodes")]
    NoiseLength { expected: usize, got: usize },
    #[error("noise variance must be positive (node {node}: {value})")]
    NonPositiveVariance { node: usize, value: f64 },
    #[error("truncation bound {bound} must exceed the noise-mean norm {mean_norm}")]
    BadTruncation { bound: f64, mean_norm: f64 },
    #[error("invalid prior: {0}")]
    InvalidPrior(String),
    #[error("arm list is empty")]
    NoArms,
    #[error(transparent)]
    Sem(#[from] SemError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum NoiseKind {
    Gaussian,
    /// Resample until `||eps - nu|| <= bound - ||nu||`, which keeps the mean
    /// at `nu` by symmetry and guarantees `||eps|| <= bound`.
    TruncatedGaussian { bound: f64 },
}

/// Independent per-node noise `eps_i ~ N(nu_i, var_i)`, optionally truncated.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    mean: Vec<f64>,
    std_dev: Vec<f64>,
    variance: Vec<f64>,
    kind: NoiseKind,
    radius: f64,
}

impl NoiseModel {
    pub fn new(mean: Vec<f64>, variance: Vec<f64>, kind: NoiseKind) -> Result<Self, EnvironmentError> {
        if variance.len() != mean.len() {
            return Err(EnvironmentError::NoiseLength { expected: mean.len(), got: variance.len() });
        }
        if let Some((node, &value)) = variance.iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
            return Err(EnvironmentError::NonPositiveVariance { node, value });
        }
        let mean_norm = norm(&mean);
        let radius = match kind {
            NoiseKind::Gaussian => f64::INFINITY,
            NoiseKind::TruncatedGaussian { bound } => {
                if !(bound > mean_norm) {
                    return Err(EnvironmentError::BadTruncation { bound, mean_norm });
                }
                bound - mean_norm
            }
        };
        let std_dev = variance.iter().map(|v| v.sqrt()).collect();
        Ok(Self { mean, std_dev, variance, kind, radius })
    }

    /// Unit-variance Gaussian noise with the given means.
    pub fn gaussian(mean: Vec<f64>) -> Self {
        let n = mean.len();
        Self::new(mean, vec![1.0; n], NoiseKind::Gaussian).expect("unit variances are valid")
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn variance(&self) -> &[f64] {
        &self.variance
    }

    pub fn kind(&self) -> NoiseKind {
        self.kind
    }

    pub fn is_truncated(&self) -> bool {
        matches!(self.kind, NoiseKind::TruncatedGaussian { .. })
    }

    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        loop {
            let mut dev2 = 0.0;
            for ((o, m), s) in out.iter_mut().zip(&self.mean).zip(&self.std_dev) {
                let z: f64 = StandardNormal.sample(rng);
                let dev = s * z;
                dev2 += dev * dev;
                *o = m + dev;
            }
            if dev2.sqrt() <= self.radius {
                return;
            }
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// A full linear SEM: the graph, observational and interventional weights
/// (together `W = [B B*]`), and the noise model.
#[derive(Debug, Clone, PartialEq)]
pub struct SemParameters {
    pub(crate) dag: DagStructure,
    pub(crate) obs_weights: WeightMatrix,
    pub(crate) int_weights: WeightMatrix,
    pub(crate) noise: NoiseModel,
    pub(crate) stats: GraphStats,
    obs_columns: Vec<Vec<f64>>,
    int_columns: Vec<Vec<f64>>,
}

impl SemParameters {
    pub fn new(
        dag: DagStructure,
        obs_weights: WeightMatrix,
        int_weights: WeightMatrix,
        noise: NoiseModel,
    ) -> Result<Self, EnvironmentError> {
        let n = dag.node_count();
        for m in [&obs_weights, &int_weights] {
            if m.size() != n {
                return Err(SemError::SupportMismatch { row: m.size(), col: n }.into());
            }
            if let Some((row, col)) = m.support_violation(&dag) {
                return Err(SemError::SupportMismatch { row, col }.into());
            }
        }
        if noise.mean().len() != n {
            return Err(EnvironmentError::NoiseLength { expected: n, got: noise.mean().len() });
        }
        let stats = graph_stats(&dag);
        let obs_columns = obs_weights.compact_columns(&dag);
        let int_columns = int_weights.compact_columns(&dag);
        Ok(Self { dag, obs_weights, int_weights, noise, stats, obs_columns, int_columns })
    }

    pub fn dag(&self) -> &DagStructure {
        &self.dag
    }

    pub fn obs_weights(&self) -> &WeightMatrix {
        &self.obs_weights
    }

    pub fn int_weights(&self) -> &WeightMatrix {
        &self.int_weights
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn stats(&self) -> GraphStats {
        self.stats
    }

    pub fn obs_columns(&self) -> &[Vec<f64>] {
        &self.obs_columns
    }

    pub fn int_columns(&self) -> &[Vec<f64>] {
        &self.int_columns
    }

    /// Compact column of node `i` under `action`.
    #[inline]
    pub fn column(&self, i: usize, action: InterventionAction) -> &[f64] {
        if action.contains(i) {
            &self.int_columns[i]
        } else {
            &self.obs_columns[i]
        }
    }

    pub fn with_noise(&self, noise: NoiseModel) -> Result<Self, EnvironmentError> {
        Self::new(self.dag.clone(), self.obs_weights.clone(), self.int_weights.clone(), noise)
    }

    /// Largest column norm over both weight matrices (`m_B`).
    pub fn max_column_norm(&self) -> f64 {
        (0..self.dag.node_count())
            .flat_map(|i| [self.obs_weights.column_norm(i), self.int_weights.column_norm(i)])
            .fold(0.0, f64::max)
    }
}

/// Forward pass `X_i = <[B_a]_i, X> + eps_i` in topological order.
pub fn forward_pass(params: &SemParameters, action: InterventionAction, noise: &[f64], out: &mut [f64]) {
    for i in 0..params.dag.node_count() {
        let mut acc = noise[i];
        for (&p, &w) in params.dag.parents(i).iter().zip(params.column(i, action)) {
            acc += w * out[p];
        }
        out[i] = acc;
    }
}

/// Draws one observation `X ~ P_a`; the reward is the last component.
pub fn sample_observation<R: Rng + ?Sized>(
    params: &SemParameters,
    action: InterventionAction,
    rng: &mut R,
) -> Vec<f64> {
    let n = params.dag.node_count();
    let mut eps = vec![0.0; n];
    let mut x = vec![0.0; n];
    sample_observation_into(params, action, rng, &mut eps, &mut x);
    x
}

/// Allocation-free variant; `eps` receives the noise draw.
pub fn sample_observation_into<R: Rng + ?Sized>(
    params: &SemParameters,
    action: InterventionAction,
    rng: &mut R,
    eps: &mut [f64],
    x: &mut [f64],
) {
    params.noise.sample_into(rng, eps);
    forward_pass(params, action, eps, x);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InterventionalRule {
    /// `B* = -B`.
    #[default]
    Negate,
    /// `B*` drawn independently from the same magnitude law.
    Independent,
}

/// Prior over SEM weights: nonzero entries uniform on
/// `[-high, -low] U [low, high]`, instances jittered around a prior center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriorConfig {
    pub weight_low: f64,
    pub weight_high: f64,
    pub interventional_rule: InterventionalRule,
    pub instance_jitter_sd: f64,
    pub normalize_columns: bool,
}

impl Default for PriorConfig {
    fn default() -> Self {
        Self {
            weight_low: 0.25,
            weight_high: 1.0,
            interventional_rule: InterventionalRule::Negate,
            instance_jitter_sd: 0.05,
            normalize_columns: false,
        }
    }
}

impl PriorConfig {
    pub fn validate(&self) -> Result<(), EnvironmentError> {
        if !(self.weight_low > 0.0 && self.weight_low <= self.weight_high && self.weight_high.is_finite()) {
            return Err(EnvironmentError::InvalidPrior(format!(
                "need 0 < weight_low <= weight_high, got [{}, {}]",
                self.weight_low, self.weight_high
            )));
        }
        if !(self.instance_jitter_sd >= 0.0 && self.instance_jitter_sd.is_finite()) {
            return Err(EnvironmentError::InvalidPrior(format!(
                "instance_jitter_sd must be finite and non-negative, got {}",
                self.instance_jitter_sd
            )));
        }
        Ok(())
    }
}

/// Observational and interventional weights of a prior center.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorCenter {
    pub obs_weights: WeightMatrix,
    pub int_weights: WeightMatrix,
}

fn signed_magnitude<R: Rng + ?Sized>(prior: &PriorConfig, rng: &mut R) -> f64 {
    let magnitude = rng.random_range(prior.weight_low..=prior.weight_high);
    if rng.random_bool(0.5) {
        magnitude
    } else {
        -magnitude
    }
}

/// Draws the prior center, visiting edges child by child in parent order.
pub fn sample_prior_center<R: Rng + ?Sized>(
    dag: &DagStructure,
    prior: &PriorConfig,
    rng: &mut R,
) -> Result<PriorCenter, EnvironmentError> {
    prior.validate()?;
    let n = dag.node_count();
    let mut obs = WeightMatrix::zeros(n);
    let mut int = WeightMatrix::zeros(n);
    for i in 0..n {
        for &j in dag.parents(i) {
            let w = signed_magnitude(prior, rng);
            obs.set(j, i, w);
            let w_int = match prior.interventional_rule {
                InterventionalRule::Negate => -w,
                InterventionalRule::Independent => signed_magnitude(prior, rng),
            };
            int.set(j, i, w_int);
        }
    }
    if prior.normalize_columns {
        obs.normalize_columns();
        int.normalize_columns();
    }
    Ok(PriorCenter { obs_weights: obs, int_weights: int })
}

/// Perturbs every nonzero entry of the center by independent
/// `N(0, jitter_sd^2)` noise. Under the negate rule `B* = -B` holds exactly
/// after the perturbation.
pub fn jitter_instance<R: Rng + ?Sized>(
    dag: &DagStructure,
    center: &PriorCenter,
    prior: &PriorConfig,
    noise: NoiseModel,
    rng: &mut R,
) -> Result<SemParameters, EnvironmentError> {
    prior.validate()?;
    let sd = prior.instance_jitter_sd;
    let mut obs = center.obs_weights.clone();
    let mut int = center.int_weights.clone();
    for i in 0..dag.node_count() {
        for &j in dag.parents(i) {
            let z: f64 = StandardNormal.sample(rng);
            let w = center.obs_weights.get(j, i) + sd * z;
            obs.set(j, i, w);
            let w_int = match prior.interventional_rule {
                InterventionalRule::Negate => -w,
                InterventionalRule::Independent => {
                    let z: f64 = StandardNormal.sample(rng);
                    center.int_weights.get(j, i) + sd * z
                }
            };
            int.set(j, i, w_int);
        }
    }
    if prior.normalize_columns {
        obs.normalize_columns();
        if prior.interventional_rule == InterventionalRule::Negate {
            for i in 0..dag.node_count() {
                for &j in dag.parents(i) {
                    int.set(j, i, -obs.get(j, i));
                }
            }
        } else {
            int.normalize_columns();
        }
    }
    SemParameters::new(dag.clone(), obs, int, noise)
}

/// Prior center followed by one jittered instance, both from `rng`.
pub fn sample_sem_instance<R: Rng + ?Sized>(
    dag: &DagStructure,
    prior: &PriorConfig,
    noise: NoiseModel,
    rng: &mut R,
) -> Result<SemParameters, EnvironmentError> {
    let center = sample_prior_center(dag, prior, rng)?;
    jitter_instance(dag, &center, prior, noise, rng)
}

/// Exact expected rewards of every arm of one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretOracle {
    arms: Vec<InterventionAction>,
    means: Vec<f64>,
    best: usize,
}

impl RegretOracle {
    pub fn new(params: &SemParameters, arms: &[InterventionAction]) -> Result<Self, EnvironmentError> {
        if arms.is_empty() {
            return Err(EnvironmentError::NoArms);
        }
        let means: Vec<f64> = arms.iter().map(|&a| expected_reward(params, a)).collect();
        let mut best = 0;
        for (k, &m) in means.iter().enumerate() {
            if m > means[best] {
                best = k;
            }
        }
        Ok(Self { arms: arms.to_vec(), means, best })
    }

    pub fn arms(&self) -> &[InterventionAction] {
        &self.arms
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn best_action(&self) -> InterventionAction {
        self.arms[self.best]
    }

    pub fn best_mean(&self) -> f64 {
        self.means[self.best]
    }

    pub fn index_of(&self, action: InterventionAction) -> Option<usize> {
        self.arms.binary_search(&action).ok().or_else(|| self.arms.iter().position(|&a| a == action))
    }

    /// `mu_{a*} - mu_a`; `None` when `action` is not one of the arms.
    pub fn regret(&self, action: InterventionAction) -> Option<f64> {
        self.index_of(action).map(|k| self.best_mean() - self.means[k])
    }
}

/// Exact maximizer of `mu_a` over `arms`; ties go to the earliest arm, which
/// is the lowest bitmask for enumerated arm lists.
pub fn optimal_action(
    params: &SemParameters,
    arms: &[InterventionAction],
) -> Result<(InterventionAction, f64), EnvironmentError> {
    let oracle = RegretOracle::new(params, arms)?;
    Ok((oracle.best_action(), oracle.best_mean()))
}

pub fn instant_regret(
    params: &SemParameters,
    arms: &[InterventionAction],
    action: InterventionAction,
) -> Result<f64, EnvironmentError> {
    let oracle = RegretOracle::new(params, arms)?;
    Ok(oracle.best_mean() - expected_reward(params, action))
}
