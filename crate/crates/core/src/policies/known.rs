use crate::environment::SemParameters;
use crate::estimation::{ellipsoid_linear_max, project_to_ball, ConfidenceSpec, EstimationError, NodeEstimator};
use crate::rng::StreamRng;
use crate::sem::{propagate_means, InterventionAction};

use super::{first_argmax, Handshake, Policy, PolicyError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KnownMode {
    Ts { sigma: f64 },
    Ucb { spec: ConfidenceSpec },
}

/// Oracle variant that knows every non-reward column and learns only the
/// reward node's observational and interventional weights.
///
/// With the upstream columns fixed, the mean reward of arm `a` is
/// `nu_N + <theta, m_a>` where `m_a` holds the parents' means under `a`, so
/// both decision rules reduce to one linear problem per arm.
#[derive(Debug, Clone)]
pub struct KnownDistPolicy {
    arms: Vec<InterventionAction>,
    reward: usize,
    reward_parents: Vec<usize>,
    nu_reward: f64,
    parent_means: Vec<Vec<f64>>,
    obs: NodeEstimator,
    int: NodeEstimator,
    mode: KnownMode,
    rng: StreamRng,
    theta_obs: Vec<f64>,
    theta_int: Vec<f64>,
    handshake: Handshake,
}

impl KnownDistPolicy {
    pub fn new(
        truth: &SemParameters,
        arms: Vec<InterventionAction>,
        mode: KnownMode,
        rng: StreamRng,
    ) -> Result<Self, PolicyError> {
        if arms.is_empty() {
            return Err(PolicyError::InvalidSetting("empty arm list".into()));
        }
        if let KnownMode::Ts { sigma } = mode {
            if !(sigma >= 0.0 && sigma.is_finite()) {
                return Err(PolicyError::InvalidSetting(format!("sigma must be finite and non-negative, got {sigma}")));
            }
        }
        let dag = truth.dag();
        let n = dag.node_count();
        let reward = dag.reward_node();
        let reward_parents = dag.parents(reward).to_vec();
        let nu = truth.noise().mean();
        let mut means = vec![0.0; n];
        let parent_means = arms
            .iter()
            .map(|&a| {
                propagate_means(dag, |i| truth.column(i, a), nu, &mut means);
                reward_parents.iter().map(|&p| means[p]).collect()
            })
            .collect();
        let d = reward_parents.len();
        Ok(Self {
            arms,
            reward,
            nu_reward: nu[reward],
            obs: NodeEstimator::new(&reward_parents),
            int: NodeEstimator::new(&reward_parents),
            reward_parents,
            parent_means,
            mode,
            rng,
            theta_obs: vec![0.0; d],
            theta_int: vec![0.0; d],
            handshake: Handshake::default(),
        })
    }

    fn estimator(&self, a: InterventionAction) -> &NodeEstimator {
        if a.contains(self.reward) {
            &self.int
        } else {
            &self.obs
        }
    }

    /// Reward-node estimator used under `a`.
    pub fn reward_estimator(&self, a: InterventionAction) -> &NodeEstimator {
        self.estimator(a)
    }

    /// Replaces both reward-node estimators.
    pub fn set_reward_estimators(&mut self, obs: NodeEstimator, int: NodeEstimator) {
        self.obs = obs;
        self.int = int;
    }

    /// Per-arm score under the current mode; draws fresh posterior samples
    /// in TS mode.
    pub fn scores(&mut self) -> Result<Vec<f64>, EstimationError> {
        match self.mode {
            KnownMode::Ts { sigma } => {
                self.obs.sample_posterior_into(sigma, &mut self.rng, &mut self.theta_obs)?;
                self.int.sample_posterior_into(sigma, &mut self.rng, &mut self.theta_int)?;
                Ok(self
                    .arms
                    .iter()
                    .zip(&self.parent_means)
                    .map(|(&a, m)| {
                        let theta = if a.contains(self.reward) { &self.theta_int } else { &self.theta_obs };
                        self.nu_reward + dot(theta, m)
                    })
                    .collect())
            }
            KnownMode::Ucb { spec } => self
                .arms
                .iter()
                .zip(&self.parent_means)
                .map(|(&a, m)| {
                    let est = self.estimator(a);
                    if m.iter().all(|&x| x == 0.0) {
                        return Ok(self.nu_reward);
                    }
                    if spec.beta == 0.0 {
                        return Ok(self.nu_reward + dot(&project_to_ball(est.estimate(), spec.norm_cap), m));
                    }
                    ellipsoid_linear_max(est, m, &spec).map(|(v, _)| self.nu_reward + v)
                })
                .collect(),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Policy for KnownDistPolicy {
    fn name(&self) -> &'static str {
        match self.mode {
            KnownMode::Ts { .. } => "known_dist_ts",
            KnownMode::Ucb { .. } => "known_dist_ucb",
        }
    }

    fn choose(&mut self, _round: usize) -> Result<InterventionAction, PolicyError> {
        self.handshake.begin()?;
        let scores = self.scores()?;
        let a = self.arms[first_argmax(scores)];
        Ok(self.handshake.chosen(a))
    }

    fn observe(&mut self, action: InterventionAction, x: &[f64]) -> Result<(), PolicyError> {
        self.handshake.complete(action)?;
        let mut buf = [0.0f64; 64];
        for (slot, &p) in buf.iter_mut().zip(&self.reward_parents) {
            *slot = x[p];
        }
        let d = self.reward_parents.len();
        let target = x[self.reward] - self.nu_reward;
        let est = if action.contains(self.reward) { &mut self.int } else { &mut self.obs };
        est.update(&buf[..d], target)?;
        Ok(())
    }
}
