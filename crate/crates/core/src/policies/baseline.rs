use crate::sem::InterventionAction;

use super::{first_argmax, Handshake, Policy, PolicyError};

/// Index of the arm to pull in round `t` (1-based): unpulled arms first in
/// list order, then the largest `mean + c sqrt(2 ln t / n)`.
pub fn baseline_ucb_choose(means: &[f64], counts: &[u64], t: usize, c: f64) -> usize {
    if let Some(k) = counts.iter().position(|&n| n == 0) {
        return k;
    }
    let log_t = (t.max(1) as f64).ln();
    first_argmax(
        means
            .iter()
            .zip(counts)
            .map(|(&m, &n)| m + c * (2.0 * log_t / n as f64).sqrt()),
    )
}

/// Non-causal UCB that treats every arm as an independent reward source.
#[derive(Debug, Clone)]
pub struct BaselineUcb {
    arms: Vec<InterventionAction>,
    sums: Vec<f64>,
    counts: Vec<u64>,
    means: Vec<f64>,
    scale: f64,
    handshake: Handshake,
}

impl BaselineUcb {
    pub fn new(arms: Vec<InterventionAction>, scale: f64) -> Result<Self, PolicyError> {
        if !(scale >= 0.0 && scale.is_finite()) {
            return Err(PolicyError::InvalidSetting(format!("UCB scale must be finite and non-negative, got {scale}")));
        }
        if arms.is_empty() {
            return Err(PolicyError::InvalidSetting("empty arm list".into()));
        }
        let k = arms.len();
        Ok(Self { arms, sums: vec![0.0; k], counts: vec![0; k], means: vec![0.0; k], scale, handshake: Handshake::default() })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }
}

impl Policy for BaselineUcb {
    fn name(&self) -> &'static str {
        "baseline_ucb"
    }

    fn choose(&mut self, round: usize) -> Result<InterventionAction, PolicyError> {
        self.handshake.begin()?;
        let k = baseline_ucb_choose(&self.means, &self.counts, round, self.scale);
        Ok(self.handshake.chosen(self.arms[k]))
    }

    fn observe(&mut self, action: InterventionAction, x: &[f64]) -> Result<(), PolicyError> {
        self.handshake.complete(action)?;
        let k = self
            .arms
            .iter()
            .position(|&a| a == action)
            .ok_or_else(|| PolicyError::InvalidSetting(format!("action {action} is not an arm")))?;
        let reward = *x.last().ok_or_else(|| PolicyError::InvalidSetting("empty observation".into()))?;
        self.sums[k] += reward;
        self.counts[k] += 1;
        self.means[k] = self.sums[k] / self.counts[k] as f64;
        Ok(())
    }
}
