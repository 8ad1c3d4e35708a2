//! Bandit agents behind a shared choose/observe contract.

mod baseline;
mod known;
mod ts;
mod ucb;

use thiserror::Error;

use crate::estimation::EstimationError;
use crate::sem::InterventionAction;

pub use baseline::{baseline_ucb_choose, BaselineUcb};
pub use known::{KnownDistPolicy, KnownMode};
pub use ts::{linsem_ts_gaussian_choose, LinSemTsGaussian, TsScratch};
pub use ucb::{arm_ucb, coordinate_ascent, linsem_ucb_choose, AscentSettings, LinSemUcb, UcbWorkspace};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolicyError {
    #[error("choose called twice without an observe in between")]
    ChooseTwice,
    #[error("observe called without a pending choose")]
    ObserveWithoutChoose,
    #[error("observed action {observed} differs from chosen action {chosen}")]
    ActionMismatch { chosen: InterventionAction, observed: InterventionAction },
    #[error("invalid policy setting: {0}")]
    InvalidSetting(String),
    #[error(transparent)]
    Estimation(#[from] EstimationError),
}

/// One agent per replication. `choose` and `observe` alternate strictly.
pub trait Policy: Send {
    fn name(&self) -> &'static str;

    /// Picks the action for round `round` (1-based).
    fn choose(&mut self, round: usize) -> Result<InterventionAction, PolicyError>;

    /// Feeds back the full observation `x` drawn under `action`.
    fn observe(&mut self, action: InterventionAction, x: &[f64]) -> Result<(), PolicyError>;
}

/// Tracks the pending action between `choose` and `observe`.
#[derive(Debug, Clone, Default)]
pub(crate) struct Handshake {
    pending: Option<InterventionAction>,
}

impl Handshake {
    pub(crate) fn begin(&self) -> Result<(), PolicyError> {
        match self.pending {
            Some(_) => Err(PolicyError::ChooseTwice),
            None => Ok(()),
        }
    }

    pub(crate) fn chosen(&mut self, action: InterventionAction) -> InterventionAction {
        self.pending = Some(action);
        action
    }

    pub(crate) fn complete(&mut self, observed: InterventionAction) -> Result<(), PolicyError> {
        match self.pending.take() {
            None => Err(PolicyError::ObserveWithoutChoose),
            Some(chosen) if chosen != observed => {
                self.pending = Some(chosen);
                Err(PolicyError::ActionMismatch { chosen, observed })
            }
            Some(_) => Ok(()),
        }
    }
}

/// Index of the first maximum; earlier entries win ties.
pub(crate) fn first_argmax(values: impl IntoIterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (k, v) in values.into_iter().enumerate() {
        if v > best_value {
            best = k;
            best_value = v;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn handshake_enforces_alternation() {
        let mut h = Handshake::default();
        assert_eq!(h.complete(InterventionAction::EMPTY), Err(PolicyError::ObserveWithoutChoose));
        h.begin().unwrap();
        h.chosen(InterventionAction::from_nodes([1]));
        assert_eq!(h.begin(), Err(PolicyError::ChooseTwice));
        assert!(matches!(h.complete(InterventionAction::EMPTY), Err(PolicyError::ActionMismatch { .. })));
        h.complete(InterventionAction::from_nodes([1])).unwrap();
        h.begin().unwrap();
    }

    #[test]
    fn argmax_prefers_first() {
        assert_eq!(first_argmax([1.0, 3.0, 3.0, 2.0]), 1);
        assert_eq!(first_argmax([0.0, 0.0]), 0);
    }
}
