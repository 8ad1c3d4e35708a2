use crate::estimation::{EstimationError, EstimatorBank};
use crate::rng::StreamRng;
use crate::sem::{propagate_means, DagStructure, InterventionAction};

use super::{first_argmax, Handshake, Policy, PolicyError};

/// Per-round posterior draws for every observational and interventional
/// column, plus a node-mean buffer.
#[derive(Debug, Clone)]
pub struct TsScratch {
    obs: Vec<Vec<f64>>,
    int: Vec<Vec<f64>>,
    means: Vec<f64>,
    draws: u64,
}

impl TsScratch {
    pub fn new(dag: &DagStructure) -> Self {
        let n = dag.node_count();
        Self {
            obs: (0..n).map(|i| vec![0.0; dag.parents(i).len()]).collect(),
            int: (0..n).map(|i| vec![0.0; dag.parents(i).len()]).collect(),
            means: vec![0.0; n],
            draws: 0,
        }
    }

    /// Total posterior draws taken so far.
    pub fn draws(&self) -> u64 {
        self.draws
    }

    pub fn observational(&self) -> &[Vec<f64>] {
        &self.obs
    }

    pub fn interventional(&self) -> &[Vec<f64>] {
        &self.int
    }
}

/// Draws one posterior sample per column, then returns the arm whose sampled
/// mean reward is largest.
pub fn linsem_ts_gaussian_choose<R: rand::Rng + ?Sized>(
    bank: &EstimatorBank,
    dag: &DagStructure,
    arms: &[InterventionAction],
    nu: &[f64],
    sigma: f64,
    rng: &mut R,
    scratch: &mut TsScratch,
) -> Result<InterventionAction, EstimationError> {
    for i in 0..dag.node_count() {
        bank.observational(i).sample_posterior_into(sigma, rng, &mut scratch.obs[i])?;
        bank.interventional(i).sample_posterior_into(sigma, rng, &mut scratch.int[i])?;
        scratch.draws += 2;
    }
    let TsScratch { obs, int, means, .. } = scratch;
    let values = arms.iter().map(|&a| {
        propagate_means(dag, |i| if a.contains(i) { &int[i] } else { &obs[i] }, nu, means)
    });
    Ok(arms[first_argmax(values)])
}

/// Thompson sampling with Gaussian posteriors over every weight column.
#[derive(Debug, Clone)]
pub struct LinSemTsGaussian {
    dag: DagStructure,
    arms: Vec<InterventionAction>,
    nu: Vec<f64>,
    sigma: f64,
    bank: EstimatorBank,
    scratch: TsScratch,
    rng: StreamRng,
    handshake: Handshake,
}

impl LinSemTsGaussian {
    pub fn new(
        dag: &DagStructure,
        arms: Vec<InterventionAction>,
        nu: Vec<f64>,
        sigma: f64,
        rng: StreamRng,
    ) -> Result<Self, PolicyError> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(PolicyError::InvalidSetting(format!("sigma must be finite and non-negative, got {sigma}")));
        }
        if arms.is_empty() {
            return Err(PolicyError::InvalidSetting("empty arm list".into()));
        }
        if nu.len() != dag.node_count() {
            return Err(EstimationError::DimensionMismatch { expected: dag.node_count(), got: nu.len() }.into());
        }
        Ok(Self {
            dag: dag.clone(),
            arms,
            nu,
            sigma,
            bank: EstimatorBank::new(dag),
            scratch: TsScratch::new(dag),
            rng,
            handshake: Handshake::default(),
        })
    }

    pub fn bank(&self) -> &EstimatorBank {
        &self.bank
    }

    pub fn bank_mut(&mut self) -> &mut EstimatorBank {
        &mut self.bank
    }

    pub fn draws(&self) -> u64 {
        self.scratch.draws()
    }
}

impl Policy for LinSemTsGaussian {
    fn name(&self) -> &'static str {
        "linsem_ts_gaussian"
    }

    fn choose(&mut self, _round: usize) -> Result<InterventionAction, PolicyError> {
        self.handshake.begin()?;
        let a = linsem_ts_gaussian_choose(
            &self.bank,
            &self.dag,
            &self.arms,
            &self.nu,
            self.sigma,
            &mut self.rng,
            &mut self.scratch,
        )?;
        Ok(self.handshake.chosen(a))
    }

    fn observe(&mut self, action: InterventionAction, x: &[f64]) -> Result<(), PolicyError> {
        self.handshake.complete(action)?;
        self.bank.observe(action, x, &self.nu)?;
        Ok(())
    }
}
