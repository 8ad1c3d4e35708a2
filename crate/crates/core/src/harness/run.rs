use std::fs;

use rayon::prelude::*;

use crate::environment::{jitter_instance, sample_observation_into, sample_prior_center, PriorCenter, RegretOracle, SemParameters};
use crate::estimation::{confidence_radius, ConfidenceSpec};
use crate::policies::{BaselineUcb, KnownDistPolicy, KnownMode, LinSemTsGaussian, LinSemUcb, Policy};
use crate::rng::{stream, Purpose};
use crate::sem::{enumerate_actions, parse_graph_file, DagStructure, InterventionAction};

use super::config::{ExperimentConfig, GraphSpec, KnownModeKind, PolicyKind};
use super::generators::{default_intervenable, gen_enhanced_parallel, gen_hierarchical};
use super::HarnessError;

/// One logged round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegretRow {
    pub instance_id: usize,
    pub rep_id: usize,
    pub t: usize,
    pub action: InterventionAction,
    pub reward: f64,
    pub inst_regret: f64,
    pub cum_regret: f64,
}

/// Rows sorted by (instance, rep, t). `nodes` fixes the width of the action
/// bit strings.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RegretTable {
    pub nodes: usize,
    pub rows: Vec<RegretRow>,
}

impl RegretTable {
    /// Final cumulative regret of every (instance, rep), in key order.
    pub fn final_regrets(&self) -> Vec<(usize, usize, f64)> {
        let mut out: Vec<(usize, usize, f64)> = Vec::new();
        for r in &self.rows {
            match out.last_mut() {
                Some(last) if last.0 == r.instance_id && last.1 == r.rep_id => last.2 = r.cum_regret,
                _ => out.push((r.instance_id, r.rep_id, r.cum_regret)),
            }
        }
        out
    }

    /// Mean cumulative regret at each round across all runs.
    pub fn mean_curve(&self) -> Vec<f64> {
        let horizon = self.rows.iter().map(|r| r.t).max().unwrap_or(0);
        let mut sums = vec![0.0; horizon];
        let mut counts = vec![0usize; horizon];
        for r in &self.rows {
            sums[r.t - 1] += r.cum_regret;
            counts[r.t - 1] += 1;
        }
        sums.iter().zip(&counts).map(|(s, &c)| s / c as f64).collect()
    }
}

/// Structure, arms and prior center shared by every instance of a config.
#[derive(Debug, Clone)]
pub struct ExperimentSetup {
    pub dag: DagStructure,
    pub intervenable: InterventionAction,
    pub arms: Vec<InterventionAction>,
    pub center: PriorCenter,
}

pub fn build_setup(config: &ExperimentConfig) -> Result<ExperimentSetup, HarnessError> {
    let seed = config.run.base_seed;
    let (dag, intervenable, center) = match &config.graph {
        GraphSpec::Hierarchical { d, layers } => {
            let g = gen_hierarchical(*d, *layers)?;
            let center = sample_prior_center(&g.dag, &config.prior, &mut stream(seed, 0, 0, Purpose::PriorCenter))?;
            (g.dag, g.intervenable, center)
        }
        GraphSpec::EnhancedParallel { nodes, structure_seed } => {
            let g = gen_enhanced_parallel(*nodes, &mut stream(*structure_seed, 0, 0, Purpose::Structure))?;
            let center = sample_prior_center(&g.dag, &config.prior, &mut stream(seed, 0, 0, Purpose::PriorCenter))?;
            (g.dag, g.intervenable, center)
        }
        GraphSpec::File { path, intervenable } => {
            let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
            let file = parse_graph_file(&text)?;
            let set = match intervenable {
                None => default_intervenable(&file.dag),
                Some(labels) => {
                    let mut nodes = Vec::with_capacity(labels.len());
                    for &l in labels {
                        let i = l
                            .checked_sub(1)
                            .and_then(|l0| file.dag.internal_index(l0))
                            .ok_or_else(|| HarnessError::Config(format!("intervenable label {l} is not a node")))?;
                        nodes.push(i);
                    }
                    InterventionAction::from_nodes(nodes)
                }
            };
            (file.dag, set, PriorCenter { obs_weights: file.obs_weights, int_weights: file.int_weights })
        }
    };
    let arms = enumerate_actions(intervenable)?;
    Ok(ExperimentSetup { dag, intervenable, arms, center })
}

/// True parameters of instance `instance`.
pub fn build_instance(
    config: &ExperimentConfig,
    setup: &ExperimentSetup,
    instance: usize,
) -> Result<SemParameters, HarnessError> {
    let noise = config.noise.model(setup.dag.node_count())?;
    let mut rng = stream(config.run.base_seed, instance as u64, 0, Purpose::Instance);
    Ok(jitter_instance(&setup.dag, &setup.center, &config.prior, noise, &mut rng)?)
}

/// Confidence radius used by the optimistic policies.
pub fn resolved_beta(config: &ExperimentConfig, dag: &DagStructure) -> f64 {
    config.policy.beta.unwrap_or_else(|| {
        let stats = crate::sem::graph_stats(dag);
        confidence_radius(dag.node_count(), config.run.horizon, stats.max_degree, config.run.obs_bound)
    })
}

pub fn build_policy(
    config: &ExperimentConfig,
    params: &SemParameters,
    arms: &[InterventionAction],
    instance: usize,
    rep: usize,
) -> Result<Box<dyn Policy>, HarnessError> {
    let rng = stream(config.run.base_seed, instance as u64, rep as u64, Purpose::Policy);
    let p = &config.policy;
    let dag = params.dag();
    let nu = params.noise().mean().to_vec();
    let policy: Box<dyn Policy> = match p.kind {
        PolicyKind::LinsemTsGaussian => Box::new(LinSemTsGaussian::new(dag, arms.to_vec(), nu, p.sigma, rng)?),
        PolicyKind::LinsemUcb => {
            let spec = ConfidenceSpec::new(resolved_beta(config, dag))?;
            let ucb = LinSemUcb::new(dag, arms.to_vec(), nu, spec, p.ascent(), rng)?;
            if p.adaptive_obs_bound {
                Box::new(ucb.with_adaptive_radius(config.run.horizon))
            } else {
                Box::new(ucb)
            }
        }
        PolicyKind::BaselineUcb => Box::new(BaselineUcb::new(arms.to_vec(), config.baseline_scale())?),
        PolicyKind::KnownDist => {
            let mode = match p.mode {
                KnownModeKind::Ts => KnownMode::Ts { sigma: p.sigma },
                KnownModeKind::Ucb => KnownMode::Ucb { spec: ConfidenceSpec::new(resolved_beta(config, dag))? },
            };
            Box::new(KnownDistPolicy::new(params, arms.to_vec(), mode, rng)?)
        }
    };
    Ok(policy)
}

/// Runs one (instance, rep) for `config.run.horizon` rounds.
pub fn run_replication(
    config: &ExperimentConfig,
    params: &SemParameters,
    oracle: &RegretOracle,
    instance: usize,
    rep: usize,
) -> Result<Vec<RegretRow>, HarnessError> {
    let horizon = config.run.horizon;
    let n = params.dag().node_count();
    let mut policy = build_policy(config, params, oracle.arms(), instance, rep)?;
    let mut env = stream(config.run.base_seed, instance as u64, rep as u64, Purpose::Environment);
    let mut eps = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut rows = Vec::with_capacity(horizon);
    let mut cum = 0.0;
    for t in 1..=horizon {
        let action = policy.choose(t)?;
        let inst_regret = oracle
            .regret(action)
            .ok_or_else(|| HarnessError::Config(format!("policy chose {action}, which is not an arm")))?;
        sample_observation_into(params, action, &mut env, &mut eps, &mut x);
        policy.observe(action, &x)?;
        cum += inst_regret;
        rows.push(RegretRow { instance_id: instance, rep_id: rep, t, action, reward: x[n - 1], inst_regret, cum_regret: cum });
    }
    Ok(rows)
}

/// Samples every instance, runs every replication and returns the rows in
/// (instance, rep, t) order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RegretTable, HarnessError> {
    config.validate()?;
    let setup = build_setup(config)?;
    let instances: Vec<(SemParameters, RegretOracle)> = (0..config.run.instances)
        .map(|i| {
            let params = build_instance(config, &setup, i)?;
            let oracle = RegretOracle::new(&params, &setup.arms)?;
            Ok((params, oracle))
        })
        .collect::<Result<_, HarnessError>>()?;
    let jobs: Vec<(usize, usize)> =
        (0..config.run.instances).flat_map(|i| (0..config.run.reps).map(move |r| (i, r))).collect();
    let run = |&(i, r): &(usize, usize)| {
        let (params, oracle) = &instances[i];
        run_replication(config, params, oracle, i, r)
    };
    let parts: Vec<Vec<RegretRow>> = if config.run.parallel {
        jobs.par_iter().map(run).collect::<Result<_, _>>()?
    } else {
        jobs.iter().map(run).collect::<Result<_, _>>()?
    };
    Ok(RegretTable { nodes: setup.dag.node_count(), rows: parts.concat() })
}

/// Mean final cumulative regret with standard errors across runs and
/// across per-instance means.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretSummary {
    pub label: String,
    pub horizon: usize,
    pub runs: usize,
    pub mean: f64,
    pub stderr_runs: f64,
    pub stderr_instances: f64,
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn summarize(label: &str, table: &RegretTable) -> RegretSummary {
    let finals = table.final_regrets();
    let horizon = table.rows.iter().map(|r| r.t).max().unwrap_or(0);
    if finals.is_empty() {
        return RegretSummary { label: label.to_string(), horizon, runs: 0, mean: f64::NAN, stderr_runs: f64::NAN, stderr_instances: f64::NAN };
    }
    let values: Vec<f64> = finals.iter().map(|f| f.2).collect();
    let (mean, stderr_runs) = mean_and_stderr(&values);
    let mut per_instance: Vec<(usize, f64, usize)> = Vec::new();
    for &(i, _, v) in &finals {
        match per_instance.last_mut() {
            Some(last) if last.0 == i => {
                last.1 += v;
                last.2 += 1;
            }
            _ => per_instance.push((i, v, 1)),
        }
    }
    let inst_means: Vec<f64> = per_instance.iter().map(|&(_, s, c)| s / c as f64).collect();
    let (_, stderr_instances) = mean_and_stderr(&inst_means);
    RegretSummary { label: label.to_string(), horizon, runs: values.len(), mean, stderr_runs, stderr_instances }
}

/// Runs every config and summarizes each; all configs must share a horizon.
pub fn sweep(configs: &[ExperimentConfig]) -> Result<Vec<RegretSummary>, HarnessError> {
    if let Some(first) = configs.first() {
        if let Some(c) = configs.iter().find(|c| c.run.horizon != first.run.horizon) {
            return Err(HarnessError::Config(format!(
                "sweep configs must share a horizon: {} has {}, expected {}",
                c.label(),
                c.run.horizon,
                first.run.horizon
            )));
        }
    }
    configs.iter().map(|c| Ok(summarize(&c.label(), &run_experiment(c)?))).collect()
}
