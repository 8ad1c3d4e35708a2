//! Theory diagnostics: parent second moments, their singular-value
//! envelopes, and the constants of the regret bound.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::environment::{forward_pass, sample_observation_into, SemParameters};
use crate::estimation::confidence_radius;
use crate::rng::{stream, Purpose};
use crate::sem::InterventionAction;

/// Samples used for moments under truncated noise.
pub const MC_MOMENT_SAMPLES: usize = 1_000_000;

/// Effective singular values at or below this count as zero.
pub const SINGULAR_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("second moment of node {node} under action {action} has effective minimum singular value {value}")]
    SingularMoment { node: usize, action: InterventionAction, value: f64, kappa_max: f64 },
    #[error("no node has parents, so there are no parent moments")]
    NoMoments,
    #[error("{0}")]
    DomainError(String),
}

/// Per-node `E[X_Pa(i) X_Pa(i)^T]` under one action, in compact parent
/// coordinates. `monte_carlo` marks estimates from the sampling path.
#[derive(Debug, Clone)]
pub struct SecondMoments {
    pub blocks: Vec<DMatrix<f64>>,
    pub monte_carlo: bool,
}

fn restrict(full: &DMatrix<f64>, params: &SemParameters) -> Vec<DMatrix<f64>> {
    let dag = params.dag();
    (0..dag.node_count())
        .map(|i| {
            let pa = dag.parents(i);
            DMatrix::from_fn(pa.len(), pa.len(), |r, c| full[(pa[r], pa[c])])
        })
        .collect()
}

/// `E[X X^T] = A (diag(var) + nu nu^T) A^T` with `A = (I - B_a^T)^{-1}`.
/// Column `k` of `A` is the forward pass of the unit noise vector `e_k`.
pub fn full_second_moment(params: &SemParameters, action: InterventionAction) -> DMatrix<f64> {
    let n = params.dag().node_count();
    let mut a = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut x = vec![0.0; n];
    for k in 0..n {
        e[k] = 1.0;
        forward_pass(params, action, &e, &mut x);
        a.column_mut(k).copy_from_slice(&x);
        e[k] = 0.0;
    }
    let nu = params.noise().mean();
    let var = params.noise().variance();
    let noise = DMatrix::from_fn(n, n, |r, c| nu[r] * nu[c] + if r == c { var[r] } else { 0.0 });
    let m = &a * noise * a.transpose();
    (&m + m.transpose()) * 0.5
}

/// Sample average of `X X^T` over `samples` draws.
pub fn sampled_second_moment<R: Rng + ?Sized>(
    params: &SemParameters,
    action: InterventionAction,
    samples: usize,
    rng: &mut R,
) -> DMatrix<f64> {
    let n = params.dag().node_count();
    let mut acc = DMatrix::zeros(n, n);
    let mut eps = vec![0.0; n];
    let mut x = vec![0.0; n];
    for _ in 0..samples {
        sample_observation_into(params, action, rng, &mut eps, &mut x);
        for c in 0..n {
            for r in c..n {
                acc[(r, c)] += x[r] * x[c];
            }
        }
    }
    for c in 0..n {
        for r in c..n {
            acc[(r, c)] /= samples as f64;
            acc[(c, r)] = acc[(r, c)];
        }
    }
    acc
}

/// Parent second moments under `action`: closed form for Gaussian noise,
/// [`MC_MOMENT_SAMPLES`] draws from a fixed stream for truncated noise.
pub fn second_moment(params: &SemParameters, action: InterventionAction) -> SecondMoments {
    if params.noise().is_truncated() {
        let mut rng = stream(0, 0, action.bits(), Purpose::Diagnostics);
        let full = sampled_second_moment(params, action, MC_MOMENT_SAMPLES, &mut rng);
        SecondMoments { blocks: restrict(&full, params), monte_carlo: true }
    } else {
        SecondMoments { blocks: restrict(&full_second_moment(params, action), params), monte_carlo: false }
    }
}

/// Extreme singular values of a symmetric PSD block.
fn extreme_singular_values(m: &DMatrix<f64>) -> (f64, f64) {
    let eig = SymmetricEigen::new(m.clone());
    eig.eigenvalues
        .iter()
        .map(|v| v.abs())
        .fold((f64::INFINITY, 0.0), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// `(kappa_min, kappa_max)`: the smallest and largest effective singular
/// values of the parent second moments over every node and arm.
pub fn kappa_bounds(params: &SemParameters, arms: &[InterventionAction]) -> Result<(f64, f64), AnalysisError> {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    let mut worst: Option<(usize, InterventionAction)> = None;
    for &a in arms {
        let moments = second_moment(params, a);
        for (i, block) in moments.blocks.iter().enumerate() {
            if block.nrows() == 0 {
                continue;
            }
            let (s_min, s_max) = extreme_singular_values(block);
            if s_min < lo {
                lo = s_min;
                worst = Some((i, a));
            }
            hi = hi.max(s_max);
        }
    }
    let (node, action) = worst.ok_or(AnalysisError::NoMoments)?;
    if lo <= SINGULAR_THRESHOLD {
        return Err(AnalysisError::SingularMoment { node, action, value: lo, kappa_max: hi });
    }
    Ok((lo, hi))
}

/// Constants of the regret bound for one problem size, with their inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoryConstants {
    pub nodes: usize,
    pub horizon: usize,
    pub max_degree: usize,
    pub longest_path: usize,
    pub obs_bound: f64,
    pub nu_norm: f64,
    pub alpha: f64,
    pub tau: f64,
    pub g_tau: f64,
    pub beta: f64,
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub lambda_bound: f64,
    pub regret_bound: f64,
}

impl TheoryConstants {
    /// Labeled values in field order.
    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("nodes", self.nodes as f64),
            ("horizon", self.horizon as f64),
            ("max_degree", self.max_degree as f64),
            ("longest_path", self.longest_path as f64),
            ("obs_bound", self.obs_bound),
            ("nu_norm", self.nu_norm),
            ("alpha", self.alpha),
            ("tau", self.tau),
            ("g_tau", self.g_tau),
            ("beta", self.beta),
            ("kappa_min", self.kappa_min),
            ("kappa_max", self.kappa_max),
            ("lambda_bound", self.lambda_bound),
            ("regret_bound", self.regret_bound),
        ]
    }
}

/// Evaluates
///
/// - `alpha = sqrt((16/3) log(d N T^{5/2} (T+1)))`
/// - `tau = alpha^2 m^4 / kappa_min^2`
/// - `g = sqrt(2) (sqrt(tau kappa_max) + sqrt(tau kappa_min) + 1)`
/// - `lambda <= 4g/sqrt(kappa_min) sqrt(NT) + 2 sqrt(2) (N+1) tau g
///    + (2 sqrt(2) N sqrt(tau) g / sqrt(kappa_min)) log(T/2N) + m/T + 2m/3 + 1`
/// - `regret <= 2m + ||nu|| 2^{L+1} L beta^L d^{L/2} lambda`
#[allow(clippy::too_many_arguments)]
pub fn regret_bound_constants(
    nodes: usize,
    horizon: usize,
    max_degree: usize,
    longest_path: usize,
    obs_bound: f64,
    nu_norm: f64,
    kappa_min: f64,
    kappa_max: f64,
) -> Result<TheoryConstants, AnalysisError> {
    if horizon < 2 * nodes {
        return Err(AnalysisError::DomainError(format!("horizon {horizon} is below 2N = {}", 2 * nodes)));
    }
    if max_degree == 0 {
        return Err(AnalysisError::DomainError("max degree must be at least 1".into()));
    }
    if !(kappa_min > 0.0 && kappa_min <= kappa_max && kappa_max.is_finite()) {
        return Err(AnalysisError::DomainError(format!(
            "need 0 < kappa_min <= kappa_max, got {kappa_min} and {kappa_max}"
        )));
    }
    if !(obs_bound > 0.0 && obs_bound.is_finite() && nu_norm >= 0.0 && nu_norm.is_finite()) {
        return Err(AnalysisError::DomainError("obs_bound must be positive and nu_norm non-negative".into()));
    }
    let n = nodes as f64;
    let t = horizon as f64;
    let d = max_degree as f64;
    let l = longest_path as f64;
    let m = obs_bound;
    let log_arg = d.ln() + n.ln() + 2.5 * t.ln() + (t + 1.0).ln();
    let alpha = (16.0 / 3.0 * log_arg).sqrt();
    let tau = alpha * alpha * m.powi(4) / (kappa_min * kappa_min);
    let sqrt2 = std::f64::consts::SQRT_2;
    let g_tau = sqrt2 * ((tau * kappa_max).sqrt() + (tau * kappa_min).sqrt() + 1.0);
    let lambda_bound = 4.0 * g_tau / kappa_min.sqrt() * (n * t).sqrt()
        + 2.0 * sqrt2 * (n + 1.0) * tau * g_tau
        + 2.0 * sqrt2 * n * tau.sqrt() * g_tau / kappa_min.sqrt() * (t / (2.0 * n)).ln()
        + m / t
        + 2.0 * m / 3.0
        + 1.0;
    let beta = confidence_radius(nodes, horizon, max_degree, obs_bound);
    let regret_bound =
        2.0 * m + nu_norm * 2f64.powf(l + 1.0) * l * beta.powf(l) * d.powf(l / 2.0) * lambda_bound;
    Ok(TheoryConstants {
        nodes,
        horizon,
        max_degree,
        longest_path,
        obs_bound,
        nu_norm,
        alpha,
        tau,
        g_tau,
        beta,
        kappa_min,
        kappa_max,
        lambda_bound,
        regret_bound,
    })
}
