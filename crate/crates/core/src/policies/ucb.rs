use rand::Rng;

use crate::estimation::{
    confidence_radius, ellipsoid_linear_max, project_to_ball, sample_feasible, ConfidenceSpec, EstimationError, EstimatorBank,
};
use crate::rng::StreamRng;
use crate::sem::{column_coefficients, path_sums, propagate_means, DagStructure, InterventionAction};

use super::{first_argmax, Handshake, Policy, PolicyError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AscentSettings {
    pub max_sweeps: usize,
    pub restarts: usize,
    pub improvement_tol: f64,
}

impl Default for AscentSettings {
    fn default() -> Self {
        Self { max_sweeps: 50, restarts: 4, improvement_tol: 1e-9 }
    }
}

impl AscentSettings {
    pub fn validate(&self) -> Result<(), PolicyError> {
        if self.max_sweeps == 0 {
            return Err(PolicyError::InvalidSetting("max_sweeps must be at least 1".into()));
        }
        if !(self.improvement_tol > 0.0 && self.improvement_tol.is_finite()) {
            return Err(PolicyError::InvalidSetting(format!(
                "improvement_tol must be positive, got {}",
                self.improvement_tol
            )));
        }
        Ok(())
    }
}

/// Estimator bank plus the audit record of the last round's UCB values.
#[derive(Debug, Clone)]
pub struct UcbWorkspace {
    pub bank: EstimatorBank,
    pub settings: AscentSettings,
    ucb_values: Vec<f64>,
    center_values: Vec<f64>,
}

impl UcbWorkspace {
    pub fn new(dag: &DagStructure, settings: AscentSettings) -> Result<Self, PolicyError> {
        settings.validate()?;
        Ok(Self { bank: EstimatorBank::new(dag), settings, ucb_values: Vec::new(), center_values: Vec::new() })
    }

    /// Achieved (approximate) UCB per arm from the most recent choice.
    pub fn ucb_values(&self) -> &[f64] {
        &self.ucb_values
    }

    /// Objective at the projected estimates per arm from the most recent choice.
    pub fn center_values(&self) -> &[f64] {
        &self.center_values
    }
}

struct Objective<'d> {
    dag: &'d DagStructure,
    nu: &'d [f64],
    means: Vec<f64>,
    sums: Vec<f64>,
}

impl<'d> Objective<'d> {
    fn new(dag: &'d DagStructure, nu: &'d [f64]) -> Self {
        let n = dag.node_count();
        Self { dag, nu, means: vec![0.0; n], sums: vec![0.0; n] }
    }

    fn value(&mut self, cols: &[Vec<f64>]) -> f64 {
        propagate_means(self.dag, |i| &cols[i], self.nu, &mut self.means)
    }

    /// Linear coefficients of column `i` at `cols`, together with the
    /// objective value there.
    fn coefficients(&mut self, cols: &[Vec<f64>], i: usize) -> (f64, Vec<f64>) {
        let value = self.value(cols);
        path_sums(self.dag, |k| &cols[k], &mut self.sums);
        (value, column_coefficients(self.dag, i, &self.sums, &self.means))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Columns that can change the objective: reward ancestors with parents.
fn active_columns(dag: &DagStructure) -> Vec<usize> {
    let anc = dag.reward_ancestors();
    (0..dag.node_count()).filter(|&i| anc[i] && !dag.parents(i).is_empty()).collect()
}

/// Cyclic coordinate ascent on `<f(Theta), nu>` over the product of the
/// per-column confidence sets for `action`, starting from `cols`. Each column
/// step maximizes the objective's (exactly linear) restriction to that column
/// and is kept only if it improves the objective. Returns the final value;
/// `trace` receives the objective after every sweep, preceded by the start.
#[allow(clippy::too_many_arguments)]
pub fn coordinate_ascent(
    dag: &DagStructure,
    bank: &EstimatorBank,
    action: InterventionAction,
    nu: &[f64],
    spec: &ConfidenceSpec,
    settings: &AscentSettings,
    cols: &mut [Vec<f64>],
    mut trace: Option<&mut Vec<f64>>,
) -> Result<f64, EstimationError> {
    let active = active_columns(dag);
    let mut obj = Objective::new(dag, nu);
    let mut value = obj.value(cols);
    if let Some(t) = trace.as_deref_mut() {
        t.push(value);
    }
    for _ in 0..settings.max_sweeps {
        let start = value;
        for &i in &active {
            let (current, coef) = obj.coefficients(cols, i);
            if coef.iter().all(|&c| c == 0.0) {
                continue;
            }
            let (best, point) = ellipsoid_linear_max(bank.for_action(i, action), &coef, spec)?;
            if best > dot(&coef, &cols[i]) {
                let old = std::mem::replace(&mut cols[i], point);
                let candidate = obj.value(cols);
                if candidate > current {
                    value = candidate;
                } else {
                    cols[i] = old;
                    value = current;
                }
            } else {
                value = current;
            }
        }
        if let Some(t) = trace.as_deref_mut() {
            t.push(value);
        }
        if value - start < settings.improvement_tol {
            break;
        }
    }
    Ok(value)
}

/// Approximate UCB of one arm: the best coordinate-ascent value over the
/// projected-center start and `settings.restarts` random feasible starts.
/// Returns `(ucb, center_value)`.
pub fn arm_ucb<R: Rng + ?Sized>(
    dag: &DagStructure,
    bank: &EstimatorBank,
    action: InterventionAction,
    nu: &[f64],
    spec: &ConfidenceSpec,
    settings: &AscentSettings,
    rng: &mut R,
) -> Result<(f64, f64), EstimationError> {
    let n = dag.node_count();
    let center: Vec<Vec<f64>> =
        (0..n).map(|i| project_to_ball(bank.for_action(i, action).estimate(), spec.norm_cap)).collect();
    let center_value = propagate_means(dag, |i| &center[i], nu, &mut vec![0.0; n]);
    let active = active_columns(dag);
    if active.is_empty() || spec.beta == 0.0 {
        return Ok((center_value, center_value));
    }
    let mut cols = center.clone();
    let mut best = coordinate_ascent(dag, bank, action, nu, spec, settings, &mut cols, None)?;
    for _ in 0..settings.restarts {
        let mut cols = center.clone();
        for &i in &active {
            cols[i] = sample_feasible(bank.for_action(i, action), spec, rng)?;
        }
        let v = coordinate_ascent(dag, bank, action, nu, spec, settings, &mut cols, None)?;
        if v > best {
            best = v;
        }
    }
    Ok((best, center_value))
}

/// Computes every arm's UCB into the workspace and returns the largest,
/// earliest arm winning ties.
pub fn linsem_ucb_choose<R: Rng + ?Sized>(
    ws: &mut UcbWorkspace,
    dag: &DagStructure,
    arms: &[InterventionAction],
    nu: &[f64],
    spec: &ConfidenceSpec,
    rng: &mut R,
) -> Result<InterventionAction, EstimationError> {
    ws.ucb_values.clear();
    ws.center_values.clear();
    for &a in arms {
        let (ucb, center) = arm_ucb(dag, &ws.bank, a, nu, spec, &ws.settings, rng)?;
        ws.ucb_values.push(ucb);
        ws.center_values.push(center);
    }
    Ok(arms[first_argmax(ws.ucb_values.iter().copied())])
}

/// Optimism over the per-column confidence ellipsoids.
#[derive(Debug, Clone)]
pub struct LinSemUcb {
    dag: DagStructure,
    arms: Vec<InterventionAction>,
    nu: Vec<f64>,
    spec: ConfidenceSpec,
    ws: UcbWorkspace,
    rng: StreamRng,
    handshake: Handshake,
    adaptive: Option<AdaptiveRadius>,
}

/// Recomputes the radius from the largest observation norm seen so far in
/// place of a configured bound.
#[derive(Debug, Clone, Copy)]
struct AdaptiveRadius {
    horizon: usize,
    max_degree: usize,
    running_max: f64,
}

impl LinSemUcb {
    pub fn new(
        dag: &DagStructure,
        arms: Vec<InterventionAction>,
        nu: Vec<f64>,
        spec: ConfidenceSpec,
        settings: AscentSettings,
        rng: StreamRng,
    ) -> Result<Self, PolicyError> {
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
            spec,
            ws: UcbWorkspace::new(dag, settings)?,
            rng,
            handshake: Handshake::default(),
            adaptive: None,
        })
    }

    /// Switches to a radius driven by the running maximum of `||X(s)||`.
    pub fn with_adaptive_radius(mut self, horizon: usize) -> Self {
        let max_degree = (0..self.dag.node_count()).map(|i| self.dag.parents(i).len()).max().unwrap_or(0);
        self.adaptive = Some(AdaptiveRadius { horizon, max_degree, running_max: 0.0 });
        self.spec.beta = confidence_radius(self.dag.node_count(), horizon, max_degree, 0.0);
        self
    }

    pub fn workspace(&self) -> &UcbWorkspace {
        &self.ws
    }

    pub fn workspace_mut(&mut self) -> &mut UcbWorkspace {
        &mut self.ws
    }

    pub fn spec(&self) -> &ConfidenceSpec {
        &self.spec
    }
}

impl Policy for LinSemUcb {
    fn name(&self) -> &'static str {
        "linsem_ucb"
    }

    fn choose(&mut self, _round: usize) -> Result<InterventionAction, PolicyError> {
        self.handshake.begin()?;
        let a = linsem_ucb_choose(&mut self.ws, &self.dag, &self.arms, &self.nu, &self.spec, &mut self.rng)?;
        Ok(self.handshake.chosen(a))
    }

    fn observe(&mut self, action: InterventionAction, x: &[f64]) -> Result<(), PolicyError> {
        self.handshake.complete(action)?;
        self.ws.bank.observe(action, x, &self.nu)?;
        if let Some(ad) = self.adaptive.as_mut() {
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > ad.running_max {
                ad.running_max = norm;
                self.spec.beta = confidence_radius(self.dag.node_count(), ad.horizon, ad.max_degree, norm);
            }
        }
        Ok(())
    }
}
