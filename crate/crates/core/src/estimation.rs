//! Per-node regularized least squares for the observational and
//! interventional weight columns, confidence-ellipsoid geometry, and Gaussian
//! posterior sampling.
//!
//! Each estimator works in the compact coordinates of its node's parents. The
//! padded `N x N` form carries identity rows on every non-parent coordinate,
//! so restricting to the parent block loses nothing.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::sem::{DagStructure, InterventionAction};

/// Rank-one updates between from-scratch re-inversions of the Gram matrix.
pub const REFRESH_INTERVAL: u32 = 512;

const BREAKDOWN_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimationError {
    #[error("rank-one update denominator {denominator} is not positive")]
    NumericalBreakdown { denominator: f64 },
    #[error("direction vector is zero")]
    ZeroDirection,
    #[error("Gram matrix is not positive definite")]
    FactorizationFailure,
    #[error("expected a vector of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("confidence radius must be finite and non-negative, got {0}")]
    InvalidRadius(f64),
    #[error("posterior scale must be finite and non-negative, got {0}")]
    InvalidScale(f64),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

/// Online ridge estimator for one weight column:
/// `V = I + sum x x^T`, `g = sum x (x_i - nu_i)`, `b = V^{-1} g`.
#[derive(Debug, Clone)]
pub struct NodeEstimator {
    parents: Vec<usize>,
    gram: DMatrix<f64>,
    gram_inv: DMatrix<f64>,
    /// Lower Cholesky factor of `gram`.
    factor: Option<DMatrix<f64>>,
    resp: DVector<f64>,
    estimate: DVector<f64>,
    count: u64,
    since_refresh: u32,
}

impl NodeEstimator {
    pub fn new(parents: &[usize]) -> Self {
        let d = parents.len();
        Self {
            parents: parents.to_vec(),
            gram: DMatrix::identity(d, d),
            gram_inv: DMatrix::identity(d, d),
            factor: Some(DMatrix::identity(d, d)),
            resp: DVector::zeros(d),
            estimate: DVector::zeros(d),
            count: 0,
            since_refresh: 0,
        }
    }

    /// Rebuilds an estimator from its Gram matrix and response accumulator.
    pub fn from_parts(
        parents: &[usize],
        gram: DMatrix<f64>,
        resp: DVector<f64>,
        count: u64,
    ) -> Result<Self, EstimationError> {
        let d = parents.len();
        if gram.nrows() != d || gram.ncols() != d || resp.len() != d {
            return Err(EstimationError::DimensionMismatch { expected: d, got: gram.nrows().max(resp.len()) });
        }
        let mut est = Self::new(parents);
        est.gram = gram;
        est.resp = resp;
        est.count = count;
        est.refresh()?;
        est.factor = Cholesky::new(est.gram.clone()).map(|c| c.unpack());
        Ok(est)
    }

    pub fn dim(&self) -> usize {
        self.parents.len()
    }

    pub fn parents(&self) -> &[usize] {
        &self.parents
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn gram_inv(&self) -> &DMatrix<f64> {
        &self.gram_inv
    }

    pub fn resp(&self) -> &DVector<f64> {
        &self.resp
    }

    pub fn estimate(&self) -> &[f64] {
        self.estimate.as_slice()
    }

    /// Absorbs one sample: `x_parents` are the parent values, `target` is
    /// `x_i - nu_i`.
    pub fn update(&mut self, x_parents: &[f64], target: f64) -> Result<(), EstimationError> {
        let d = self.dim();
        if x_parents.len() != d {
            return Err(EstimationError::DimensionMismatch { expected: d, got: x_parents.len() });
        }
        self.count += 1;
        if d == 0 {
            return Ok(());
        }
        let x = DVector::from_column_slice(x_parents);
        let u = &self.gram_inv * &x;
        let denominator = 1.0 + x.dot(&u);
        if !(denominator > BREAKDOWN_THRESHOLD) {
            return Err(EstimationError::NumericalBreakdown { denominator });
        }
        self.gram.ger(1.0, &x, &x, 1.0);
        self.gram_inv.ger(-1.0 / denominator, &u, &u, 1.0);
        self.resp.axpy(target, &x, 1.0);
        self.since_refresh += 1;
        if self.since_refresh >= REFRESH_INTERVAL {
            self.refresh()?;
        }
        self.factor = Cholesky::new(self.gram.clone()).map(|c| c.unpack());
        self.estimate = &self.gram_inv * &self.resp;
        Ok(())
    }

    /// Re-inverts the Gram matrix from scratch.
    pub fn refresh(&mut self) -> Result<(), EstimationError> {
        let chol = Cholesky::new(self.gram.clone()).ok_or(EstimationError::FactorizationFailure)?;
        self.gram_inv = chol.inverse();
        self.since_refresh = 0;
        self.estimate = &self.gram_inv * &self.resp;
        Ok(())
    }

    /// Solves `V b = g` from scratch; independent of the cached inverse.
    pub fn batch_solve(&self) -> Result<Vec<f64>, EstimationError> {
        let chol = Cholesky::new(self.gram.clone()).ok_or(EstimationError::FactorizationFailure)?;
        Ok(chol.solve(&self.resp).as_slice().to_vec())
    }

    /// `||v||_V` for a compact vector `v`.
    pub fn gram_norm(&self, v: &[f64]) -> f64 {
        let v = DVector::from_column_slice(v);
        v.dot(&(&self.gram * &v)).max(0.0).sqrt()
    }

    /// `||w||_{V^{-1}}`.
    pub fn inverse_gram_norm(&self, w: &[f64]) -> f64 {
        let w = DVector::from_column_slice(w);
        w.dot(&(&self.gram_inv * &w)).max(0.0).sqrt()
    }

    /// Solves `L^T y = z` with the cached factor, so `y ~ N(0, V^{-1})` when
    /// `z ~ N(0, I)` and `||y||_V = ||z||`.
    fn whiten_into(&self, z: &[f64], y: &mut [f64]) -> Result<(), EstimationError> {
        let l = self.factor.as_ref().ok_or(EstimationError::FactorizationFailure)?;
        let d = self.dim();
        for r in (0..d).rev() {
            let mut acc = z[r];
            for k in r + 1..d {
                acc -= l[(k, r)] * y[k];
            }
            y[r] = acc / l[(r, r)];
        }
        Ok(())
    }

    /// Draws `theta ~ N(b, sigma^2 V^{-1})` into `out`.
    pub fn sample_posterior_into<R: Rng + ?Sized>(
        &self,
        sigma: f64,
        rng: &mut R,
        out: &mut [f64],
    ) -> Result<(), EstimationError> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(EstimationError::InvalidScale(sigma));
        }
        let d = self.dim();
        if d == 0 {
            return Ok(());
        }
        let mut z = [0.0f64; 64];
        for zi in z.iter_mut().take(d) {
            *zi = StandardNormal.sample(rng);
        }
        self.whiten_into(&z[..d], out)?;
        for (o, b) in out.iter_mut().zip(self.estimate.iter()) {
            *o = b + sigma * *o;
        }
        Ok(())
    }
}

/// Draws `theta ~ N(b, sigma^2 V^{-1})`.
pub fn sample_posterior<R: Rng + ?Sized>(
    est: &NodeEstimator,
    sigma: f64,
    rng: &mut R,
) -> Result<Vec<f64>, EstimationError> {
    let mut out = vec![0.0; est.dim()];
    est.sample_posterior_into(sigma, rng, &mut out)?;
    Ok(out)
}

/// Radius `beta` of the per-column confidence ellipsoids, intersected with
/// the ball of radius `norm_cap`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceSpec {
    pub beta: f64,
    pub norm_cap: f64,
}

impl ConfidenceSpec {
    /// The regret analysis needs `beta >= 1`; smaller radii are accepted for
    /// degenerate and diagnostic runs.
    pub fn new(beta: f64) -> Result<Self, EstimationError> {
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(EstimationError::InvalidRadius(beta));
        }
        Ok(Self { beta, norm_cap: 1.0 })
    }
}

/// `beta_T = 1 + sqrt(2 log(2NT) + d log(1 + m^2 T / d))`.
pub fn confidence_radius(nodes: usize, horizon: usize, max_degree: usize, obs_bound: f64) -> f64 {
    let n = nodes as f64;
    let t = horizon as f64;
    let d = max_degree as f64;
    let capacity = if max_degree == 0 { 0.0 } else { d * (1.0 + obs_bound * obs_bound * t / d).ln() };
    1.0 + (2.0 * (2.0 * n * t).ln() + capacity).sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `v` scaled into the ball of radius `cap`.
pub fn project_to_ball(v: &[f64], cap: f64) -> Vec<f64> {
    let n = norm(v);
    if n <= cap {
        v.to_vec()
    } else {
        v.iter().map(|x| x * cap / n).collect()
    }
}

/// Point on the segment `[inner, outer]` with norm exactly `cap`, given
/// `||inner|| <= cap < ||outer||`.
fn segment_to_sphere(inner: &[f64], outer: &[f64], cap: f64) -> Vec<f64> {
    let delta: Vec<f64> = outer.iter().zip(inner).map(|(q, p)| q - p).collect();
    let a = dot(&delta, &delta);
    let b = dot(inner, &delta);
    let c = dot(inner, inner) - cap * cap;
    let s = ((-b + (b * b - a * c).max(0.0).sqrt()) / a).clamp(0.0, 1.0);
    inner.iter().zip(&delta).map(|(p, dl)| p + s * dl).collect()
}

/// Pulls `candidate` back toward the projected center until it lies in the
/// ball, leaving it untouched when it already does.
fn clip_toward_center(est: &NodeEstimator, candidate: Vec<f64>, cap: f64) -> Vec<f64> {
    if norm(&candidate) <= cap {
        candidate
    } else {
        let center = project_to_ball(est.estimate(), cap);
        segment_to_sphere(&center, &candidate, cap)
    }
}

/// Maximizes `<w, theta>` over the confidence ellipsoid around the estimate
/// using the closed form `theta* = b + beta V^{-1} w / ||w||_{V^{-1}}`. When
/// `theta*` leaves the unit ball the returned point is where the segment from
/// the projected center to `theta*` crosses the sphere.
pub fn ellipsoid_linear_max(
    est: &NodeEstimator,
    direction: &[f64],
    spec: &ConfidenceSpec,
) -> Result<(f64, Vec<f64>), EstimationError> {
    let d = est.dim();
    if direction.len() != d {
        return Err(EstimationError::DimensionMismatch { expected: d, got: direction.len() });
    }
    if direction.iter().all(|&x| x == 0.0) {
        return Err(EstimationError::ZeroDirection);
    }
    let w = DVector::from_column_slice(direction);
    let u = est.gram_inv() * &w;
    let scale = w.dot(&u).sqrt();
    let unconstrained: Vec<f64> = est
        .estimate()
        .iter()
        .zip(u.iter())
        .map(|(b, ui)| b + spec.beta * ui / scale)
        .collect();
    let point = clip_toward_center(est, unconstrained, spec.norm_cap);
    Ok((dot(direction, &point), point))
}

/// Uniform draw from the confidence ellipsoid, clipped into the ball the same
/// way as [`ellipsoid_linear_max`].
pub fn sample_feasible<R: Rng + ?Sized>(
    est: &NodeEstimator,
    spec: &ConfidenceSpec,
    rng: &mut R,
) -> Result<Vec<f64>, EstimationError> {
    let d = est.dim();
    if d == 0 {
        return Ok(Vec::new());
    }
    let mut z: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
    let zn = norm(&z);
    let radius = rng.random::<f64>().powf(1.0 / d as f64);
    if zn > 0.0 {
        z.iter_mut().for_each(|x| *x *= radius / zn);
    }
    let mut y = vec![0.0; d];
    est.whiten_into(&z, &mut y)?;
    let candidate: Vec<f64> = est.estimate().iter().zip(&y).map(|(b, yi)| b + spec.beta * yi).collect();
    Ok(clip_toward_center(est, candidate, spec.norm_cap))
}

/// Membership in `{theta : ||theta|| <= cap, ||theta - b||_V <= beta}` with a
/// small relative tolerance.
pub fn in_confidence_set(est: &NodeEstimator, theta: &[f64], spec: &ConfidenceSpec) -> bool {
    let diff: Vec<f64> = theta.iter().zip(est.estimate()).map(|(t, b)| t - b).collect();
    norm(theta) <= spec.norm_cap * (1.0 + 1e-12) && est.gram_norm(&diff) <= spec.beta * (1.0 + 1e-12) + 1e-12
}

/// The `2N` estimators: one observational and one interventional per node.
#[derive(Debug, Clone)]
pub struct EstimatorBank {
    obs: Vec<NodeEstimator>,
    int: Vec<NodeEstimator>,
    rounds: u64,
}

impl EstimatorBank {
    pub fn new(dag: &DagStructure) -> Self {
        let n = dag.node_count();
        Self {
            obs: (0..n).map(|i| NodeEstimator::new(dag.parents(i))).collect(),
            int: (0..n).map(|i| NodeEstimator::new(dag.parents(i))).collect(),
            rounds: 0,
        }
    }

    pub fn node_count(&self) -> usize {
        self.obs.len()
    }

    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    pub fn observational(&self, i: usize) -> &NodeEstimator {
        &self.obs[i]
    }

    pub fn interventional(&self, i: usize) -> &NodeEstimator {
        &self.int[i]
    }

    /// Estimator that governs node `i` under `action`.
    #[inline]
    pub fn for_action(&self, i: usize, action: InterventionAction) -> &NodeEstimator {
        if action.contains(i) {
            &self.int[i]
        } else {
            &self.obs[i]
        }
    }

    /// Replaces one estimator, e.g. to seed known parameter values.
    pub fn set_estimator(&mut self, i: usize, interventional: bool, est: NodeEstimator) {
        if interventional {
            self.int[i] = est;
        } else {
            self.obs[i] = est;
        }
    }

    /// Routes each node's sample to its interventional estimator if the node
    /// was intervened, to its observational one otherwise.
    pub fn observe(&mut self, action: InterventionAction, x: &[f64], nu: &[f64]) -> Result<(), EstimationError> {
        let n = self.node_count();
        if x.len() != n || nu.len() != n {
            return Err(EstimationError::DimensionMismatch { expected: n, got: x.len().min(nu.len()) });
        }
        let mut buf = [0.0f64; 64];
        for i in 0..n {
            let est = if action.contains(i) { &mut self.int[i] } else { &mut self.obs[i] };
            let d = est.dim();
            for (slot, &p) in buf.iter_mut().zip(est.parents()) {
                *slot = x[p];
            }
            est.update(&buf[..d], x[i] - nu[i])?;
        }
        self.rounds += 1;
        Ok(())
    }

    const MAGIC: &'static [u8; 4] = b"LSEB";
    const VERSION: u32 = 1;

    /// Binary checkpoint: magic, version, node count, rounds, then for every
    /// node its observational and interventional (dim, count, Gram row-major,
    /// response) blocks, all little-endian.
    pub fn to_checkpoint(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(Self::MAGIC);
        out.extend_from_slice(&Self::VERSION.to_le_bytes());
        out.extend_from_slice(&(self.node_count() as u32).to_le_bytes());
        out.extend_from_slice(&self.rounds.to_le_bytes());
        for i in 0..self.node_count() {
            for est in [&self.obs[i], &self.int[i]] {
                let d = est.dim();
                out.extend_from_slice(&(d as u32).to_le_bytes());
                out.extend_from_slice(&est.count.to_le_bytes());
                for r in 0..d {
                    for c in 0..d {
                        out.extend_from_slice(&est.gram[(r, c)].to_le_bytes());
                    }
                }
                for v in est.resp.iter() {
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
        }
        out
    }

    pub fn from_checkpoint(dag: &DagStructure, bytes: &[u8]) -> Result<Self, EstimationError> {
        let mut reader = Reader { bytes, pos: 0 };
        if reader.take(4)? != Self::MAGIC {
            return Err(EstimationError::Checkpoint("bad magic".into()));
        }
        let version = reader.u32()?;
        if version != Self::VERSION {
            return Err(EstimationError::Checkpoint(format!("unsupported version {version}")));
        }
        let n = reader.u32()? as usize;
        if n != dag.node_count() {
            return Err(EstimationError::Checkpoint(format!("checkpoint has {n} nodes, graph has {}", dag.node_count())));
        }
        let mut bank = Self::new(dag);
        bank.rounds = reader.u64()?;
        for i in 0..n {
            for slot in 0..2 {
                let est = if slot == 0 { &mut bank.obs[i] } else { &mut bank.int[i] };
                let d = reader.u32()? as usize;
                if d != est.dim() {
                    return Err(EstimationError::Checkpoint(format!("node {i}: dimension {d} does not match graph")));
                }
                let count = reader.u64()?;
                let mut gram = DMatrix::zeros(d, d);
                for r in 0..d {
                    for c in 0..d {
                        gram[(r, c)] = reader.f64()?;
                    }
                }
                let mut resp = DVector::zeros(d);
                for r in 0..d {
                    resp[r] = reader.f64()?;
                }
                *est = NodeEstimator::from_parts(dag.parents(i), gram, resp, count)?;
            }
            if bank.obs[i].count + bank.int[i].count != bank.rounds {
                return Err(EstimationError::Checkpoint(format!("node {i}: counts do not sum to rounds")));
            }
        }
        if reader.pos != bytes.len() {
            return Err(EstimationError::Checkpoint("trailing bytes".into()));
        }
        Ok(bank)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, k: usize) -> Result<&'a [u8], EstimationError> {
        let end = self.pos + k;
        if end > self.bytes.len() {
            return Err(EstimationError::Checkpoint("truncated".into()));
        }
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }
    fn u32(&mut self) -> Result<u32, EstimationError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64, EstimationError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64, EstimationError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{sample_observation, NoiseModel, SemParameters};
    use crate::rng::{stream, Purpose};
    use crate::sem::{validate_dag, WeightMatrix};

    #[test]
    fn first_update_is_one_dimensional_ridge() {
        let mut est = NodeEstimator::new(&[0, 1]);
        est.update(&[1.0, 0.0], 1.0).unwrap();
        assert_eq!(est.gram()[(0, 0)], 2.0);
        assert!((est.estimate()[0] - 0.5).abs() < 1e-15);
        assert_eq!(est.estimate()[1], 0.0);
        assert_eq!(est.count(), 1);
    }

    #[test]
    fn zero_regressor_leaves_estimate() {
        let mut est = NodeEstimator::new(&[0]);
        est.update(&[2.0], 1.0).unwrap();
        let before = est.estimate().to_vec();
        est.update(&[0.0], 5.0).unwrap();
        assert_eq!(est.estimate(), &before[..]);
        assert_eq!(est.count(), 2);
    }

    #[test]
    fn dimension_checked() {
        let mut est = NodeEstimator::new(&[0]);
        assert_eq!(
            est.update(&[1.0, 2.0], 0.0),
            Err(EstimationError::DimensionMismatch { expected: 1, got: 2 })
        );
    }

    #[test]
    fn radius_values() {
        let beta = confidence_radius(7, 5000, 3, 10.0);
        let independent = 1.0 + (2.0 * 70000f64.ln() + 3.0 * (1.0 + 100.0 * 5000.0 / 3.0f64).ln()).sqrt();
        assert!((beta - independent).abs() < 1e-12);
        assert!((beta - 8.64).abs() < 0.01);
        let limit = confidence_radius(1, 1, 1, 1e-9);
        assert!((limit - (1.0 + (2.0 * 2f64.ln()).sqrt())).abs() < 1e-9);
        assert!(confidence_radius(7, 6000, 3, 10.0) > beta);
    }

    #[test]
    fn identity_gram_linear_max() {
        let est = NodeEstimator::new(&[0, 1]);
        let spec = ConfidenceSpec::new(1.0).unwrap();
        let (value, point) = ellipsoid_linear_max(&est, &[3.0, 4.0], &spec).unwrap();
        assert!((value - 5.0).abs() < 1e-12);
        assert!((point[0] - 0.6).abs() < 1e-12 && (point[1] - 0.8).abs() < 1e-12);
        assert_eq!(ellipsoid_linear_max(&est, &[0.0, 0.0], &spec), Err(EstimationError::ZeroDirection));
    }

    #[test]
    fn degenerate_radius_returns_center() {
        let mut est = NodeEstimator::new(&[0, 1]);
        est.update(&[1.0, 0.5], 0.3).unwrap();
        est.update(&[-0.2, 1.0], -0.4).unwrap();
        let spec = ConfidenceSpec::new(0.0).unwrap();
        let w = [0.7, -1.1];
        let (value, point) = ellipsoid_linear_max(&est, &w, &spec).unwrap();
        let center = project_to_ball(est.estimate(), 1.0);
        assert_eq!(point, center);
        assert!((value - dot(&w, &center)).abs() < 1e-15);
    }

    #[test]
    fn clipped_point_lies_on_unit_sphere() {
        let est = NodeEstimator::new(&[0, 1, 2]);
        let spec = ConfidenceSpec::new(3.0).unwrap();
        let (_, point) = ellipsoid_linear_max(&est, &[1.0, -2.0, 0.5], &spec).unwrap();
        assert!((norm(&point) - 1.0).abs() < 1e-12);
        assert!(in_confidence_set(&est, &point, &spec));
    }

    #[test]
    fn padded_form_agrees_with_compact() {
        // node with parents {1, 3} among 5 nodes
        let parents = [1usize, 3];
        let mut est = NodeEstimator::new(&parents);
        let samples = [([0.3, 1.2, -0.4, 0.9, 2.0], 0.7), ([1.1, -0.5, 0.2, 0.4, -1.0], -0.2), ([0.0, 2.0, 1.0, -1.5, 0.3], 1.4)];
        let n = 5;
        let mut v = DMatrix::<f64>::identity(n, n);
        let mut g = DVector::<f64>::zeros(n);
        for (x, target) in samples {
            // padded regressor keeps only the parent coordinates
            let mut xp = DVector::<f64>::zeros(n);
            for &p in &parents {
                xp[p] = x[p];
            }
            v += &xp * xp.transpose();
            g += &xp * target;
            let compact: Vec<f64> = parents.iter().map(|&p| x[p]).collect();
            est.update(&compact, target).unwrap();
        }
        let padded = v.try_inverse().unwrap() * g;
        for j in 0..n {
            let expected = parents.iter().position(|&p| p == j).map_or(0.0, |k| est.estimate()[k]);
            assert!((padded[j] - expected).abs() < 1e-12, "coordinate {j}");
        }
    }

    #[test]
    fn converges_on_chain() {
        let dag = validate_dag(&[vec![], vec![0]], 1).unwrap();
        let obs = WeightMatrix::from_edges(&dag, &[(0, 1, 0.5)]).unwrap();
        let int = WeightMatrix::from_edges(&dag, &[(0, 1, -0.5)]).unwrap();
        let params = SemParameters::new(dag.clone(), obs, int, NoiseModel::gaussian(vec![1.0, 1.0])).unwrap();
        let arms = [InterventionAction::EMPTY, InterventionAction::from_nodes([1])];
        let mut bank = EstimatorBank::new(&dag);
        let mut rng = stream(1, 0, 0, Purpose::Environment);
        for t in 0..10_000 {
            let a = arms[t % 2];
            let x = sample_observation(&params, a, &mut rng);
            bank.observe(a, &x, params.noise().mean()).unwrap();
        }
        assert!((bank.observational(1).estimate()[0] - 0.5).abs() <= 0.05);
        assert!((bank.interventional(1).estimate()[0] + 0.5).abs() <= 0.05);
        for est in [bank.observational(1), bank.interventional(1)] {
            let batch = est.batch_solve().unwrap();
            assert!((batch[0] - est.estimate()[0]).abs() < 1e-8);
        }
        assert_eq!(bank.observational(1).count() + bank.interventional(1).count(), 10_000);
        assert_eq!(bank.observational(0).count() + bank.interventional(0).count(), bank.rounds());
    }

    #[test]
    fn posterior_with_zero_scale_is_the_estimate() {
        let mut est = NodeEstimator::new(&[0, 1]);
        est.update(&[1.0, 2.0], 0.5).unwrap();
        let mut rng = stream(2, 0, 0, Purpose::Policy);
        assert_eq!(sample_posterior(&est, 0.0, &mut rng).unwrap(), est.estimate());
        assert!(sample_posterior(&est, -1.0, &mut rng).is_err());
    }

    #[test]
    fn checkpoint_round_trip() {
        let dag = validate_dag(&[vec![], vec![0], vec![0, 1]], 2).unwrap();
        let mut bank = EstimatorBank::new(&dag);
        let mut rng = stream(9, 0, 0, Purpose::Environment);
        for t in 0..40u64 {
            let x: Vec<f64> = (0..3).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let a = InterventionAction::from_bits((t % 4) << 1);
            bank.observe(a, &x, &[0.1, 0.2, 0.3]).unwrap();
        }
        let bytes = bank.to_checkpoint();
        let back = EstimatorBank::from_checkpoint(&dag, &bytes).unwrap();
        assert_eq!(back.rounds(), 40);
        for i in 0..3 {
            for (a, b) in [(bank.observational(i), back.observational(i)), (bank.interventional(i), back.interventional(i))] {
                assert_eq!(a.count(), b.count());
                assert_eq!(a.gram(), b.gram());
                for (x, y) in a.estimate().iter().zip(b.estimate()) {
                    assert!((x - y).abs() < 1e-10);
                }
            }
        }
        assert!(EstimatorBank::from_checkpoint(&dag, &bytes[..bytes.len() - 1]).is_err());
        let other = validate_dag(&[vec![], vec![0]], 1).unwrap();
        assert!(EstimatorBank::from_checkpoint(&other, &bytes).is_err());
    }
}
