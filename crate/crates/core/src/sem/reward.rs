//! Reward machinery: the expected reward of an intervention is the inner
//! product of the noise means with the path-sum coefficients
//! `f(B_a) = sum_{l=0}^{L} [B_a^l]_N`.

use super::{DagStructure, GraphStats, InterventionAction, SemError, WeightMatrix};
use crate::environment::SemParameters;

/// Largest graph accepted by [`path_enumeration_coefficients`].
pub const PATH_ENUMERATION_LIMIT: usize = 12;

/// Post-intervention weights: column `i` comes from the interventional
/// matrix when `i` is in `action`, from the observational one otherwise.
pub fn assemble_intervention_matrix(
    params: &SemParameters,
    action: InterventionAction,
) -> Result<WeightMatrix, SemError> {
    let dag = &params.dag;
    for m in [&params.obs_weights, &params.int_weights] {
        if let Some((row, col)) = m.support_violation(dag) {
            return Err(SemError::SupportMismatch { row, col });
        }
    }
    let n = dag.node_count();
    let mut out = WeightMatrix::zeros(n);
    for i in 0..n {
        let src = if action.contains(i) { &params.int_weights } else { &params.obs_weights };
        for &j in dag.parents(i) {
            out.set(j, i, src.get(j, i));
        }
    }
    Ok(out)
}

/// `f(B) = sum_{l=0}^{L} B^l e_N` via `v_0 = e_N`, `v_l = B v_{l-1}`.
///
/// The reward node is the last index. Exact because `B` is nilpotent with
/// index at most `L + 1`.
pub fn reward_coefficients(matrix: &WeightMatrix, stats: &GraphStats) -> Vec<f64> {
    let n = matrix.size();
    let mut v = vec![0.0; n];
    v[n - 1] = 1.0;
    let mut f = v.clone();
    for _ in 0..stats.longest_path {
        v = matrix.mul_vec(&v);
        for (acc, x) in f.iter_mut().zip(&v) {
            *acc += x;
        }
    }
    f
}

/// Coefficients by explicit enumeration of every directed path ending at the
/// reward node, summing the products of edge weights along each path.
pub fn path_enumeration_coefficients(matrix: &WeightMatrix) -> Result<Vec<f64>, SemError> {
    let n = matrix.size();
    if n > PATH_ENUMERATION_LIMIT {
        return Err(SemError::TooLarge { nodes: n, limit: PATH_ENUMERATION_LIMIT });
    }
    fn walk(matrix: &WeightMatrix, node: usize, product: f64, total: &mut f64) {
        let n = matrix.size();
        if node == n - 1 {
            *total += product;
            return;
        }
        for next in 0..n {
            let w = matrix.get(node, next);
            if w != 0.0 {
                walk(matrix, next, product * w, total);
            }
        }
    }
    let mut g = vec![0.0; n];
    g[n - 1] = 1.0;
    for (i, gi) in g.iter_mut().enumerate().take(n - 1) {
        walk(matrix, i, 1.0, gi);
    }
    Ok(g)
}

/// `mu_a = <f(B_a), nu>`.
pub fn expected_reward(params: &SemParameters, action: InterventionAction) -> f64 {
    let matrix = assemble_intervention_matrix(params, action)
        .expect("SemParameters constructor validates the weight support");
    let f = reward_coefficients(&matrix, &params.stats);
    f.iter().zip(params.noise.mean()).map(|(a, b)| a * b).sum()
}

// Compact-column routines used on the hot paths. `column(i)` yields node i's
// weights over its parents, in parent order.

/// Noiseless forward pass with `epsilon = nu`: fills `means` with the node
/// means and returns the reward-node mean, which equals `<f(Theta), nu>`.
#[inline]
pub fn propagate_means<'a, F>(dag: &DagStructure, column: F, nu: &[f64], means: &mut [f64]) -> f64
where
    F: Fn(usize) -> &'a [f64],
{
    let n = dag.node_count();
    for i in 0..n {
        let col = column(i);
        let mut acc = nu[i];
        for (&p, &w) in dag.parents(i).iter().zip(col) {
            acc += w * means[p];
        }
        means[i] = acc;
    }
    means[n - 1]
}

/// Path sums `f(Theta)` by a backward sweep from the reward node.
pub fn path_sums<'a, F>(dag: &DagStructure, column: F, out: &mut [f64])
where
    F: Fn(usize) -> &'a [f64],
{
    let n = dag.node_count();
    out.iter_mut().for_each(|x| *x = 0.0);
    out[n - 1] = 1.0;
    for i in (0..n).rev() {
        let gi = out[i];
        if gi == 0.0 {
            continue;
        }
        for (&p, &w) in dag.parents(i).iter().zip(column(i)) {
            out[p] += w * gi;
        }
    }
}

/// Linear coefficient of column `i` in `<f(Theta), nu>`: entry `k` is
/// `G_i * m_{Pa(i)[k]}`, with `G = f(Theta)` and `m` the node means.
pub fn column_coefficients(dag: &DagStructure, node: usize, path_sums: &[f64], means: &[f64]) -> Vec<f64> {
    dag.parents(node).iter().map(|&p| path_sums[node] * means[p]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sem::{graph_stats, validate_dag};

    fn chain() -> (DagStructure, WeightMatrix) {
        let dag = validate_dag(&[vec![], vec![0]], 1).unwrap();
        let m = WeightMatrix::from_edges(&dag, &[(0, 1, 0.5)]).unwrap();
        (dag, m)
    }

    #[test]
    fn zero_matrix_gives_unit_vector() {
        let dag = validate_dag(&[vec![], vec![0], vec![1]], 2).unwrap();
        let z = WeightMatrix::zeros(3);
        assert_eq!(reward_coefficients(&z, &graph_stats(&dag)), vec![0.0, 0.0, 1.0]);
        assert_eq!(path_enumeration_coefficients(&z).unwrap(), vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn chain_coefficients() {
        let (dag, m) = chain();
        assert_eq!(reward_coefficients(&m, &graph_stats(&dag)), vec![0.5, 1.0]);
        assert_eq!(path_enumeration_coefficients(&m).unwrap(), vec![0.5, 1.0]);
    }

    #[test]
    fn triangle_coefficients() {
        // paths 1->3 (0.2) and 1->2->3 (0.5 * 0.4)
        let dag = validate_dag(&[vec![], vec![0], vec![0, 1]], 2).unwrap();
        let m = WeightMatrix::from_edges(&dag, &[(0, 1, 0.5), (1, 2, 0.4), (0, 2, 0.2)]).unwrap();
        let f = reward_coefficients(&m, &graph_stats(&dag));
        let g = path_enumeration_coefficients(&m).unwrap();
        for (a, b) in f.iter().zip([0.4, 0.4, 1.0]) {
            assert!((a - b).abs() < 1e-15);
        }
        for (a, b) in f.iter().zip(&g) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn enumeration_guard() {
        assert!(matches!(
            path_enumeration_coefficients(&WeightMatrix::zeros(13)),
            Err(SemError::TooLarge { nodes: 13, .. })
        ));
    }

    #[test]
    fn compact_routines_match_dense() {
        let dag = validate_dag(&[vec![], vec![0], vec![0, 1]], 2).unwrap();
        let m = WeightMatrix::from_edges(&dag, &[(0, 1, 0.5), (1, 2, 0.4), (0, 2, 0.2)]).unwrap();
        let cols = m.compact_columns(&dag);
        let nu = [1.0, 2.0, -0.5];
        let mut means = [0.0; 3];
        let mean = propagate_means(&dag, |i| &cols[i][..], &nu, &mut means);
        let f = reward_coefficients(&m, &graph_stats(&dag));
        let dot: f64 = f.iter().zip(nu).map(|(a, b)| a * b).sum();
        assert!((mean - dot).abs() < 1e-14);
        let mut g = [0.0; 3];
        path_sums(&dag, |i| &cols[i][..], &mut g);
        for (a, b) in g.iter().zip(&f) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}
