use super::{DagStructure, SemError};

/// Dense `N x N` edge-weight matrix, row-major; entry `(j, i)` is the weight
/// of edge `j -> i` and may be nonzero only when `j` is a parent of `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl WeightMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, entries: vec![0.0; n * n] }
    }

    /// Builds a matrix from `(parent, child, weight)` triples, rejecting
    /// entries outside the DAG support.
    pub fn from_edges(dag: &DagStructure, edges: &[(usize, usize, f64)]) -> Result<Self, SemError> {
        let mut m = Self::zeros(dag.node_count());
        for &(j, i, w) in edges {
            if i >= m.n || j >= m.n || !dag.parents(i).contains(&j) {
                return Err(SemError::SupportMismatch { row: j, col: i });
            }
            m.entries[j * m.n + i] = w;
        }
        Ok(m)
    }

    /// Builds a matrix from compact columns (one weight per parent of each node).
    pub fn from_compact_columns(dag: &DagStructure, columns: &[Vec<f64>]) -> Self {
        let mut m = Self::zeros(dag.node_count());
        for (i, col) in columns.iter().enumerate() {
            m.set_compact_column(dag, i, col);
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.n + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.entries[row * self.n + col] = value;
    }

    /// Full column `i` as an `N`-vector.
    pub fn column(&self, i: usize) -> Vec<f64> {
        (0..self.n).map(|j| self.get(j, i)).collect()
    }

    /// Column `i` restricted to the parents of `i`, in parent order.
    pub fn compact_column(&self, dag: &DagStructure, i: usize) -> Vec<f64> {
        dag.parents(i).iter().map(|&j| self.get(j, i)).collect()
    }

    pub fn compact_columns(&self, dag: &DagStructure) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.compact_column(dag, i)).collect()
    }

    pub fn set_compact_column(&mut self, dag: &DagStructure, i: usize, values: &[f64]) {
        for j in 0..self.n {
            self.entries[j * self.n + i] = 0.0;
        }
        for (&j, &w) in dag.parents(i).iter().zip(values) {
            self.entries[j * self.n + i] = w;
        }
    }

    pub fn column_norm(&self, i: usize) -> f64 {
        (0..self.n).map(|j| self.get(j, i).powi(2)).sum::<f64>().sqrt()
    }

    /// First nonzero entry outside the DAG support, if any.
    pub fn support_violation(&self, dag: &DagStructure) -> Option<(usize, usize)> {
        for j in 0..self.n {
            for i in 0..self.n {
                if self.get(j, i) != 0.0 && !dag.parents(i).contains(&j) {
                    return Some((j, i));
                }
            }
        }
        None
    }

    /// Scales every column with Euclidean norm above one back onto the unit sphere.
    pub fn normalize_columns(&mut self) {
        for i in 0..self.n {
            let norm = self.column_norm(i);
            if norm > 1.0 {
                for j in 0..self.n {
                    self.entries[j * self.n + i] /= norm;
                }
            }
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.get(r, k);
                if a == 0.0 {
                    continue;
                }
                for c in 0..n {
                    out.entries[r * n + c] += a * other.get(k, c);
                }
            }
        }
        out
    }

    pub fn power(&self, exponent: usize) -> Self {
        let mut out = Self::zeros(self.n);
        for i in 0..self.n {
            out.set(i, i, 1.0);
        }
        for _ in 0..exponent {
            out = out.matmul(self);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&x| x == 0.0)
    }

    /// `self * v` for a column vector `v`.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|r| (0..self.n).map(|c| self.get(r, c) * v[c]).sum())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sem::validate_dag;

    #[test]
    fn support_is_enforced() {
        let dag = validate_dag(&[vec![], vec![0]], 1).unwrap();
        assert!(WeightMatrix::from_edges(&dag, &[(0, 1, 0.5)]).is_ok());
        assert_eq!(
            WeightMatrix::from_edges(&dag, &[(1, 0, 0.5)]),
            Err(SemError::SupportMismatch { row: 1, col: 0 })
        );
    }

    #[test]
    fn compact_round_trip() {
        let dag = validate_dag(&[vec![], vec![0], vec![0, 1]], 2).unwrap();
        let m = WeightMatrix::from_edges(&dag, &[(0, 1, 0.5), (0, 2, 0.2), (1, 2, 0.4)]).unwrap();
        let cols = m.compact_columns(&dag);
        assert_eq!(cols, vec![vec![], vec![0.5], vec![0.2, 0.4]]);
        assert_eq!(WeightMatrix::from_compact_columns(&dag, &cols), m);
    }

    #[test]
    fn normalization_caps_column_norms() {
        let dag = validate_dag(&[vec![], vec![], vec![0, 1]], 2).unwrap();
        let mut m = WeightMatrix::from_edges(&dag, &[(0, 2, 0.9), (1, 2, -0.9)]).unwrap();
        m.normalize_columns();
        assert!((m.column_norm(2) - 1.0).abs() < 1e-15);
        assert!(m.get(0, 2) > 0.0 && m.get(1, 2) < 0.0);
    }
}
