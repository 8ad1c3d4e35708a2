use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::SemError;

/// Maximum node count supported by the fixed-width action bit set.
pub const MAX_NODES: usize = 64;

/// A validated DAG with nodes relabeled into topological order.
///
/// Internal node `k` is the `k`-th node of the topological order, so every
/// parent index is strictly smaller than its child and the reward node is
/// always the last node. `labels[k]` gives the original (0-based) label used
/// for I/O.
#[derive(Debug, Clone, PartialEq)]
pub struct DagStructure {
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    labels: Vec<usize>,
}

/// Maximum in-degree `d` and longest directed path length `L` (edges counted).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphStats {
    pub max_degree: usize,
    pub longest_path: usize,
}

impl DagStructure {
    pub fn node_count(&self) -> usize {
        self.parents.len()
    }

    /// Internal index of the reward node (always the last node).
    pub fn reward_node(&self) -> usize {
        self.parents.len() - 1
    }

    /// Parents of internal node `i`, ascending.
    pub fn parents(&self, i: usize) -> &[usize] {
        &self.parents[i]
    }

    pub fn children(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    /// Original label of internal node `i`.
    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    /// Internal index of the node with original label `label`.
    pub fn internal_index(&self, label: usize) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    /// Topological order expressed in original labels.
    pub fn topo_order(&self) -> &[usize] {
        &self.labels
    }

    pub fn edge_count(&self) -> usize {
        self.parents.iter().map(Vec::len).sum()
    }

    pub fn is_root(&self, i: usize) -> bool {
        self.parents[i].is_empty()
    }

    /// `true` for the reward node and every node with a directed path to it.
    pub fn reward_ancestors(&self) -> Vec<bool> {
        let n = self.node_count();
        let mut reaches = vec![false; n];
        reaches[n - 1] = true;
        for i in (0..n).rev() {
            if reaches[i] {
                for &p in &self.parents[i] {
                    reaches[p] = true;
                }
            }
        }
        reaches
    }

    /// Builds a structure whose parent lists are already in topological
    /// labeling (every parent index below its child, reward last).
    pub(crate) fn from_topological(parents: Vec<Vec<usize>>) -> Result<Self, SemError> {
        let n = parents.len();
        validate_dag(&parents, n.saturating_sub(1))
    }
}

/// Validates raw parent lists (0-based original labels) and relabels the
/// nodes into topological order with the reward node last.
pub fn validate_dag(raw_parents: &[Vec<usize>], reward_node: usize) -> Result<DagStructure, SemError> {
    let n = raw_parents.len();
    if n == 0 {
        return Err(SemError::EmptyGraph);
    }
    if n > MAX_NODES {
        return Err(SemError::TooLarge { nodes: n, limit: MAX_NODES });
    }
    if reward_node >= n {
        return Err(SemError::BadIndex { node: reward_node, parent: reward_node, nodes: n });
    }
    for (i, ps) in raw_parents.iter().enumerate() {
        let mut seen = vec![false; n];
        for &p in ps {
            if p >= n {
                return Err(SemError::BadIndex { node: i, parent: p, nodes: n });
            }
            if p == i {
                return Err(SemError::CycleDetected);
            }
            if seen[p] {
                return Err(SemError::DuplicateParent { node: i, parent: p });
            }
            seen[p] = true;
        }
    }

    let mut children = vec![Vec::new(); n];
    let mut indegree = vec![0usize; n];
    for (i, ps) in raw_parents.iter().enumerate() {
        indegree[i] = ps.len();
        for &p in ps {
            children[p].push(i);
        }
    }

    // Kahn's algorithm, smallest original label first.
    let mut ready: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&i| indegree[i] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(v)) = ready.pop() {
        order.push(v);
        for &c in &children[v] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.push(Reverse(c));
            }
        }
    }
    if order.len() != n {
        return Err(SemError::CycleDetected);
    }
    if let Some(&child) = children[reward_node].first() {
        return Err(SemError::RewardHasChild { reward: reward_node, child });
    }
    // The reward node has no children, so moving it last keeps the order valid.
    order.retain(|&v| v != reward_node);
    order.push(reward_node);

    let mut position = vec![0usize; n];
    for (k, &v) in order.iter().enumerate() {
        position[v] = k;
    }
    let mut parents = vec![Vec::new(); n];
    let mut kids = vec![Vec::new(); n];
    for (k, &v) in order.iter().enumerate() {
        let mut ps: Vec<usize> = raw_parents[v].iter().map(|&p| position[p]).collect();
        ps.sort_unstable();
        for &p in &ps {
            kids[p].push(k);
        }
        parents[k] = ps;
    }
    for c in &mut kids {
        c.sort_unstable();
    }
    Ok(DagStructure { parents, children: kids, labels: order })
}

/// Exact `d` and `L` by dynamic programming over the topological order.
pub fn graph_stats(dag: &DagStructure) -> GraphStats {
    let n = dag.node_count();
    let mut depth = vec![0usize; n];
    let mut max_degree = 0;
    for i in 0..n {
        let ps = dag.parents(i);
        max_degree = max_degree.max(ps.len());
        depth[i] = ps.iter().map(|&p| depth[p] + 1).max().unwrap_or(0);
    }
    GraphStats { max_degree, longest_path: depth.into_iter().max().unwrap_or(0) }
}
