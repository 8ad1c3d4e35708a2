use rand::Rng;

use crate::sem::{DagStructure, InterventionAction};

use super::HarnessError;

/// A benchmark structure and the nodes that may be intervened on.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedGraph {
    pub dag: DagStructure,
    pub intervenable: InterventionAction,
}

/// `layers` layers of `d` nodes; each node of layer `l` is a parent of every
/// node of layer `l + 1`, and the last layer feeds the reward. Layers
/// `2..=layers` are intervenable.
pub fn gen_hierarchical(d: usize, layers: usize) -> Result<GeneratedGraph, HarnessError> {
    if d == 0 || layers == 0 {
        return Err(HarnessError::Config("hierarchical graphs need d >= 1 and layers >= 1".into()));
    }
    let n = d * layers + 1;
    let mut parents = vec![Vec::new(); n];
    for l in 1..layers {
        for k in 0..d {
            parents[l * d + k] = ((l - 1) * d..l * d).collect();
        }
    }
    parents[n - 1] = ((layers - 1) * d..layers * d).collect();
    let dag = DagStructure::from_topological(parents)?;
    Ok(GeneratedGraph { dag, intervenable: InterventionAction::from_nodes(d..n - 1) })
}

/// Nodes `1..N-1` all feed the reward `N`; node `i` in `2..N-1` also gets one
/// parent drawn uniformly from `1..i-1`. Nodes `2..N-1` are intervenable.
pub fn gen_enhanced_parallel<R: Rng + ?Sized>(nodes: usize, rng: &mut R) -> Result<GeneratedGraph, HarnessError> {
    if nodes < 3 {
        return Err(HarnessError::Config(format!("enhanced parallel graphs need at least 3 nodes, got {nodes}")));
    }
    let mut parents = vec![Vec::new(); nodes];
    for (i, p) in parents.iter_mut().enumerate().take(nodes - 1).skip(1) {
        p.push(rng.random_range(0..i));
    }
    parents[nodes - 1] = (0..nodes - 1).collect();
    let dag = DagStructure::from_topological(parents)?;
    Ok(GeneratedGraph { dag, intervenable: InterventionAction::from_nodes(1..nodes - 1) })
}

/// Every node that is neither a root nor the reward.
pub fn default_intervenable(dag: &DagStructure) -> InterventionAction {
    InterventionAction::from_nodes((0..dag.node_count()).filter(|&i| !dag.is_root(i) && i != dag.reward_node()))
}
