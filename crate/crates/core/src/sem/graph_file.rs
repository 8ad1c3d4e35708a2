//! Text graph format:
//!
//! ```text
//! # comment
//! N 3 reward 3
//! 1 2 0.5 -0.5
//! 2 3 0.4 -0.4
//! ```
//!
//! The header gives the node count and the 1-based reward node; each further
//! line is an edge `j i w_obs w_int` with `j` a parent of `i` (1-based).

use std::fmt::Write as _;

use super::{validate_dag, DagStructure, SemError, WeightMatrix};

/// Parsed graph file, relabeled into internal (topological) indices.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphFile {
    pub dag: DagStructure,
    pub obs_weights: WeightMatrix,
    pub int_weights: WeightMatrix,
}

fn parse_err(line: usize, message: impl Into<String>) -> SemError {
    SemError::Parse { line, message: message.into() }
}

pub fn parse_graph_file(text: &str) -> Result<GraphFile, SemError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines.next().ok_or_else(|| parse_err(0, "missing header line"))?;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    let (n, reward) = match tokens.as_slice() {
        ["N", count, "reward", idx] => {
            let n: usize = count.parse().map_err(|_| parse_err(hline, "bad node count"))?;
            let r: usize = idx.parse().map_err(|_| parse_err(hline, "bad reward index"))?;
            (n, r)
        }
        _ => return Err(parse_err(hline, "expected `N <count> reward <idx>`")),
    };
    if n == 0 || reward == 0 || reward > n {
        return Err(parse_err(hline, "reward index out of range"));
    }

    let mut parents = vec![Vec::new(); n];
    let mut edges = Vec::new();
    for (line, body) in lines {
        let fields: Vec<&str> = body.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(parse_err(line, "expected `j i w_obs w_int`"));
        }
        let j: usize = fields[0].parse().map_err(|_| parse_err(line, "bad parent index"))?;
        let i: usize = fields[1].parse().map_err(|_| parse_err(line, "bad child index"))?;
        let w_obs: f64 = fields[2].parse().map_err(|_| parse_err(line, "bad observational weight"))?;
        let w_int: f64 = fields[3].parse().map_err(|_| parse_err(line, "bad interventional weight"))?;
        if j == 0 || i == 0 || j > n || i > n {
            return Err(SemError::BadIndex { node: i.saturating_sub(1), parent: j.saturating_sub(1), nodes: n });
        }
        parents[i - 1].push(j - 1);
        edges.push((j - 1, i - 1, w_obs, w_int));
    }

    let dag = validate_dag(&parents, reward - 1)?;
    let pos = |label: usize| dag.internal_index(label).expect("label present after validation");
    let obs: Vec<_> = edges.iter().map(|&(j, i, w, _)| (pos(j), pos(i), w)).collect();
    let int: Vec<_> = edges.iter().map(|&(j, i, _, w)| (pos(j), pos(i), w)).collect();
    let obs_weights = WeightMatrix::from_edges(&dag, &obs)?;
    let int_weights = WeightMatrix::from_edges(&dag, &int)?;
    Ok(GraphFile { dag, obs_weights, int_weights })
}

/// Serializes in original labels; edges are listed by child then parent.
pub fn write_graph_file(dag: &DagStructure, obs: &WeightMatrix, int: &WeightMatrix) -> String {
    let n = dag.node_count();
    let mut out = String::new();
    let _ = writeln!(out, "N {} reward {}", n, dag.label(dag.reward_node()) + 1);
    let mut edges: Vec<(usize, usize, f64, f64)> = (0..n)
        .flat_map(|i| {
            dag.parents(i)
                .iter()
                .map(move |&j| (dag.label(j), dag.label(i), obs.get(j, i), int.get(j, i)))
        })
        .collect();
    edges.sort_by_key(|&(j, i, _, _)| (i, j));
    for (j, i, wo, wi) in edges {
        let _ = writeln!(out, "{} {} {} {}", j + 1, i + 1, wo, wi);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_chain_with_comments() {
        let text = "# chain\nN 2 reward 2\n\n1 2 0.5 -0.5\n";
        let g = parse_graph_file(text).unwrap();
        assert_eq!(g.dag.node_count(), 2);
        assert_eq!(g.obs_weights.get(0, 1), 0.5);
        assert_eq!(g.int_weights.get(0, 1), -0.5);
    }

    #[test]
    fn relabeled_round_trip() {
        // reward is node 1; 3 -> 2 -> 1
        let text = "N 3 reward 1\n3 2 0.25 -0.25\n2 1 0.75 -0.75\n";
        let g = parse_graph_file(text).unwrap();
        assert_eq!(g.dag.topo_order(), &[2, 1, 0]);
        let written = write_graph_file(&g.dag, &g.obs_weights, &g.int_weights);
        assert_eq!(written, "N 3 reward 1\n2 1 0.75 -0.75\n3 2 0.25 -0.25\n");
        assert_eq!(parse_graph_file(&written).unwrap(), g);
    }

    #[test]
    fn rejects_malformed() {
        assert!(matches!(parse_graph_file("N 2\n"), Err(SemError::Parse { line: 1, .. })));
        assert!(matches!(parse_graph_file("N 2 reward 2\n1 2 x 0\n"), Err(SemError::Parse { line: 2, .. })));
        assert!(matches!(parse_graph_file("N 2 reward 2\n1 3 1 0\n"), Err(SemError::BadIndex { .. })));
        assert_eq!(parse_graph_file("N 2 reward 2\n1 2 1 0\n2 1 1 0\n"), Err(SemError::CycleDetected));
    }
}
