//! Pure functions over DAGs and weight matrices.

mod action;
mod dag;
mod graph_file;
mod matrix;
mod reward;

use thiserror::Error;

pub use action::{enumerate_actions, InterventionAction, ARM_SPACE_CAP_BITS};
pub use dag::{graph_stats, validate_dag, DagStructure, GraphStats, MAX_NODES};
pub use graph_file::{parse_graph_file, write_graph_file, GraphFile};
pub use matrix::WeightMatrix;
pub use reward::{
    assemble_intervention_matrix, column_coefficients, expected_reward, path_enumeration_coefficients,
    path_sums, propagate_means, reward_coefficients, PATH_ENUMERATION_LIMIT,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SemError {
    #[error("graph has a directed cycle")]
    CycleDetected,
    #[error("node {node}: parent index {parent} out of range for {nodes} nodes")]
    BadIndex { node: usize, parent: usize, nodes: usize },
    #[error("node {node} lists parent {parent} twice")]
    DuplicateParent { node: usize, parent: usize },
    #[error("reward node {reward} is a parent of node {child}")]
    RewardHasChild { reward: usize, child: usize },
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("weight ({row}, {col}) lies outside the graph support")]
    SupportMismatch { row: usize, col: usize },
    #[error("{nodes} nodes exceeds the limit of {limit}")]
    TooLarge { nodes: usize, limit: usize },
    #[error("{intervenable} intervenable nodes exceeds the arm-space cap of 2^{cap}")]
    ArmSpaceTooLarge { intervenable: usize, cap: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}
