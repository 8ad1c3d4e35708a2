//! Experiment orchestration: configs, benchmark graph families, seeded
//! replications, regret tables and their CSV form.

mod config;
mod csv_io;
mod generators;
mod run;

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::analysis::AnalysisError;
use crate::environment::EnvironmentError;
use crate::estimation::EstimationError;
use crate::policies::PolicyError;
use crate::sem::SemError;

pub use config::{ExperimentConfig, GraphSpec, KnownModeKind, NoiseConfig, PolicyConfig, PolicyKind, RunConfig};
pub use csv_io::{export_csv, import_csv, sidecar_path, write_sidecar, CSV_HEADER};
pub use generators::{default_intervenable, gen_enhanced_parallel, gen_hierarchical, GeneratedGraph};
pub use run::{
    build_instance, build_policy, build_setup, resolved_beta, run_experiment, run_replication, summarize, sweep,
    ExperimentSetup, RegretRow, RegretSummary, RegretTable,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {message}", path.display())]
    Csv { path: PathBuf, message: String },
    #[error(transparent)]
    Sem(#[from] SemError),
    #[error(transparent)]
    Environment(#[from] EnvironmentError),
    #[error(transparent)]
    Estimation(#[from] EstimationError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

impl HarnessError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io { path: path.to_path_buf(), source }
    }

    /// Whether the failure came from the numerics rather than the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Self::Estimation(_) | Self::Policy(PolicyError::Estimation(_)) | Self::Analysis(AnalysisError::SingularMoment { .. })
        )
    }
}
