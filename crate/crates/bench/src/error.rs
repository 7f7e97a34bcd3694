// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Core(#[from] cmcs_core::Error),
    #[error("spec line {line}: {message}")]
    Spec { line: usize, message: String },
    #[error("dataset not found at {0}")]
    DatasetMissing(PathBuf),
    #[error("i/o error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("no admissible instance after {0} resampling attempts")]
    Resampling(usize),
}

impl BenchError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    /// Whether the error means the instance has no feasible team.
    pub fn is_infeasible(&self) -> bool {
        matches!(self, BenchError::Core(e) if core_infeasible(e))
    }

    /// Whether the error comes from missing or malformed input data.
    pub fn is_data(&self) -> bool {
        match self {
            BenchError::DatasetMissing(_) | BenchError::Io { .. } => true,
            BenchError::Core(e) => core_data(e),
            _ => false,
        }
    }
}

pub fn core_infeasible(e: &cmcs_core::Error) -> bool {
    use cmcs_core::Error as E;
    matches!(e, E::Infeasible { .. } | E::InfeasibleTeam(_) | E::NoFeasibleGenome(_) | E::PopulationTooSmall { .. })
}

pub fn core_data(e: &cmcs_core::Error) -> bool {
    use cmcs_core::Error as E;
    matches!(e, E::Io { .. } | E::Parse { .. } | E::EmptyGraph(_) | E::MissingAttributes(_) | E::Unlabeled(_))
}

pub type Result<T, E = BenchError> = std::result::Result<T, E>;
