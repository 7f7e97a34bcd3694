// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("edge list {0} contains no edges")]
    EmptyGraph(PathBuf),

    #[error("i/o error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unknown recruiter: worker {0} is not in the candidate set")]
    UnknownRecruiter(u64),

    #[error("requested {requested} nodes but the population has only {available}")]
    PopulationTooSmall { requested: usize, available: usize },

    #[error("infeasible: {workers} candidate workers for {skills} required skills")]
    Infeasible { workers: usize, skills: usize },

    #[error("infeasible team: {0}")]
    InfeasibleTeam(String),

    #[error("enumeration budget exceeded: {count} assignments > {budget}")]
    BudgetExceeded { count: u128, budget: u128 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("missing attributes for node {0}")]
    MissingAttributes(u64),

    #[error("empty walk corpus")]
    EmptyCorpus,

    #[error("k = {k} exceeds the number of points ({n})")]
    TooManyClusters { k: usize, n: usize },

    #[error("all clusters are empty")]
    NoClusters,

    #[error("{clusters} non-empty clusters cannot cover {skills} required skills")]
    PoolShape { clusters: usize, skills: usize },

    #[error("candidate pool is empty")]
    EmptyPool,

    #[error("no feasible genome: {0}")]
    NoFeasibleGenome(String),

    #[error("node {0} has no category label")]
    Unlabeled(u64),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
