use std::path::PathBuf;

use thiserror::Error;

/// A single validation finding, usually tied to one sector.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub sector: Option<String>,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.sector {
            Some(code) => write!(f, "sector {code}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: row {row}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        row: usize,
        column: usize,
        message: String,
    },

    #[error("{path}: {message}")]
    Schema { path: PathBuf, message: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("economy validation failed ({} violation(s)): {}", .0.len(), join_violations(.0))]
    Validation(Vec<Violation>),

    #[error("invalid criticality rating {value} for input {supplier} of buyer {buyer}")]
    InvalidCriticality {
        supplier: String,
        buyer: String,
        value: f64,
    },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("time {0} lies before the simulation epoch")]
    BeforeEpoch(f64),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("simulation failed at t = {t}: {message}")]
    Simulation { t: f64, message: String },

    #[error("adaptive step underflow at t = {t}: step {step:e} below minimum")]
    StepUnderflow { t: f64, step: f64 },

    #[error("invalid dataset: {0}")]
    Dataset(String),

    #[error("scoring failed: {0}")]
    Scoring(String),

    #[error("grid point {index} ({params})")]
    GridPoint {
        index: usize,
        params: String,
        #[source]
        source: Box<Error>,
    },

    #[error("monte carlo run {run} ({sample})")]
    MonteCarloRun {
        run: usize,
        sample: String,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("checkpoint {path} does not match this run: {message}")]
    CheckpointMismatch { path: PathBuf, message: String },

    #[error("invalid distribution for {parameter}: {message}")]
    Distribution { parameter: String, message: String },

    #[error("json error in {path}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("csv error in {path}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    /// True for errors caused by malformed or inconsistent input data, as
    /// opposed to failures while running a model.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::Schema { .. }
                | Error::DimensionMismatch(_)
                | Error::Validation(_)
                | Error::InvalidCriticality { .. }
                | Error::InvalidScenario(_)
                | Error::InvalidParams(_)
                | Error::Dataset(_)
                | Error::Grid(_)
                | Error::CheckpointMismatch { .. }
                | Error::Distribution { .. }
                | Error::Json { .. }
                | Error::Csv { .. }
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
