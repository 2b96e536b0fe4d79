use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the mesh, solver, training or command layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index {index} out of range (len {len})")]
    Index { index: usize, len: usize },

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("design dimension {dim} does not divide element count {elements}")]
    Divisibility { dim: usize, elements: usize },

    #[error("stiffness is singular on the free DOFs (pivot {pivot} at free DOF {dof}); supports are insufficient")]
    AssemblyRank { dof: usize, pivot: f64 },

    #[error("effective system is singular (pivot {pivot} at free DOF {dof})")]
    SingularSystem { dof: usize, pivot: f64 },

    #[error("simulation diverged at step {step}")]
    SimulationDiverged { step: usize },

    #[error("evaluation {index} failed: {source}")]
    Evaluation {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("design out of bounds: component {index} = {value} not in [{lower}, {upper}]")]
    DesignOutOfBounds {
        index: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("optimizer aborted: {0}")]
    OptimizerAbort(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SimulationDiverged { .. } => 3,
            Error::Evaluation { source, .. } => source.exit_code(),
            Error::OptimizerAbort(_) => 4,
            Error::Io { .. } => 1,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
