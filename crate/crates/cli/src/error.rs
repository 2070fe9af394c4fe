use std::path::PathBuf;

use lbr_core::braid::BraidError;
use lbr_core::ep::EpError;
use lbr_core::fcs::FcsError;
use lbr_core::reduce::ReductionError;
use lbr_core::retrieve::RetrievalError;
use lbr_core::trajectories::TrajectoryError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read config {path}: {source}", path = path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid config: {0}")]
    Config(String),
    #[error("malformed override '{0}': expected dotted.key=value")]
    Override(String),
    #[error("cannot write {path}: {source}", path = path.display())]
    Write { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Numerical(#[from] NumericalError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Error)]
pub enum NumericalError {
    #[error(transparent)]
    Braid(#[from] BraidError),
    #[error(transparent)]
    Ep(#[from] EpError),
    #[error(transparent)]
    Fcs(#[from] FcsError),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error(transparent)]
    Retrieval(#[from] RetrievalError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error("Ω_D = {0} does not fall in a recognised braid class (probable exceptional point)")]
    UnknownClass(f64),
}
