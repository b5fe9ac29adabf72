//! Strategic freight transport model: instance data, path generation,
//! technology diffusion envelopes, scenario trees, the mean-CVaR stochastic
//! program and the analyses built on its solutions.

pub mod analysis;
pub mod diffusion;
pub mod io;
pub mod model;
pub mod paths;
pub mod program;
pub mod report;
pub mod scenario;

use std::fmt;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A missing or malformed input file.
    #[error("{file}: {message}")]
    Input { file: String, message: String },
    /// The instance loaded but violates model invariants.
    #[error("invalid instance: {0}")]
    Invalid(String),
    /// The model cannot be built from a valid instance (e.g. unconnected demand).
    #[error("{0}")]
    Model(String),
    /// A solve ended without a usable point.
    #[error("{what}: no solution (status {status})")]
    NoSolution { what: String, status: stram_solver::Status },
    #[error(transparent)]
    Solver(#[from] stram_solver::SolverError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn input(file: impl fmt::Display, message: impl fmt::Display) -> Self {
        Error::Input { file: file.to_string(), message: message.to_string() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
