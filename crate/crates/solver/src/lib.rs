//! Linear and mixed-binary programming for desk-scale models.
//!
//! The crate provides a sparse [`LinearProgram`] container, a bounded revised
//! simplex, a best-first branch-and-bound on top of it, and MPS / solution
//! text exchange so that the same program can be handed to an external
//! solver.

mod branch;
mod lu;
pub mod mps;
mod problem;
mod simplex;
pub mod solution;

use std::fmt;
use std::time::Duration;

pub use branch::{solve, MilpOptions};
pub use problem::{LinearProgram, Row, RowSense};
pub use simplex::LpOptions;

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("malformed program: {0}")]
    Malformed(String),
    #[error("MPS: {0}")]
    Mps(String),
    #[error("solution file: {0}")]
    Solution(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    /// Proven optimal within the configured relative gap.
    Optimal,
    /// A feasible point without a proof of optimality; see [`SolveResult::gap`].
    Feasible,
    Infeasible,
    Unbounded,
    /// A time, node or iteration limit stopped the search.
    Limit,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::Feasible => "feasible",
            Status::Infeasible => "infeasible",
            Status::Unbounded => "unbounded",
            Status::Limit => "limit",
        }
    }

    pub fn parse(s: &str) -> Option<Status> {
        Some(match s.to_ascii_lowercase().as_str() {
            "optimal" => Status::Optimal,
            "feasible" => Status::Feasible,
            "infeasible" => Status::Infeasible,
            "unbounded" => Status::Unbounded,
            "limit" => Status::Limit,
            _ => return None,
        })
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One point of the branch-and-bound progress trace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundSample {
    pub node: usize,
    pub bound: f64,
    pub incumbent: f64,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub status: Status,
    /// Objective of `values`; NaN when no point is available.
    pub objective: f64,
    /// Column values; empty when no point is available.
    pub values: Vec<f64>,
    /// Proven lower bound on the optimum.
    pub bound: f64,
    /// Relative gap `(objective - bound) / max(1, |objective|)`.
    pub gap: f64,
    pub nodes: usize,
    pub branched: usize,
    pub iterations: usize,
    pub wall_time: Duration,
    pub trace: Vec<BoundSample>,
    pub message: Option<String>,
}

impl SolveResult {
    pub fn has_solution(&self) -> bool {
        !self.values.is_empty()
    }

    pub(crate) fn empty(status: Status) -> Self {
        SolveResult {
            status,
            objective: f64::NAN,
            values: Vec::new(),
            bound: f64::NEG_INFINITY,
            gap: f64::INFINITY,
            nodes: 0,
            branched: 0,
            iterations: 0,
            wall_time: Duration::ZERO,
            trace: Vec::new(),
            message: None,
        }
    }
}

pub fn relative_gap(incumbent: f64, bound: f64) -> f64 {
    if !incumbent.is_finite() || !bound.is_finite() {
        return f64::INFINITY;
    }
    ((incumbent - bound) / incumbent.abs().max(1.0)).max(0.0)
}

/// Solves the continuous relaxation, ignoring integrality flags.
pub fn solve_lp(lp: &LinearProgram, opts: &LpOptions) -> Result<SolveResult, SolverError> {
    let mut relaxed = lp.clone();
    relaxed.integer.iter_mut().for_each(|b| *b = false);
    solve(&relaxed, &MilpOptions { lp: opts.clone(), ..MilpOptions::default() })
}
