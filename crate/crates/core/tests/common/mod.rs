//! Shared fixtures and brute-force oracles for the integration tests.
#![allow(dead_code)]

pub mod lp_oracle;
pub mod mini;
pub mod vss_oracle;
pub mod path_oracle;

use std::path::PathBuf;

use stram_core::analysis::Run;
use stram_core::io::load_valid;
use stram_core::model::Instance;
use stram_core::paths::{generate_path_set, PathSet};
use stram_core::scenario::ScenarioTree;

/// Row replay tolerance for every solve.
pub const REPLAY_TOL: f64 = 1e-6;
/// Demand rows must hold to this absolute tolerance.
pub const DEMAND_TOL: f64 = 1e-9;

pub fn instance_dir(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../instances").join(name)
}

pub struct Fixture {
    pub inst: Instance,
    pub tree: ScenarioTree,
    pub paths: PathSet,
}

pub fn fixture(name: &str) -> Fixture {
    let (inst, _) = load_valid(&instance_dir(name)).expect("bundled instance loads");
    let tree = ScenarioTree::from_instance(&inst).expect("scenario tree");
    let paths = generate_path_set(&inst, &tree).expect("path set");
    Fixture { inst, tree, paths }
}

/// Asserts the solved point satisfies every generated row.
pub fn check_replay(run: &Run) -> Result<(), String> {
    let r = run.replay.as_ref().ok_or_else(|| format!("no solution (status {})", run.result.status))?;
    if r.max_abs > REPLAY_TOL {
        return Err(format!("row violation {:.3e} (worst relative at {:?})", r.max_abs, r.worst_row));
    }
    if r.demand_max_abs > DEMAND_TOL {
        return Err(format!("demand violation {:.3e}", r.demand_max_abs));
    }
    if r.bound_violation > REPLAY_TOL || r.integrality_violation > REPLAY_TOL {
        return Err(format!("bound {:.3e} / integrality {:.3e}", r.bound_violation, r.integrality_violation));
    }
    Ok(())
}

pub fn assert_replay(run: &Run) {
    if let Err(e) = check_replay(run) {
        panic!("replay failed: {e}");
    }
}

pub fn fixture_at(dir: &std::path::Path) -> Fixture {
    let (inst, _) = load_valid(dir).expect("instance loads");
    let tree = ScenarioTree::from_instance(&inst).expect("scenario tree");
    let paths = generate_path_set(&inst, &tree).expect("path set");
    Fixture { inst, tree, paths }
}

/// Solver settings for tests that compare against exact optima.
pub fn exact() -> stram_core::analysis::SolveConfig {
    let mut cfg = stram_core::analysis::SolveConfig::default();
    cfg.milp.gap = 0.0;
    cfg
}
