//! Stochastic and expected-value-fixed optima by exhaustive binary enumeration.

use stram_core::program::{assemble, BuildOptions};
use stram_solver::{solve_lp, LinearProgram, LpOptions, Status};

use super::Fixture;

/// Minimum over every binary assignment of the LP optimum with those binaries fixed.
pub fn enumerate(lp: &LinearProgram) -> Option<(f64, Vec<f64>)> {
    let ints: Vec<usize> = (0..lp.num_cols()).filter(|&j| lp.integer[j]).collect();
    assert!(ints.len() <= 12, "{} binaries is too many to enumerate", ints.len());
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0u32..(1 << ints.len()) {
        let mut fixed = lp.clone();
        for (b, &j) in ints.iter().enumerate() {
            let x = ((mask >> b) & 1) as f64;
            fixed.lower[j] = x;
            fixed.upper[j] = x;
            fixed.integer[j] = false;
        }
        let r = solve_lp(&fixed, &LpOptions::default()).unwrap();
        if r.status == Status::Optimal && best.as_ref().map_or(true, |b| r.objective < b.0) {
            best = Some((r.objective, r.values));
        }
    }
    best
}

/// Returns the stochastic optimum, the optimum with the expected value
/// first stage fixed, and the number of fixed columns. Shared first-stage
/// columns are recognized by their `s*` name suffix.
pub fn sp_and_eev(fx: &Fixture, build: BuildOptions) -> (f64, f64, usize) {
    let sp_lp = assemble(&fx.inst, &fx.paths, &fx.tree, build).unwrap().lp;
    let (sp, _) = enumerate(&sp_lp).expect("stochastic program feasible");
    let ev = assemble(&fx.inst, &fx.paths, &fx.tree.base_only(), build).unwrap().lp;
    let (_, ev_values) = enumerate(&ev).expect("expected value program feasible");
    let mut eev_lp = sp_lp;
    let mut fixed = 0;
    for j in 0..eev_lp.num_cols() {
        if !eev_lp.col_names[j].contains("s*") {
            continue;
        }
        let i = ev.col_names.iter().position(|n| n == &eev_lp.col_names[j]).unwrap_or_else(|| panic!("{} missing", eev_lp.col_names[j]));
        let x = if eev_lp.integer[j] { ev_values[i].round() } else { ev_values[i] };
        eev_lp.lower[j] = x;
        eev_lp.upper[j] = x;
        fixed += 1;
    }
    let (eev, _) = enumerate(&eev_lp).expect("fixed program feasible");
    (sp, eev, fixed)
}
