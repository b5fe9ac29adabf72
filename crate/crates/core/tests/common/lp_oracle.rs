//! Vertex enumeration for bounded LPs and exhaustive binary enumeration for MILPs.

use rand::Rng;
use stram_solver::{solve, solve_lp, LinearProgram, LpOptions, MilpOptions, RowSense, Status};

const FEAS_TOL: f64 = 1e-7;

fn solve_dense(mut a: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let n = a.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-10 {
            return None;
        }
        a.swap(c, p);
        for i in 0..n {
            if i != c {
                let f = a[i][c] / a[c][c];
                for k in c..=n {
                    a[i][k] -= f * a[c][k];
                }
            }
        }
    }
    Some((0..n).map(|i| a[i][n] / a[i][i]).collect())
}

fn combinations(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..k).collect();
    if k > n {
        return;
    }
    loop {
        f(&idx);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] < n - k + i {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Number of candidate vertices the enumeration visits.
pub fn vertex_work(n: usize, m: usize) -> f64 {
    let binom = |a: usize, b: usize| -> f64 { (0..b).fold(1.0, |acc, i| acc * (a - i) as f64 / (i + 1) as f64) };
    (0..=m.min(n)).map(|k| binom(m, k) * binom(n, k) * 2f64.powi((n - k) as i32)).sum()
}

/// Folds fixed columns into right-hand sides and single-column rows into
/// bounds. Returns `None` when some bound pair crosses.
fn reduce(lp: &LinearProgram) -> Option<LinearProgram> {
    let mut lower = lp.lower.clone();
    let mut upper = lp.upper.clone();
    let mut keep = Vec::new();
    for row in &lp.rows {
        let free: Vec<(usize, f64)> = row.coeffs.iter().copied().filter(|&(j, v)| v != 0.0 && lp.lower[j] < lp.upper[j]).collect();
        if free.len() != 1 {
            keep.push(row.clone());
            continue;
        }
        let (j, a) = free[0];
        let rest: f64 = row.coeffs.iter().filter(|&&(i, _)| i != j).map(|&(i, v)| v * lp.lower[i]).sum();
        let t = (row.rhs - rest) / a;
        let (le, ge) = match row.sense {
            RowSense::Eq => (true, true),
            RowSense::Le => (a > 0.0, a < 0.0),
            RowSense::Ge => (a < 0.0, a > 0.0),
        };
        if le {
            upper[j] = upper[j].min(t);
        }
        if ge {
            lower[j] = lower[j].max(t);
        }
    }
    if (0..lower.len()).any(|j| lower[j] > upper[j] + FEAS_TOL) {
        return None;
    }
    let mut out = lp.clone();
    for j in 0..lower.len() {
        out.lower[j] = lower[j].min(upper[j]);
        out.upper[j] = upper[j];
    }
    out.rows = keep;
    Some(out)
}

/// Minimum of a box-bounded LP over its vertices. Every vertex has `k` tight
/// rows, `k` free columns solving them, and the other columns at a bound.
pub fn vertex_optimum(lp: &LinearProgram) -> Option<f64> {
    let red = reduce(lp)?;
    let vars: Vec<usize> = (0..red.num_cols()).filter(|&j| red.lower[j] < red.upper[j]).collect();
    let n = vars.len();
    let m = red.num_rows();
    let dense: Vec<Vec<f64>> = red
        .rows
        .iter()
        .map(|r| {
            let mut a = vec![0.0; red.num_cols()];
            for &(j, v) in &r.coeffs {
                a[j] += v;
            }
            a
        })
        .collect();
    let mut best: Option<f64> = None;
    for k in 0..=m.min(n) {
        combinations(m, k, &mut |rows| {
            combinations(n, k, &mut |free| {
                let fixed: Vec<usize> = (0..n).filter(|j| !free.contains(j)).map(|j| vars[j]).collect();
                let free: Vec<usize> = free.iter().map(|&j| vars[j]).collect();
                for mask in 0u32..(1 << fixed.len()) {
                    let mut x = red.lower.clone();
                    for (b, &j) in fixed.iter().enumerate() {
                        if (mask >> b) & 1 == 1 {
                            x[j] = red.upper[j];
                        }
                    }
                    if k > 0 {
                        let sys: Vec<Vec<f64>> = rows
                            .iter()
                            .map(|&i| {
                                let mut r: Vec<f64> = free.iter().map(|&j| dense[i][j]).collect();
                                let known: f64 = (0..x.len()).filter(|j| !free.contains(j)).map(|j| dense[i][j] * x[j]).sum();
                                r.push(red.rows[i].rhs - known);
                                r
                            })
                            .collect();
                        let Some(sol) = solve_dense(sys) else { continue };
                        for (&j, v) in free.iter().zip(sol) {
                            x[j] = v;
                        }
                    }
                    if lp.max_bound_violation(&x) <= FEAS_TOL && lp.max_row_violation(&x).0 <= FEAS_TOL {
                        let z = lp.evaluate_objective(&x);
                        best = Some(best.map_or(z, |b: f64| b.min(z)));
                    }
                }
            });
        });
    }
    best
}

/// Fixes every binary assignment and takes the best vertex optimum.
pub fn milp_optimum(lp: &LinearProgram) -> Option<f64> {
    let ints: Vec<usize> = (0..lp.num_cols()).filter(|&j| lp.integer[j]).collect();
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << ints.len()) {
        let mut fixed = lp.clone();
        for (b, &j) in ints.iter().enumerate() {
            let v = ((mask >> b) & 1) as f64;
            fixed.lower[j] = v;
            fixed.upper[j] = v;
            fixed.integer[j] = false;
        }
        if let Some(z) = vertex_optimum(&fixed) {
            best = Some(best.map_or(z, |b: f64| b.min(z)));
        }
    }
    best
}

fn sense(rng: &mut impl Rng) -> RowSense {
    match rng.gen_range(0..3) {
        0 => RowSense::Le,
        1 => RowSense::Ge,
        _ => RowSense::Eq,
    }
}

fn add_random_rows(lp: &mut LinearProgram, rng: &mut impl Rng, m: usize, cols: &[usize]) {
    for i in 0..m {
        let mut coeffs = Vec::new();
        for &j in cols {
            let v = rng.gen_range(-4..=4) as f64;
            if v != 0.0 && rng.gen_bool(0.7) {
                coeffs.push((j, v));
            }
        }
        let s = sense(rng);
        lp.add_row(format!("r{i}"), coeffs, s, rng.gen_range(-6..=15) as f64);
    }
}

/// Random box-bounded LP with 1 to 15 columns, sized so that enumeration stays cheap.
pub fn random_lp(rng: &mut impl Rng) -> LinearProgram {
    let (n, m) = loop {
        let n = rng.gen_range(1..=15);
        let m = rng.gen_range(0..=5);
        if vertex_work(n, m) <= 2.0e6 {
            break (n, m);
        }
    };
    let mut lp = LinearProgram::new();
    let cols: Vec<usize> =
        (0..n).map(|j| lp.add_column(format!("x{j}"), rng.gen_range(-5..=5) as f64, 0.0, rng.gen_range(1..=8) as f64)).collect();
    add_random_rows(&mut lp, rng, m, &cols);
    lp
}

/// Random MILP with 1 to 10 binaries, each gating a continuous column.
pub fn random_milp(rng: &mut impl Rng) -> LinearProgram {
    let n = rng.gen_range(1..=4);
    let m = rng.gen_range(0..=3);
    let nb = rng.gen_range(1..=10);
    let mut lp = LinearProgram::new();
    let cols: Vec<usize> =
        (0..n).map(|j| lp.add_column(format!("x{j}"), rng.gen_range(-5..=5) as f64, 0.0, rng.gen_range(1..=8) as f64)).collect();
    add_random_rows(&mut lp, rng, m, &cols);
    let bins: Vec<usize> = (0..nb).map(|k| lp.add_binary(format!("b{k}"), rng.gen_range(-3..=6) as f64)).collect();
    for (k, &b) in bins.iter().enumerate() {
        let j = cols[k % n];
        lp.add_row(format!("gate{k}"), [(j, 1.0), (b, -(rng.gen_range(1..=8) as f64))], RowSense::Le, rng.gen_range(0..=2) as f64);
    }
    if nb > 1 {
        lp.add_row("pick", bins.iter().map(|&b| (b, 1.0)), RowSense::Le, rng.gen_range(1..=nb) as f64);
    }
    lp
}

fn agree(got: f64, want: f64) -> bool {
    (got - want).abs() <= 1e-6 * want.abs().max(1.0)
}

fn replay(lp: &LinearProgram, x: &[f64]) -> Result<(), String> {
    let v = lp.max_row_violation(x).0;
    let b = lp.max_bound_violation(x);
    let i = lp.max_integrality_violation(x);
    if v > 1e-6 || b > 1e-9 || i > 1e-6 {
        return Err(format!("solution violates rows {v:.2e}, bounds {b:.2e}, integrality {i:.2e}"));
    }
    Ok(())
}

pub fn check_lp(lp: &LinearProgram) -> Result<(), String> {
    let r = solve_lp(lp, &LpOptions::default()).map_err(|e| e.to_string())?;
    match vertex_optimum(lp) {
        None if r.status == Status::Infeasible => Ok(()),
        None => Err(format!("oracle infeasible, solver {}", r.status)),
        Some(z) if r.status == Status::Optimal && agree(r.objective, z) => replay(lp, &r.values),
        Some(z) => Err(format!("oracle {z}, solver {} {}", r.status, r.objective)),
    }
}

pub fn check_milp(lp: &LinearProgram) -> Result<(), String> {
    let r = solve(lp, &MilpOptions { gap: 0.0, ..MilpOptions::default() }).map_err(|e| e.to_string())?;
    match milp_optimum(lp) {
        None if r.status == Status::Infeasible => Ok(()),
        None => Err(format!("oracle infeasible, solver {}", r.status)),
        Some(z) if r.status == Status::Optimal && agree(r.objective, z) => replay(lp, &r.values),
        Some(z) => Err(format!("oracle {z}, solver {} {}", r.status, r.objective)),
    }
}
