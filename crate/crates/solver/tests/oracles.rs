use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stram_solver::{solve, solve_lp, LinearProgram, LpOptions, MilpOptions, RowSense, Status};

/// Brute-force LP optimum over a bounded box: every vertex is the solution of
/// `n` tight constraints chosen among rows and bounds.
fn vertex_oracle(lp: &LinearProgram) -> Option<f64> {
    let n = lp.num_cols();
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for row in &lp.rows {
        let mut a = vec![0.0; n];
        for &(j, v) in &row.coeffs {
            a[j] = v;
        }
        planes.push((a, row.rhs));
    }
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e.clone(), lp.lower[j]));
        planes.push((e, lp.upper[j]));
    }
    let mut best: Option<f64> = None;
    let mut subset: Vec<usize> = (0..n).collect();
    loop {
        if let Some(x) = solve_dense(&subset.iter().map(|&k| planes[k].clone()).collect::<Vec<_>>()) {
            let feasible = lp.max_bound_violation(&x) <= 1e-7 && lp.max_row_violation(&x).0 <= 1e-7;
            if feasible {
                let z = lp.evaluate_objective(&x);
                best = Some(best.map_or(z, |b: f64| b.min(z)));
            }
        }
        // Next n-combination of planes.
        let p = planes.len();
        let mut i = n;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if subset[i] < p - n + i {
                subset[i] += 1;
                for k in i + 1..n {
                    subset[k] = subset[k - 1] + 1;
                }
                break;
            }
        }
    }
}

fn solve_dense(eqs: &[(Vec<f64>, f64)]) -> Option<Vec<f64>> {
    let n = eqs.len();
    let mut a: Vec<Vec<f64>> = eqs.iter().map(|(r, b)| {
        let mut row = r.clone();
        row.push(*b);
        row
    }).collect();
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

fn sense_of(k: u8) -> RowSense {
    match k % 3 {
        0 => RowSense::Le,
        1 => RowSense::Ge,
        _ => RowSense::Eq,
    }
}

fn random_lp() -> impl Strategy<Value = LinearProgram> {
    (1usize..=4, 0usize..=4).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec(-5i32..=5, n),
            prop::collection::vec(1i32..=8, n),
            prop::collection::vec((prop::collection::vec(-4i32..=4, n), 0u8..3, -10i32..=20), m),
        )
            .prop_map(move |(c, ub, rows)| {
                let mut lp = LinearProgram::new();
                for j in 0..n {
                    lp.add_column(format!("x{j}"), c[j] as f64, 0.0, ub[j] as f64);
                }
                for (i, (a, s, b)) in rows.into_iter().enumerate() {
                    lp.add_row(format!("r{i}"), a.iter().enumerate().map(|(j, &v)| (j, v as f64)), sense_of(s), b as f64);
                }
                lp
            })
    })
}

fn assert_replay(lp: &LinearProgram, values: &[f64]) {
    let (_, rel) = lp.max_row_violation(values);
    assert!(rel <= 1e-6, "row violation {rel}");
    assert!(lp.max_bound_violation(values) <= 1e-9);
    assert!(lp.max_integrality_violation(values) <= 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn lp_matches_vertex_enumeration(lp in random_lp()) {
        let r = solve_lp(&lp, &LpOptions::default()).unwrap();
        match vertex_oracle(&lp) {
            None => prop_assert_eq!(r.status, Status::Infeasible),
            Some(z) => {
                prop_assert_eq!(r.status, Status::Optimal);
                prop_assert!((r.objective - z).abs() <= 1e-6 * z.abs().max(1.0), "{} vs {}", r.objective, z);
                assert_replay(&lp, &r.values);
            }
        }
    }

    #[test]
    fn milp_matches_enumeration(
        lp in random_lp(),
        nbin in 1usize..=5,
        link in prop::collection::vec(-6i32..=6, 5),
        costs in prop::collection::vec(-4i32..=4, 5),
    ) {
        let mut lp = lp;
        let n = lp.num_cols();
        let bins: Vec<usize> = (0..nbin).map(|k| lp.add_binary(format!("b{k}"), costs[k] as f64)).collect();
        // Each binary gates one continuous column.
        for (k, &b) in bins.iter().enumerate() {
            let j = k % n;
            lp.add_row(format!("gate{k}"), [(j, 1.0), (b, link[k] as f64 - 8.0)], RowSense::Le, 0.0);
        }
        let opts = MilpOptions { gap: 0.0, ..MilpOptions::default() };
        let r = solve(&lp, &opts).unwrap();
        let oracle = enumerate_binaries(&lp);
        match oracle {
            None => prop_assert_eq!(r.status, Status::Infeasible),
            Some(z) => {
                prop_assert_eq!(r.status, Status::Optimal);
                prop_assert!((r.objective - z).abs() <= 1e-6 * z.abs().max(1.0), "{} vs {}", r.objective, z);
                assert_replay(&lp, &r.values);
                for s in &r.trace {
                    prop_assert!(s.bound <= s.incumbent + 1e-9 * s.incumbent.abs().max(1.0));
                }
                prop_assert!(r.bound <= r.objective + 1e-9 * r.objective.abs().max(1.0));
            }
        }
    }
}

/// Fixes every binary assignment and solves the remaining LP.
fn enumerate_binaries(lp: &LinearProgram) -> Option<f64> {
    let ints: Vec<usize> = (0..lp.num_cols()).filter(|&j| lp.integer[j]).collect();
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << ints.len()) {
        let mut fixed = lp.clone();
        for (k, &j) in ints.iter().enumerate() {
            let v = ((mask >> k) & 1) as f64;
            fixed.lower[j] = v;
            fixed.upper[j] = v;
            fixed.integer[j] = false;
        }
        let r = solve_lp(&fixed, &LpOptions::default()).unwrap();
        if r.status == Status::Optimal {
            best = Some(best.map_or(r.objective, |b: f64| b.min(r.objective)));
        }
    }
    best
}

#[test]
fn ten_binaries_twenty_continuous() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _case in 0..6 {
        let mut lp = LinearProgram::new();
        let xs: Vec<usize> = (0..20)
            .map(|j| lp.add_column(format!("x{j}"), rng.gen_range(-3.0..3.0), 0.0, rng.gen_range(1.0..6.0)))
            .collect();
        let bs: Vec<usize> = (0..10).map(|k| lp.add_binary(format!("b{k}"), rng.gen_range(0.5..4.0))).collect();
        for i in 0..8 {
            let mut coeffs = Vec::new();
            for &j in &xs {
                if rng.gen_bool(0.4) {
                    coeffs.push((j, rng.gen_range(-2.0..3.0)));
                }
            }
            lp.add_row(format!("r{i}"), coeffs, RowSense::Le, rng.gen_range(2.0..10.0));
        }
        for (k, &b) in bs.iter().enumerate() {
            let a = xs[2 * k];
            let c = xs[2 * k + 1];
            lp.add_row(format!("g{k}"), [(a, 1.0), (c, 1.0), (b, -6.0)], RowSense::Le, 0.5);
        }
        lp.add_row("pick", bs.iter().map(|&b| (b, 1.0)), RowSense::Le, 6.0);
        let r = solve(&lp, &MilpOptions { gap: 0.0, ..MilpOptions::default() }).unwrap();
        let z = enumerate_binaries(&lp).expect("feasible by construction");
        assert_eq!(r.status, Status::Optimal);
        assert!((r.objective - z).abs() <= 1e-6 * z.abs().max(1.0), "{} vs {z}", r.objective);
        assert_replay(&lp, &r.values);

        let again = solve(&lp, &MilpOptions { gap: 0.0, ..MilpOptions::default() }).unwrap();
        assert_eq!(again.values, r.values, "determinism");
        assert_eq!(again.nodes, r.nodes);
    }
}

#[test]
fn small_reference_programs() {
    let mut lp = LinearProgram::new();
    lp.add_column("x", 0.0, 0.0, f64::INFINITY);
    let r = solve_lp(&lp, &LpOptions::default()).unwrap();
    assert_eq!(r.status, Status::Optimal);
    assert_eq!(r.objective, 0.0);

    let mut lp = LinearProgram::new();
    let x = lp.add_binary("x", -1.0);
    let y = lp.add_binary("y", -2.0);
    lp.add_row("cap", [(x, 1.0), (y, 1.0)], RowSense::Le, 3.0);
    let r = solve(&lp, &MilpOptions::default()).unwrap();
    assert_eq!(r.values, vec![1.0, 1.0]);
    assert_eq!(r.objective, -3.0);
    assert_eq!(r.branched, 0);
}

#[test]
fn degenerate_cycling_example_terminates() {
    // Beale's example cycles under the textbook largest-coefficient rule.
    let mut lp = LinearProgram::new();
    let x: Vec<usize> = [-0.75, 150.0, -0.02, 6.0]
        .iter()
        .enumerate()
        .map(|(j, &c)| lp.add_column(format!("x{j}"), c, 0.0, f64::INFINITY))
        .collect();
    lp.add_row("a", [(x[0], 0.25), (x[1], -60.0), (x[2], -0.04), (x[3], 9.0)], RowSense::Le, 0.0);
    lp.add_row("b", [(x[0], 0.5), (x[1], -90.0), (x[2], -0.02), (x[3], 3.0)], RowSense::Le, 0.0);
    lp.add_row("c", [(x[2], 1.0)], RowSense::Le, 1.0);
    let r = solve_lp(&lp, &LpOptions::default()).unwrap();
    assert_eq!(r.status, Status::Optimal);
    assert!((r.objective + 0.05).abs() < 1e-9, "{}", r.objective);
}

#[test]
fn time_limit_reports_limit_with_incumbent_or_without() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut lp = LinearProgram::new();
    let bs: Vec<usize> = (0..40).map(|k| lp.add_binary(format!("b{k}"), -rng.gen_range(1.0..10.0))).collect();
    for i in 0..5 {
        lp.add_row(format!("r{i}"), bs.iter().map(|&b| (b, rng.gen_range(1.0..9.0))), RowSense::Le, 60.0);
    }
    let opts = MilpOptions { gap: 0.0, time_limit: Some(std::time::Duration::ZERO), ..MilpOptions::default() };
    let r = solve(&lp, &opts).unwrap();
    assert_eq!(r.status, Status::Limit);
}
