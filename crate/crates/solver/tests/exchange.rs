use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stram_solver::mps::{apply_name_map, read_mps, read_name_map, write_mps, write_name_map};
use stram_solver::solution::{read_solution, write_solution};
use stram_solver::{solve, solve_lp, LinearProgram, LpOptions, MilpOptions, RowSense, Status};

fn mixed_toy() -> LinearProgram {
    let mut lp = LinearProgram::new();
    let f1 = lp.add_column("flow[road]", 1.25, 0.0, f64::INFINITY);
    let f2 = lp.add_column("flow[rail]", 0.8, 0.0, f64::INFINITY);
    let open = lp.add_binary("invest[rail]", 3.5);
    let free = lp.add_column("epigraph", 0.1, f64::NEG_INFINITY, f64::INFINITY);
    let neg = lp.add_column("shifted", 0.0, -2.0, 4.0);
    lp.add_row("demand", [(f1, 1.0), (f2, 1.0)], RowSense::Eq, 10.0);
    lp.add_row("rail_cap", [(f2, 1.0), (open, -6.0)], RowSense::Le, 2.0);
    lp.add_row("epi", [(free, 1.0), (f1, -0.5)], RowSense::Ge, -1.0);
    lp.add_row("shift", [(neg, 1.0), (f1, 0.1)], RowSense::Ge, 0.0);
    lp.objective_offset = 2.0;
    lp
}

#[test]
fn mps_roundtrip_preserves_program() {
    let lp = mixed_toy();
    let text = write_mps(&lp, "TOY").unwrap();
    let mut back = read_mps(&text).unwrap();
    apply_name_map(&mut back, &read_name_map(&write_name_map(&lp).unwrap()).unwrap());
    assert_eq!(back, lp);
    // Writing is deterministic.
    assert_eq!(write_mps(&back, "TOY").unwrap(), text);
}

#[test]
fn solution_roundtrip_recomputes_objective() {
    let lp = mixed_toy();
    let r = solve(&lp, &MilpOptions::default()).unwrap();
    assert_eq!(r.status, Status::Optimal);
    // Through the file pipeline: MPS out, solve the re-read program, solution
    // text back against the original program.
    let reread = read_mps(&write_mps(&lp, "TOY").unwrap()).unwrap();
    let r2 = solve(&reread, &MilpOptions::default()).unwrap();
    let imported = read_solution(&write_solution(&reread, &r2, true), &lp).unwrap();
    assert_eq!(imported.status, Status::Optimal);
    assert!((imported.objective - r.objective).abs() <= 1e-9 * r.objective.abs().max(1.0));
}

#[test]
fn strong_duality_on_larger_random_lp() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (m, n) = (150, 220);
    let mut a: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
    for row in a.iter_mut() {
        for j in 0..n {
            if rng.gen_bool(0.04) {
                row.push((j, rng.gen_range(-1.0..4.0)));
            }
        }
        if row.is_empty() {
            row.push((rng.gen_range(0..n), 1.0));
        }
    }
    let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..5.0)).collect();
    let b: Vec<f64> = a.iter().map(|r| r.iter().map(|&(j, v)| v * x0[j]).sum::<f64>() - rng.gen_range(0.0..2.0)).collect();
    let c: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..3.0)).collect();

    // Primal: min c x, A x >= b, x >= 0.
    let mut primal = LinearProgram::new();
    for j in 0..n {
        primal.add_column(format!("x{j}"), c[j], 0.0, f64::INFINITY);
    }
    for (i, row) in a.iter().enumerate() {
        primal.add_row(format!("r{i}"), row.iter().copied(), RowSense::Ge, b[i]);
    }
    // Dual: max b y, A^T y <= c, y >= 0 (as a minimisation of -b y).
    let mut dual = LinearProgram::new();
    for i in 0..m {
        dual.add_column(format!("y{i}"), -b[i], 0.0, f64::INFINITY);
    }
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (i, row) in a.iter().enumerate() {
        for &(j, v) in row {
            cols[j].push((i, v));
        }
    }
    for j in 0..n {
        dual.add_row(format!("c{j}"), cols[j].iter().copied(), RowSense::Le, c[j]);
    }
    let p = solve_lp(&primal, &LpOptions::default()).unwrap();
    let d = solve_lp(&dual, &LpOptions::default()).unwrap();
    assert_eq!(p.status, Status::Optimal);
    assert_eq!(d.status, Status::Optimal);
    assert!((p.objective + d.objective).abs() <= 1e-7 * p.objective.abs().max(1.0), "{} vs {}", p.objective, -d.objective);
    assert!(primal.max_row_violation(&p.values).1 <= 1e-9);
    assert!(dual.max_row_violation(&d.values).1 <= 1e-9);
}
