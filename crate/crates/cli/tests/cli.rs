//! End-to-end runs of the `stram` binary on the bundled instances.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn instance(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../instances").join(name)
}

fn stram(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stram"))
        .args(args)
        .env("RUST_LOG", "warn")
        .env_remove("STRAM_WORKERS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn copy_instance(name: &str) -> TempDir {
    let dir = TempDir::new().unwrap();
    for e in fs::read_dir(instance(name)).unwrap() {
        let e = e.unwrap();
        fs::copy(e.path(), dir.path().join(e.file_name())).unwrap();
    }
    dir
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(path: &Path) -> Value {
    let text = fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    serde_json::from_str(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[derive(Clone, Copy)]
enum Kind {
    Num,
    NumOrNull,
    Str,
    Int,
    Arr,
    Obj,
    Bool,
}

fn check_fields(v: &Value, fields: &[(&str, Kind)], what: &str) {
    for &(name, kind) in fields {
        let f = v.get(name).unwrap_or_else(|| panic!("{what}: missing field {name}"));
        let ok = match kind {
            Kind::Num => f.is_number(),
            Kind::NumOrNull => f.is_number() || f.is_null(),
            Kind::Str => f.is_string(),
            Kind::Int => f.is_u64() || f.is_i64(),
            Kind::Arr => f.is_array(),
            Kind::Obj => f.is_object(),
            Kind::Bool => f.is_boolean(),
        };
        assert!(ok, "{what}: field {name} has the wrong type: {f}");
    }
}

/// Header and rectangular numeric body of a CSV file.
fn check_csv(path: &Path, header: &[&str], numeric: &[&str]) -> usize {
    let mut r = csv::Reader::from_path(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let h: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(h, header, "{}", path.display());
    let cols: Vec<usize> = numeric.iter().map(|c| h.iter().position(|x| x == c).unwrap()).collect();
    let mut n = 0;
    for rec in r.records() {
        let rec = rec.unwrap();
        assert_eq!(rec.len(), header.len());
        for &c in &cols {
            let cell = &rec[c];
            assert!(cell.is_empty() || cell.parse::<f64>().is_ok(), "{}: {cell:?} in column {}", path.display(), header[c]);
        }
        n += 1;
    }
    n
}

fn check_solution(dir: &Path, scenarios: usize) {
    let sol = json(&dir.join("solution.json"));
    check_fields(
        &sol,
        &[
            ("instance", Kind::Str),
            ("status", Kind::Str),
            ("objective", Kind::NumOrNull),
            ("bound", Kind::NumOrNull),
            ("gap", Kind::NumOrNull),
            ("nodes", Kind::Int),
            ("lambda", Kind::Num),
            ("gamma", Kind::Num),
            ("risk_objective", Kind::NumOrNull),
            ("expected_cost", Kind::NumOrNull),
            ("cvar", Kind::NumOrNull),
            ("scenarios", Kind::Arr),
            ("variables", Kind::Arr),
        ],
        "solution.json",
    );
    let sc = sol["scenarios"].as_array().unwrap();
    assert_eq!(sc.len(), scenarios);
    let total: f64 = sc.iter().map(|x| x["probability"].as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9);
    for x in sc {
        check_fields(x, &[("scenario", Kind::Int), ("label", Kind::Str), ("probability", Kind::Num), ("cost", Kind::NumOrNull)], "scenario");
    }
    for x in sol["variables"].as_array().unwrap() {
        check_fields(x, &[("name", Kind::Str), ("value", Kind::Num)], "variable");
    }
    if sol["status"] == "optimal" {
        check_fields(&sol["replay"], &[("max_abs", Kind::Num), ("demand_max_abs", Kind::Num)], "replay");
        assert!(sol["replay"]["max_abs"].as_f64().unwrap() <= 1e-6);
        assert!(sol["replay"]["demand_max_abs"].as_f64().unwrap() <= 1e-9);
    }

    let stats = json(&dir.join("stats.json"));
    check_fields(
        &stats,
        &[
            ("rows", Kind::Int),
            ("columns", Kind::Int),
            ("nonzeros", Kind::Int),
            ("binaries", Kind::Int),
            ("scenarios", Kind::Int),
            ("blocks", Kind::Obj),
            ("variables", Kind::Obj),
        ],
        "stats.json",
    );
    let block_rows: u64 = stats["blocks"].as_object().unwrap().values().map(|b| b["rows"].as_u64().unwrap()).sum();
    assert_eq!(block_rows, stats["rows"].as_u64().unwrap());

    let log = fs::read_to_string(dir.join("solve.log")).unwrap();
    assert!(log.lines().any(|l| l.starts_with("gap: ")), "{log}");

    check_csv(&dir.join("adoption.csv"), &["mode", "fuel", "scenario", "year", "bound"], &["year", "bound"]);
    check_csv(&dir.join("paths.csv"), &fs::read_to_string(dir.join("paths.csv")).unwrap().lines().next().unwrap().split(',').collect::<Vec<_>>(), &[]);
    if sol["objective"].is_number() {
        let n = check_csv(
            &dir.join("costs.csv"),
            &["period", "year", "scenario", "label", "edge", "charge", "node", "upgrade", "base", "carbon", "transfer", "empty", "discounted"],
            &["period", "year", "scenario", "edge", "charge", "node", "upgrade", "base", "carbon", "transfer", "empty", "discounted"],
        );
        assert!(n > 0);
        check_csv(
            &dir.join("splits.csv"),
            &["period", "year", "scenario", "mode", "fuel", "mode_work_tkm", "share", "work_tkm"],
            &["period", "year", "scenario", "mode_work_tkm", "share", "work_tkm"],
        );
        check_csv(
            &dir.join("emissions.csv"),
            &["period", "year", "scenario", "label", "loaded_kt", "empty_kt", "total_kt", "relative", "target"],
            &["period", "year", "scenario", "loaded_kt", "empty_kt", "total_kt", "relative", "target"],
        );
        check_csv(&dir.join("investments.csv"), &["kind", "option", "description", "period", "year", "scenario", "value"], &["period", "year", "scenario", "value"]);
        check_csv(&dir.join("dispersion.csv"), &["period", "year", "metric", "mean", "std"], &["period", "year", "mean", "std"]);
    }
}

/// Every file below `dir` keyed by relative path.
fn tree_contents(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for e in fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

#[test]
fn validate_accepts_bundled_instances() {
    for name in ["toy", "pair"] {
        let out = TempDir::new().unwrap();
        let o = stram(&["validate", "--instance", s(&instance(name)), "--out", s(out.path())]);
        assert_eq!(code(&o), 0, "{name}: {}", stderr(&o));
        let v = json(&out.path().join("validation.json"));
        check_fields(&v, &[("instance", Kind::Str), ("valid", Kind::Bool), ("errors", Kind::Arr), ("warnings", Kind::Arr)], "validation.json");
        assert_eq!(v["valid"], true);
    }
}

#[test]
fn validate_names_missing_file() {
    let dir = copy_instance("toy");
    fs::remove_file(dir.path().join("demand.csv")).unwrap();
    let o = stram(&["validate", "--instance", s(dir.path())]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("demand.csv"), "{}", stderr(&o));
}

#[test]
fn validate_reports_malformed_row() {
    let dir = copy_instance("toy");
    let p = dir.path().join("demand.csv");
    let text = fs::read_to_string(&p).unwrap().replacen("OSL,BGO,bulk,2023,20.0", "OSL,BGO,bulk,2023,twenty", 1);
    fs::write(&p, text).unwrap();
    let o = stram(&["validate", "--instance", s(dir.path())]);
    assert_eq!(code(&o), 2);
    let err = stderr(&o);
    assert!(err.contains("demand.csv") && err.contains("row 3"), "{err}");
}

#[test]
fn invalid_options_are_input_errors() {
    let out = TempDir::new().unwrap();
    let toy = instance("toy");
    for extra in [&["--lambda", "1.5"][..], &["--gamma", "1"], &["--solver", "cplex"], &["--gap", "-1"]] {
        let mut args = vec!["solve", "--instance", s(&toy), "--out", s(out.path())];
        args.extend_from_slice(extra);
        let o = stram(&args);
        assert_eq!(code(&o), 2, "{extra:?}: {}", stderr(&o));
    }
}

#[test]
fn solve_toy_is_optimal() {
    let out = TempDir::new().unwrap();
    let o = stram(&["solve", "--instance", s(&instance("toy")), "--out", s(out.path())]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    check_solution(out.path(), 9);
    let sol = json(&out.path().join("solution.json"));
    assert_eq!(sol["status"], "optimal");
    assert!(sol["gap"].as_f64().unwrap() <= 0.005);
    let risk = sol["risk_objective"].as_f64().unwrap();
    let obj = sol["objective"].as_f64().unwrap();
    assert!((risk - obj).abs() <= 1e-6 * obj.abs());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for dir in [&a, &b] {
        let o = stram(&["solve", "--instance", s(&instance("pair")), "--out", s(dir.path())]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let (ta, tb) = (tree_contents(a.path()), tree_contents(b.path()));
    assert_eq!(ta.keys().collect::<Vec<_>>(), tb.keys().collect::<Vec<_>>());
    for (k, v) in &ta {
        assert!(v == &tb[k], "{} differs between runs", k.display());
    }
}

#[test]
fn time_limit_exits_three_with_artifacts() {
    let out = TempDir::new().unwrap();
    let o = stram(&["solve", "--instance", s(&instance("toy")), "--out", s(out.path()), "--time-limit", "0", "--gap", "0"]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    check_solution(out.path(), 9);
    let sol = json(&out.path().join("solution.json"));
    assert!(sol["status"] == "limit" || sol["status"] == "feasible", "{}", sol["status"]);
}

#[test]
fn infeasible_instance_exits_four() {
    // Rail only, with less capacity than demand and no expansion option.
    let dir = copy_instance("pair");
    let arcs = dir.path().join("arcs.csv");
    let text: String = fs::read_to_string(&arcs).unwrap().lines().filter(|l| !l.starts_with("road-")).map(|l| format!("{l}\n")).collect();
    fs::write(&arcs, text).unwrap();
    let edges = dir.path().join("edges.csv");
    fs::write(&edges, fs::read_to_string(&edges).unwrap().replace(",120", ",50")).unwrap();
    let inv = dir.path().join("investments.csv");
    let header = fs::read_to_string(&inv).unwrap().lines().next().unwrap().to_string();
    fs::write(&inv, header + "\n").unwrap();
    let out = TempDir::new().unwrap();
    let o = stram(&["solve", "--instance", s(dir.path()), "--out", s(out.path())]);
    assert_eq!(code(&o), 4, "{}", stderr(&o));
    check_solution(out.path(), 2);
    assert_eq!(json(&out.path().join("solution.json"))["status"], "infeasible");
}

#[test]
fn vss_of_single_scenario_is_zero() {
    let scen = TempDir::new().unwrap();
    let base_only = scen.path().join("base.json");
    fs::write(&base_only, r#"{"varied_groups": []}"#).unwrap();
    let out = TempDir::new().unwrap();
    let o = stram(&["vss", "--instance", s(&instance("pair")), "--out", s(out.path()), "--scenarios", s(&base_only)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&out.path().join("vss.json"));
    check_fields(
        &v,
        &[
            ("sp_objective", Kind::Num),
            ("ev_objective", Kind::Num),
            ("eev_objective", Kind::NumOrNull),
            ("vss_absolute", Kind::NumOrNull),
            ("vss_relative", Kind::NumOrNull),
            ("sp_status", Kind::Str),
            ("fixed_columns", Kind::Int),
        ],
        "vss.json",
    );
    let sp = v["sp_objective"].as_f64().unwrap();
    assert!(v["vss_absolute"].as_f64().unwrap().abs() <= 1e-9 * sp.abs(), "{v}");
    for sub in ["sp", "ev", "eev"] {
        check_solution(&out.path().join(sub), 1);
    }
}

#[test]
fn sensitivity_writes_one_directory_per_factor() {
    let out = TempDir::new().unwrap();
    let o = stram(&["sensitivity", "--instance", s(&instance("pair")), "--out", s(out.path()), "--factors", "0,1,2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for f in ["factor-0", "factor-1", "factor-2"] {
        check_solution(&out.path().join(f), 2);
    }
    let n = check_csv(&out.path().join("sensitivity.csv"), &["factor", "status", "objective", "expected_emissions_kt"], &["factor", "objective", "expected_emissions_kt"]);
    assert_eq!(n, 3);
}

#[test]
fn static_run_writes_summary() {
    let out = TempDir::new().unwrap();
    let o = stram(&["static", "--instance", s(&instance("pair")), "--out", s(out.path())]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    check_solution(out.path(), 2);
    let v = json(&out.path().join("static.json"));
    check_fields(&v, &[("year", Kind::Int), ("period", Kind::Int), ("status", Kind::Str), ("objective", Kind::Num), ("expected_emissions_kt", Kind::Num)], "static.json");
    let o = stram(&["static", "--instance", s(&instance("pair")), "--out", s(out.path()), "--year", "1999"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn paths_writes_csv_and_summary() {
    let out = TempDir::new().unwrap();
    let o = stram(&["paths", "--instance", s(&instance("toy")), "--out", s(out.path())]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&out.path().join("paths_summary.json"));
    check_fields(&v, &[("paths", Kind::Int), ("unimodal", Kind::Int), ("multimodal", Kind::Int), ("od_pairs", Kind::Int), ("by_mode_sequence", Kind::Obj)], "paths_summary.json");
    let n = v["paths"].as_u64().unwrap();
    assert_eq!(v["unimodal"].as_u64().unwrap() + v["multimodal"].as_u64().unwrap(), n);
    let by: u64 = v["by_mode_sequence"].as_object().unwrap().values().map(|x| x.as_u64().unwrap()).sum();
    assert_eq!(by, n);
    let text = fs::read_to_string(out.path().join("paths.csv")).unwrap();
    assert!(text.lines().count() as u64 > n.min(1));

    // The written path set can replace generation.
    let sol = TempDir::new().unwrap();
    let o = stram(&["solve", "--instance", s(&instance("toy")), "--out", s(sol.path()), "--paths", s(&out.path().join("paths.csv"))]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn export_mps_round_trips() {
    let out = TempDir::new().unwrap();
    let o = stram(&["export-mps", "--instance", s(&instance("pair")), "--out", s(out.path())]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let lp = stram_solver::mps::read_mps(&fs::read_to_string(out.path().join("model.mps")).unwrap()).unwrap();
    let stats = json(&out.path().join("stats.json"));
    assert_eq!(lp.num_rows() as u64, stats["rows"].as_u64().unwrap());
    assert_eq!(lp.num_cols() as u64, stats["columns"].as_u64().unwrap());
    assert_eq!(lp.num_integer() as u64, stats["binaries"].as_u64().unwrap());
    let map = stram_solver::mps::read_name_map(&fs::read_to_string(out.path().join("model.map")).unwrap()).unwrap();
    // One entry per row and column plus the objective.
    assert_eq!(map.len() as u64, stats["rows"].as_u64().unwrap() + stats["columns"].as_u64().unwrap() + 1);
}
