//! Command implementations: load, solve, and write the output directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Duration;

use anyhow::{Context, Result};
use serde_json::json;
use stram_core::analysis::{
    carbon_sensitivity, compute_vss, emissions_report, kpis, run_model, static_run, Backend, Run, SolveConfig,
};
use stram_core::diffusion::adoption_bound_table;
use stram_core::io::{load_instance, load_valid};
use stram_core::model::{validate_instance, Instance};
use stram_core::paths::{generate_path_set, read_paths_csv, write_paths_csv, PathSet};
use stram_core::program::{assemble, BuildOptions, NonAnticipativity};
use stram_core::report::{self, fmt_num};
use stram_core::scenario::{ScenarioConfig, ScenarioTree};
use stram_core::Error;
use stram_solver::{mps, MilpOptions, Status};

use crate::RunArgs;

/// Process exit code; a larger value wins when several solves are combined.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Code {
    Ok = 0,
    Internal = 1,
    Input = 2,
    Limit = 3,
    Infeasible = 4,
}

pub const WORKERS_VAR: &str = "STRAM_WORKERS";

fn status_code(status: Status) -> Code {
    match status {
        Status::Optimal => Code::Ok,
        Status::Feasible | Status::Limit => Code::Limit,
        Status::Infeasible | Status::Unbounded => Code::Infeasible,
    }
}

pub fn exit_code_of(e: &anyhow::Error) -> Code {
    match e.downcast_ref::<Error>() {
        Some(Error::Input { .. } | Error::Invalid(_) | Error::Model(_)) => Code::Input,
        Some(Error::NoSolution { status, .. }) => status_code(*status),
        _ => Code::Internal,
    }
}

struct Loaded {
    inst: Instance,
    tree: ScenarioTree,
    paths: PathSet,
}

fn read_scenarios(path: &Path, fallback_branch: Option<i32>) -> Result<ScenarioConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::input(path.display(), e))?;
    let mut cfg: ScenarioConfig = serde_json::from_str(&text).map_err(|e| Error::input(path.display(), e))?;
    if cfg.branch_year.is_none() {
        cfg.branch_year = fallback_branch;
    }
    Ok(cfg)
}

fn load(dir: &Path, scenarios: Option<&Path>, paths_file: Option<&Path>) -> Result<Loaded> {
    let (mut inst, warnings) = load_valid(dir)?;
    for w in warnings {
        log::warn!("{w}");
    }
    if let Some(p) = scenarios {
        inst.scenarios = read_scenarios(p, inst.scenarios.branch_year)?;
    }
    let tree = ScenarioTree::from_instance(&inst)?;
    let paths = match paths_file {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::input(p.display(), e))?;
            read_paths_csv(&inst, &text)?
        }
        None => generate_path_set(&inst, &tree)?,
    };
    log::info!("instance {}: {} scenarios, {} paths", inst.name, tree.len(), paths.len());
    Ok(Loaded { inst, tree, paths })
}

fn workers() -> Result<usize> {
    match std::env::var(WORKERS_VAR) {
        Err(_) => Ok(1),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(Error::input(WORKERS_VAR, format!("expected a positive integer, got {v:?}")).into()),
        },
    }
}

fn solve_config(a: &RunArgs) -> Result<SolveConfig> {
    if !(a.gap >= 0.0) || !a.gap.is_finite() {
        return Err(Error::input("--gap", "must be a nonnegative number").into());
    }
    let time_limit = match a.time_limit {
        Some(t) if t >= 0.0 && t.is_finite() => Some(Duration::from_secs_f64(t)),
        Some(_) => return Err(Error::input("--time-limit", "must be a nonnegative number of seconds").into()),
        None => None,
    };
    let backend = match a.solver.as_str() {
        "builtin" => Backend::Builtin,
        s => match s.strip_prefix("external:") {
            Some(t) if !t.trim().is_empty() => Backend::External(t.to_string()),
            _ => return Err(Error::input("--solver", format!("expected builtin or external:<command>, got {s:?}")).into()),
        },
    };
    Ok(SolveConfig { milp: MilpOptions { gap: a.gap, time_limit, ..MilpOptions::default() }, backend, workers: workers()? })
}

fn build_options(a: &RunArgs) -> Result<BuildOptions> {
    let b = BuildOptions {
        lambda: a.lambda,
        gamma: a.gamma,
        static_period: None,
        nonanticipativity: if a.explicit_nonanticipativity { NonAnticipativity::Explicit } else { NonAnticipativity::Merged },
    };
    b.check()?;
    Ok(b)
}

fn write(dir: &Path, name: &str, text: impl AsRef<[u8]>) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

/// Run log without timings, so that repeated runs produce identical files.
fn solve_log(command: &str, inst: &Instance, run: &Run) -> String {
    let st = run.program.stats();
    let r = &run.result;
    let o = &run.program.options;
    let mut lines = vec![
        format!("command: {command}"),
        format!("instance: {}", inst.name),
        format!("lambda: {}", fmt_num(o.lambda)),
        format!("gamma: {}", fmt_num(o.gamma)),
        format!("nonanticipativity: {:?}", o.nonanticipativity).to_lowercase(),
        format!("scenarios: {}", st.scenarios),
        format!("rows: {}", st.rows),
        format!("columns: {}", st.columns),
        format!("binaries: {}", st.binaries),
        format!("status: {}", r.status),
        format!("objective: {}", fmt_num(r.objective)),
        format!("bound: {}", fmt_num(r.bound)),
        format!("gap: {}", fmt_num(r.gap)),
        format!("nodes: {}", r.nodes),
        format!("simplex_iterations: {}", r.iterations),
    ];
    if let Some(rep) = &run.replay {
        lines.push(format!("replay_max_violation: {}", fmt_num(rep.max_abs)));
        lines.push(format!("replay_demand_violation: {}", fmt_num(rep.demand_max_abs)));
    }
    if let Some(m) = &r.message {
        lines.push(format!("message: {m}"));
    }
    let mut s = lines.join("\n");
    s.push('\n');
    s
}

/// Writes the solution, statistics, log and indicator tables of one solve.
fn write_run(dir: &Path, command: &str, inst: &Instance, paths: &PathSet, tree: &ScenarioTree, run: &Run) -> Result<Code> {
    create_dir(dir)?;
    write(dir, "solution.json", report::solution_json(run, inst, tree)?)?;
    write(dir, "stats.json", report::stats_json(&run.program.stats())?)?;
    write(dir, "solve.log", solve_log(command, inst, run))?;
    write(dir, "paths.csv", write_paths_csv(inst, paths))?;
    write(dir, "adoption.csv", report::adoption_csv(inst, tree, &adoption_bound_table(inst, tree)?))?;
    if run.result.has_solution() {
        let values = &run.result.values;
        let k = kpis(&run.program, values, inst, paths, tree)?;
        let e = emissions_report(&run.program, values, inst, tree)?;
        write(dir, "costs.csv", report::costs_csv(&k))?;
        write(dir, "splits.csv", report::splits_csv(&k))?;
        write(dir, "emissions.csv", report::emissions_csv(&e))?;
        write(dir, "investments.csv", report::investments_csv(&k))?;
        write(dir, "dispersion.csv", report::dispersion_csv(&k))?;
    }
    Ok(status_code(run.result.status))
}

fn announce(what: &str, run: &Run, dir: &Path) {
    println!(
        "{what}: status {}, objective {}, gap {} -> {}",
        run.result.status,
        fmt_num(run.result.objective),
        fmt_num(run.result.gap),
        dir.display()
    );
}

pub fn validate(dir: &Path, out: Option<&Path>) -> Result<Code> {
    let inst = load_instance(dir)?;
    let rep = validate_instance(&inst);
    for w in &rep.warnings {
        eprintln!("warning: {w}");
    }
    for e in &rep.errors {
        eprintln!("error: {e}");
    }
    if let Some(out) = out {
        create_dir(out)?;
        let doc = json!({
            "instance": inst.name,
            "valid": rep.is_ok(),
            "errors": rep.errors,
            "warnings": rep.warnings,
            "nodes": inst.nodes.len(),
            "arcs": inst.arcs.len(),
            "products": inst.products.len(),
            "mode_fuels": inst.mode_fuels.len(),
            "periods": inst.time.periods,
            "demand_entries": inst.demand.len(),
        });
        write(out, "validation.json", report::to_json(&doc)?)?;
    }
    if rep.is_ok() {
        println!(
            "{}: valid ({} nodes, {} arcs, {} products, {} periods, {} warnings)",
            inst.name,
            inst.nodes.len(),
            inst.arcs.len(),
            inst.products.len(),
            inst.time.num_periods(),
            rep.warnings.len()
        );
        Ok(Code::Ok)
    } else {
        println!("{}: {} errors", inst.name, rep.errors.len());
        Ok(Code::Input)
    }
}

pub fn solve(a: &RunArgs) -> Result<Code> {
    let build = build_options(a)?;
    let cfg = solve_config(a)?;
    let l = load(&a.instance, a.scenarios.as_deref(), a.paths.as_deref())?;
    let run = run_model(&l.inst, &l.paths, &l.tree, build, &cfg)?;
    let code = write_run(&a.out, "solve", &l.inst, &l.paths, &l.tree, &run)?;
    announce("solve", &run, &a.out);
    Ok(code)
}

pub fn vss(a: &RunArgs, investments_only: bool) -> Result<Code> {
    let build = build_options(a)?;
    let cfg = solve_config(a)?;
    let l = load(&a.instance, a.scenarios.as_deref(), a.paths.as_deref())?;
    let out = compute_vss(&l.inst, &l.paths, &l.tree, build, &cfg, investments_only)?;
    create_dir(&a.out)?;
    let ev_tree = l.tree.base_only();
    let sp = write_run(&a.out.join("sp"), "vss", &l.inst, &l.paths, &l.tree, &out.sp)?;
    let ev = write_run(&a.out.join("ev"), "vss", &l.inst, &l.paths, &ev_tree, &out.ev)?;
    let eev = write_run(&a.out.join("eev"), "vss", &l.inst, &l.paths, &l.tree, &out.eev)?;
    write(&a.out, "vss.json", report::to_json(&out.report)?)?;
    let r = &out.report;
    println!(
        "vss: SP {}, EEV {}, VSS {} ({}%) -> {}",
        fmt_num(r.sp_objective),
        fmt_num(r.eev_objective),
        fmt_num(r.vss_absolute),
        fmt_num(100.0 * r.vss_relative),
        a.out.display()
    );
    if let Some(d) = &r.diagnosis {
        println!("vss: {d}");
    }
    // An infeasible fixed program is a reportable outcome; only limits count against it.
    let eev = if eev == Code::Limit { Code::Limit } else { Code::Ok };
    Ok(sp.max(ev).max(eev))
}

pub fn sensitivity(a: &RunArgs, factors: &[f64]) -> Result<Code> {
    if factors.is_empty() {
        return Err(Error::input("--factors", "at least one factor is required").into());
    }
    let build = build_options(a)?;
    let cfg = solve_config(a)?;
    let l = load(&a.instance, a.scenarios.as_deref(), None)?;
    let points = carbon_sensitivity(&l.inst, &l.tree, factors, build, &cfg)?;
    create_dir(&a.out)?;
    let mut code = Code::Ok;
    let mut rows = Vec::new();
    for p in &points {
        let dir = a.out.join(format!("factor-{}", fmt_num(p.factor)));
        code = code.max(write_run(&dir, "sensitivity", &p.instance, &p.paths, &l.tree, &p.run)?);
        announce(&format!("factor {}", fmt_num(p.factor)), &p.run, &dir);
        rows.push(vec![
            fmt_num(p.factor),
            p.run.result.status.to_string(),
            fmt_num(p.run.result.objective),
            fmt_num(p.emissions.expected_total_kt),
        ]);
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["factor", "status", "objective", "expected_emissions_kt"])?;
    for r in rows {
        w.write_record(&r)?;
    }
    write(&a.out, "sensitivity.csv", w.into_inner().context("flushing sensitivity.csv")?)?;
    Ok(code)
}

pub fn static_model(a: &RunArgs, year: Option<i32>) -> Result<Code> {
    let build = build_options(a)?;
    let cfg = solve_config(a)?;
    let l = load(&a.instance, a.scenarios.as_deref(), a.paths.as_deref())?;
    let year = year.unwrap_or_else(|| *l.inst.time.periods.last().expect("validated instances have periods"));
    let st = static_run(&l.inst, &l.paths, &l.tree, year, build, &cfg)?;
    let code = write_run(&a.out, "static", &l.inst, &l.paths, &l.tree, &st.run)?;
    let em = emissions_report(&st.run.program, st.run.values()?, &l.inst, &l.tree)?;
    let doc = json!({
        "year": st.year,
        "period": st.period,
        "status": st.run.result.status.to_string(),
        "objective": st.run.result.objective,
        "expected_emissions_kt": em.expected_total_kt,
    });
    write(&a.out, "static.json", report::to_json(&doc)?)?;
    announce(&format!("static {year}"), &st.run, &a.out);
    Ok(code)
}

pub fn paths(dir: &Path, out: &Path, scenarios: Option<&Path>) -> Result<Code> {
    let l = load(dir, scenarios, None)?;
    create_dir(out)?;
    write(out, "paths.csv", write_paths_csv(&l.inst, &l.paths))?;
    let mut by_modes: BTreeMap<String, usize> = BTreeMap::new();
    for p in &l.paths.paths {
        let key = p.modes.iter().map(|m| m.to_string()).collect::<Vec<_>>().join("-");
        *by_modes.entry(key).or_default() += 1;
    }
    let doc = json!({
        "instance": l.inst.name,
        "paths": l.paths.len(),
        "unimodal": l.paths.unimodal.len(),
        "multimodal": l.paths.len() - l.paths.unimodal.len(),
        "od_pairs": l.paths.by_od.len(),
        "by_mode_sequence": by_modes,
    });
    write(out, "paths_summary.json", report::to_json(&doc)?)?;
    println!("{}: {} paths -> {}", l.inst.name, l.paths.len(), out.display());
    Ok(Code::Ok)
}

pub fn export_mps(a: &RunArgs) -> Result<Code> {
    let build = build_options(a)?;
    let l = load(&a.instance, a.scenarios.as_deref(), a.paths.as_deref())?;
    let prog = assemble(&l.inst, &l.paths, &l.tree, build)?;
    create_dir(&a.out)?;
    write(&a.out, "model.mps", mps::write_mps(&prog.lp, "STRAM")?)?;
    write(&a.out, "model.map", mps::write_name_map(&prog.lp)?)?;
    let stats = prog.stats();
    write(&a.out, "stats.json", report::stats_json(&stats)?)?;
    println!("{}: {} rows, {} columns -> {}", l.inst.name, stats.rows, stats.columns, a.out.join("model.mps").display());
    Ok(Code::Ok)
}
