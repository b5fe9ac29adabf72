//! Solution analysis: cost, work and emission indicators, the value of the
//! stochastic solution, carbon price sensitivity and static-model runs.

use std::collections::BTreeMap;
use std::fs;
use std::process::Command;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::Serialize;
use stram_solver::solution::read_solution;
use stram_solver::{mps, solve, MilpOptions, SolveResult, Status};

use crate::model::{Instance, Mode};
use crate::paths::{generate_path_set, PathSet};
use crate::program::{assemble, BuildOptions, Replay, StochasticProgram, Var};
use crate::scenario::ScenarioTree;
use crate::{Error, Result};

/// Which solver handles the assembled programs.
#[derive(Clone, Debug, Default, PartialEq)]
pub enum Backend {
    #[default]
    Builtin,
    /// Shell command template; `{mps}` and `{solution}` are replaced by file paths.
    External(String),
}

#[derive(Clone, Debug)]
pub struct SolveConfig {
    pub milp: MilpOptions,
    pub backend: Backend,
    /// Upper bound on concurrently running solves.
    pub workers: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig { milp: MilpOptions::default(), backend: Backend::Builtin, workers: 1 }
    }
}

/// A solved program.
#[derive(Clone, Debug)]
pub struct Run {
    pub program: StochasticProgram,
    pub result: SolveResult,
    /// Row feasibility of the returned point; `None` without a point.
    pub replay: Option<Replay>,
}

impl Run {
    pub fn values(&self) -> Result<&[f64]> {
        if self.result.has_solution() {
            Ok(&self.result.values)
        } else {
            Err(Error::NoSolution { what: "solve".into(), status: self.result.status })
        }
    }
}

static EXTERNAL_RUNS: AtomicUsize = AtomicUsize::new(0);

fn solve_external(prog: &StochasticProgram, template: &str) -> Result<SolveResult> {
    let dir = std::env::temp_dir().join(format!("stram-{}-{}", std::process::id(), EXTERNAL_RUNS.fetch_add(1, Ordering::SeqCst)));
    fs::create_dir_all(&dir)?;
    let model = dir.join("model.mps");
    let sol = dir.join("model.sol");
    fs::write(&model, mps::write_mps(&prog.lp, "STRAM")?)?;
    fs::write(dir.join("model.map"), mps::write_name_map(&prog.lp)?)?;
    let cmd = template.replace("{mps}", &model.display().to_string()).replace("{solution}", &sol.display().to_string());
    log::info!("running external solver: {cmd}");
    let status = Command::new("sh").arg("-c").arg(&cmd).status()?;
    if !status.success() {
        return Err(Error::Io(std::io::Error::other(format!("external solver command failed ({status}): {cmd}"))));
    }
    let text = fs::read_to_string(&sol).map_err(|e| Error::input(sol.display(), e))?;
    let result = read_solution(&text, &prog.lp)?;
    let _ = fs::remove_dir_all(&dir);
    Ok(result)
}

/// Solves an assembled program and replays its rows.
pub fn solve_program(program: StochasticProgram, cfg: &SolveConfig) -> Result<Run> {
    let result = match &cfg.backend {
        Backend::Builtin => solve(&program.lp, &cfg.milp)?,
        Backend::External(template) => solve_external(&program, template)?,
    };
    log::info!(
        "solve: status {}, objective {}, gap {:.3e}, {} nodes, {:.2?}",
        result.status,
        result.objective,
        result.gap,
        result.nodes,
        result.wall_time
    );
    let replay = result.has_solution().then(|| program.replay(&result.values));
    Ok(Run { program, result, replay })
}

/// Assembles and solves the program for `tree`.
pub fn run_model(inst: &Instance, paths: &PathSet, tree: &ScenarioTree, build: BuildOptions, cfg: &SolveConfig) -> Result<Run> {
    solve_program(assemble(inst, paths, tree, build)?, cfg)
}

/// Calls `f(key, s, value)` for every column and every scenario it belongs to.
fn for_each_value(prog: &StochasticProgram, values: &[f64], mut f: impl FnMut(Var, usize, f64) -> Result<()>) -> Result<()> {
    for (j, &key) in prog.keys.iter().enumerate() {
        let Some(s0) = key.scenario() else { continue };
        let v = values[j];
        if v == 0.0 {
            continue;
        }
        if prog.merged() && prog.is_first_stage(&key) {
            for s in 0..prog.num_scenarios() {
                f(key.with_scenario(s), s, v)?;
            }
        } else {
            f(key, s0, v)?;
        }
    }
    Ok(())
}

// Indicators.

/// Investment outlays in one period, undiscounted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct InvestmentCosts {
    pub edge: f64,
    pub charge: f64,
    pub node: f64,
    pub upgrade: f64,
}

impl InvestmentCosts {
    pub fn total(&self) -> f64 {
        self.edge + self.charge + self.node + self.upgrade
    }
}

/// Yearly transport costs in one period, undiscounted. `carbon` covers loaded
/// and empty trips; `empty` is the non-carbon part of empty trips.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct TransportCosts {
    pub base: f64,
    pub carbon: f64,
    pub transfer: f64,
    pub empty: f64,
}

impl TransportCosts {
    pub fn total(&self) -> f64 {
        self.base + self.carbon + self.transfer + self.empty
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeriodKpi {
    pub period: usize,
    pub year: i32,
    pub scenario: usize,
    pub label: String,
    pub investment: InvestmentCosts,
    pub transport: TransportCosts,
    /// Discounted contribution of this period to the scenario's total cost.
    pub discounted: f64,
    pub emissions_kt: f64,
    /// Emissions relative to the first period of the same scenario.
    pub emissions_relative: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModeKpi {
    pub period: usize,
    pub year: i32,
    pub scenario: usize,
    pub mode: Mode,
    /// Transport work in tonne-km per year.
    pub work_tkm: f64,
    /// Share of each fuel in the mode's work; zero when the mode carries nothing.
    pub shares: BTreeMap<String, f64>,
}

/// Probability-weighted mean and standard deviation of a metric across scenarios.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Dispersion {
    pub period: usize,
    pub year: i32,
    pub metric: String,
    pub mean: f64,
    pub std: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioTotal {
    pub scenario: usize,
    pub label: String,
    pub probability: f64,
    /// Sum of the discounted period contributions.
    pub discounted_cost: f64,
}

/// An investment with a nonzero decision value.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvestmentDecision {
    pub kind: &'static str,
    pub option: usize,
    pub description: String,
    pub period: usize,
    pub year: i32,
    pub scenario: usize,
    pub value: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct KpiReport {
    pub periods: Vec<PeriodKpi>,
    pub modes: Vec<ModeKpi>,
    pub dispersion: Vec<Dispersion>,
    pub scenarios: Vec<ScenarioTotal>,
    pub investments: Vec<InvestmentDecision>,
}

impl KpiReport {
    pub fn period(&self, t: usize, s: usize) -> Option<&PeriodKpi> {
        self.periods.iter().find(|k| k.period == t && k.scenario == s)
    }

    pub fn mode(&self, m: Mode, t: usize, s: usize) -> Option<&ModeKpi> {
        self.modes.iter().find(|k| k.mode == m && k.period == t && k.scenario == s)
    }

    pub fn dispersion_of(&self, metric: &str, t: usize) -> Option<&Dispersion> {
        self.dispersion.iter().find(|d| d.metric == metric && d.period == t)
    }
}

#[derive(Clone, Copy, Default)]
struct Acc {
    inv: InvestmentCosts,
    tr: TransportCosts,
    loaded_kg: f64,
    empty_kg: f64,
}

/// Per `(period, scenario)` accumulators and per `(mode_fuel, period, scenario)` work.
struct Aggregate {
    acc: Vec<Vec<Acc>>,
    work: BTreeMap<(usize, usize, usize), f64>,
    investments: Vec<InvestmentDecision>,
}

fn aggregate(prog: &StochasticProgram, values: &[f64], inst: &Instance, paths: &PathSet, tree: &ScenarioTree) -> Result<Aggregate> {
    let n_t = inst.time.num_periods();
    let n_s = prog.num_scenarios();
    let mut agg = Aggregate { acc: vec![vec![Acc::default(); n_s]; n_t], work: BTreeMap::new(), investments: Vec::new() };
    let edge_label = |e: usize| {
        let edge = &inst.edges[e];
        format!("{}-{} {} {}", inst.nodes[edge.ends.0].id, inst.nodes[edge.ends.1].id, edge.mode, edge.route)
    };
    for_each_value(prog, values, |key, s, v| {
        let Some(t) = key.period() else {
            return Ok(());
        };
        let acc = &mut agg.acc[t][s];
        let mut decision = |kind: &'static str, option: usize, description: String| {
            agg.investments.push(InvestmentDecision { kind, option, description, period: t, year: inst.time.periods[t], scenario: s, value: v });
        };
        match key {
            Var::ArcFlow { a, mf, p, .. } => {
                let c = inst.generalized_cost(tree, a, mf, p, t, s)?;
                acc.tr.base += v * c.base;
                acc.tr.carbon += v * c.carbon;
                acc.loaded_kg += v * inst.emission(a, mf, p, t).unwrap_or(0.0);
            }
            Var::Balance { a, mf, v: veh, .. } => {
                let c = inst.empty_cost(tree, a, mf, veh, t, s)?;
                acc.tr.empty += v * c.base;
                acc.tr.carbon += v * c.carbon;
                acc.empty_kg += v * inst.empty_emission(a, mf, veh, t)?;
            }
            Var::PathFlow { k, p, .. } => {
                let unit: f64 = paths.paths[k].transfers.iter().map(|&(_, m1, m2)| inst.transfer_cost(m1, m2, p)).sum();
                acc.tr.transfer += v * unit;
            }
            Var::EdgeExpansion { x, .. } => {
                acc.inv.edge += v * inst.edge_expansions[x].cost;
                decision("edge", x, edge_label(inst.edge_expansions[x].edge));
            }
            Var::NodeExpansion { n, .. } => {
                let ni = &inst.node_investments[n];
                acc.inv.node += v * ni.cost;
                decision("node", n, format!("{} {}", inst.nodes[ni.node].id, inst.terminal_classes[ni.class].id));
            }
            Var::Charging { c, .. } => {
                let opt = &inst.charging[c];
                acc.inv.charge += v * opt.unit_cost;
                decision("charging", c, format!("{} {}", edge_label(opt.edge), inst.mode_fuel_label(opt.mode_fuel)));
            }
            Var::Upgrade { u, .. } => {
                let opt = &inst.upgrades[u];
                acc.inv.upgrade += v * opt.cost;
                decision("upgrade", u, format!("{} {}", edge_label(opt.edge), inst.mode_fuel_label(opt.mode_fuel)));
            }
            Var::Work { mf, .. } => {
                *agg.work.entry((mf, t, s)).or_default() += v;
            }
            _ => {}
        }
        Ok(())
    })?;
    agg.investments.sort_by(|a, b| (a.scenario, a.period, a.kind, a.option).cmp(&(b.scenario, b.period, b.kind, b.option)));
    Ok(agg)
}

fn weighted_moments(xs: &[f64], probs: &[f64]) -> (f64, f64) {
    let mean: f64 = xs.iter().zip(probs).map(|(x, p)| x * p).sum();
    let var: f64 = xs.iter().zip(probs).map(|(x, p)| p * (x - mean).powi(2)).sum();
    (mean, var.max(0.0).sqrt())
}

/// Cost, work, fuel share and emission indicators of a solution.
pub fn kpis(prog: &StochasticProgram, values: &[f64], inst: &Instance, paths: &PathSet, tree: &ScenarioTree) -> Result<KpiReport> {
    if values.len() != prog.lp.num_cols() {
        return Err(Error::Model("solution does not match the program".into()));
    }
    let agg = aggregate(prog, values, inst, paths, tree)?;
    let time = &inst.time;
    let n_s = prog.num_scenarios();
    let mut report = KpiReport { investments: agg.investments, ..KpiReport::default() };
    for t in 0..time.num_periods() {
        for s in 0..n_s {
            let a = agg.acc[t][s];
            let kt = (a.loaded_kg + a.empty_kg) / 1e6;
            let base_kt = (agg.acc[0][s].loaded_kg + agg.acc[0][s].empty_kg) / 1e6;
            report.periods.push(PeriodKpi {
                period: t,
                year: time.periods[t],
                scenario: s,
                label: tree.label(s).to_string(),
                investment: a.inv,
                transport: a.tr,
                discounted: time.operational_factor(t) * a.tr.total() + time.investment_factor(t) * a.inv.total(),
                emissions_kt: kt,
                emissions_relative: (base_kt > 0.0).then(|| kt / base_kt),
            });
            for m in inst.modes() {
                let mfs: Vec<usize> = inst.mode_fuels_of(m).collect();
                let work: f64 = mfs.iter().map(|&mf| agg.work.get(&(mf, t, s)).copied().unwrap_or(0.0)).sum();
                let shares = mfs
                    .iter()
                    .map(|&mf| {
                        let q = agg.work.get(&(mf, t, s)).copied().unwrap_or(0.0);
                        (inst.fuels[inst.mode_fuels[mf].fuel].id.clone(), if work > 0.0 { q / work } else { 0.0 })
                    })
                    .collect();
                report.modes.push(ModeKpi { period: t, year: time.periods[t], scenario: s, mode: m, work_tkm: work, shares });
            }
        }
    }
    for s in 0..n_s {
        report.scenarios.push(ScenarioTotal {
            scenario: s,
            label: tree.label(s).to_string(),
            probability: prog.probabilities[s],
            discounted_cost: report.periods.iter().filter(|k| k.scenario == s).map(|k| k.discounted).sum(),
        });
    }
    // Dispersion across scenarios.
    for t in 0..time.num_periods() {
        let rows: Vec<&PeriodKpi> = (0..n_s).map(|s| report.period(t, s).unwrap()).collect();
        let mut metrics: Vec<(String, Vec<f64>)> = vec![
            ("investment_edge".into(), rows.iter().map(|k| k.investment.edge).collect()),
            ("investment_charge".into(), rows.iter().map(|k| k.investment.charge).collect()),
            ("investment_node".into(), rows.iter().map(|k| k.investment.node).collect()),
            ("investment_upgrade".into(), rows.iter().map(|k| k.investment.upgrade).collect()),
            ("transport_base".into(), rows.iter().map(|k| k.transport.base).collect()),
            ("transport_carbon".into(), rows.iter().map(|k| k.transport.carbon).collect()),
            ("transport_transfer".into(), rows.iter().map(|k| k.transport.transfer).collect()),
            ("transport_empty".into(), rows.iter().map(|k| k.transport.empty).collect()),
            ("emissions_kt".into(), rows.iter().map(|k| k.emissions_kt).collect()),
        ];
        for m in inst.modes() {
            let ks: Vec<&ModeKpi> = (0..n_s).map(|s| report.mode(m, t, s).unwrap()).collect();
            metrics.push((format!("work_tkm/{m}"), ks.iter().map(|k| k.work_tkm).collect()));
            for fuel in ks[0].shares.keys() {
                metrics.push((format!("share/{m}/{fuel}"), ks.iter().map(|k| k.shares[fuel]).collect()));
            }
        }
        for (metric, xs) in metrics {
            let (mean, std) = weighted_moments(&xs, &prog.probabilities);
            report.dispersion.push(Dispersion { period: t, year: time.periods[t], metric, mean, std });
        }
    }
    Ok(report)
}

// Emissions.

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmissionRow {
    pub period: usize,
    pub year: i32,
    /// Number of years the period lasts.
    pub years: i32,
    pub scenario: usize,
    pub label: String,
    /// Yearly emissions of loaded trips in kt CO2e.
    pub loaded_kt: f64,
    /// Yearly emissions of empty trips in kt CO2e.
    pub empty_kt: f64,
    pub total_kt: f64,
    /// Relative to the first period of the same scenario.
    pub relative: Option<f64>,
    /// Target emissions relative to the first period, when configured.
    pub target: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct EmissionsReport {
    pub rows: Vec<EmissionRow>,
    /// Expected emissions over the whole horizon (yearly emissions times period length) in kt CO2e.
    pub expected_total_kt: f64,
}

impl EmissionsReport {
    pub fn row(&self, t: usize, s: usize) -> Option<&EmissionRow> {
        self.rows.iter().find(|r| r.period == t && r.scenario == s)
    }

    /// Horizon emissions of scenario `s` in kt CO2e.
    pub fn scenario_total_kt(&self, s: usize) -> f64 {
        self.rows.iter().filter(|r| r.scenario == s).map(|r| r.total_kt * r.years as f64).sum()
    }
}

/// Emission trajectories of a solution against the configured targets.
pub fn emissions_report(prog: &StochasticProgram, values: &[f64], inst: &Instance, tree: &ScenarioTree) -> Result<EmissionsReport> {
    let time = &inst.time;
    let n_s = prog.num_scenarios();
    let mut kg = vec![vec![(0.0, 0.0); n_s]; time.num_periods()];
    for_each_value(prog, values, |key, s, v| {
        match key {
            Var::ArcFlow { a, mf, p, t, .. } => kg[t][s].0 += v * inst.emission(a, mf, p, t).unwrap_or(0.0),
            Var::Balance { a, mf, v: veh, t, .. } => kg[t][s].1 += v * inst.empty_emission(a, mf, veh, t)?,
            _ => {}
        }
        Ok(())
    })?;
    let mut report = EmissionsReport::default();
    for t in 0..time.num_periods() {
        let years = time.period_end(t) - time.periods[t];
        for s in 0..n_s {
            let (loaded, empty) = kg[t][s];
            let total = (loaded + empty) / 1e6;
            let base = (kg[0][s].0 + kg[0][s].1) / 1e6;
            report.rows.push(EmissionRow {
                period: t,
                year: time.periods[t],
                years,
                scenario: s,
                label: tree.label(s).to_string(),
                loaded_kt: loaded / 1e6,
                empty_kt: empty / 1e6,
                total_kt: total,
                relative: (base > 0.0).then(|| total / base),
                target: inst.years[time.year_index(time.periods[t])].emission_target,
            });
        }
    }
    report.expected_total_kt = (0..n_s).map(|s| prog.probabilities[s] * report.scenario_total_kt(s)).sum();
    Ok(report)
}

// Value of the stochastic solution.

/// `(EEV - SP) / EEV`.
pub fn vss_relative(eev: f64, sp: f64) -> f64 {
    (eev - sp) / eev
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VssReport {
    pub sp_objective: f64,
    pub ev_objective: f64,
    /// `+inf` when the expected value first stage is infeasible in the stochastic program.
    pub eev_objective: f64,
    pub vss_absolute: f64,
    pub vss_relative: f64,
    pub sp_status: String,
    pub ev_status: String,
    pub eev_status: String,
    pub sp_gap: f64,
    pub eev_gap: f64,
    pub investments_only: bool,
    pub fixed_columns: usize,
    /// Expected horizon emissions in kt CO2e.
    pub sp_emissions_kt: f64,
    pub eev_emissions_kt: Option<f64>,
    /// EEV minus SP emissions, absolute and relative to EEV.
    pub emissions_delta_kt: Option<f64>,
    pub emissions_delta_relative: Option<f64>,
    pub diagnosis: Option<String>,
}

pub struct VssOutcome {
    pub report: VssReport,
    pub sp: Run,
    pub ev: Run,
    pub eev: Run,
}

fn require_solution(run: &Run, what: &str) -> Result<()> {
    if run.result.has_solution() {
        Ok(())
    } else {
        Err(Error::NoSolution { what: what.into(), status: run.result.status })
    }
}

/// Solves the stochastic program, the expected value program on the base
/// scenario, and the stochastic program with the expected value first stage fixed.
pub fn compute_vss(
    inst: &Instance,
    paths: &PathSet,
    tree: &ScenarioTree,
    build: BuildOptions,
    cfg: &SolveConfig,
    investments_only: bool,
) -> Result<VssOutcome> {
    let sp_prog = assemble(inst, paths, tree, build)?;
    let ev_prog = assemble(inst, paths, &tree.base_only(), build)?;
    let mut eev_prog = sp_prog.clone();
    let (sp, ev) = if cfg.workers > 1 {
        std::thread::scope(|scope| {
            let h = scope.spawn(|| solve_program(sp_prog, cfg));
            let ev = solve_program(ev_prog, cfg);
            (h.join().expect("solver thread panicked"), ev)
        })
    } else {
        (solve_program(sp_prog, cfg), solve_program(ev_prog, cfg))
    };
    let (sp, ev) = (sp?, ev?);
    require_solution(&sp, "stochastic program")?;
    require_solution(&ev, "expected value program")?;
    let fixed = eev_prog.fix_first_stage(&ev.program, &ev.result.values, investments_only);
    let eev = solve_program(eev_prog, cfg)?;

    let sp_em = emissions_report(&sp.program, &sp.result.values, inst, tree)?.expected_total_kt;
    let mut diagnosis = None;
    let (eev_obj, eev_em) = if eev.result.has_solution() {
        let em = emissions_report(&eev.program, &eev.result.values, inst, tree)?.expected_total_kt;
        (eev.result.objective, Some(em))
    } else {
        diagnosis = Some(match eev.result.status {
            Status::Infeasible => "the expected value first-stage decisions are infeasible in some scenario".to_string(),
            st => format!("the fixed program could not be solved (status {st})"),
        });
        (f64::INFINITY, None)
    };
    let sp_obj = sp.result.objective;
    if eev_obj < sp_obj {
        diagnosis = Some(format!(
            "negative VSS lies within the optimality gap of the stochastic solve ({:.3e}); re-solve with a smaller gap",
            sp.result.gap
        ));
    }
    let report = VssReport {
        sp_objective: sp_obj,
        ev_objective: ev.result.objective,
        eev_objective: eev_obj,
        vss_absolute: eev_obj - sp_obj,
        vss_relative: if eev_obj.is_finite() { vss_relative(eev_obj, sp_obj) } else { 1.0 },
        sp_status: sp.result.status.to_string(),
        ev_status: ev.result.status.to_string(),
        eev_status: eev.result.status.to_string(),
        sp_gap: sp.result.gap,
        eev_gap: eev.result.gap,
        investments_only,
        fixed_columns: fixed,
        sp_emissions_kt: sp_em,
        eev_emissions_kt: eev_em,
        emissions_delta_kt: eev_em.map(|e| e - sp_em),
        emissions_delta_relative: eev_em.map(|e| (e - sp_em) / e),
        diagnosis,
    };
    Ok(VssOutcome { report, sp, ev, eev })
}

// Carbon price sensitivity.

pub struct SensitivityPoint {
    pub factor: f64,
    pub instance: Instance,
    pub paths: PathSet,
    pub run: Run,
    pub emissions: EmissionsReport,
    pub kpis: KpiReport,
}

fn sensitivity_point(inst: &Instance, tree: &ScenarioTree, factor: f64, build: BuildOptions, cfg: &SolveConfig) -> Result<SensitivityPoint> {
    let inst = inst.with_carbon_factor(factor);
    let paths = generate_path_set(&inst, tree)?;
    let run = run_model(&inst, &paths, tree, build, cfg)?;
    let values = run.values()?;
    let emissions = emissions_report(&run.program, values, &inst, tree)?;
    let kpis = kpis(&run.program, values, &inst, &paths, tree)?;
    Ok(SensitivityPoint { factor, instance: inst, paths, run, emissions, kpis })
}

/// Re-solves the model with every carbon price scaled by each factor.
pub fn carbon_sensitivity(inst: &Instance, tree: &ScenarioTree, factors: &[f64], build: BuildOptions, cfg: &SolveConfig) -> Result<Vec<SensitivityPoint>> {
    if let Some(f) = factors.iter().find(|f| !(**f >= 0.0) || !f.is_finite()) {
        return Err(Error::Model(format!("carbon price factor {f} must be a nonnegative number")));
    }
    let workers = cfg.workers.max(1);
    let mut out: Vec<Option<Result<SensitivityPoint>>> = (0..factors.len()).map(|_| None).collect();
    for (chunk_idx, chunk) in factors.chunks(workers).enumerate() {
        let results: Vec<Result<SensitivityPoint>> = std::thread::scope(|scope| {
            let handles: Vec<_> = chunk.iter().map(|&f| scope.spawn(move || sensitivity_point(inst, tree, f, build, cfg))).collect();
            handles.into_iter().map(|h| h.join().expect("solver thread panicked")).collect()
        });
        for (i, r) in results.into_iter().enumerate() {
            out[chunk_idx * workers + i] = Some(r);
        }
    }
    out.into_iter().map(|r| r.unwrap()).collect()
}

// Static model.

pub struct StaticRun {
    pub period: usize,
    pub year: i32,
    pub run: Run,
    pub kpis: KpiReport,
}

pub fn static_period_of(inst: &Instance, year: i32) -> Result<usize> {
    inst.time.period_of_year(year).ok_or_else(|| Error::Model(format!("{year} is not a period year")))
}

/// Solves the single-period model for `year` with investments over the whole horizon.
pub fn static_run(inst: &Instance, paths: &PathSet, tree: &ScenarioTree, year: i32, build: BuildOptions, cfg: &SolveConfig) -> Result<StaticRun> {
    let period = static_period_of(inst, year)?;
    let run = run_model(inst, paths, tree, BuildOptions { static_period: Some(period), ..build }, cfg)?;
    let kpis = kpis(&run.program, run.values()?, inst, paths, tree)?;
    Ok(StaticRun { period, year, run, kpis })
}

/// Per-scenario discounted cost of period `t` operations plus all investments.
pub fn restricted_costs(report: &KpiReport, inst: &Instance, t: usize) -> Vec<f64> {
    let mut out = vec![0.0; report.scenarios.len()];
    for k in &report.periods {
        out[k.scenario] += inst.time.investment_factor(k.period) * k.investment.total();
        if k.period == t {
            out[k.scenario] += inst.time.operational_factor(t) * k.transport.total();
        }
    }
    out
}
