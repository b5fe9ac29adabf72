//! Serialization of results: JSON documents and plot-ready CSV tables.
//! Every number is written with at most 12 significant digits.

use serde::Serialize;
use serde_json::Value;

use crate::analysis::{EmissionsReport, KpiReport, Run};
use crate::diffusion::AdoptionTable;
use crate::model::Instance;
use crate::program::{cvar, ProgramStats, Replay};
use crate::scenario::ScenarioTree;
use crate::{Error, Result};

pub const SIGNIFICANT_DIGITS: usize = 12;

/// Rounds to 12 significant digits; non-finite values pass through.
pub fn round_sig(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return if v == 0.0 { 0.0 } else { v };
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v).parse().unwrap_or(v)
}

/// Text form of a number for CSV cells.
pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let r = round_sig(v);
    let plain = format!("{r}");
    let sci = format!("{r:e}");
    if plain.len() <= sci.len() + 4 {
        plain
    } else {
        sci
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if n.is_f64() {
                if let Some(f) = n.as_f64() {
                    if let Some(r) = serde_json::Number::from_f64(round_sig(f)) {
                        *n = r;
                    }
                }
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_value),
        Value::Object(o) => o.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Pretty JSON with rounded numbers. Non-finite numbers become `null`.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value).map_err(|e| Error::Model(format!("serialization failed: {e}")))?;
    round_value(&mut v);
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| Error::Model(format!("serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
}

#[derive(Serialize)]
struct ScenarioCostOut {
    scenario: usize,
    label: String,
    probability: f64,
    cost: f64,
}

#[derive(Serialize)]
struct VariableOut {
    name: String,
    value: f64,
}

#[derive(Serialize)]
struct SolutionOut<'a> {
    instance: &'a str,
    status: String,
    objective: Option<f64>,
    bound: f64,
    gap: f64,
    nodes: usize,
    lambda: f64,
    gamma: f64,
    /// Mean-CVaR value recomputed from the scenario costs.
    risk_objective: Option<f64>,
    expected_cost: Option<f64>,
    cvar: Option<f64>,
    scenarios: Vec<ScenarioCostOut>,
    replay: Option<&'a Replay>,
    message: Option<&'a str>,
    /// Nonzero columns.
    variables: Vec<VariableOut>,
}

/// The solution document: status, objective, per-scenario costs and nonzero variables.
pub fn solution_json(run: &Run, inst: &Instance, tree: &ScenarioTree) -> Result<String> {
    let prog = &run.program;
    let r = &run.result;
    let has = r.has_solution();
    let costs = if has { prog.scenario_costs(&r.values) } else { vec![f64::NAN; prog.num_scenarios()] };
    let expected: f64 = costs.iter().zip(&prog.probabilities).map(|(c, p)| c * p).sum();
    let out = SolutionOut {
        instance: &inst.name,
        status: r.status.to_string(),
        objective: has.then_some(r.objective),
        bound: r.bound,
        gap: r.gap,
        nodes: r.nodes,
        lambda: prog.options.lambda,
        gamma: prog.options.gamma,
        risk_objective: has.then(|| prog.risk_objective(&r.values)),
        expected_cost: has.then_some(expected),
        cvar: has.then(|| cvar(&costs, &prog.probabilities, prog.options.gamma)),
        scenarios: (0..prog.num_scenarios())
            .map(|s| ScenarioCostOut { scenario: s, label: tree.label(s).to_string(), probability: prog.probabilities[s], cost: costs[s] })
            .collect(),
        replay: run.replay.as_ref(),
        message: r.message.as_deref(),
        variables: if has {
            (0..prog.lp.num_cols())
                .filter(|&j| round_sig(r.values[j]) != 0.0)
                .map(|j| VariableOut { name: prog.lp.col_names[j].clone(), value: r.values[j] })
                .collect()
        } else {
            Vec::new()
        },
    };
    to_json(&out)
}

pub fn stats_json(stats: &ProgramStats) -> Result<String> {
    to_json(stats)
}

/// Investment and transport costs per period and scenario (undiscounted).
pub fn costs_csv(k: &KpiReport) -> String {
    csv_table(
        &[
            "period", "year", "scenario", "label", "edge", "charge", "node", "upgrade", "base", "carbon", "transfer", "empty", "discounted",
        ],
        k.periods.iter().map(|r| {
            vec![
                r.period.to_string(),
                r.year.to_string(),
                r.scenario.to_string(),
                r.label.clone(),
                fmt_num(r.investment.edge),
                fmt_num(r.investment.charge),
                fmt_num(r.investment.node),
                fmt_num(r.investment.upgrade),
                fmt_num(r.transport.base),
                fmt_num(r.transport.carbon),
                fmt_num(r.transport.transfer),
                fmt_num(r.transport.empty),
                fmt_num(r.discounted),
            ]
        }),
    )
}

/// Transport work and fuel shares per mode, period and scenario.
pub fn splits_csv(k: &KpiReport) -> String {
    let mut rows = Vec::new();
    for m in &k.modes {
        for (fuel, share) in &m.shares {
            rows.push(vec![
                m.period.to_string(),
                m.year.to_string(),
                m.scenario.to_string(),
                m.mode.to_string(),
                fuel.clone(),
                fmt_num(m.work_tkm),
                fmt_num(*share),
                fmt_num(m.work_tkm * share),
            ]);
        }
    }
    csv_table(&["period", "year", "scenario", "mode", "fuel", "mode_work_tkm", "share", "work_tkm"], rows)
}

pub fn emissions_csv(e: &EmissionsReport) -> String {
    csv_table(
        &["period", "year", "scenario", "label", "loaded_kt", "empty_kt", "total_kt", "relative", "target"],
        e.rows.iter().map(|r| {
            vec![
                r.period.to_string(),
                r.year.to_string(),
                r.scenario.to_string(),
                r.label.clone(),
                fmt_num(r.loaded_kt),
                fmt_num(r.empty_kt),
                fmt_num(r.total_kt),
                fmt_opt(r.relative),
                fmt_opt(r.target),
            ]
        }),
    )
}

pub fn investments_csv(k: &KpiReport) -> String {
    csv_table(
        &["kind", "option", "description", "period", "year", "scenario", "value"],
        k.investments.iter().map(|d| {
            vec![
                d.kind.to_string(),
                d.option.to_string(),
                d.description.clone(),
                d.period.to_string(),
                d.year.to_string(),
                d.scenario.to_string(),
                fmt_num(d.value),
            ]
        }),
    )
}

/// Probability-weighted mean and standard deviation of each indicator.
pub fn dispersion_csv(k: &KpiReport) -> String {
    csv_table(
        &["period", "year", "metric", "mean", "std"],
        k.dispersion.iter().map(|d| vec![d.period.to_string(), d.year.to_string(), d.metric.clone(), fmt_num(d.mean), fmt_num(d.std)]),
    )
}

/// Adoption envelopes (tonne-km per year) of every new mode-fuel.
pub fn adoption_csv(inst: &Instance, tree: &ScenarioTree, table: &AdoptionTable) -> String {
    let mut rows = Vec::new();
    for (&(mf, s), curve) in &table.curves {
        let m = &inst.mode_fuels[mf];
        for (i, v) in curve.iter().enumerate() {
            rows.push(vec![
                m.mode.to_string(),
                inst.fuels[m.fuel].id.clone(),
                tree.label(s).to_string(),
                (table.first_year + i as i32).to_string(),
                fmt_num(*v),
            ]);
        }
    }
    csv_table(&["mode", "fuel", "scenario", "year", "bound"], rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounds_to_twelve_digits() {
        assert_eq!(round_sig(0.1 + 0.2), 0.3);
        assert_eq!(round_sig(1.0 / 3.0), 0.333333333333);
        assert_eq!(round_sig(123456789.123456789), 123456789.123);
        assert_eq!(round_sig(0.0), 0.0);
        assert_eq!(round_sig(-0.0), 0.0);
        assert!(round_sig(f64::INFINITY).is_infinite());
        assert_eq!(fmt_num(2.5), "2.5");
        assert_eq!(fmt_num(1e-20), "1e-20");
    }

    #[test]
    fn json_rounds_nested_numbers() {
        let v = serde_json::json!({"a": [0.30000000000000004, 1], "b": {"c": 2.0000000000001}});
        let s = to_json(&v).unwrap();
        assert!(s.contains("0.3"));
        assert!(!s.contains("0.30000000000000004"));
        assert!(s.contains("\"c\": 2.0"));
    }
}
