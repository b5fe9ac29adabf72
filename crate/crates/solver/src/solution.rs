//! Plain-text solution exchange.
//!
//! ```text
//! # comment lines start with '#'
//! status optimal
//! objective -3
//! C0000001 1
//! C0000002 0.25
//! ```
//!
//! `status` and `objective` are optional; every other non-empty line is a
//! column name (MPS alias or descriptive name) followed by its value.
//! Columns that do not appear are zero. Values are written in shortest
//! round-trip form so a written solution reads back bit-identically.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::mps::col_alias;
use crate::{relative_gap, LinearProgram, SolveResult, SolverError, Status};

/// Writes `result` for `lp`; `aliases` selects MPS aliases over
/// descriptive names.
pub fn write_solution(lp: &LinearProgram, result: &SolveResult, aliases: bool) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "status {}", result.status);
    if result.has_solution() {
        let _ = writeln!(out, "objective {:?}", result.objective);
        for (j, v) in result.values.iter().enumerate() {
            let name = if aliases || lp.col_names[j].is_empty() { col_alias(j) } else { lp.col_names[j].clone() };
            let _ = writeln!(out, "{name} {v:?}");
        }
    }
    out
}

/// Reads a solution for `lp`. The objective is recomputed from the values;
/// a mismatch with a stated `objective` line is only logged.
pub fn read_solution(text: &str, lp: &LinearProgram) -> Result<SolveResult, SolverError> {
    let mut index: HashMap<String, usize> = HashMap::new();
    for j in 0..lp.num_cols() {
        index.insert(col_alias(j), j);
        if !lp.col_names[j].is_empty() {
            index.insert(lp.col_names[j].clone(), j);
        }
    }
    let err = |ln: usize, msg: String| SolverError::Solution(format!("line {}: {msg}", ln + 1));
    let mut status: Option<Status> = None;
    let mut stated: Option<f64> = None;
    let mut values = vec![0.0; lp.num_cols()];
    let mut seen = vec![false; lp.num_cols()];
    let mut any = false;
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let (Some(name), Some(value)) = (it.next(), it.next()) else {
            return Err(err(ln, format!("expected `name value`, got {line:?}")));
        };
        match name {
            "status" => {
                status = Some(Status::parse(value).ok_or_else(|| err(ln, format!("unknown status {value:?}")))?);
            }
            "objective" => {
                stated = Some(value.parse().map_err(|_| err(ln, format!("bad objective {value:?}")))?);
            }
            _ => {
                let &j = index.get(name).ok_or_else(|| err(ln, format!("unknown variable {name:?}")))?;
                if seen[j] {
                    return Err(err(ln, format!("variable {name:?} listed twice")));
                }
                seen[j] = true;
                values[j] = value.parse().map_err(|_| err(ln, format!("bad value {value:?}")))?;
                any = true;
            }
        }
    }
    let status = status.unwrap_or(if any { Status::Feasible } else { Status::Infeasible });
    let mut result = SolveResult::empty(status);
    if any || matches!(status, Status::Optimal | Status::Feasible) {
        let objective = lp.evaluate_objective(&values);
        if let Some(s) = stated {
            if (s - objective).abs() > 1e-6 * objective.abs().max(1.0) {
                log::warn!("stated objective {s} differs from recomputed {objective}");
            }
        }
        result.objective = objective;
        result.values = values;
        if status == Status::Optimal {
            result.bound = objective;
            result.gap = relative_gap(objective, objective);
        }
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::RowSense;

    fn toy() -> LinearProgram {
        let mut lp = LinearProgram::new();
        let x = lp.add_column("flow[a]", 0.1, 0.0, 10.0);
        let b = lp.add_binary("open[a]", 7.0);
        lp.add_row("cap", [(x, 1.0), (b, -10.0)], RowSense::Le, 0.0);
        lp
    }

    #[test]
    fn roundtrip_is_exact() {
        let lp = toy();
        let mut r = SolveResult::empty(Status::Optimal);
        r.values = vec![1.0 / 3.0, 1.0];
        r.objective = lp.evaluate_objective(&r.values);
        for aliases in [true, false] {
            let back = read_solution(&write_solution(&lp, &r, aliases), &lp).unwrap();
            assert_eq!(back.values, r.values);
            assert_eq!(back.objective, r.objective);
            assert_eq!(back.status, Status::Optimal);
        }
    }

    #[test]
    fn unknown_variable_is_error() {
        let lp = toy();
        assert!(read_solution("status optimal\nbogus 1\n", &lp).is_err());
        assert!(read_solution("C0000003 1\n", &lp).is_err());
    }

    #[test]
    fn missing_columns_are_zero() {
        let lp = toy();
        let r = read_solution("# from somewhere\nC0000002 1\n", &lp).unwrap();
        assert_eq!(r.values, vec![0.0, 1.0]);
        assert_eq!(r.status, Status::Feasible);
        assert_eq!(r.objective, 7.0);
    }
}
