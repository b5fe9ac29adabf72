//! Deterministic equivalent of the two-stage mean-CVaR program.

mod build;
mod catalog;

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;
use stram_solver::{LinearProgram, RowSense};

pub use build::assemble;
pub use catalog::{Block, RowTag, Var};

use crate::{Error, Result};

/// How first-stage decisions are shared across scenarios.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NonAnticipativity {
    /// One variable per first-stage decision.
    #[default]
    Merged,
    /// One copy per scenario linked by equality rows.
    Explicit,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BuildOptions {
    /// Weight of the CVaR term.
    pub lambda: f64,
    /// CVaR confidence level.
    pub gamma: f64,
    /// Build the static single-period model for this period.
    pub static_period: Option<usize>,
    pub nonanticipativity: NonAnticipativity,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { lambda: 0.2, gamma: 0.8, static_period: None, nonanticipativity: NonAnticipativity::Merged }
    }
}

impl BuildOptions {
    pub fn check(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::Model("lambda must lie in [0, 1]".into()));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::Model("gamma must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

/// The assembled program with its variable catalog and row provenance.
#[derive(Clone, Debug)]
pub struct StochasticProgram {
    pub lp: LinearProgram,
    /// Key of every column (first-stage keys carry the representative scenario when merged).
    pub keys: Vec<Var>,
    index: HashMap<Var, usize>,
    pub tags: Vec<RowTag>,
    pub options: BuildOptions,
    pub periods: Vec<i32>,
    pub first_year: i32,
    pub branch_year: i32,
    pub probabilities: Vec<f64>,
    /// Linear expression of each scenario's discounted total cost.
    pub cost_exprs: Vec<Vec<(usize, f64)>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct BlockStats {
    pub rows: usize,
    pub nonzeros: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ProgramStats {
    pub rows: usize,
    pub columns: usize,
    pub nonzeros: usize,
    pub binaries: usize,
    pub scenarios: usize,
    pub blocks: BTreeMap<String, BlockStats>,
    /// Column count per variable family.
    pub variables: BTreeMap<String, usize>,
}

/// Row feasibility of a solution.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Replay {
    pub max_abs: f64,
    /// Violation relative to `max(1, |rhs|, sum |a_j x_j|)`.
    pub max_rel: f64,
    pub worst_row: Option<String>,
    /// Largest deviation of a demand row from its right-hand side.
    pub demand_max_abs: f64,
    pub bound_violation: f64,
    pub integrality_violation: f64,
}

impl StochasticProgram {
    pub fn num_scenarios(&self) -> usize {
        self.probabilities.len()
    }

    pub fn merged(&self) -> bool {
        self.options.nonanticipativity == NonAnticipativity::Merged
    }

    /// Whether a key's decision is taken before the branch year.
    pub fn is_first_stage(&self, key: &Var) -> bool {
        key.decision_year(&self.periods, self.first_year).map_or(false, |y| y < self.branch_year)
    }

    /// Key under which `key` is stored.
    pub fn resolve(&self, key: Var) -> Var {
        if self.merged() && self.is_first_stage(&key) {
            key.with_scenario(0)
        } else {
            key
        }
    }

    pub fn col(&self, key: Var) -> Option<usize> {
        self.index.get(&self.resolve(key)).copied()
    }

    /// Value of `key` in `values`; absent variables are zero.
    pub fn value(&self, values: &[f64], key: Var) -> f64 {
        self.col(key).map_or(0.0, |j| values[j])
    }

    pub fn scenario_costs(&self, values: &[f64]) -> Vec<f64> {
        self.cost_exprs.iter().map(|e| e.iter().map(|&(j, c)| c * values[j]).sum()).collect()
    }

    /// `(1 - lambda) mean + lambda CVaR` of the scenario costs of `values`.
    pub fn risk_objective(&self, values: &[f64]) -> f64 {
        let f = self.scenario_costs(values);
        let mean: f64 = f.iter().zip(&self.probabilities).map(|(f, p)| f * p).sum();
        (1.0 - self.options.lambda) * mean + self.options.lambda * cvar(&f, &self.probabilities, self.options.gamma)
    }

    /// Columns of first-stage decisions.
    pub fn first_stage_columns(&self) -> Vec<usize> {
        (0..self.keys.len()).filter(|&j| self.is_first_stage(&self.keys[j])).collect()
    }

    /// Fixes first-stage columns to the values of a solution of `source`
    /// (matched by key with scenario 0). Returns the number of fixed columns.
    pub fn fix_first_stage(&mut self, source: &StochasticProgram, values: &[f64], investments_only: bool) -> usize {
        let mut fixed = 0;
        for j in self.first_stage_columns() {
            let key = self.keys[j];
            if investments_only && !key.is_investment() {
                continue;
            }
            let mut v = source.value(values, key.with_scenario(0));
            if self.lp.integer[j] {
                v = v.round();
            }
            let v = v.clamp(self.lp.lower[j], self.lp.upper[j]);
            self.lp.lower[j] = v;
            self.lp.upper[j] = v;
            fixed += 1;
        }
        fixed
    }

    pub fn stats(&self) -> ProgramStats {
        let mut st = ProgramStats {
            rows: self.lp.num_rows(),
            columns: self.lp.num_cols(),
            nonzeros: self.lp.num_nonzeros(),
            binaries: self.lp.num_integer(),
            scenarios: self.num_scenarios(),
            ..ProgramStats::default()
        };
        for (row, tag) in self.lp.rows.iter().zip(&self.tags) {
            let b = st.blocks.entry(tag.block.as_str().to_string()).or_default();
            b.rows += 1;
            b.nonzeros += row.coeffs.len();
        }
        for k in &self.keys {
            *st.variables.entry(k.family().to_string()).or_default() += 1;
        }
        st
    }

    pub fn replay(&self, values: &[f64]) -> Replay {
        let mut r = Replay::default();
        for (i, row) in self.lp.rows.iter().enumerate() {
            let v = row.violation(values);
            let rel = v / row.magnitude(values);
            if v > r.max_abs {
                r.max_abs = v;
            }
            if rel > r.max_rel {
                r.max_rel = rel;
                r.worst_row = Some(self.lp.row_names[i].clone());
            }
            if self.tags[i].block == Block::Demand {
                debug_assert_eq!(row.sense, RowSense::Eq);
                r.demand_max_abs = r.demand_max_abs.max(v);
            }
        }
        r.bound_violation = self.lp.max_bound_violation(values);
        r.integrality_violation = self.lp.max_integrality_violation(values);
        r
    }
}

/// CVaR at level `gamma` of a discrete cost distribution: the minimum over
/// thresholds `u` of `u + E[(f - u)^+] / (1 - gamma)`, attained at a scenario cost.
pub fn cvar(costs: &[f64], probs: &[f64], gamma: f64) -> f64 {
    costs
        .iter()
        .map(|&u| u + costs.iter().zip(probs).map(|(&f, &p)| p * (f - u).max(0.0)).sum::<f64>() / (1.0 - gamma))
        .fold(f64::INFINITY, f64::min)
}
