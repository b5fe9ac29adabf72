//! Two-stage scenario trees over optimistic/base/pessimistic fuel-group developments.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::Instance;
use crate::{Error, Result};

/// Relative deviations applied from the branch year.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Deviations {
    pub cost: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl Default for Deviations {
    fn default() -> Self {
        Deviations { cost: 0.25, alpha: 0.25, beta: 0.25 }
    }
}

impl Deviations {
    pub fn check(&self) -> std::result::Result<(), String> {
        for (name, v) in [("cost", self.cost), ("alpha", self.alpha), ("beta", self.beta)] {
            if !(0.0..1.0).contains(&v) {
                return Err(format!("{name} deviation must lie in [0, 1)"));
            }
        }
        Ok(())
    }
}

/// Direction of the cost deviation in optimistic scenarios.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostConvention {
    /// Optimistic development lowers costs, pessimistic raises them.
    #[default]
    OptimisticCheaper,
    /// Optimistic development raises costs, pessimistic lowers them.
    OptimisticDearer,
}

/// Scenario settings as read from `scenarios.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Fuel group ids varied across scenarios, in label order.
    pub varied_groups: Vec<String>,
    /// Defaults to the instance's branch year, else the first year.
    pub branch_year: Option<i32>,
    pub deviations: Deviations,
    pub cost_convention: CostConvention,
    /// Scenario label to probability; uniform when absent.
    pub probabilities: Option<BTreeMap<String, f64>>,
    /// Whether the all-base scenario is part of the tree.
    pub include_base: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            varied_groups: Vec::new(),
            branch_year: None,
            deviations: Deviations::default(),
            cost_convention: CostConvention::default(),
            probabilities: None,
            include_base: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum GroupState {
    Optimistic,
    Base,
    Pessimistic,
}

impl GroupState {
    pub fn letter(self) -> char {
        match self {
            GroupState::Optimistic => 'O',
            GroupState::Base => 'B',
            GroupState::Pessimistic => 'P',
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Scenario {
    pub label: String,
    /// One state per varied group of the tree.
    pub states: Vec<GroupState>,
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioTree {
    pub scenarios: Vec<Scenario>,
    pub branch_year: i32,
    /// Varied fuel groups (indices into `Instance::fuel_groups`).
    pub groups: Vec<usize>,
    pub deviations: Deviations,
    pub convention: CostConvention,
}

fn label_of(states: &[GroupState]) -> String {
    if states.is_empty() {
        "B".to_string()
    } else {
        states.iter().map(|s| s.letter()).collect()
    }
}

impl ScenarioTree {
    /// All optimistic/pessimistic combinations over `groups` plus the
    /// all-base scenario, ordered by label with O < B < P.
    pub fn generate(
        groups: &[usize],
        deviations: Deviations,
        convention: CostConvention,
        branch_year: i32,
        probabilities: Option<&BTreeMap<String, f64>>,
        include_base: bool,
    ) -> Result<Self> {
        let mut seen = HashSet::new();
        if let Some(g) = groups.iter().find(|&&g| !seen.insert(g)) {
            return Err(Error::Invalid(format!("duplicate varied fuel group {g}")));
        }
        deviations.check().map_err(Error::Invalid)?;
        let k = groups.len();
        let mut states: Vec<Vec<GroupState>> = Vec::new();
        if k > 0 {
            for mask in 0u32..(1 << k) {
                states.push(
                    (0..k)
                        .map(|i| if mask >> (k - 1 - i) & 1 == 0 { GroupState::Optimistic } else { GroupState::Pessimistic })
                        .collect(),
                );
            }
        }
        if include_base || k == 0 {
            states.push(vec![GroupState::Base; k]);
        }
        states.sort();
        let n = states.len() as f64;
        let mut scenarios: Vec<Scenario> =
            states.into_iter().map(|st| Scenario { label: label_of(&st), states: st, probability: 1.0 / n }).collect();
        if let Some(probs) = probabilities {
            for sc in &mut scenarios {
                sc.probability = *probs
                    .get(&sc.label)
                    .ok_or_else(|| Error::Invalid(format!("no probability given for scenario {}", sc.label)))?;
                if !(0.0..=1.0).contains(&sc.probability) {
                    return Err(Error::Invalid(format!("probability of {} outside [0, 1]", sc.label)));
                }
            }
            if let Some(extra) = probs.keys().find(|l| !scenarios.iter().any(|s| &s.label == *l)) {
                return Err(Error::Invalid(format!("probability given for unknown scenario {extra}")));
            }
            let total: f64 = scenarios.iter().map(|s| s.probability).sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::Invalid(format!("scenario probabilities sum to {total}, not 1")));
            }
        }
        Ok(ScenarioTree { scenarios, branch_year, groups: groups.to_vec(), deviations, convention })
    }

    /// The tree configured by the instance.
    pub fn from_instance(inst: &Instance) -> Result<Self> {
        let sc = &inst.scenarios;
        let mut groups = Vec::new();
        for g in &sc.varied_groups {
            groups.push(inst.group_index(g).ok_or_else(|| Error::Invalid(format!("unknown fuel group {g:?}")))?);
        }
        let branch = sc.branch_year.unwrap_or(inst.time.first_year);
        Self::generate(&groups, sc.deviations, sc.cost_convention, branch, sc.probabilities.as_ref(), sc.include_base)
    }

    /// Single all-base scenario with the same groups and branch year.
    pub fn base_only(&self) -> Self {
        let states = vec![GroupState::Base; self.groups.len()];
        ScenarioTree {
            scenarios: vec![Scenario { label: label_of(&states), states, probability: 1.0 }],
            branch_year: self.branch_year,
            groups: self.groups.clone(),
            deviations: self.deviations,
            convention: self.convention,
        }
    }

    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }

    pub fn label(&self, s: usize) -> &str {
        &self.scenarios[s].label
    }

    pub fn probability(&self, s: usize) -> f64 {
        self.scenarios[s].probability
    }

    /// Index of the all-base scenario, if present.
    pub fn base_index(&self) -> Option<usize> {
        self.scenarios.iter().position(|s| s.states.iter().all(|&g| g == GroupState::Base))
    }

    /// State of fuel group `group` in scenario `s`; unvaried groups are base.
    pub fn state(&self, s: usize, group: usize) -> GroupState {
        self.groups.iter().position(|&g| g == group).map_or(GroupState::Base, |i| self.scenarios[s].states[i])
    }

    /// Whether decisions in `year` are taken after the uncertainty is revealed.
    pub fn is_second_stage(&self, year: i32) -> bool {
        year >= self.branch_year
    }

    fn active_state(&self, s: usize, group: usize, year: i32) -> GroupState {
        if self.is_second_stage(year) {
            self.state(s, group)
        } else {
            GroupState::Base
        }
    }

    pub fn cost_multiplier(&self, s: usize, group: usize, year: i32) -> f64 {
        let d = self.deviations.cost;
        let cheaper = self.convention == CostConvention::OptimisticCheaper;
        match self.active_state(s, group, year) {
            GroupState::Base => 1.0,
            GroupState::Optimistic if cheaper => 1.0 - d,
            GroupState::Optimistic => 1.0 + d,
            GroupState::Pessimistic if cheaper => 1.0 + d,
            GroupState::Pessimistic => 1.0 - d,
        }
    }

    fn rate_multiplier(&self, d: f64, s: usize, group: usize, year: i32) -> f64 {
        match self.active_state(s, group, year) {
            GroupState::Base => 1.0,
            GroupState::Optimistic => 1.0 + d,
            GroupState::Pessimistic => 1.0 - d,
        }
    }

    pub fn alpha_multiplier(&self, s: usize, group: usize, year: i32) -> f64 {
        self.rate_multiplier(self.deviations.alpha, s, group, year)
    }

    pub fn beta_multiplier(&self, s: usize, group: usize, year: i32) -> f64 {
        self.rate_multiplier(self.deviations.beta, s, group, year)
    }

    /// Scenarios sharing the same history in `year`.
    pub fn partition(&self, year: i32) -> Vec<Vec<usize>> {
        if self.is_second_stage(year) {
            (0..self.len()).map(|s| vec![s]).collect()
        } else {
            vec![(0..self.len()).collect()]
        }
    }

    /// Lowest-index scenario of the block containing `s` in `year`.
    pub fn representative(&self, s: usize, year: i32) -> usize {
        if self.is_second_stage(year) {
            s
        } else {
            0
        }
    }
}

impl fmt::Display for ScenarioTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<&str> = self.scenarios.iter().map(|s| s.label.as_str()).collect();
        write!(f, "{} scenarios branching in {}: {}", self.len(), self.branch_year, labels.join(" "))
    }
}
