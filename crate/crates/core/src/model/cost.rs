//! Discount factors and generalized (base plus carbon) transport costs.

use std::collections::BTreeMap;

use super::Instance;
use crate::scenario::ScenarioTree;
use crate::{Error, Result};

/// `sum_{n=from}^{to-1} delta^(n - base)`.
pub fn discount_sum(delta: f64, from: i32, to: i32, base: i32) -> f64 {
    (from..to).map(|n| delta.powi(n - base)).sum()
}

/// Per-tonne cost split into its scenario-adjusted base part and its carbon part.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ArcCost {
    pub base: f64,
    pub carbon: f64,
}

impl ArcCost {
    pub fn total(&self) -> f64 {
        self.base + self.carbon
    }
}

impl Instance {
    fn missing(&self, what: &str, mf: usize, p: usize, t: usize) -> Error {
        Error::Model(format!(
            "missing {what} for {} product {} in period {}",
            self.mode_fuel_label(mf),
            self.products[p],
            self.time.periods[t]
        ))
    }

    /// Generalized loaded cost per tonne on arc `a`.
    pub fn generalized_cost(&self, tree: &ScenarioTree, a: usize, mf: usize, p: usize, t: usize, s: usize) -> Result<ArcCost> {
        let year = self.time.periods[t];
        let base = self.base_cost(a, mf, p, t).ok_or_else(|| self.missing("cost", mf, p, t))?;
        let kg = self.emission(a, mf, p, t).ok_or_else(|| self.missing("emission factor", mf, p, t))?;
        Ok(ArcCost {
            base: base * tree.cost_multiplier(s, self.group_of(mf), year),
            carbon: self.carbon_price(year) * kg / 1000.0,
        })
    }

    /// Generalized cost per tonne of empty capacity of vehicle type `v` on arc `a`.
    pub fn empty_cost(&self, tree: &ScenarioTree, a: usize, mf: usize, v: usize, t: usize, s: usize) -> Result<ArcCost> {
        let products = &self.vehicles[v].products;
        let (mut base, mut carbon) = (0.0, 0.0);
        for &p in products {
            let c = self.generalized_cost(tree, a, mf, p, t, s)?;
            base += c.base;
            carbon += c.carbon;
        }
        let n = products.len() as f64;
        Ok(ArcCost {
            base: self.empty_trip.cost_factor * base / n,
            carbon: self.empty_trip.emission_factor * carbon / n,
        })
    }

    /// Emissions in kg CO2e per tonne of empty capacity of vehicle type `v` on arc `a`.
    pub fn empty_emission(&self, a: usize, mf: usize, v: usize, t: usize) -> Result<f64> {
        let products = &self.vehicles[v].products;
        let mut kg = 0.0;
        for &p in products {
            kg += self.emission(a, mf, p, t).ok_or_else(|| self.missing("emission factor", mf, p, t))?;
        }
        Ok(self.empty_trip.emission_factor * kg / products.len() as f64)
    }
}

/// Generalized costs for every arc, allowed fuel, carried product, period and scenario.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CostTable {
    /// `(arc, mode_fuel, product, period, scenario)` to per-tonne cost.
    pub entries: BTreeMap<(usize, usize, usize, usize, usize), ArcCost>,
}

pub fn assemble_generalized_cost(inst: &Instance, tree: &ScenarioTree) -> Result<CostTable> {
    let mut entries = BTreeMap::new();
    for (a, arc) in inst.arcs.iter().enumerate() {
        for &mf in &arc.fuels {
            for p in (0..inst.products.len()).filter(|&p| inst.carries(arc.mode, p)) {
                for t in 0..inst.time.num_periods() {
                    for s in 0..tree.len() {
                        entries.insert((a, mf, p, t, s), inst.generalized_cost(tree, a, mf, p, t, s)?);
                    }
                }
            }
        }
    }
    Ok(CostTable { entries })
}
