//! Instance-level domain types.
//!
//! All quantities are stored in tonnes, kilometres, years and the instance's
//! money unit. Cross references are indices into the owning vectors of
//! [`Instance`].

mod catalog;
mod cost;
mod validate;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::scenario::ScenarioConfig;
pub use catalog::{catalog_group, CATALOG};
pub use cost::{assemble_generalized_cost, discount_sum, ArcCost, CostTable};
pub use validate::{derive_edges, validate_instance, EdgeKey, ValidationReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Rail,
    Road,
    Sea,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Rail, Mode::Road, Mode::Sea];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Rail => "rail",
            Mode::Road => "road",
            Mode::Sea => "sea",
        }
    }

    pub fn parse(s: &str) -> Option<Mode> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rail" => Some(Mode::Rail),
            "road" => Some(Mode::Road),
            "sea" => Some(Mode::Sea),
            _ => None,
        }
    }

    /// Modes that have terminal capacity (transfers consume it).
    pub fn has_terminals(self) -> bool {
        self != Mode::Road
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub id: String,
    pub name: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Arc {
    pub id: String,
    pub from: usize,
    pub to: usize,
    pub mode: Mode,
    pub route: String,
    pub length_km: f64,
    /// Allowed mode-fuels (indices into `Instance::mode_fuels`).
    pub fuels: Vec<usize>,
    /// Owning undirected edge.
    pub edge: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    /// Endpoints with `ends.0 < ends.1`.
    pub ends: (usize, usize),
    pub mode: Mode,
    pub route: String,
    /// Directed arcs mapped to this edge, in arc order.
    pub arcs: Vec<usize>,
    /// Undirected base capacity in tonnes per year; `None` is uncapacitated.
    pub base_capacity: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FuelGroup {
    pub id: String,
    pub varied: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Fuel {
    pub id: String,
    pub group: usize,
}

/// A fuel as available on one mode.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeFuel {
    pub mode: Mode,
    pub fuel: usize,
    pub is_new: bool,
    /// Lifespan of the representative vehicle (reporting only).
    pub lifespan_years: f64,
    /// Share of the mode's transport work in the first period.
    pub base_share: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VehicleType {
    pub id: String,
    pub mode: Mode,
    pub products: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TerminalClass {
    pub id: String,
    pub mode: Mode,
    pub products: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimeStructure {
    /// First calendar year of the horizon (equals the first period year).
    pub first_year: i32,
    /// Last calendar year of the horizon.
    pub last_year: i32,
    /// Start year of each period.
    pub periods: Vec<i32>,
    pub discount: f64,
}

impl TimeStructure {
    pub fn num_periods(&self) -> usize {
        self.periods.len()
    }

    pub fn num_years(&self) -> usize {
        (self.last_year - self.first_year + 1).max(0) as usize
    }

    pub fn years(&self) -> impl Iterator<Item = i32> {
        self.first_year..=self.last_year
    }

    pub fn year_index(&self, year: i32) -> usize {
        (year - self.first_year) as usize
    }

    /// First year after period `t`.
    pub fn period_end(&self, t: usize) -> i32 {
        self.periods.get(t + 1).copied().unwrap_or(self.last_year + 1)
    }

    /// Discount weight of one year of operations during period `t`.
    pub fn operational_factor(&self, t: usize) -> f64 {
        discount_sum(self.discount, self.periods[t], self.period_end(t), self.first_year)
    }

    /// Discount weight of an investment made at the start of period `t`.
    pub fn investment_factor(&self, t: usize) -> f64 {
        self.discount.powi(self.periods[t] - self.first_year)
    }

    pub fn period_of_year(&self, year: i32) -> Option<usize> {
        self.periods.iter().position(|&y| y == year)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct YearData {
    /// Money per tonne CO2e.
    pub carbon_price: f64,
    /// Emission target relative to the first period, report overlay only.
    pub emission_target: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeExpansion {
    pub edge: usize,
    pub cost: f64,
    pub capacity_gain: f64,
    pub lead_periods: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NodeInvestment {
    pub node: usize,
    pub class: usize,
    pub base_capacity: f64,
    pub cost: f64,
    pub capacity_gain: f64,
    pub lead_periods: usize,
}

impl NodeInvestment {
    pub fn expandable(&self) -> bool {
        self.capacity_gain > 0.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChargingOption {
    pub edge: usize,
    pub mode_fuel: usize,
    pub base_capacity: f64,
    /// Money per tonne per year of added capacity.
    pub unit_cost: f64,
    pub lead_periods: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UpgradeOption {
    pub edge: usize,
    pub mode_fuel: usize,
    pub cost: f64,
    pub lead_periods: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FleetParams {
    /// Mode-level vehicle lifespan used by the fleet renewal rate limit.
    pub lifespan_years: f64,
    /// Maximal relative decrease of modal transport work per period; entry 0 is unused.
    pub max_decrease: Vec<f64>,
}

/// Piecewise-constant yearly parameter: `(from_year, value)` pieces sorted by year.
#[derive(Clone, Debug, PartialEq)]
pub struct Pieces(pub Vec<(i32, f64)>);

impl Pieces {
    pub fn constant(v: f64) -> Self {
        Pieces(vec![(i32::MIN, v)])
    }

    pub fn at(&self, year: i32) -> f64 {
        self.0.iter().rev().find(|&&(y, _)| y <= year).map_or(self.0.first().map_or(0.0, |p| p.1), |p| p.1)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BassParams {
    pub start_year: i32,
    pub potential: f64,
    pub alpha: Pieces,
    pub beta: Pieces,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmptyTrip {
    pub cost_factor: f64,
    pub emission_factor: f64,
}

impl Default for EmptyTrip {
    fn default() -> Self {
        EmptyTrip { cost_factor: 1.0, emission_factor: 0.8 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub name: String,
    pub money_unit: String,
    pub nodes: Vec<Node>,
    pub arcs: Vec<Arc>,
    pub edges: Vec<Edge>,
    pub products: Vec<String>,
    pub fuel_groups: Vec<FuelGroup>,
    pub fuels: Vec<Fuel>,
    pub mode_fuels: Vec<ModeFuel>,
    pub vehicles: Vec<VehicleType>,
    pub terminal_classes: Vec<TerminalClass>,
    pub time: TimeStructure,
    /// One entry per horizon year.
    pub years: Vec<YearData>,
    /// `(origin, destination, product, period)` to tonnes per year.
    pub demand: BTreeMap<(usize, usize, usize, usize), f64>,
    /// `(mode_fuel, product, period)` to money per tonne-km.
    pub cost_per_tkm: HashMap<(usize, usize, usize), f64>,
    /// `(mode_fuel, product, period)` to kg CO2e per tonne-km.
    pub emission_per_tkm: HashMap<(usize, usize, usize), f64>,
    /// `(from_mode, to_mode, product)` to money per tonne; absent means zero.
    pub transfer_costs: HashMap<(Mode, Mode, usize), f64>,
    pub empty_trip: EmptyTrip,
    pub edge_expansions: Vec<EdgeExpansion>,
    pub node_investments: Vec<NodeInvestment>,
    pub charging: Vec<ChargingOption>,
    pub upgrades: Vec<UpgradeOption>,
    pub fleet: BTreeMap<Mode, FleetParams>,
    /// Keyed by mode-fuel; required for new mode-fuels.
    pub adoption: BTreeMap<usize, BassParams>,
    /// Maximal number of modes on a generated path.
    pub max_modes: usize,
    pub scenarios: ScenarioConfig,
}

impl Instance {
    pub fn product_index(&self, id: &str) -> Option<usize> {
        self.products.iter().position(|p| p == id)
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    pub fn fuel_index(&self, id: &str) -> Option<usize> {
        self.fuels.iter().position(|f| f.id == id)
    }

    pub fn group_index(&self, id: &str) -> Option<usize> {
        self.fuel_groups.iter().position(|g| g.id == id)
    }

    pub fn mode_fuel_index(&self, mode: Mode, fuel: &str) -> Option<usize> {
        self.mode_fuels.iter().position(|mf| mf.mode == mode && self.fuels[mf.fuel].id == fuel)
    }

    /// Label such as `road/diesel`.
    pub fn mode_fuel_label(&self, mf: usize) -> String {
        let m = &self.mode_fuels[mf];
        format!("{}/{}", m.mode, self.fuels[m.fuel].id)
    }

    pub fn group_of(&self, mf: usize) -> usize {
        self.fuels[self.mode_fuels[mf].fuel].group
    }

    pub fn mode_fuels_of(&self, mode: Mode) -> impl Iterator<Item = usize> + '_ {
        (0..self.mode_fuels.len()).filter(move |&i| self.mode_fuels[i].mode == mode)
    }

    /// Modes that have at least one fuel.
    pub fn modes(&self) -> Vec<Mode> {
        Mode::ALL.into_iter().filter(|&m| self.mode_fuels.iter().any(|mf| mf.mode == m)).collect()
    }

    pub fn vehicles_of(&self, mode: Mode) -> impl Iterator<Item = usize> + '_ {
        (0..self.vehicles.len()).filter(move |&v| self.vehicles[v].mode == mode)
    }

    /// The vehicle type that carries `product` on `mode`.
    pub fn vehicle_for(&self, mode: Mode, product: usize) -> Option<usize> {
        self.vehicles_of(mode).find(|&v| self.vehicles[v].products.contains(&product))
    }

    pub fn carries(&self, mode: Mode, product: usize) -> bool {
        self.vehicle_for(mode, product).is_some()
    }

    /// Carbon price in the given calendar year.
    pub fn carbon_price(&self, year: i32) -> f64 {
        self.years[self.time.year_index(year)].carbon_price
    }

    /// Loaded base cost per tonne on arc `a` with mode-fuel `mf` (no scenario multiplier).
    pub fn base_cost(&self, a: usize, mf: usize, p: usize, t: usize) -> Option<f64> {
        self.cost_per_tkm.get(&(mf, p, t)).map(|c| c * self.arcs[a].length_km)
    }

    /// Loaded emissions in kg CO2e per tonne on arc `a`.
    pub fn emission(&self, a: usize, mf: usize, p: usize, t: usize) -> Option<f64> {
        self.emission_per_tkm.get(&(mf, p, t)).map(|e| e * self.arcs[a].length_km)
    }

    pub fn transfer_cost(&self, from: Mode, to: Mode, p: usize) -> f64 {
        self.transfer_costs.get(&(from, to, p)).copied().unwrap_or(0.0)
    }

    /// Reference fuel of a mode used for the other modes during path
    /// generation: its first established fuel with the largest base share.
    pub fn reference_fuel(&self, mode: Mode) -> Option<usize> {
        let mut best: Option<usize> = None;
        for mf in self.mode_fuels_of(mode).filter(|&i| !self.mode_fuels[i].is_new) {
            if best.map_or(true, |b| self.mode_fuels[mf].base_share > self.mode_fuels[b].base_share) {
                best = Some(mf);
            }
        }
        best.or_else(|| self.mode_fuels_of(mode).next())
    }

    /// Copy with every carbon price scaled by `factor`.
    pub fn with_carbon_factor(&self, factor: f64) -> Instance {
        let mut inst = self.clone();
        if factor != 1.0 {
            for y in &mut inst.years {
                y.carbon_price *= factor;
            }
        }
        inst
    }

    /// Total demand over all periods and pairs (tonnes per year summed).
    pub fn total_demand(&self) -> f64 {
        self.demand.values().sum()
    }
}
