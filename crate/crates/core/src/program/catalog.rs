//! Variable keys and row provenance tags.

use std::fmt;

use serde::Serialize;

use crate::model::Mode;

/// Key of one decision variable before scenario merging.
///
/// `t` is a period index, `y` a year offset from the first horizon year and
/// `s` a scenario index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    /// Flow of product `p` on path `k` (tonnes per year).
    PathFlow { k: usize, p: usize, t: usize, s: usize },
    /// Flow of product `p` on arc `a` with mode-fuel `mf`.
    ArcFlow { a: usize, mf: usize, p: usize, t: usize, s: usize },
    /// Empty capacity of vehicle type `v` moved along unimodal path `k`.
    Empty { k: usize, v: usize, t: usize, s: usize },
    /// Empty capacity of vehicle type `v` on arc `a` with mode-fuel `mf`.
    Balance { a: usize, mf: usize, v: usize, t: usize, s: usize },
    /// Transport work (tonne-km) of mode-fuel `mf`.
    Work { mf: usize, t: usize, s: usize },
    /// Decrease of transport work of `mf` since the previous period.
    WorkDecrease { mf: usize, t: usize, s: usize },
    /// Yearly transport work of `mf`.
    YearWork { mf: usize, y: usize, s: usize },
    /// Yearly transport work of mode `m`.
    YearTotal { m: Mode, y: usize, s: usize },
    /// Charging capacity added by option `c`.
    Charging { c: usize, t: usize, s: usize },
    /// Binary upgrade decision of option `u`.
    Upgrade { u: usize, t: usize, s: usize },
    /// Binary expansion decision of edge expansion `x`.
    EdgeExpansion { x: usize, t: usize, s: usize },
    /// Binary expansion decision of node investment `n`.
    NodeExpansion { n: usize, t: usize, s: usize },
    /// Total discounted cost of scenario `s`.
    ScenarioCost { s: usize },
    /// Cost excess of scenario `s` over the threshold.
    Excess { s: usize },
    /// Value-at-risk threshold.
    Threshold,
}

impl Var {
    pub fn scenario(&self) -> Option<usize> {
        use Var::*;
        match *self {
            PathFlow { s, .. }
            | ArcFlow { s, .. }
            | Empty { s, .. }
            | Balance { s, .. }
            | Work { s, .. }
            | WorkDecrease { s, .. }
            | YearWork { s, .. }
            | YearTotal { s, .. }
            | Charging { s, .. }
            | Upgrade { s, .. }
            | EdgeExpansion { s, .. }
            | NodeExpansion { s, .. }
            | ScenarioCost { s }
            | Excess { s } => Some(s),
            Threshold => None,
        }
    }

    pub fn with_scenario(self, s2: usize) -> Var {
        use Var::*;
        match self {
            PathFlow { k, p, t, .. } => PathFlow { k, p, t, s: s2 },
            ArcFlow { a, mf, p, t, .. } => ArcFlow { a, mf, p, t, s: s2 },
            Empty { k, v, t, .. } => Empty { k, v, t, s: s2 },
            Balance { a, mf, v, t, .. } => Balance { a, mf, v, t, s: s2 },
            Work { mf, t, .. } => Work { mf, t, s: s2 },
            WorkDecrease { mf, t, .. } => WorkDecrease { mf, t, s: s2 },
            YearWork { mf, y, .. } => YearWork { mf, y, s: s2 },
            YearTotal { m, y, .. } => YearTotal { m, y, s: s2 },
            Charging { c, t, .. } => Charging { c, t, s: s2 },
            Upgrade { u, t, .. } => Upgrade { u, t, s: s2 },
            EdgeExpansion { x, t, .. } => EdgeExpansion { x, t, s: s2 },
            NodeExpansion { n, t, .. } => NodeExpansion { n, t, s: s2 },
            ScenarioCost { .. } => ScenarioCost { s: s2 },
            Excess { .. } => Excess { s: s2 },
            Threshold => Threshold,
        }
    }

    /// Period index for period-indexed variables.
    pub fn period(&self) -> Option<usize> {
        use Var::*;
        match *self {
            PathFlow { t, .. }
            | ArcFlow { t, .. }
            | Empty { t, .. }
            | Balance { t, .. }
            | Work { t, .. }
            | WorkDecrease { t, .. }
            | Charging { t, .. }
            | Upgrade { t, .. }
            | EdgeExpansion { t, .. }
            | NodeExpansion { t, .. } => Some(t),
            _ => None,
        }
    }

    /// Calendar year in which the decision is taken; `None` for scenario-level auxiliaries.
    pub fn decision_year(&self, periods: &[i32], first_year: i32) -> Option<i32> {
        match *self {
            Var::YearWork { y, .. } | Var::YearTotal { y, .. } => Some(first_year + y as i32),
            _ => self.period().map(|t| periods[t]),
        }
    }

    pub fn is_binary(&self) -> bool {
        matches!(self, Var::Upgrade { .. } | Var::EdgeExpansion { .. } | Var::NodeExpansion { .. })
    }

    pub fn is_investment(&self) -> bool {
        self.is_binary() || matches!(self, Var::Charging { .. })
    }

    /// Short symbol of the variable family.
    pub fn family(&self) -> &'static str {
        use Var::*;
        match self {
            PathFlow { .. } => "h",
            ArcFlow { .. } => "x",
            Empty { .. } => "he",
            Balance { .. } => "b",
            Work { .. } => "q",
            WorkDecrease { .. } => "qm",
            YearWork { .. } => "qy",
            YearTotal { .. } => "qt",
            Charging { .. } => "y",
            Upgrade { .. } => "upg",
            EdgeExpansion { .. } => "eps",
            NodeExpansion { .. } => "nu",
            ScenarioCost { .. } => "z",
            Excess { .. } => "w",
            Threshold => "u",
        }
    }

    /// Column name; `merged` prints the scenario as `*`.
    pub fn name(&self, merged: bool) -> String {
        use Var::*;
        let s = |s: usize| if merged { "*".to_string() } else { s.to_string() };
        let f = self.family();
        match *self {
            PathFlow { k, p, t, s: sc } => format!("{f}[k{k},p{p},t{t},s{}]", s(sc)),
            ArcFlow { a, mf, p, t, s: sc } => format!("{f}[a{a},f{mf},p{p},t{t},s{}]", s(sc)),
            Empty { k, v, t, s: sc } => format!("{f}[k{k},v{v},t{t},s{}]", s(sc)),
            Balance { a, mf, v, t, s: sc } => format!("{f}[a{a},f{mf},v{v},t{t},s{}]", s(sc)),
            Work { mf, t, s: sc } | WorkDecrease { mf, t, s: sc } => format!("{f}[f{mf},t{t},s{}]", s(sc)),
            YearWork { mf, y, s: sc } => format!("{f}[f{mf},y{y},s{}]", s(sc)),
            YearTotal { m, y, s: sc } => format!("{f}[{m},y{y},s{}]", s(sc)),
            Charging { c: i, t, s: sc } | Upgrade { u: i, t, s: sc } | EdgeExpansion { x: i, t, s: sc } | NodeExpansion { n: i, t, s: sc } => {
                format!("{f}[o{i},t{t},s{}]", s(sc))
            }
            ScenarioCost { s: sc } | Excess { s: sc } => format!("{f}[s{sc}]"),
            Threshold => f.to_string(),
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name(false))
    }
}

/// Constraint family of a row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Block {
    Demand,
    ArcPath,
    EmptyArcPath,
    FleetBalance,
    EdgeCapacity,
    EdgeExpansionOnce,
    NodeCapacity,
    NodeExpansionOnce,
    ChargingCapacity,
    UpgradeEnable,
    TransportWork,
    WorkDecrease,
    FleetRenewal,
    ModalDecrease,
    BaseFuelMix,
    YearlyLink,
    YearlyTotal,
    AdoptionLevel,
    AdoptionRate,
    NonAnticipativity,
    ScenarioCost,
    CvarExcess,
}

impl Block {
    pub const ALL: [Block; 22] = [
        Block::Demand,
        Block::ArcPath,
        Block::EmptyArcPath,
        Block::FleetBalance,
        Block::EdgeCapacity,
        Block::EdgeExpansionOnce,
        Block::NodeCapacity,
        Block::NodeExpansionOnce,
        Block::ChargingCapacity,
        Block::UpgradeEnable,
        Block::TransportWork,
        Block::WorkDecrease,
        Block::FleetRenewal,
        Block::ModalDecrease,
        Block::BaseFuelMix,
        Block::YearlyLink,
        Block::YearlyTotal,
        Block::AdoptionLevel,
        Block::AdoptionRate,
        Block::NonAnticipativity,
        Block::ScenarioCost,
        Block::CvarExcess,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Block::Demand => "demand",
            Block::ArcPath => "arc_path",
            Block::EmptyArcPath => "empty_arc_path",
            Block::FleetBalance => "fleet_balance",
            Block::EdgeCapacity => "edge_capacity",
            Block::EdgeExpansionOnce => "edge_expansion_once",
            Block::NodeCapacity => "node_capacity",
            Block::NodeExpansionOnce => "node_expansion_once",
            Block::ChargingCapacity => "charging_capacity",
            Block::UpgradeEnable => "upgrade_enable",
            Block::TransportWork => "transport_work",
            Block::WorkDecrease => "work_decrease",
            Block::FleetRenewal => "fleet_renewal",
            Block::ModalDecrease => "modal_decrease",
            Block::BaseFuelMix => "base_fuel_mix",
            Block::YearlyLink => "yearly_link",
            Block::YearlyTotal => "yearly_total",
            Block::AdoptionLevel => "adoption_level",
            Block::AdoptionRate => "adoption_rate",
            Block::NonAnticipativity => "non_anticipativity",
            Block::ScenarioCost => "scenario_cost",
            Block::CvarExcess => "cvar_excess",
        }
    }

    /// Flow, fleet renewal and adoption rows (restricted to one period in static mode).
    pub fn is_operational(self) -> bool {
        use Block::*;
        matches!(
            self,
            Demand
                | ArcPath
                | EmptyArcPath
                | FleetBalance
                | TransportWork
                | WorkDecrease
                | FleetRenewal
                | ModalDecrease
                | BaseFuelMix
                | YearlyLink
                | YearlyTotal
                | AdoptionLevel
                | AdoptionRate
        )
    }

    pub fn is_investment(self) -> bool {
        use Block::*;
        matches!(
            self,
            EdgeCapacity | EdgeExpansionOnce | NodeCapacity | NodeExpansionOnce | ChargingCapacity | UpgradeEnable
        )
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Provenance of a row.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RowTag {
    pub block: Block,
    pub period: Option<usize>,
    pub year: Option<i32>,
    pub scenario: Option<usize>,
}
