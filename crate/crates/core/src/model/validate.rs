//! Edge derivation and instance validation.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::Serialize;

use super::{catalog_group, Arc, Edge, Instance, Mode};
use crate::{Error, Result};

/// Undirected key of an edge: sorted endpoints, mode and route.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeKey {
    pub ends: (usize, usize),
    pub mode: Mode,
    pub route: String,
}

impl EdgeKey {
    pub fn new(from: usize, to: usize, mode: Mode, route: &str) -> Self {
        EdgeKey { ends: (from.min(to), from.max(to)), mode, route: route.to_string() }
    }
}

/// Groups directed arcs into undirected edges, ordered by first appearance.
/// Returns the edges and the edge index of every arc.
pub fn derive_edges(arcs: &[Arc]) -> Result<(Vec<Edge>, Vec<usize>)> {
    let mut seen: HashSet<(usize, usize, Mode, &str)> = HashSet::new();
    let mut index: HashMap<EdgeKey, usize> = HashMap::new();
    let mut edges: Vec<Edge> = Vec::new();
    let mut of_arc = Vec::with_capacity(arcs.len());
    for (a, arc) in arcs.iter().enumerate() {
        if !seen.insert((arc.from, arc.to, arc.mode, arc.route.as_str())) {
            return Err(Error::Invalid(format!(
                "duplicate arc {}: same endpoints, mode {} and route {:?} as an earlier arc",
                arc.id, arc.mode, arc.route
            )));
        }
        let key = EdgeKey::new(arc.from, arc.to, arc.mode, &arc.route);
        let e = *index.entry(key.clone()).or_insert_with(|| {
            edges.push(Edge { ends: key.ends, mode: key.mode, route: key.route.clone(), arcs: Vec::new(), base_capacity: None });
            edges.len() - 1
        });
        edges[e].arcs.push(a);
        of_arc.push(e);
    }
    Ok((edges, of_arc))
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }

    /// Turns a report with errors into an [`Error::Invalid`].
    pub fn into_result(self) -> Result<Vec<String>> {
        if self.errors.is_empty() {
            Ok(self.warnings)
        } else {
            Err(Error::Invalid(self.errors.join("; ")))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.errors {
            writeln!(f, "error: {e}")?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}

fn duplicates<'a>(ids: impl Iterator<Item = &'a str>) -> Vec<&'a str> {
    let mut seen = HashSet::new();
    let mut dup = BTreeSet::new();
    for id in ids {
        if !seen.insert(id) {
            dup.insert(id);
        }
    }
    dup.into_iter().collect()
}

pub fn validate_instance(inst: &Instance) -> ValidationReport {
    let mut r = ValidationReport::default();
    let err = |r: &mut ValidationReport, m: String| r.errors.push(m);
    let n_nodes = inst.nodes.len();
    let n_prod = inst.products.len();
    let n_mf = inst.mode_fuels.len();
    let time = &inst.time;

    for (what, dup) in [
        ("node", duplicates(inst.nodes.iter().map(|n| n.id.as_str()))),
        ("arc", duplicates(inst.arcs.iter().map(|a| a.id.as_str()))),
        ("product", duplicates(inst.products.iter().map(|p| p.as_str()))),
        ("fuel", duplicates(inst.fuels.iter().map(|f| f.id.as_str()))),
        ("fuel group", duplicates(inst.fuel_groups.iter().map(|g| g.id.as_str()))),
        ("vehicle type", duplicates(inst.vehicles.iter().map(|v| v.id.as_str()))),
        ("terminal class", duplicates(inst.terminal_classes.iter().map(|c| c.id.as_str()))),
    ] {
        for id in dup {
            err(&mut r, format!("duplicate {what} id {id:?}"));
        }
    }
    let mut mf_keys = HashSet::new();
    for mf in &inst.mode_fuels {
        if mf.fuel >= inst.fuels.len() {
            err(&mut r, format!("mode-fuel on {} references unknown fuel", mf.mode));
            continue;
        }
        if !mf_keys.insert((mf.mode, mf.fuel)) {
            err(&mut r, format!("duplicate mode-fuel {}/{}", mf.mode, inst.fuels[mf.fuel].id));
        }
        if !(mf.lifespan_years > 0.0) {
            err(&mut r, format!("{}/{}: lifespan must be positive", mf.mode, inst.fuels[mf.fuel].id));
        }
    }
    for f in &inst.fuels {
        if f.group >= inst.fuel_groups.len() {
            err(&mut r, format!("fuel {} references unknown fuel group", f.id));
        }
    }
    if !r.errors.is_empty() {
        return r;
    }

    // Network.
    for arc in &inst.arcs {
        if arc.from >= n_nodes || arc.to >= n_nodes {
            err(&mut r, format!("arc {}: unknown node", arc.id));
            continue;
        }
        if arc.from == arc.to {
            err(&mut r, format!("arc {}: origin equals destination", arc.id));
        }
        if !(arc.length_km > 0.0) {
            err(&mut r, format!("arc {}: length must be positive", arc.id));
        }
        if arc.fuels.is_empty() {
            err(&mut r, format!("arc {}: no allowed fuels", arc.id));
        }
        for &mf in &arc.fuels {
            if mf >= n_mf || inst.mode_fuels[mf].mode != arc.mode {
                err(&mut r, format!("arc {}: fuel not allowed on mode {}", arc.id, arc.mode));
            }
        }
    }
    match derive_edges(&inst.arcs) {
        Err(e) => err(&mut r, e.to_string()),
        Ok((edges, of_arc)) => {
            let same = edges.len() == inst.edges.len()
                && edges.iter().zip(&inst.edges).all(|(a, b)| a.ends == b.ends && a.mode == b.mode && a.route == b.route && a.arcs == b.arcs)
                && inst.arcs.iter().zip(&of_arc).all(|(a, &e)| a.edge == e);
            if !same {
                err(&mut r, "edge set does not match the undirected image of the arcs".into());
            }
        }
    }
    for e in &inst.edges {
        match e.base_capacity {
            Some(c) if c < 0.0 => err(&mut r, format!("edge {}: negative base capacity", edge_label(inst, e))),
            None if e.mode == Mode::Rail => {
                err(&mut r, format!("rail edge {}: missing capacity data", edge_label(inst, e)))
            }
            _ => {}
        }
    }

    // Time.
    if time.periods.is_empty() {
        err(&mut r, "no periods".into());
    } else {
        if time.periods.windows(2).any(|w| w[0] >= w[1]) {
            err(&mut r, "non-monotone period years".into());
        }
        if time.periods[0] != time.first_year {
            err(&mut r, "first period year must equal the first horizon year".into());
        }
        if *time.periods.last().unwrap() > time.last_year {
            err(&mut r, "horizon end year precedes the last period".into());
        }
    }
    if !(time.discount > 0.0 && time.discount <= 1.0) {
        err(&mut r, "discount factor must lie in (0, 1]".into());
    }
    if inst.years.len() != time.num_years() {
        err(&mut r, "carbon price must be defined for every horizon year".into());
    }
    for (i, y) in inst.years.iter().enumerate() {
        if !(y.carbon_price >= 0.0) {
            err(&mut r, format!("year {}: negative carbon price", time.first_year + i as i32));
        }
    }
    if !r.errors.is_empty() {
        return r;
    }
    let n_t = time.num_periods();

    // Products, vehicles, terminals.
    for v in &inst.vehicles {
        if v.products.is_empty() {
            err(&mut r, format!("vehicle type {}: no carryable products", v.id));
        }
        if v.products.iter().any(|&p| p >= n_prod) {
            err(&mut r, format!("vehicle type {}: unknown product", v.id));
        }
    }
    for m in Mode::ALL {
        for p in 0..n_prod {
            if inst.vehicles_of(m).filter(|&v| inst.vehicles[v].products.contains(&p)).count() > 1 {
                err(&mut r, format!("product {} is carried by more than one vehicle type on {m}", inst.products[p]));
            }
        }
    }
    let arc_modes: BTreeSet<Mode> = inst.arcs.iter().map(|a| a.mode).collect();
    for &m in &arc_modes {
        if inst.vehicles_of(m).next().is_none() {
            err(&mut r, format!("mode {m} has arcs but no vehicle type"));
        }
    }
    for c in &inst.terminal_classes {
        if !c.mode.has_terminals() {
            err(&mut r, format!("terminal class {}: mode {} has no terminals", c.id, c.mode));
        }
        if c.products.is_empty() || c.products.iter().any(|&p| p >= n_prod) {
            err(&mut r, format!("terminal class {}: products missing or unknown", c.id));
        }
    }

    // Demand.
    for (&(o, d, p, t), &amount) in &inst.demand {
        if o >= n_nodes || d >= n_nodes || p >= n_prod || t >= n_t {
            err(&mut r, "demand entry references an unknown node, product or period".into());
            continue;
        }
        if o == d {
            err(&mut r, format!("demand from {} to itself", inst.nodes[o].id));
        }
        if !(amount >= 0.0) {
            err(&mut r, format!("negative demand {} -> {}", inst.nodes[o].id, inst.nodes[d].id));
        }
    }

    // Costs and emissions for every used combination.
    let used_mf: BTreeSet<usize> = inst.arcs.iter().flat_map(|a| a.fuels.iter().copied()).collect();
    for &mf in &used_mf {
        let mode = inst.mode_fuels[mf].mode;
        for p in (0..n_prod).filter(|&p| inst.carries(mode, p)) {
            for t in 0..n_t {
                for (what, table) in [("cost", &inst.cost_per_tkm), ("emission factor", &inst.emission_per_tkm)] {
                    match table.get(&(mf, p, t)) {
                        None => err(
                            &mut r,
                            format!(
                                "missing {what} for {} product {} in {}",
                                inst.mode_fuel_label(mf),
                                inst.products[p],
                                time.periods[t]
                            ),
                        ),
                        Some(v) if !(*v >= 0.0) => err(&mut r, format!("negative {what} for {}", inst.mode_fuel_label(mf))),
                        _ => {}
                    }
                }
            }
        }
    }
    for (&(a, b, _), &c) in &inst.transfer_costs {
        if !(c >= 0.0) || a == b {
            err(&mut r, format!("invalid transfer cost {a} -> {b}"));
        }
    }
    if !(inst.empty_trip.cost_factor >= 0.0 && inst.empty_trip.emission_factor >= 0.0) {
        err(&mut r, "empty-trip factors must be nonnegative".into());
    }

    // Base fuel mix and fleet.
    for m in inst.modes() {
        let total: f64 = inst.mode_fuels_of(m).map(|mf| inst.mode_fuels[mf].base_share).sum();
        if (total - 1.0).abs() > 1e-9 {
            err(&mut r, format!("base fuel mix of {m} sums to {total}, not 1"));
        }
        for mf in inst.mode_fuels_of(m) {
            let x = &inst.mode_fuels[mf];
            if x.base_share < 0.0 {
                err(&mut r, format!("{}: negative base share", inst.mode_fuel_label(mf)));
            }
            if x.is_new && x.base_share != 0.0 {
                err(&mut r, format!("{}: new fuel must have base share 0", inst.mode_fuel_label(mf)));
            }
        }
        match inst.fleet.get(&m) {
            None => err(&mut r, format!("missing fleet parameters for mode {m}")),
            Some(f) => {
                if !(f.lifespan_years > 0.0) {
                    err(&mut r, format!("{m}: fleet lifespan must be positive"));
                }
                if f.max_decrease.len() != n_t {
                    err(&mut r, format!("{m}: max modal decrease needs one value per period"));
                }
                if f.max_decrease.iter().any(|&d| !(0.0..=1.0).contains(&d)) {
                    err(&mut r, format!("{m}: max modal decrease must lie in [0, 1]"));
                }
            }
        }
    }

    // Adoption.
    for mf in 0..n_mf {
        let label = inst.mode_fuel_label(mf);
        match inst.adoption.get(&mf) {
            None if inst.mode_fuels[mf].is_new => err(&mut r, format!("{label}: new fuel without adoption parameters")),
            None => {}
            Some(b) => {
                if !(0.0..=1.0).contains(&b.potential) {
                    err(&mut r, format!("{label}: adoption potential must lie in [0, 1]"));
                }
                if b.alpha.0.is_empty() || b.beta.0.is_empty() {
                    err(&mut r, format!("{label}: empty adoption pieces"));
                }
                if b.alpha.0.iter().chain(&b.beta.0).any(|&(_, v)| !(v >= 0.0)) {
                    err(&mut r, format!("{label}: adoption coefficients must be nonnegative"));
                }
                for pieces in [&b.alpha, &b.beta] {
                    if pieces.0.windows(2).any(|w| w[0].0 >= w[1].0) {
                        err(&mut r, format!("{label}: adoption pieces must have increasing years"));
                    }
                    if pieces.0.first().map_or(false, |p| p.0 > time.first_year) {
                        err(&mut r, format!("{label}: adoption pieces do not cover the horizon"));
                    }
                }
                if !inst.mode_fuels[mf].is_new {
                    r.warnings.push(format!("{label}: adoption parameters for an established fuel are ignored"));
                }
            }
        }
    }

    // Investments.
    let n_e = inst.edges.len();
    let mut expanded = HashSet::new();
    for x in &inst.edge_expansions {
        if x.edge >= n_e {
            err(&mut r, "edge expansion references an unknown edge".into());
            continue;
        }
        if inst.edges[x.edge].mode != Mode::Rail {
            err(&mut r, format!("edge expansion on non-rail edge {}", edge_label(inst, &inst.edges[x.edge])));
        }
        if !expanded.insert(x.edge) {
            err(&mut r, format!("edge {} has more than one expansion option", edge_label(inst, &inst.edges[x.edge])));
        }
        if !(x.cost >= 0.0 && x.capacity_gain >= 0.0) {
            err(&mut r, "edge expansion with negative cost or gain".into());
        }
    }
    let mut node_keys = HashSet::new();
    for x in &inst.node_investments {
        if x.node >= n_nodes || x.class >= inst.terminal_classes.len() {
            err(&mut r, "node investment references an unknown node or terminal class".into());
            continue;
        }
        if !node_keys.insert((x.node, x.class)) {
            err(&mut r, format!("duplicate terminal capacity for {} class {}", inst.nodes[x.node].id, inst.terminal_classes[x.class].id));
        }
        if !(x.base_capacity >= 0.0 && x.cost >= 0.0 && x.capacity_gain >= 0.0) {
            err(&mut r, "node investment with negative values".into());
        }
    }
    let mut charge_keys = HashSet::new();
    for x in &inst.charging {
        if x.edge >= n_e || x.mode_fuel >= n_mf {
            err(&mut r, "charging option references an unknown edge or fuel".into());
            continue;
        }
        let e = &inst.edges[x.edge];
        if e.mode != Mode::Road || inst.mode_fuels[x.mode_fuel].mode != Mode::Road {
            err(&mut r, format!("charging option on non-road edge {}", edge_label(inst, e)));
        }
        if !charge_keys.insert((x.edge, x.mode_fuel)) {
            err(&mut r, format!("duplicate charging option on {}", edge_label(inst, e)));
        }
        if !(x.base_capacity >= 0.0 && x.unit_cost >= 0.0) {
            err(&mut r, "charging option with negative values".into());
        }
    }
    let mut upg_keys = HashSet::new();
    for x in &inst.upgrades {
        if x.edge >= n_e || x.mode_fuel >= n_mf {
            err(&mut r, "upgrade references an unknown edge or fuel".into());
            continue;
        }
        let e = &inst.edges[x.edge];
        if inst.mode_fuels[x.mode_fuel].mode != e.mode {
            err(&mut r, format!("upgrade on {}: fuel not allowed on mode {}", edge_label(inst, e), e.mode));
        }
        if !e.arcs.iter().all(|&a| inst.arcs[a].fuels.contains(&x.mode_fuel)) {
            err(&mut r, format!("upgrade on {}: fuel not listed on the edge's arcs", edge_label(inst, e)));
        }
        if !upg_keys.insert((x.edge, x.mode_fuel)) {
            err(&mut r, format!("duplicate upgrade on {}", edge_label(inst, e)));
        }
        if !(x.cost >= 0.0) {
            err(&mut r, "upgrade with negative cost".into());
        }
    }

    // Scenarios.
    let sc = &inst.scenarios;
    for id in duplicates(sc.varied_groups.iter().map(|g| g.as_str())) {
        err(&mut r, format!("duplicate varied fuel group {id:?}"));
    }
    for g in &sc.varied_groups {
        match inst.group_index(g) {
            None => err(&mut r, format!("varied fuel group {g:?} does not exist")),
            Some(i) if !inst.fuel_groups[i].varied => {
                r.warnings.push(format!("fuel group {g:?} is varied in scenarios but not flagged as varied"))
            }
            _ => {}
        }
    }
    for g in inst.fuel_groups.iter().filter(|g| g.varied && !sc.varied_groups.contains(&g.id)) {
        r.warnings.push(format!("fuel group {:?} is flagged as varied but not varied in scenarios", g.id));
    }
    let branch = sc.branch_year.unwrap_or(time.first_year);
    if branch < time.first_year || branch > time.last_year {
        err(&mut r, format!("branch year {branch} lies outside the horizon"));
    }
    if let Err(e) = sc.deviations.check() {
        err(&mut r, e);
    }
    if !(1..=3).contains(&inst.max_modes) {
        err(&mut r, "max_modes must be 1, 2 or 3".into());
    }

    // Reference catalog.
    let mut by_group: BTreeMap<&str, &str> = BTreeMap::new();
    for mf in 0..n_mf {
        let fuel = &inst.fuels[inst.mode_fuels[mf].fuel];
        let group = inst.fuel_groups[fuel.group].id.as_str();
        match catalog_group(&fuel.id, inst.mode_fuels[mf].mode) {
            None => r.warnings.push(format!("fuel {:?} is not in the reference mode-fuel catalog", fuel.id)),
            Some((g, allowed)) => {
                if !allowed {
                    r.warnings.push(format!("{} is not a reference mode-fuel combination", inst.mode_fuel_label(mf)));
                }
                if !group.eq_ignore_ascii_case(g) {
                    by_group.insert(fuel.id.as_str(), g);
                }
            }
        }
        let established = inst.fuel_groups[fuel.group].id.eq_ignore_ascii_case("established");
        if established == inst.fuel_groups[fuel.group].varied {
            r.warnings.push(format!(
                "fuel group {:?}: only non-established groups are expected to be varied",
                inst.fuel_groups[fuel.group].id
            ));
        }
    }
    for (fuel, g) in by_group {
        r.warnings.push(format!("fuel {fuel:?} belongs to reference group {g:?}"));
    }
    let mut seen = HashSet::new();
    r.warnings.retain(|w| seen.insert(w.clone()));
    r
}

fn edge_label(inst: &Instance, e: &Edge) -> String {
    format!("{}-{} {} {}", inst.nodes[e.ends.0].id, inst.nodes[e.ends.1].id, e.mode, e.route)
}
