//! Instance directory loader.
//!
//! An instance is a directory holding `instance.json` plus CSV tables; see
//! `docs/instance-format.md` for the column schemas. Loading resolves every
//! identifier and normalizes masses to tonnes; invariants are checked
//! separately by [`crate::model::validate_instance`].

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::model::{
    derive_edges, validate_instance, Arc, BassParams, ChargingOption, EdgeExpansion, EmptyTrip, FleetParams, Fuel, FuelGroup,
    Instance, Mode, ModeFuel, Node, NodeInvestment, Pieces, TerminalClass, TimeStructure, UpgradeOption, VehicleType, YearData,
};
use crate::scenario::ScenarioConfig;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Deserialize)]
#[serde(rename_all = "lowercase")]
enum MassUnit {
    #[default]
    Tonne,
    Kilotonne,
    Megatonne,
}

impl MassUnit {
    fn tonnes(self) -> f64 {
        match self {
            MassUnit::Tonne => 1.0,
            MassUnit::Kilotonne => 1e3,
            MassUnit::Megatonne => 1e6,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Horizon {
    first_year: i32,
    last_year: i32,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GroupDef {
    id: String,
    #[serde(default)]
    varied: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassDef {
    id: String,
    mode: String,
    products: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TransferDef {
    from: String,
    to: String,
    /// All products when absent.
    product: Option<String>,
    cost: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EmptyTripDef {
    cost_factor: f64,
    emission_factor: f64,
}

fn default_money() -> String {
    "money".to_string()
}

fn default_max_modes() -> usize {
    2
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    name: String,
    #[serde(default = "default_money")]
    money_unit: String,
    #[serde(default)]
    mass_unit: MassUnit,
    discount_factor: f64,
    horizon: Horizon,
    products: Vec<String>,
    fuel_groups: Vec<GroupDef>,
    #[serde(default)]
    terminal_classes: Vec<ClassDef>,
    #[serde(default)]
    transfer_costs: Vec<TransferDef>,
    empty_trip: Option<EmptyTripDef>,
    #[serde(default = "default_max_modes")]
    max_modes: usize,
    branch_year: Option<i32>,
}

#[derive(Deserialize)]
struct NodeRow {
    id: String,
    name: Option<String>,
}

#[derive(Deserialize)]
struct ArcRow {
    id: String,
    from: String,
    to: String,
    mode: String,
    #[serde(default)]
    route: String,
    length_km: f64,
    fuels: String,
}

#[derive(Deserialize)]
struct EdgeRow {
    from: String,
    to: String,
    mode: String,
    #[serde(default)]
    route: String,
    base_capacity: Option<f64>,
}

#[derive(Deserialize)]
struct FuelRow {
    mode: String,
    fuel: String,
    group: String,
    is_new: String,
    lifespan_years: f64,
    base_share: f64,
}

#[derive(Deserialize)]
struct VehicleRow {
    id: String,
    mode: String,
    products: String,
}

#[derive(Deserialize)]
struct FleetRow {
    mode: String,
    lifespan_years: f64,
    max_decrease: String,
}

#[derive(Deserialize)]
struct TimeRow {
    year: i32,
    period: String,
    carbon_price: f64,
    emission_target: Option<f64>,
}

#[derive(Deserialize)]
struct DemandRow {
    origin: String,
    destination: String,
    product: String,
    year: i32,
    amount: f64,
}

#[derive(Deserialize)]
struct FactorRow {
    mode: String,
    fuel: String,
    product: String,
    year: i32,
    #[serde(alias = "cost_per_tkm", alias = "kg_per_tkm")]
    value: f64,
}

#[derive(Deserialize)]
struct AdoptionRow {
    mode: String,
    fuel: String,
    start_year: i32,
    potential: f64,
    alpha: String,
    beta: String,
}

#[derive(Deserialize)]
struct InvestmentRow {
    kind: String,
    node: Option<String>,
    from: Option<String>,
    to: Option<String>,
    mode: Option<String>,
    route: Option<String>,
    class: Option<String>,
    fuel: Option<String>,
    base_capacity: Option<f64>,
    cost: Option<f64>,
    capacity_gain: Option<f64>,
    lead_periods: Option<usize>,
}

/// Reads `file` from `dir`; `None` if optional and absent.
fn read_table<T: DeserializeOwned>(dir: &Path, file: &str, required: bool) -> Result<Option<Vec<(u64, T)>>> {
    let path = dir.join(file);
    if !path.exists() {
        return if required { Err(Error::input(file, "file is missing")) } else { Ok(None) };
    }
    let text = fs::read_to_string(&path).map_err(|e| Error::input(file, e))?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| Error::input(file, e))?.clone();
    let describe = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Deserialize { err, .. } => err.to_string(),
        k => format!("{k:?}"),
    };
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::input(file, format!("row {line}: {}", describe(e)))
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let row: T = rec.deserialize(Some(&headers)).map_err(|e| Error::input(file, format!("row {line}: {}", describe(e))))?;
        rows.push((line, row));
    }
    Ok(Some(rows))
}

fn parse_flag(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "y" => Some(true),
        "0" | "false" | "no" | "n" | "" => Some(false),
        _ => None,
    }
}

fn split_list(s: &str) -> impl Iterator<Item = &str> {
    s.split(';').map(str::trim).filter(|x| !x.is_empty())
}

/// `"0.01"` or `"0.01@2023;0.02@2034"`.
pub fn parse_pieces(s: &str) -> std::result::Result<Pieces, String> {
    let mut pieces = Vec::new();
    for part in split_list(s) {
        match part.split_once('@') {
            None => {
                let v = part.parse().map_err(|_| format!("bad value {part:?}"))?;
                pieces.push((i32::MIN, v));
            }
            Some((v, y)) => {
                let v = v.trim().parse().map_err(|_| format!("bad value {v:?}"))?;
                let y = y.trim().parse().map_err(|_| format!("bad year {y:?}"))?;
                pieces.push((y, v));
            }
        }
    }
    if pieces.is_empty() {
        return Err("no pieces".into());
    }
    if pieces.len() > 1 && pieces.iter().any(|p| p.0 == i32::MIN) {
        return Err("a piece without year must stand alone".into());
    }
    Ok(Pieces(pieces))
}

struct Ctx<'a> {
    file: &'a str,
    line: u64,
}

impl Ctx<'_> {
    fn err(&self, msg: impl std::fmt::Display) -> Error {
        Error::input(self.file, format!("row {}: {msg}", self.line))
    }
}

/// Loads an instance directory without checking model invariants.
pub fn load_instance(dir: &Path) -> Result<Instance> {
    if !dir.is_dir() {
        return Err(Error::input(dir.display(), "instance directory not found"));
    }
    let text = fs::read_to_string(dir.join("instance.json")).map_err(|e| Error::input("instance.json", e))?;
    let man: Manifest = serde_json::from_str(&text).map_err(|e| Error::input("instance.json", e))?;
    let scale = man.mass_unit.tonnes();
    let products = man.products.clone();
    let prod_idx: HashMap<&str, usize> = products.iter().enumerate().map(|(i, p)| (p.as_str(), i)).collect();
    let fuel_groups: Vec<FuelGroup> = man.fuel_groups.iter().map(|g| FuelGroup { id: g.id.clone(), varied: g.varied }).collect();
    let product = |c: &Ctx, id: &str| prod_idx.get(id).copied().ok_or_else(|| c.err(format!("unknown product {id:?}")));
    let mode = |c: &Ctx, m: &str| Mode::parse(m).ok_or_else(|| c.err(format!("unknown mode {m:?}")));

    let mut terminal_classes = Vec::new();
    for c in &man.terminal_classes {
        let ctx = Ctx { file: "instance.json", line: 0 };
        let m = Mode::parse(&c.mode).ok_or_else(|| Error::input("instance.json", format!("terminal class {}: unknown mode", c.id)))?;
        let ps = c.products.iter().map(|p| product(&ctx, p)).collect::<Result<Vec<_>>>()?;
        terminal_classes.push(TerminalClass { id: c.id.clone(), mode: m, products: ps });
    }
    let mut transfer_costs = HashMap::new();
    for tr in &man.transfer_costs {
        let bad = || Error::input("instance.json", format!("transfer cost {} -> {}: unknown mode", tr.from, tr.to));
        let (from, to) = (Mode::parse(&tr.from).ok_or_else(bad)?, Mode::parse(&tr.to).ok_or_else(bad)?);
        let ps: Vec<usize> = match &tr.product {
            None => (0..products.len()).collect(),
            Some(p) => vec![*prod_idx.get(p.as_str()).ok_or_else(|| Error::input("instance.json", format!("unknown product {p:?}")))?],
        };
        for p in ps {
            transfer_costs.insert((from, to, p), tr.cost);
        }
    }

    // Nodes.
    let mut nodes = Vec::new();
    for (_, r) in read_table::<NodeRow>(dir, "nodes.csv", true)?.unwrap() {
        nodes.push(Node { name: r.name.unwrap_or_else(|| r.id.clone()), id: r.id });
    }
    let node_idx: HashMap<String, usize> = nodes.iter().enumerate().map(|(i, n)| (n.id.clone(), i)).collect();
    let node = |c: &Ctx, id: &str| node_idx.get(id).copied().ok_or_else(|| c.err(format!("unknown node {id:?}")));

    // Fuels.
    let mut fuels: Vec<Fuel> = Vec::new();
    let mut mode_fuels: Vec<ModeFuel> = Vec::new();
    for (line, r) in read_table::<FuelRow>(dir, "fuels.csv", true)?.unwrap() {
        let c = Ctx { file: "fuels.csv", line };
        let m = mode(&c, &r.mode)?;
        let group = fuel_groups.iter().position(|g| g.id == r.group).ok_or_else(|| c.err(format!("unknown fuel group {:?}", r.group)))?;
        let f = match fuels.iter().position(|f| f.id == r.fuel) {
            Some(f) if fuels[f].group != group => return Err(c.err(format!("fuel {:?} listed with two groups", r.fuel))),
            Some(f) => f,
            None => {
                fuels.push(Fuel { id: r.fuel.clone(), group });
                fuels.len() - 1
            }
        };
        let is_new = parse_flag(&r.is_new).ok_or_else(|| c.err(format!("bad is_new flag {:?}", r.is_new)))?;
        mode_fuels.push(ModeFuel { mode: m, fuel: f, is_new, lifespan_years: r.lifespan_years, base_share: r.base_share });
    }
    let mf_of = |m: Mode, f: &str| mode_fuels.iter().position(|x| x.mode == m && fuels[x.fuel].id == f);
    let resolve_mf = |c: &Ctx, m: Mode, f: &str| -> Result<usize> {
        match mf_of(m, f) {
            Some(i) => Ok(i),
            None if fuels.iter().any(|x| x.id == f) => Err(Error::Invalid(format!("{} row {}: fuel not allowed on mode {m}: {f}", c.file, c.line))),
            None => Err(c.err(format!("unknown fuel {f:?}"))),
        }
    };

    // Arcs and edges.
    let mut arcs = Vec::new();
    for (line, r) in read_table::<ArcRow>(dir, "arcs.csv", true)?.unwrap() {
        let c = Ctx { file: "arcs.csv", line };
        let m = mode(&c, &r.mode)?;
        let fs = split_list(&r.fuels).map(|f| resolve_mf(&c, m, f)).collect::<Result<Vec<_>>>()?;
        arcs.push(Arc {
            id: r.id,
            from: node(&c, &r.from)?,
            to: node(&c, &r.to)?,
            mode: m,
            route: r.route,
            length_km: r.length_km,
            fuels: fs,
            edge: 0,
        });
    }
    let (mut edges, of_arc) = derive_edges(&arcs)?;
    for (a, e) in arcs.iter_mut().zip(of_arc) {
        a.edge = e;
    }
    let find_edge = |edges: &[crate::model::Edge], c: &Ctx, from: &str, to: &str, m: Mode, route: &str| -> Result<usize> {
        let (i, j) = (node(c, from)?, node(c, to)?);
        let key = (i.min(j), i.max(j));
        edges
            .iter()
            .position(|e| e.ends == key && e.mode == m && e.route == route)
            .ok_or_else(|| c.err(format!("no arcs form edge {from}-{to} {m} {route:?}")))
    };
    if let Some(rows) = read_table::<EdgeRow>(dir, "edges.csv", false)? {
        let mut seen = HashSet::new();
        for (line, r) in rows {
            let c = Ctx { file: "edges.csv", line };
            let e = find_edge(&edges, &c, &r.from, &r.to, mode(&c, &r.mode)?, &r.route)?;
            if !seen.insert(e) {
                return Err(c.err("edge listed twice"));
            }
            edges[e].base_capacity = r.base_capacity.map(|q| q * scale);
        }
    }

    // Vehicles.
    let mut vehicles = Vec::new();
    for (line, r) in read_table::<VehicleRow>(dir, "vehicles.csv", true)?.unwrap() {
        let c = Ctx { file: "vehicles.csv", line };
        let ps = split_list(&r.products).map(|p| product(&c, p)).collect::<Result<Vec<_>>>()?;
        vehicles.push(VehicleType { id: r.id, mode: mode(&c, &r.mode)?, products: ps });
    }

    // Time.
    let (first, last) = (man.horizon.first_year, man.horizon.last_year);
    if last < first {
        return Err(Error::input("instance.json", "horizon ends before it starts"));
    }
    let mut years: Vec<Option<YearData>> = vec![None; (last - first + 1) as usize];
    let mut periods = Vec::new();
    for (line, r) in read_table::<TimeRow>(dir, "time.csv", true)?.unwrap() {
        let c = Ctx { file: "time.csv", line };
        if r.year < first || r.year > last {
            return Err(c.err(format!("year {} outside the horizon", r.year)));
        }
        let slot = &mut years[(r.year - first) as usize];
        if slot.is_some() {
            return Err(c.err(format!("year {} listed twice", r.year)));
        }
        *slot = Some(YearData { carbon_price: r.carbon_price, emission_target: r.emission_target });
        if parse_flag(&r.period).ok_or_else(|| c.err(format!("bad period flag {:?}", r.period)))? {
            periods.push(r.year);
        }
    }
    let years = years
        .into_iter()
        .enumerate()
        .map(|(i, y)| y.ok_or_else(|| Error::input("time.csv", format!("missing carbon price for year {}", first + i as i32))))
        .collect::<Result<Vec<_>>>()?;
    let time = TimeStructure { first_year: first, last_year: last, periods, discount: man.discount_factor };
    let period = |c: &Ctx, y: i32| time.period_of_year(y).ok_or_else(|| c.err(format!("{y} is not a period year")));

    // Demand, costs, emissions.
    let mut demand = BTreeMap::new();
    for (line, r) in read_table::<DemandRow>(dir, "demand.csv", true)?.unwrap() {
        let c = Ctx { file: "demand.csv", line };
        let key = (node(&c, &r.origin)?, node(&c, &r.destination)?, product(&c, &r.product)?, period(&c, r.year)?);
        if demand.insert(key, r.amount * scale).is_some() {
            return Err(c.err("duplicate demand entry"));
        }
    }
    let factor_table = |file: &str| -> Result<HashMap<(usize, usize, usize), f64>> {
        let mut out = HashMap::new();
        for (line, r) in read_table::<FactorRow>(dir, file, true)?.unwrap() {
            let c = Ctx { file, line };
            let m = mode(&c, &r.mode)?;
            let key = (resolve_mf(&c, m, &r.fuel)?, product(&c, &r.product)?, period(&c, r.year)?);
            if out.insert(key, r.value).is_some() {
                return Err(c.err("duplicate entry"));
            }
        }
        Ok(out)
    };
    let cost_per_tkm = factor_table("costs.csv")?;
    let emission_per_tkm = factor_table("emissions.csv")?;

    // Investments.
    let mut edge_expansions = Vec::new();
    let mut node_investments = Vec::new();
    let mut charging = Vec::new();
    let mut upgrades = Vec::new();
    for (line, r) in read_table::<InvestmentRow>(dir, "investments.csv", false)?.unwrap_or_default() {
        let c = Ctx { file: "investments.csv", line };
        let need = |v: &Option<String>, what: &str| v.clone().ok_or_else(|| c.err(format!("{} needs {what}", r.kind)));
        let needf = |v: Option<f64>, what: &str| v.ok_or_else(|| c.err(format!("{} needs {what}", r.kind)));
        let lead = r.lead_periods.unwrap_or(0);
        let route = r.route.clone().unwrap_or_default();
        match r.kind.as_str() {
            "edge" => {
                let m = mode(&c, &need(&r.mode, "mode")?)?;
                edge_expansions.push(EdgeExpansion {
                    edge: find_edge(&edges, &c, &need(&r.from, "from")?, &need(&r.to, "to")?, m, &route)?,
                    cost: needf(r.cost, "cost")?,
                    capacity_gain: needf(r.capacity_gain, "capacity_gain")? * scale,
                    lead_periods: lead,
                });
            }
            "node" => {
                let class_id = need(&r.class, "class")?;
                let class = terminal_classes
                    .iter()
                    .position(|t| t.id == class_id)
                    .ok_or_else(|| c.err(format!("unknown terminal class {class_id:?}")))?;
                node_investments.push(NodeInvestment {
                    node: node(&c, &need(&r.node, "node")?)?,
                    class,
                    base_capacity: needf(r.base_capacity, "base_capacity")? * scale,
                    cost: r.cost.unwrap_or(0.0),
                    capacity_gain: r.capacity_gain.unwrap_or(0.0) * scale,
                    lead_periods: lead,
                });
            }
            "charging" => {
                let m = r.mode.as_deref().map_or(Ok(Mode::Road), |m| mode(&c, m))?;
                charging.push(ChargingOption {
                    edge: find_edge(&edges, &c, &need(&r.from, "from")?, &need(&r.to, "to")?, m, &route)?,
                    mode_fuel: resolve_mf(&c, m, &need(&r.fuel, "fuel")?)?,
                    base_capacity: r.base_capacity.unwrap_or(0.0) * scale,
                    unit_cost: needf(r.cost, "cost")?,
                    lead_periods: lead,
                });
            }
            "upgrade" => {
                let m = mode(&c, &need(&r.mode, "mode")?)?;
                upgrades.push(UpgradeOption {
                    edge: find_edge(&edges, &c, &need(&r.from, "from")?, &need(&r.to, "to")?, m, &route)?,
                    mode_fuel: resolve_mf(&c, m, &need(&r.fuel, "fuel")?)?,
                    cost: needf(r.cost, "cost")?,
                    lead_periods: lead,
                });
            }
            k => return Err(c.err(format!("unknown investment kind {k:?}"))),
        }
    }

    // Fleet.
    let mut fleet = BTreeMap::new();
    for (line, r) in read_table::<FleetRow>(dir, "fleet.csv", true)?.unwrap() {
        let c = Ctx { file: "fleet.csv", line };
        let values = split_list(&r.max_decrease)
            .map(|v| v.parse::<f64>().map_err(|_| c.err(format!("bad max_decrease {v:?}"))))
            .collect::<Result<Vec<_>>>()?;
        let max_decrease = match values.len() {
            1 => vec![values[0]; time.num_periods()],
            _ => values,
        };
        if fleet.insert(mode(&c, &r.mode)?, FleetParams { lifespan_years: r.lifespan_years, max_decrease }).is_some() {
            return Err(c.err("mode listed twice"));
        }
    }

    // Adoption.
    let mut adoption = BTreeMap::new();
    for (line, r) in read_table::<AdoptionRow>(dir, "adoption.csv", false)?.unwrap_or_default() {
        let c = Ctx { file: "adoption.csv", line };
        let mf = resolve_mf(&c, mode(&c, &r.mode)?, &r.fuel)?;
        let params = BassParams {
            start_year: r.start_year,
            potential: r.potential,
            alpha: parse_pieces(&r.alpha).map_err(|e| c.err(format!("alpha: {e}")))?,
            beta: parse_pieces(&r.beta).map_err(|e| c.err(format!("beta: {e}")))?,
        };
        if adoption.insert(mf, params).is_some() {
            return Err(c.err("mode-fuel listed twice"));
        }
    }

    // Scenarios.
    let scen_path = dir.join("scenarios.json");
    let mut scenarios: ScenarioConfig = if scen_path.exists() {
        let text = fs::read_to_string(&scen_path).map_err(|e| Error::input("scenarios.json", e))?;
        serde_json::from_str(&text).map_err(|e| Error::input("scenarios.json", e))?
    } else {
        ScenarioConfig::default()
    };
    if scenarios.branch_year.is_none() {
        scenarios.branch_year = man.branch_year;
    }

    let empty_trip = man
        .empty_trip
        .map(|e| EmptyTrip { cost_factor: e.cost_factor, emission_factor: e.emission_factor })
        .unwrap_or_default();
    Ok(Instance {
        name: man.name,
        money_unit: man.money_unit,
        nodes,
        arcs,
        edges,
        products,
        fuel_groups,
        fuels,
        mode_fuels,
        vehicles,
        terminal_classes,
        time,
        years,
        demand,
        cost_per_tkm,
        emission_per_tkm,
        transfer_costs,
        empty_trip,
        edge_expansions,
        node_investments,
        charging,
        upgrades,
        fleet,
        adoption,
        max_modes: man.max_modes,
        scenarios,
    })
}

/// Loads and validates; returns the instance with its warnings.
pub fn load_valid(dir: &Path) -> Result<(Instance, Vec<String>)> {
    let inst = load_instance(dir)?;
    let warnings = validate_instance(&inst).into_result()?;
    Ok((inst, warnings))
}
