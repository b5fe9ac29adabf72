//! Admissible path generation.
//!
//! For every cost variant (product, one fuel per mode, scenario) the cheapest
//! unimodal paths between all node pairs are computed with Dijkstra, then
//! combined into the cheapest path for every admissible mode sequence by
//! choosing the best transfer node. The union over all variants, deduplicated
//! by arc sequence, forms the path set.
//!
//! Ties between equal-cost paths are broken by fewer arcs, then by the
//! lexicographically smallest arc index sequence. This order is preserved by
//! path extension, so Dijkstra returns the minimum under it exactly.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::model::{Instance, Mode};
use crate::scenario::ScenarioTree;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NetArc {
    pub from: usize,
    pub to: usize,
    pub mode: Mode,
}

/// Directed multimodal graph.
#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    pub n_nodes: usize,
    pub arcs: Vec<NetArc>,
}

impl Network {
    pub fn of(inst: &Instance) -> Self {
        Network {
            n_nodes: inst.nodes.len(),
            arcs: inst.arcs.iter().map(|a| NetArc { from: a.from, to: a.to, mode: a.mode }).collect(),
        }
    }
}

/// A path with its cost under some variant.
#[derive(Clone, Debug, PartialEq)]
pub struct Route {
    pub cost: f64,
    pub arcs: Vec<usize>,
}

impl Route {
    fn order(&self, other: &Route) -> Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then(self.arcs.len().cmp(&other.arcs.len()))
            .then_with(|| self.arcs.cmp(&other.arcs))
    }

    fn keep_better(slot: &mut Option<Route>, cand: Route) {
        if slot.as_ref().map_or(true, |cur| cand.order(cur) == Ordering::Less) {
            *slot = Some(cand);
        }
    }
}

/// All-pairs cheapest paths on one mode.
#[derive(Clone, Debug, PartialEq)]
pub struct UnimodalTable {
    pub mode: Mode,
    n: usize,
    routes: Vec<Option<Route>>,
}

impl UnimodalTable {
    pub fn get(&self, o: usize, d: usize) -> Option<&Route> {
        if o == d {
            return None;
        }
        self.routes[o * self.n + d].as_ref()
    }
}

/// Cheapest unimodal paths for every ordered pair. `cost[a]` is `None` for
/// arcs that may not be used; arcs of other modes are ignored.
pub fn unimodal_cheapest(net: &Network, mode: Mode, cost: &[Option<f64>]) -> Result<UnimodalTable> {
    let n = net.n_nodes;
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (a, arc) in net.arcs.iter().enumerate() {
        if arc.mode != mode {
            continue;
        }
        if let Some(c) = cost[a] {
            if !(c >= 0.0) {
                return Err(Error::Model(format!("negative arc cost {c} on arc {a}")));
            }
            out[arc.from].push(a);
        }
    }
    let mut routes = vec![None; n * n];
    for o in 0..n {
        let mut label: Vec<Option<Route>> = vec![None; n];
        let mut settled = vec![false; n];
        label[o] = Some(Route { cost: 0.0, arcs: Vec::new() });
        loop {
            let mut pick: Option<usize> = None;
            for v in 0..n {
                if settled[v] || label[v].is_none() {
                    continue;
                }
                if pick.map_or(true, |u| label[v].as_ref().unwrap().order(label[u].as_ref().unwrap()) == Ordering::Less) {
                    pick = Some(v);
                }
            }
            let Some(u) = pick else { break };
            settled[u] = true;
            let base = label[u].clone().unwrap();
            for &a in &out[u] {
                let v = net.arcs[a].to;
                if settled[v] {
                    continue;
                }
                let mut arcs = base.arcs.clone();
                arcs.push(a);
                Route::keep_better(&mut label[v], Route { cost: base.cost + cost[a].unwrap(), arcs });
            }
        }
        for d in 0..n {
            if d != o {
                routes[o * n + d] = label[d].take();
            }
        }
    }
    Ok(UnimodalTable { mode, n, routes })
}

/// Composes cheapest multimodal routes, memoizing two-mode results.
pub struct Composer<'a, F: Fn(Mode, Mode) -> f64> {
    tables: &'a BTreeMap<Mode, UnimodalTable>,
    n: usize,
    transfer: F,
    memo: HashMap<(usize, usize, Mode, Mode), Option<Route>>,
}

impl<'a, F: Fn(Mode, Mode) -> f64> Composer<'a, F> {
    pub fn new(tables: &'a BTreeMap<Mode, UnimodalTable>, n_nodes: usize, transfer: F) -> Self {
        Composer { tables, n: n_nodes, transfer, memo: HashMap::new() }
    }

    fn two(&mut self, o: usize, d: usize, m1: Mode, m2: Mode) -> Option<Route> {
        if let Some(r) = self.memo.get(&(o, d, m1, m2)) {
            return r.clone();
        }
        let mut best = None;
        if let (Some(t1), Some(t2)) = (self.tables.get(&m1), self.tables.get(&m2)) {
            let tr = (self.transfer)(m1, m2);
            for k in (0..self.n).filter(|&k| k != o && k != d) {
                if let (Some(r1), Some(r2)) = (t1.get(o, k), t2.get(k, d)) {
                    let mut arcs = r1.arcs.clone();
                    arcs.extend_from_slice(&r2.arcs);
                    Route::keep_better(&mut best, Route { cost: r1.cost + tr + r2.cost, arcs });
                }
            }
        }
        self.memo.insert((o, d, m1, m2), best.clone());
        best
    }

    /// Cheapest route from `o` to `d` following `seq` (one to three modes),
    /// transferring at nodes other than the segment's own endpoints.
    pub fn compose(&mut self, o: usize, d: usize, seq: &[Mode]) -> Option<Route> {
        match *seq {
            [m] => self.tables.get(&m)?.get(o, d).cloned(),
            [m1, m2] => self.two(o, d, m1, m2),
            [m1, m2, m3] => {
                let t1 = self.tables.get(&m1)?;
                let tr = (self.transfer)(m1, m2);
                let mut best = None;
                for k in (0..self.n).filter(|&k| k != o && k != d) {
                    let Some(r1) = t1.get(o, k).cloned() else { continue };
                    if let Some(rest) = self.two(k, d, m2, m3) {
                        let mut arcs = r1.arcs;
                        arcs.extend_from_slice(&rest.arcs);
                        Route::keep_better(&mut best, Route { cost: r1.cost + tr + rest.cost, arcs });
                    }
                }
                best
            }
            _ => None,
        }
    }
}

/// One-off composition without memo reuse across calls.
pub fn compose_mode_sequence(
    o: usize,
    d: usize,
    seq: &[Mode],
    tables: &BTreeMap<Mode, UnimodalTable>,
    n_nodes: usize,
    transfer: impl Fn(Mode, Mode) -> f64,
) -> Option<Route> {
    Composer::new(tables, n_nodes, transfer).compose(o, d, seq)
}

/// Mode sequences over `modes` of length `1..=max` without consecutive repeats.
pub fn mode_sequences(modes: &[Mode], max: usize) -> Vec<Vec<Mode>> {
    let mut out: Vec<Vec<Mode>> = modes.iter().map(|&m| vec![m]).collect();
    let mut frontier = out.clone();
    for _ in 1..max {
        let mut next = Vec::new();
        for s in &frontier {
            for &m in modes {
                if *s.last().unwrap() != m {
                    let mut t = s.clone();
                    t.push(m);
                    next.push(t);
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct Path {
    pub arcs: Vec<usize>,
    pub origin: usize,
    pub destination: usize,
    /// Modes in order with consecutive duplicates collapsed.
    pub modes: Vec<Mode>,
    /// `(node, from_mode, to_mode)` for every mode change.
    pub transfers: Vec<(usize, Mode, Mode)>,
}

impl Path {
    pub fn from_arcs(net: &Network, arcs: Vec<usize>) -> Result<Path> {
        let first = *arcs.first().ok_or_else(|| Error::Model("empty path".into()))?;
        let mut modes = vec![net.arcs[first].mode];
        let mut transfers = Vec::new();
        for w in arcs.windows(2) {
            let (a, b) = (&net.arcs[w[0]], &net.arcs[w[1]]);
            if a.to != b.from {
                return Err(Error::Model(format!("path arcs {} and {} do not chain", w[0], w[1])));
            }
            if a.mode != b.mode {
                transfers.push((a.to, a.mode, b.mode));
                modes.push(b.mode);
            }
        }
        let origin = net.arcs[first].from;
        let destination = net.arcs[*arcs.last().unwrap()].to;
        if origin == destination {
            return Err(Error::Model("path starts and ends at the same node".into()));
        }
        Ok(Path { arcs, origin, destination, modes, transfers })
    }

    pub fn is_unimodal(&self) -> bool {
        self.modes.len() == 1
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PathSet {
    pub paths: Vec<Path>,
    pub by_od: BTreeMap<(usize, usize), Vec<usize>>,
    /// Paths containing each arc.
    pub by_arc: Vec<Vec<usize>>,
    pub unimodal: Vec<usize>,
    pub unimodal_by_mode: BTreeMap<Mode, Vec<usize>>,
    /// Paths that start, end or transfer at a node on a mode.
    pub terminal_usage: BTreeMap<(usize, Mode), Vec<usize>>,
}

impl PathSet {
    /// Builds all indices; paths are sorted by origin, destination and arcs.
    pub fn new(mut paths: Vec<Path>, n_arcs: usize) -> PathSet {
        paths.sort_by(|a, b| (a.origin, a.destination, &a.arcs).cmp(&(b.origin, b.destination, &b.arcs)));
        paths.dedup_by(|a, b| a.arcs == b.arcs);
        let mut set = PathSet { by_arc: vec![Vec::new(); n_arcs], ..PathSet::default() };
        for (k, p) in paths.iter().enumerate() {
            set.by_od.entry((p.origin, p.destination)).or_default().push(k);
            let mut arcs = p.arcs.clone();
            arcs.sort_unstable();
            arcs.dedup();
            for a in arcs {
                set.by_arc[a].push(k);
            }
            if p.is_unimodal() {
                set.unimodal.push(k);
                set.unimodal_by_mode.entry(p.modes[0]).or_default().push(k);
            }
            let mut uses: BTreeSet<(usize, Mode)> = BTreeSet::new();
            uses.insert((p.origin, p.modes[0]));
            uses.insert((p.destination, *p.modes.last().unwrap()));
            for &(n, m1, m2) in &p.transfers {
                uses.insert((n, m1));
                uses.insert((n, m2));
            }
            for u in uses {
                set.terminal_usage.entry(u).or_default().push(k);
            }
        }
        set.paths = paths;
        set
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// Whether every mode on path `k` carries product `p`.
    pub fn usable(&self, inst: &Instance, k: usize, p: usize) -> bool {
        self.paths[k].modes.iter().all(|&m| inst.carries(m, p))
    }

    pub fn od(&self, o: usize, d: usize) -> &[usize] {
        self.by_od.get(&(o, d)).map_or(&[], |v| v.as_slice())
    }

    /// Errors if some positive demand has no usable path.
    pub fn check_demand(&self, inst: &Instance) -> Result<()> {
        for (&(o, d, p, _), &amount) in &inst.demand {
            if amount > 0.0 && !self.od(o, d).iter().any(|&k| self.usable(inst, k, p)) {
                return Err(Error::Model(format!(
                    "unconnected demand: {} -> {} for product {}",
                    inst.nodes[o].id, inst.nodes[d].id, inst.products[p]
                )));
            }
        }
        Ok(())
    }
}

/// Per-tonne arc costs of one generation variant: product `p`, fuel `mf_star`
/// on its mode, reference fuels elsewhere, scenario `s` costs at the branch year.
pub fn variant_costs(inst: &Instance, tree: &ScenarioTree, p: usize, mf_star: usize, s: usize) -> Result<Vec<Option<f64>>> {
    let star_mode = inst.mode_fuels[mf_star].mode;
    let mut costs = Vec::with_capacity(inst.arcs.len());
    for (a, arc) in inst.arcs.iter().enumerate() {
        if !inst.carries(arc.mode, p) {
            costs.push(None);
            continue;
        }
        let mf = if arc.mode == star_mode { Some(mf_star) } else { inst.reference_fuel(arc.mode) };
        let Some(mf) = mf.filter(|mf| arc.fuels.contains(mf)) else {
            costs.push(None);
            continue;
        };
        // First-period cost; the generalized cost carries no scenario effect there.
        let c = inst.generalized_cost(tree, a, mf, p, 0, s)?;
        let mult = tree.cost_multiplier(s, inst.group_of(mf), tree.branch_year);
        costs.push(Some(c.base * mult + c.carbon));
    }
    Ok(costs)
}

/// Runs generation over every product, mode-fuel and scenario variant.
pub fn generate_path_set(inst: &Instance, tree: &ScenarioTree) -> Result<PathSet> {
    let net = Network::of(inst);
    let mut found: BTreeSet<Vec<usize>> = BTreeSet::new();
    for p in 0..inst.products.len() {
        let modes: Vec<Mode> = inst.modes().into_iter().filter(|&m| inst.carries(m, p)).collect();
        let seqs = mode_sequences(&modes, inst.max_modes);
        for &m_star in &modes {
            for mf_star in inst.mode_fuels_of(m_star) {
                for s in 0..tree.len() {
                    let costs = variant_costs(inst, tree, p, mf_star, s)?;
                    let mut tables = BTreeMap::new();
                    for &m in &modes {
                        tables.insert(m, unimodal_cheapest(&net, m, &costs)?);
                    }
                    let mut comp = Composer::new(&tables, net.n_nodes, |a, b| inst.transfer_cost(a, b, p));
                    for o in 0..net.n_nodes {
                        for d in (0..net.n_nodes).filter(|&d| d != o) {
                            for seq in &seqs {
                                if let Some(r) = comp.compose(o, d, seq) {
                                    found.insert(r.arcs);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    let paths = found.into_iter().map(|arcs| Path::from_arcs(&net, arcs)).collect::<Result<Vec<_>>>()?;
    let set = PathSet::new(paths, inst.arcs.len());
    set.check_demand(inst)?;
    Ok(set)
}

/// Cost per tonne of moving product `p` along `path` with the given fuel per arc.
pub fn path_cost(
    inst: &Instance,
    tree: &ScenarioTree,
    path: &Path,
    p: usize,
    fuels: &[usize],
    t: usize,
    s: usize,
) -> Result<f64> {
    if fuels.len() != path.arcs.len() {
        return Err(Error::Model("one fuel per arc is required".into()));
    }
    let mut total = 0.0;
    for (&a, &mf) in path.arcs.iter().zip(fuels) {
        if !inst.arcs[a].fuels.contains(&mf) {
            return Err(Error::Model(format!("fuel {} not allowed on arc {}", inst.mode_fuel_label(mf), inst.arcs[a].id)));
        }
        total += inst.generalized_cost(tree, a, mf, p, t, s)?.total();
    }
    for &(_, m1, m2) in &path.transfers {
        total += inst.transfer_cost(m1, m2, p);
    }
    Ok(total)
}

/// `path_id,arcs` CSV with arc ids joined by `;`.
pub fn write_paths_csv(inst: &Instance, set: &PathSet) -> String {
    let mut out = String::from("path_id,arcs\n");
    for (k, p) in set.paths.iter().enumerate() {
        let ids: Vec<&str> = p.arcs.iter().map(|&a| inst.arcs[a].id.as_str()).collect();
        out.push_str(&format!("{k},{}\n", ids.join(";")));
    }
    out
}

pub fn read_paths_csv(inst: &Instance, text: &str) -> Result<PathSet> {
    let net = Network::of(inst);
    let index: HashMap<&str, usize> = inst.arcs.iter().enumerate().map(|(i, a)| (a.id.as_str(), i)).collect();
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut paths = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::input("paths.csv", e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = rec.get(1).ok_or_else(|| Error::input("paths.csv", format!("row {line}: missing arcs")))?;
        let arcs = field
            .split(';')
            .map(|id| index.get(id.trim()).copied().ok_or_else(|| Error::input("paths.csv", format!("row {line}: unknown arc {id:?}"))))
            .collect::<Result<Vec<_>>>()?;
        let path = Path::from_arcs(&net, arcs).map_err(|e| Error::input("paths.csv", format!("row {line}: {e}")))?;
        if path.modes.len() > 3 {
            return Err(Error::input("paths.csv", format!("row {line}: more than three modes")));
        }
        paths.push(path);
    }
    let set = PathSet::new(paths, inst.arcs.len());
    set.check_demand(inst)?;
    Ok(set)
}
