//! Constraint and objective generation.

use std::collections::{BTreeMap, HashMap};

use stram_solver::{LinearProgram, RowSense};

use super::{Block, BuildOptions, NonAnticipativity, RowTag, StochasticProgram, Var};
use crate::diffusion::{adoption_bound_table, rate_coefficients, AdoptionTable};
use crate::model::{Instance, Mode};
use crate::paths::PathSet;
use crate::scenario::ScenarioTree;
use crate::{Error, Result};

struct Builder<'a> {
    inst: &'a Instance,
    paths: &'a PathSet,
    tree: &'a ScenarioTree,
    opts: BuildOptions,
    adoption: AdoptionTable,
    prog: StochasticProgram,
    /// Arcs entering and leaving each node, per mode.
    arcs_in: HashMap<(usize, Mode), Vec<usize>>,
    arcs_out: HashMap<(usize, Mode), Vec<usize>>,
}

type Terms = Vec<(usize, f64)>;

impl<'a> Builder<'a> {
    fn merged(&self) -> bool {
        self.opts.nonanticipativity == NonAnticipativity::Merged
    }

    /// Scenarios for which rows of a decision year are emitted.
    fn scenarios(&self, year: i32) -> Vec<usize> {
        if self.merged() && !self.tree.is_second_stage(year) {
            vec![0]
        } else {
            (0..self.tree.len()).collect()
        }
    }

    fn periods(&self) -> Vec<usize> {
        (0..self.inst.time.num_periods()).collect()
    }

    /// Periods with operational rows.
    fn op_periods(&self) -> Vec<usize> {
        match self.opts.static_period {
            Some(t) => vec![t],
            None => self.periods(),
        }
    }

    /// Periods in which an investment with lead time `lead` can still take effect.
    fn invest_periods(&self, lead: usize) -> std::ops::Range<usize> {
        0..self.inst.time.num_periods().saturating_sub(lead)
    }

    fn year(&self, t: usize) -> i32 {
        self.inst.time.periods[t]
    }

    fn get(&self, key: Var) -> Option<usize> {
        self.prog.col(key)
    }

    fn col(&mut self, key: Var) -> usize {
        let key = self.prog.resolve(key);
        if let Some(&j) = self.prog.index.get(&key) {
            return j;
        }
        let name = key.name(self.merged() && self.prog.is_first_stage(&key));
        let j = if key.is_binary() {
            self.prog.lp.add_binary(name, 0.0)
        } else if key == Var::Threshold {
            self.prog.lp.add_column(name, 0.0, f64::NEG_INFINITY, f64::INFINITY)
        } else {
            self.prog.lp.add_column(name, 0.0, 0.0, f64::INFINITY)
        };
        self.prog.keys.push(key);
        self.prog.index.insert(key, j);
        j
    }

    fn row(&mut self, block: Block, t: Option<usize>, year: Option<i32>, s: Option<usize>, terms: Terms, sense: RowSense, rhs: f64) -> Result<()> {
        let year = year.or_else(|| t.map(|t| self.year(t)));
        let mut name = format!("{block}[{}", self.prog.lp.num_rows());
        if let Some(t) = t {
            name.push_str(&format!(",t{t}"));
        } else if let Some(y) = year {
            name.push_str(&format!(",y{y}"));
        }
        if let Some(s) = s {
            name.push_str(&format!(",s{s}"));
        }
        name.push(']');
        let before = self.prog.lp.num_rows();
        self.prog.lp.add_row(name.clone(), terms, sense, rhs);
        if self.prog.lp.rows[before].coeffs.is_empty() {
            // Constant rows carry no information; reject those that cannot hold.
            let ok = match sense {
                RowSense::Le => 0.0 <= rhs,
                RowSense::Ge => 0.0 >= rhs,
                RowSense::Eq => rhs == 0.0,
            };
            self.prog.lp.rows.pop();
            self.prog.lp.row_names.pop();
            if !ok {
                return Err(Error::Model(format!("row {name} has no variables and cannot be satisfied")));
            }
            return Ok(());
        }
        self.prog.tags.push(RowTag { block, period: t, year, scenario: s });
        Ok(())
    }

    // Flow rows.

    fn demand(&mut self) -> Result<()> {
        let demand: Vec<_> = self.inst.demand.iter().map(|(&k, &v)| (k, v)).collect();
        for t in self.op_periods() {
            for s in self.scenarios(self.year(t)) {
                for &((o, d, p, td), amount) in &demand {
                    if td != t || amount <= 0.0 {
                        continue;
                    }
                    let ks: Vec<usize> = self.paths.od(o, d).iter().copied().filter(|&k| self.paths.usable(self.inst, k, p)).collect();
                    if ks.is_empty() {
                        return Err(Error::Model(format!(
                            "unconnected demand: {} -> {} for product {}",
                            self.inst.nodes[o].id, self.inst.nodes[d].id, self.inst.products[p]
                        )));
                    }
                    let terms = ks.into_iter().map(|k| (self.col(Var::PathFlow { k, p, t, s }), 1.0)).collect();
                    self.row(Block::Demand, Some(t), None, Some(s), terms, RowSense::Eq, amount)?;
                }
            }
        }
        Ok(())
    }

    fn arc_path(&mut self) -> Result<()> {
        let inst = self.inst;
        for t in self.op_periods() {
            for s in self.scenarios(self.year(t)) {
                for (a, arc) in inst.arcs.iter().enumerate() {
                    for p in 0..inst.products.len() {
                        let hs: Vec<usize> =
                            self.paths.by_arc[a].iter().filter_map(|&k| self.get(Var::PathFlow { k, p, t, s })).collect();
                        if hs.is_empty() {
                            continue;
                        }
                        let mut terms: Terms = arc.fuels.iter().map(|&mf| (self.col(Var::ArcFlow { a, mf, p, t, s }), 1.0)).collect();
                        terms.extend(hs.into_iter().map(|j| (j, -1.0)));
                        self.row(Block::ArcPath, Some(t), None, Some(s), terms, RowSense::Eq, 0.0)?;
                    }
                }
            }
        }
        Ok(())
    }

    fn empty_arc_path(&mut self) -> Result<()> {
        let inst = self.inst;
        for t in self.op_periods() {
            for s in self.scenarios(self.year(t)) {
                for (a, arc) in inst.arcs.iter().enumerate() {
                    let ks: Vec<usize> =
                        self.paths.by_arc[a].iter().copied().filter(|&k| self.paths.paths[k].is_unimodal()).collect();
                    if ks.is_empty() {
                        continue;
                    }
                    for v in inst.vehicles_of(arc.mode).collect::<Vec<_>>() {
                        let mut terms: Terms = arc.fuels.iter().map(|&mf| (self.col(Var::Balance { a, mf, v, t, s }), 1.0)).collect();
                        for &k in &ks {
                            terms.push((self.col(Var::Empty { k, v, t, s }), -1.0));
                        }
                        self.row(Block::EmptyArcPath, Some(t), None, Some(s), terms, RowSense::Eq, 0.0)?;
                    }
                }
            }
        }
        Ok(())
    }

    fn fleet_balance(&mut self) -> Result<()> {
        let inst = self.inst;
        let modes = inst.modes();
        for t in self.op_periods() {
            for s in self.scenarios(self.year(t)) {
                for n in 0..inst.nodes.len() {
                    for &m in &modes {
                        let ins = self.arcs_in.get(&(n, m)).cloned().unwrap_or_default();
                        let outs = self.arcs_out.get(&(n, m)).cloned().unwrap_or_default();
                        if ins.is_empty() && outs.is_empty() {
                            continue;
                        }
                        for mf in inst.mode_fuels_of(m) {
                            for v in inst.vehicles_of(m) {
                                let mut terms = Terms::new();
                                for (arcs, sign) in [(&ins, 1.0), (&outs, -1.0)] {
                                    for &a in arcs.iter() {
                                        for &p in &inst.vehicles[v].products {
                                            if let Some(j) = self.get(Var::ArcFlow { a, mf, p, t, s }) {
                                                terms.push((j, sign));
                                            }
                                        }
                                        if let Some(j) = self.get(Var::Balance { a, mf, v, t, s }) {
                                            terms.push((j, sign));
                                        }
                                    }
                                }
                                self.row(Block::FleetBalance, Some(t), None, Some(s), terms, RowSense::Eq, 0.0)?;
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Loaded plus empty flow on arc `a` with mode-fuel `mf`, optionally without empty flow.
    fn arc_load(&self, a: usize, mf: usize, t: usize, s: usize, with_empty: bool) -> Terms {
        let inst = self.inst;
        let mut terms = Terms::new();
        for p in 0..inst.products.len() {
            if let Some(j) = self.get(Var::ArcFlow { a, mf, p, t, s }) {
                terms.push((j, 1.0));
            }
        }
        if with_empty {
            for v in inst.vehicles_of(inst.arcs[a].mode) {
                if let Some(j) = self.get(Var::Balance { a, mf, v, t, s }) {
                    terms.push((j, 1.0));
                }
            }
        }
        terms
    }

    // Investment rows.

    fn edge_capacity(&mut self) -> Result<()> {
        let inst = self.inst;
        let expansion: BTreeMap<usize, usize> = inst.edge_expansions.iter().enumerate().map(|(i, x)| (x.edge, i)).collect();
        for (e, edge) in inst.edges.iter().enumerate() {
            if edge.mode != Mode::Rail {
                continue;
            }
            let base = edge.base_capacity.ok_or_else(|| Error::Model(format!("rail edge {e} has no capacity data")))?;
            for t in self.periods() {
                for s in self.scenarios(self.year(t)) {
                    for &a in &edge.arcs {
                        let mut terms = Terms::new();
                        for &mf in &inst.arcs[a].fuels {
                            terms.extend(self.arc_load(a, mf, t, s, true));
                        }
                        if let Some(&x) = expansion.get(&e) {
                            let opt = &inst.edge_expansions[x];
                            for t2 in self.invest_periods(opt.lead_periods).filter(|&t2| t2 + opt.lead_periods <= t) {
                                terms.push((self.col(Var::EdgeExpansion { x, t: t2, s }), -0.5 * opt.capacity_gain));
                            }
                        }
                        self.row(Block::EdgeCapacity, Some(t), None, Some(s), terms, RowSense::Le, 0.5 * base)?;
                    }
                }
            }
        }
        for (x, opt) in inst.edge_expansions.iter().enumerate() {
            for s in 0..self.tree.len() {
                let terms = self.invest_periods(opt.lead_periods).map(|t| (self.col(Var::EdgeExpansion { x, t, s }), 1.0)).collect();
                self.row(Block::EdgeExpansionOnce, None, None, Some(s), terms, RowSense::Le, 1.0)?;
            }
        }
        Ok(())
    }

    fn node_capacity(&mut self) -> Result<()> {
        let inst = self.inst;
        for (n, ni) in inst.node_investments.iter().enumerate() {
            let class = &inst.terminal_classes[ni.class];
            let ks: Vec<usize> = self.paths.terminal_usage.get(&(ni.node, class.mode)).cloned().unwrap_or_default();
            for t in self.periods() {
                for s in self.scenarios(self.year(t)) {
                    let mut terms = Terms::new();
                    for &p in &class.products {
                        for &k in &ks {
                            if let Some(j) = self.get(Var::PathFlow { k, p, t, s }) {
                                terms.push((j, 1.0));
                            }
                        }
                    }
                    if ni.expandable() {
                        for t2 in self.invest_periods(ni.lead_periods).filter(|&t2| t2 + ni.lead_periods <= t) {
                            terms.push((self.col(Var::NodeExpansion { n, t: t2, s }), -ni.capacity_gain));
                        }
                    }
                    self.row(Block::NodeCapacity, Some(t), None, Some(s), terms, RowSense::Le, ni.base_capacity)?;
                }
            }
            if ni.expandable() {
                for s in 0..self.tree.len() {
                    let terms = self.invest_periods(ni.lead_periods).map(|t| (self.col(Var::NodeExpansion { n, t, s }), 1.0)).collect();
                    self.row(Block::NodeExpansionOnce, None, None, Some(s), terms, RowSense::Le, 1.0)?;
                }
            }
        }
        Ok(())
    }

    fn charging_capacity(&mut self) -> Result<()> {
        let inst = self.inst;
        for (c, opt) in inst.charging.iter().enumerate() {
            for t in self.periods() {
                for s in self.scenarios(self.year(t)) {
                    let mut terms = Terms::new();
                    for &a in &inst.edges[opt.edge].arcs {
                        terms.extend(self.arc_load(a, opt.mode_fuel, t, s, true));
                    }
                    for t2 in self.invest_periods(opt.lead_periods).filter(|&t2| t2 + opt.lead_periods <= t) {
                        terms.push((self.col(Var::Charging { c, t: t2, s }), -1.0));
                    }
                    self.row(Block::ChargingCapacity, Some(t), None, Some(s), terms, RowSense::Le, opt.base_capacity)?;
                }
            }
        }
        Ok(())
    }

    fn upgrade_enable(&mut self) -> Result<()> {
        let inst = self.inst;
        let max_arcs = self.paths.paths.iter().map(|p| p.arcs.len()).max().unwrap_or(1) as f64;
        let big_m = (inst.total_demand() * max_arcs).max(1.0);
        for (u, opt) in inst.upgrades.iter().enumerate() {
            for t in self.periods() {
                for s in self.scenarios(self.year(t)) {
                    let mut terms = Terms::new();
                    for &a in &inst.edges[opt.edge].arcs {
                        terms.extend(self.arc_load(a, opt.mode_fuel, t, s, false));
                    }
                    for t2 in self.invest_periods(opt.lead_periods).filter(|&t2| t2 + opt.lead_periods <= t) {
                        terms.push((self.col(Var::Upgrade { u, t: t2, s }), -big_m));
                    }
                    self.row(Block::UpgradeEnable, Some(t), None, Some(s), terms, RowSense::Le, 0.0)?;
                }
            }
        }
        Ok(())
    }

    // Fleet renewal rows.

    fn transport_work(&mut self) -> Result<()> {
        let inst = self.inst;
        for t in self.op_periods() {
            for s in self.scenarios(self.year(t)) {
                for mf in 0..inst.mode_fuels.len() {
                    let mut terms = vec![(self.col(Var::Work { mf, t, s }), 1.0)];
                    for (a, arc) in inst.arcs.iter().enumerate() {
                        if !arc.fuels.contains(&mf) {
                            continue;
                        }
                        for p in 0..inst.products.len() {
                            if let Some(j) = self.get(Var::ArcFlow { a, mf, p, t, s }) {
                                terms.push((j, -arc.length_km));
                            }
                        }
                    }
                    self.row(Block::TransportWork, Some(t), None, Some(s), terms, RowSense::Eq, 0.0)?;
                }
            }
        }
        Ok(())
    }

    fn fleet_renewal(&mut self) -> Result<()> {
        let inst = self.inst;
        let time = &inst.time;
        for t in 1..time.num_periods() {
            for s in self.scenarios(self.year(t)) {
                for mf in 0..inst.mode_fuels.len() {
                    let terms = vec![
                        (self.col(Var::WorkDecrease { mf, t, s }), 1.0),
                        (self.col(Var::Work { mf, t, s }), 1.0),
                        (self.col(Var::Work { mf, t: t - 1, s }), -1.0),
                    ];
                    self.row(Block::WorkDecrease, Some(t), None, Some(s), terms, RowSense::Ge, 0.0)?;
                }
                for m in inst.modes() {
                    let fleet = inst.fleet.get(&m).ok_or_else(|| Error::Model(format!("missing fleet parameters for {m}")))?;
                    let mfs: Vec<usize> = inst.mode_fuels_of(m).collect();
                    let years = (time.periods[t] - time.periods[t - 1]) as f64;
                    let y_prev = time.year_index(time.periods[t - 1]);
                    let mut terms: Terms = mfs.iter().map(|&mf| (self.col(Var::WorkDecrease { mf, t, s }), 1.0)).collect();
                    terms.push((self.col(Var::YearTotal { m, y: y_prev, s }), -years / fleet.lifespan_years));
                    self.row(Block::FleetRenewal, Some(t), None, Some(s), terms, RowSense::Le, 0.0)?;

                    let rho = fleet.max_decrease[t];
                    let mut terms: Terms = mfs.iter().map(|&mf| (self.col(Var::Work { mf, t, s }), 1.0)).collect();
                    for &mf in &mfs {
                        terms.push((self.col(Var::Work { mf, t: t - 1, s }), -(1.0 - rho)));
                    }
                    self.row(Block::ModalDecrease, Some(t), None, Some(s), terms, RowSense::Ge, 0.0)?;
                }
            }
        }
        Ok(())
    }

    fn base_fuel_mix(&mut self) -> Result<()> {
        let inst = self.inst;
        if !self.op_periods().contains(&0) {
            return Ok(());
        }
        for s in self.scenarios(self.year(0)) {
            for m in inst.modes() {
                let mfs: Vec<usize> = inst.mode_fuels_of(m).collect();
                for &mf in &mfs {
                    let share = inst.mode_fuels[mf].base_share;
                    let mut terms = vec![(self.col(Var::Work { mf, t: 0, s }), 1.0)];
                    for &g in &mfs {
                        terms.push((self.col(Var::Work { mf: g, t: 0, s }), -share));
                    }
                    self.row(Block::BaseFuelMix, Some(0), None, Some(s), terms, RowSense::Eq, 0.0)?;
                }
            }
        }
        Ok(())
    }

    // Adoption rows.

    fn adoption(&mut self) -> Result<()> {
        let inst = self.inst;
        let time = &inst.time;
        let modes = inst.modes();
        for t in self.op_periods() {
            let y = time.year_index(self.year(t));
            for s in self.scenarios(self.year(t)) {
                for mf in 0..inst.mode_fuels.len() {
                    let terms = vec![(self.col(Var::YearWork { mf, y, s }), 1.0), (self.col(Var::Work { mf, t, s }), -1.0)];
                    self.row(Block::YearlyLink, Some(t), None, Some(s), terms, RowSense::Eq, 0.0)?;
                }
            }
        }
        let years: Vec<i32> = match self.opts.static_period {
            Some(t) => vec![self.year(t)],
            None => time.years().collect(),
        };
        for &year in &years {
            let y = time.year_index(year);
            for s in self.scenarios(year) {
                for &m in &modes {
                    let mut terms = vec![(self.col(Var::YearTotal { m, y, s }), 1.0)];
                    for mf in inst.mode_fuels_of(m) {
                        terms.push((self.col(Var::YearWork { mf, y, s }), -1.0));
                    }
                    self.row(Block::YearlyTotal, None, Some(year), Some(s), terms, RowSense::Eq, 0.0)?;
                    for mf in inst.mode_fuels_of(m).filter(|&mf| inst.mode_fuels[mf].is_new) {
                        let level = self
                            .adoption
                            .level(mf, s, year)
                            .ok_or_else(|| Error::Model(format!("{}: missing adoption curve", inst.mode_fuel_label(mf))))?;
                        let terms = vec![(self.col(Var::YearWork { mf, y, s }), 1.0), (self.col(Var::YearTotal { m, y, s }), -level)];
                        self.row(Block::AdoptionLevel, None, Some(year), Some(s), terms, RowSense::Le, 0.0)?;
                    }
                }
            }
        }
        if self.opts.static_period.is_some() {
            return Ok(());
        }
        for year in time.first_year + 1..=time.last_year {
            let y = time.year_index(year);
            for s in self.scenarios(year) {
                for mf in (0..inst.mode_fuels.len()).filter(|&mf| inst.mode_fuels[mf].is_new) {
                    let m = inst.mode_fuels[mf].mode;
                    let (alpha, beta) = rate_coefficients(inst, self.tree, mf, s, year - 1)?;
                    let potential = inst.adoption[&mf].potential;
                    let terms = vec![
                        (self.col(Var::YearWork { mf, y, s }), 1.0),
                        (self.col(Var::YearWork { mf, y: y - 1, s }), -(1.0 + beta)),
                        (self.col(Var::YearTotal { m, y: y - 1, s }), -alpha * potential),
                    ];
                    self.row(Block::AdoptionRate, None, Some(year), Some(s), terms, RowSense::Le, 0.0)?;
                }
            }
        }
        Ok(())
    }

    fn nonanticipativity(&mut self) -> Result<()> {
        if self.merged() {
            return Ok(());
        }
        let keys: Vec<Var> = self.prog.keys.iter().copied().filter(|k| self.prog.is_first_stage(k) && k.scenario() == Some(0)).collect();
        for key in keys {
            for s in 1..self.tree.len() {
                let year = key.decision_year(&self.prog.periods, self.prog.first_year);
                let terms = vec![(self.col(key.with_scenario(s)), 1.0), (self.col(key.with_scenario(s - 1)), -1.0)];
                self.row(Block::NonAnticipativity, key.period(), year, Some(s), terms, RowSense::Eq, 0.0)?;
            }
        }
        Ok(())
    }

    // Objective.

    /// Discounted cost coefficient of `key` in its scenario's total cost.
    fn cost_coefficient(&self, key: Var) -> Result<f64> {
        let inst = self.inst;
        let time = &inst.time;
        Ok(match key {
            Var::ArcFlow { a, mf, p, t, s } => time.operational_factor(t) * inst.generalized_cost(self.tree, a, mf, p, t, s)?.total(),
            Var::Balance { a, mf, v, t, s } => time.operational_factor(t) * inst.empty_cost(self.tree, a, mf, v, t, s)?.total(),
            Var::PathFlow { k, p, t, .. } => {
                let transfer: f64 = self.paths.paths[k].transfers.iter().map(|&(_, m1, m2)| inst.transfer_cost(m1, m2, p)).sum();
                time.operational_factor(t) * transfer
            }
            Var::EdgeExpansion { x, t, .. } => time.investment_factor(t) * inst.edge_expansions[x].cost,
            Var::NodeExpansion { n, t, .. } => time.investment_factor(t) * inst.node_investments[n].cost,
            Var::Upgrade { u, t, .. } => time.investment_factor(t) * inst.upgrades[u].cost,
            Var::Charging { c, t, .. } => time.investment_factor(t) * inst.charging[c].unit_cost,
            _ => 0.0,
        })
    }

    fn objective(&mut self) -> Result<()> {
        let n_s = self.tree.len();
        let mut exprs: Vec<Terms> = vec![Vec::new(); n_s];
        for j in 0..self.prog.keys.len() {
            let key = self.prog.keys[j];
            let Some(s0) = key.scenario() else { continue };
            let shared = self.merged() && self.prog.is_first_stage(&key);
            for s in 0..n_s {
                if s != s0 && !shared {
                    continue;
                }
                let c = self.cost_coefficient(key.with_scenario(s))?;
                if c != 0.0 {
                    exprs[s].push((j, c));
                }
            }
        }
        let lambda = self.opts.lambda;
        let u = self.col(Var::Threshold);
        self.prog.lp.objective[u] = lambda;
        for s in 0..n_s {
            let p = self.tree.probability(s);
            let z = self.col(Var::ScenarioCost { s });
            self.prog.lp.objective[z] = (1.0 - lambda) * p;
            let mut terms = vec![(z, 1.0)];
            terms.extend(exprs[s].iter().map(|&(j, c)| (j, -c)));
            self.row(Block::ScenarioCost, None, None, Some(s), terms, RowSense::Eq, 0.0)?;
            let w = self.col(Var::Excess { s });
            self.prog.lp.objective[w] = lambda * p / (1.0 - self.opts.gamma);
            self.row(Block::CvarExcess, None, None, Some(s), vec![(w, 1.0), (z, -1.0), (u, 1.0)], RowSense::Ge, 0.0)?;
        }
        self.prog.cost_exprs = exprs;
        Ok(())
    }
}

/// Builds the deterministic equivalent for `tree` over the path set `paths`.
pub fn assemble(inst: &Instance, paths: &PathSet, tree: &ScenarioTree, opts: BuildOptions) -> Result<StochasticProgram> {
    opts.check()?;
    if let Some(t) = opts.static_period {
        if t >= inst.time.num_periods() {
            return Err(Error::Model(format!("static period {t} does not exist")));
        }
    }
    let mut arcs_in: HashMap<(usize, Mode), Vec<usize>> = HashMap::new();
    let mut arcs_out: HashMap<(usize, Mode), Vec<usize>> = HashMap::new();
    for (a, arc) in inst.arcs.iter().enumerate() {
        arcs_in.entry((arc.to, arc.mode)).or_default().push(a);
        arcs_out.entry((arc.from, arc.mode)).or_default().push(a);
    }
    let prog = StochasticProgram {
        lp: LinearProgram::new(),
        keys: Vec::new(),
        index: HashMap::new(),
        tags: Vec::new(),
        options: opts,
        periods: inst.time.periods.clone(),
        first_year: inst.time.first_year,
        branch_year: tree.branch_year,
        probabilities: tree.scenarios.iter().map(|s| s.probability).collect(),
        cost_exprs: Vec::new(),
    };
    let mut b = Builder { inst, paths, tree, opts, adoption: adoption_bound_table(inst, tree)?, prog, arcs_in, arcs_out };
    b.demand()?;
    b.arc_path()?;
    b.empty_arc_path()?;
    b.fleet_balance()?;
    b.edge_capacity()?;
    b.node_capacity()?;
    b.charging_capacity()?;
    b.upgrade_enable()?;
    b.transport_work()?;
    if opts.static_period.is_none() {
        b.fleet_renewal()?;
    }
    b.base_fuel_mix()?;
    b.adoption()?;
    b.nonanticipativity()?;
    b.objective()?;
    log::debug!(
        "assembled program: {} rows, {} columns, {} binaries",
        b.prog.lp.num_rows(),
        b.prog.lp.num_cols(),
        b.prog.lp.num_integer()
    );
    Ok(b.prog)
}
