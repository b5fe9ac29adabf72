//! Exhaustive enumeration of mode-sequence routes on small random networks.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use stram_core::model::Mode;
use stram_core::paths::{mode_sequences, unimodal_cheapest, Composer, NetArc, Network, Route, UnimodalTable};

pub struct RandomNet {
    pub net: Network,
    pub modes: Vec<Mode>,
    /// Integer-valued arc costs so that sums are exact; `None` marks unusable arcs.
    pub cost: Vec<Option<f64>>,
    pub transfer: HashMap<(Mode, Mode), f64>,
}

pub fn random_net(rng: &mut impl Rng) -> RandomNet {
    let n = rng.gen_range(2..=8);
    let n_modes = rng.gen_range(1..=3);
    let modes: Vec<Mode> = Mode::ALL[..n_modes].to_vec();
    let n_arcs = rng.gen_range(1..=20);
    let mut arcs = Vec::new();
    let mut cost = Vec::new();
    for _ in 0..n_arcs {
        let from = rng.gen_range(0..n);
        let mut to = rng.gen_range(0..n - 1);
        if to >= from {
            to += 1;
        }
        arcs.push(NetArc { from, to, mode: modes[rng.gen_range(0..n_modes)] });
        cost.push(if rng.gen_bool(0.1) { None } else { Some(rng.gen_range(0..=9) as f64) });
    }
    let mut transfer = HashMap::new();
    for &a in &modes {
        for &b in &modes {
            transfer.insert((a, b), rng.gen_range(0..=4) as f64);
        }
    }
    RandomNet { net: Network { n_nodes: n, arcs }, modes, cost, transfer }
}

fn order(a: &Route, b: &Route) -> Ordering {
    a.cost.total_cmp(&b.cost).then(a.arcs.len().cmp(&b.arcs.len())).then_with(|| a.arcs.cmp(&b.arcs))
}

fn keep(best: &mut Option<Route>, cand: Route) {
    if best.as_ref().map_or(true, |b| order(&cand, b) == Ordering::Less) {
        *best = Some(cand);
    }
}

/// Every simple path on one mode between every ordered pair of distinct nodes.
fn all_simple_paths(rn: &RandomNet, mode: Mode) -> HashMap<(usize, usize), Vec<Route>> {
    let n = rn.net.n_nodes;
    let mut out: HashMap<(usize, usize), Vec<Route>> = HashMap::new();
    fn dfs(rn: &RandomNet, mode: Mode, o: usize, u: usize, seen: &mut Vec<bool>, arcs: &mut Vec<usize>, out: &mut HashMap<(usize, usize), Vec<Route>>) {
        for (a, arc) in rn.net.arcs.iter().enumerate() {
            if arc.from != u || arc.mode != mode || rn.cost[a].is_none() || seen[arc.to] {
                continue;
            }
            arcs.push(a);
            let cost = arcs.iter().fold(0.0, |acc, &b| acc + rn.cost[b].unwrap());
            out.entry((o, arc.to)).or_default().push(Route { cost, arcs: arcs.clone() });
            seen[arc.to] = true;
            dfs(rn, mode, o, arc.to, seen, arcs, out);
            seen[arc.to] = false;
            arcs.pop();
        }
    }
    for o in 0..n {
        let mut seen = vec![false; n];
        seen[o] = true;
        dfs(rn, mode, o, o, &mut seen, &mut Vec::new(), &mut out);
    }
    out
}

fn join(parts: &[&Route], cost: f64) -> Route {
    Route { cost, arcs: parts.iter().flat_map(|r| r.arcs.iter().copied()).collect() }
}

/// Brute-force optimum for one mode sequence: one or two transfers at nodes
/// other than the endpoints of the remaining segment.
pub fn enumerate_best(rn: &RandomNet, legs: &BTreeMap<Mode, HashMap<(usize, usize), Vec<Route>>>, o: usize, d: usize, seq: &[Mode]) -> Option<Route> {
    let n = rn.net.n_nodes;
    let empty = Vec::new();
    let get = |m: Mode, a: usize, b: usize| -> &Vec<Route> { legs.get(&m).and_then(|t| t.get(&(a, b))).unwrap_or(&empty) };
    let mut best = None;
    match *seq {
        [m] => {
            for r in get(m, o, d) {
                keep(&mut best, r.clone());
            }
        }
        [m1, m2] => {
            let tr = rn.transfer[&(m1, m2)];
            for k in (0..n).filter(|&k| k != o && k != d) {
                for r1 in get(m1, o, k) {
                    for r2 in get(m2, k, d) {
                        keep(&mut best, join(&[r1, r2], r1.cost + tr + r2.cost));
                    }
                }
            }
        }
        [m1, m2, m3] => {
            let (tr1, tr2) = (rn.transfer[&(m1, m2)], rn.transfer[&(m2, m3)]);
            for k1 in (0..n).filter(|&k| k != o && k != d) {
                for k2 in (0..n).filter(|&k| k != k1 && k != d) {
                    for r1 in get(m1, o, k1) {
                        for r2 in get(m2, k1, k2) {
                            for r3 in get(m3, k2, d) {
                                keep(&mut best, join(&[r1, r2, r3], r1.cost + tr1 + (r2.cost + tr2 + r3.cost)));
                            }
                        }
                    }
                }
            }
        }
        _ => {}
    }
    best
}

/// Compares the generator against enumeration for every pair and mode
/// sequence of one network. Returns the number of existing optima.
pub fn compare(rn: &RandomNet) -> Result<usize, String> {
    let tables: BTreeMap<Mode, UnimodalTable> =
        rn.modes.iter().map(|&m| (m, unimodal_cheapest(&rn.net, m, &rn.cost).expect("nonnegative costs"))).collect();
    let legs: BTreeMap<Mode, _> = rn.modes.iter().map(|&m| (m, all_simple_paths(rn, m))).collect();
    let mut composer = Composer::new(&tables, rn.net.n_nodes, |a, b| rn.transfer[&(a, b)]);
    let mut compared = 0;
    for seq in mode_sequences(&rn.modes, 3) {
        for o in 0..rn.net.n_nodes {
            for d in (0..rn.net.n_nodes).filter(|&d| d != o) {
                let got = composer.compose(o, d, &seq);
                let want = enumerate_best(rn, &legs, o, d, &seq);
                if got != want {
                    return Err(format!("{o}->{d} via {seq:?}: generated {got:?}, enumerated {want:?}"));
                }
                compared += usize::from(want.is_some());
            }
        }
    }
    Ok(compared)
}
