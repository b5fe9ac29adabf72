//! Best-first branch-and-bound with depth-first plunging.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::rc::Rc;
use std::time::{Duration, Instant};

use crate::simplex::{run, Basis, LpOptions, LpOutcome, Scaled};
use crate::{relative_gap, BoundSample, LinearProgram, SolveResult, SolverError, Status};

#[derive(Clone, Debug)]
pub struct MilpOptions {
    /// Relative optimality gap at which the search stops.
    pub gap: f64,
    pub integrality_tol: f64,
    pub time_limit: Option<Duration>,
    pub node_limit: Option<usize>,
    pub lp: LpOptions,
}

impl Default for MilpOptions {
    fn default() -> Self {
        MilpOptions {
            gap: 0.005,
            integrality_tol: 1e-6,
            time_limit: None,
            node_limit: None,
            lp: LpOptions::default(),
        }
    }
}

struct Node {
    id: usize,
    bound: f64,
    /// Column bound overrides `(column, lower, upper)` in original units.
    bounds: Rc<Vec<(usize, f64, f64)>>,
    basis: Option<Rc<Basis>>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // Reversed so that the max-heap pops the smallest bound, then the oldest node.
    fn cmp(&self, other: &Self) -> Ordering {
        other.bound.total_cmp(&self.bound).then(other.id.cmp(&self.id))
    }
}

struct Incumbent {
    objective: f64,
    values: Vec<f64>,
    basis: Basis,
}

fn effective_bounds(lp: &LinearProgram, overrides: &[(usize, f64, f64)], j: usize) -> (f64, f64) {
    overrides
        .iter()
        .rev()
        .find(|o| o.0 == j)
        .map(|o| (o.1, o.2))
        .unwrap_or((lp.lower[j], lp.upper[j]))
}

fn scaled_bounds(sc: &Scaled, overrides: &[(usize, f64, f64)]) -> (Vec<f64>, Vec<f64>) {
    let mut lower = sc.lower.clone();
    let mut upper = sc.upper.clone();
    for &(j, l, u) in overrides {
        lower[j] = sc.scale_col_value(j, l);
        upper[j] = sc.scale_col_value(j, u);
    }
    (lower, upper)
}

/// Solves `lp` as a mixed-integer program (a pure LP when no column is
/// integer). Deterministic: the same input always explores the same tree.
pub fn solve(lp: &LinearProgram, opts: &MilpOptions) -> Result<SolveResult, SolverError> {
    lp.check()?;
    let start = Instant::now();
    let deadline = opts.time_limit.map(|t| start + t);
    let mut lp_opts = opts.lp.clone();
    lp_opts.deadline = match (lp_opts.deadline, deadline) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    };
    let sc = Scaled::new(lp);

    let mut heap: BinaryHeap<Node> = BinaryHeap::new();
    let mut current = Some(Node { id: 0, bound: f64::NEG_INFINITY, bounds: Rc::new(Vec::new()), basis: None });
    let mut next_id = 1;
    let mut incumbent: Option<Incumbent> = None;
    let mut pruned_min = f64::INFINITY;
    let mut nodes = 0usize;
    let mut branched = 0usize;
    let mut iterations = 0usize;
    let mut trace = Vec::new();
    let mut limit_hit: Option<String> = None;

    let prune_threshold = |inc: &Option<Incumbent>| -> f64 {
        match inc {
            None => f64::INFINITY,
            Some(i) => {
                let scale = i.objective.abs().max(1.0);
                i.objective - (opts.gap * scale).max(1e-9 * scale)
            }
        }
    };

    loop {
        let Some(node) = current.take().or_else(|| heap.pop()) else { break };
        if node.bound >= prune_threshold(&incumbent) {
            pruned_min = pruned_min.min(node.bound);
            continue;
        }
        if let Some(limit) = opts.node_limit {
            if nodes >= limit {
                limit_hit = Some(format!("node limit {limit} reached"));
                heap.push(node);
                break;
            }
        }
        if deadline.is_some_and(|d| Instant::now() >= d) {
            limit_hit = Some("time limit reached".into());
            heap.push(node);
            break;
        }
        nodes += 1;
        let (lower, upper) = scaled_bounds(&sc, &node.bounds);
        let res = run(&sc, lower, upper, node.basis.as_deref(), &lp_opts);
        iterations += res.iterations;
        match res.outcome {
            LpOutcome::Optimal => {}
            LpOutcome::Infeasible => continue,
            LpOutcome::Unbounded => {
                if incumbent.is_none() && node.id == 0 {
                    let mut out = SolveResult::empty(Status::Unbounded);
                    out.nodes = nodes;
                    out.iterations = iterations;
                    out.wall_time = start.elapsed();
                    return Ok(out);
                }
                continue;
            }
            LpOutcome::TimeLimit | LpOutcome::IterationLimit => {
                limit_hit = Some(format!("{:?} in node LP", res.outcome));
                heap.push(node);
                break;
            }
            LpOutcome::Numerical => {
                log::warn!("numerical trouble in node {}; dropping it", node.id);
                if node.id == 0 {
                    let mut out = SolveResult::empty(Status::Limit);
                    out.message = Some("numerical trouble in the root relaxation".into());
                    out.nodes = nodes;
                    out.iterations = iterations;
                    out.wall_time = start.elapsed();
                    return Ok(out);
                }
                pruned_min = pruned_min.min(node.bound);
                continue;
            }
        }
        let obj = res.objective;
        if obj >= prune_threshold(&incumbent) {
            pruned_min = pruned_min.min(obj);
            continue;
        }

        let mut branch_col: Option<(usize, f64)> = None;
        let mut best_frac = 0.0;
        for j in 0..lp.num_cols() {
            if !lp.integer[j] {
                continue;
            }
            let v = res.values[j];
            let f = v - v.floor();
            let score = f.min(1.0 - f);
            if score > opts.integrality_tol && score > best_frac {
                best_frac = score;
                branch_col = Some((j, v));
            }
        }

        match branch_col {
            None => {
                if incumbent.as_ref().map_or(true, |i| obj < i.objective) {
                    log::debug!("node {}: new incumbent {obj}", node.id);
                    incumbent = Some(Incumbent { objective: obj, values: res.values, basis: res.basis });
                }
            }
            Some((j, v)) => {
                branched += 1;
                let (l, u) = effective_bounds(lp, &node.bounds, j);
                let basis = Rc::new(res.basis);
                let mut down = (*node.bounds).clone();
                down.push((j, l, v.floor()));
                let mut up = (*node.bounds).clone();
                up.push((j, v.ceil(), u));
                let down = Node { id: next_id, bound: obj, bounds: Rc::new(down), basis: Some(basis.clone()) };
                let up = Node { id: next_id + 1, bound: obj, bounds: Rc::new(up), basis: Some(basis) };
                next_id += 2;
                let (first, second) = if v - v.floor() >= 0.5 { (up, down) } else { (down, up) };
                heap.push(second);
                current = Some(first);
            }
        }
        let open = heap.peek().map_or(f64::INFINITY, |n| n.bound);
        let open = current.as_ref().map_or(open, |n| open.min(n.bound));
        let inc = incumbent.as_ref().map_or(f64::INFINITY, |i| i.objective);
        trace.push(BoundSample { node: nodes, bound: open.min(pruned_min).min(inc), incumbent: inc });
    }

    let open = heap.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
    let mut out = SolveResult::empty(Status::Infeasible);
    out.nodes = nodes;
    out.branched = branched;
    out.iterations = iterations;
    out.trace = trace;
    match incumbent {
        None => {
            if let Some(msg) = limit_hit {
                out.status = Status::Limit;
                out.bound = open.min(pruned_min);
                out.message = Some(msg);
            }
        }
        Some(inc) => {
            let (mut values, _) = polish(lp, &sc, &lp_opts, inc);
            for (j, v) in values.iter_mut().enumerate() {
                *v = v.clamp(lp.lower[j], lp.upper[j]);
            }
            let objective = lp.evaluate_objective(&values);
            out.bound = open.min(pruned_min).min(objective);
            out.gap = relative_gap(objective, out.bound);
            out.values = values;
            out.objective = objective;
            out.status = if limit_hit.is_some() { Status::Limit } else { Status::Optimal };
            out.message = limit_hit;
        }
    }
    out.wall_time = start.elapsed();
    Ok(out)
}

/// Fixes integer columns at their rounded incumbent values and re-solves the
/// remaining LP so that the reported point is clean.
fn polish(
    lp: &LinearProgram,
    sc: &Scaled,
    lp_opts: &LpOptions,
    inc: Incumbent,
) -> (Vec<f64>, f64) {
    if lp.num_integer() == 0 {
        return (inc.values, inc.objective);
    }
    let fixes: Vec<(usize, f64, f64)> = (0..lp.num_cols())
        .filter(|&j| lp.integer[j])
        .map(|j| {
            let v = inc.values[j].round();
            (j, v, v)
        })
        .collect();
    let (lower, upper) = scaled_bounds(sc, &fixes);
    let res = run(sc, lower, upper, Some(&inc.basis), lp_opts);
    let tol = 1e-7 * inc.objective.abs().max(1.0);
    if res.outcome == LpOutcome::Optimal && res.objective <= inc.objective + tol {
        let mut values = res.values;
        for &(j, v, _) in &fixes {
            values[j] = v;
        }
        let objective = lp.evaluate_objective(&values);
        (values, objective)
    } else {
        (inc.values, inc.objective)
    }
}
