//! Bounded revised simplex: a dual phase with steepest-edge pricing followed
//! by a primal phase that repairs what is left and certifies optimality.
//!
//! Every row `i` gets a slack `s_i` with `a_i x - s_i = 0`; the row sense
//! becomes bounds on `s_i`. Slack `i` is variable `n + i` and its column is
//! `-e_i`. Phase 1 minimises the sum of bound violations of basic variables
//! (a composite objective recomputed every iteration), phase 2 the scaled
//! cost. The primal ratio test is Harris' two-pass test with bound flipping; after a
//! run of degenerate pivots the engine switches to Bland's rule until it
//! makes progress again.

use std::time::Instant;

use crate::lu::BasisFactor;
use crate::problem::{LinearProgram, RowSense};

#[derive(Clone, Debug)]
pub struct LpOptions {
    /// Primal feasibility tolerance in the scaled space.
    pub primal_tol: f64,
    /// Reduced-cost tolerance in the scaled space.
    pub dual_tol: f64,
    pub max_iterations: usize,
    pub refactor_interval: usize,
    pub deadline: Option<Instant>,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions {
            primal_tol: 1e-9,
            dual_tol: 1e-9,
            max_iterations: 1_000_000,
            refactor_interval: 100,
            deadline: None,
        }
    }
}

const PIVOT_TOL: f64 = 1e-9;
const DEGENERATE_LIMIT: usize = 50;
/// Largest relative phase-1 residual treated as round-off.
const SHIFT_LIMIT: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum VarState {
    Basic,
    Lower,
    Upper,
    Free,
}

#[derive(Clone, Debug)]
pub(crate) struct Basis {
    pub head: Vec<usize>,
    pub state: Vec<VarState>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum LpOutcome {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    TimeLimit,
    Numerical,
}

pub(crate) struct LpRun {
    pub outcome: LpOutcome,
    /// Structural values in the original (unscaled) space.
    pub values: Vec<f64>,
    pub objective: f64,
    pub basis: Basis,
    pub iterations: usize,
}

/// Column- and row-scaled copy of a program in computational form.
pub(crate) struct Scaled {
    pub m: usize,
    pub n: usize,
    col_start: Vec<usize>,
    row_idx: Vec<usize>,
    val: Vec<f64>,
    /// Row-wise copy of the scaled matrix.
    row_start: Vec<usize>,
    col_idx: Vec<usize>,
    rval: Vec<f64>,
    col_scale: Vec<f64>,
    pub cost: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    objective: Vec<f64>,
    offset: f64,
}

fn pow2(s: f64) -> f64 {
    if !s.is_finite() || s <= 0.0 {
        1.0
    } else {
        2f64.powi(s.log2().round() as i32)
    }
}

impl Scaled {
    pub fn new(lp: &LinearProgram) -> Self {
        let m = lp.num_rows();
        let n = lp.num_cols();
        let mut counts = vec![0usize; n + 1];
        for row in &lp.rows {
            for &(j, _) in &row.coeffs {
                counts[j + 1] += 1;
            }
        }
        for j in 0..n {
            counts[j + 1] += counts[j];
        }
        let col_start = counts.clone();
        let nnz = col_start[n];
        let mut row_idx = vec![0usize; nnz];
        let mut val = vec![0.0; nnz];
        let mut fill = counts;
        for (i, row) in lp.rows.iter().enumerate() {
            for &(j, a) in &row.coeffs {
                row_idx[fill[j]] = i;
                val[fill[j]] = a;
                fill[j] += 1;
            }
        }

        let mut row_scale = vec![1.0; m];
        let mut col_scale = vec![1.0; n];
        for _ in 0..6 {
            let mut rmin = vec![f64::INFINITY; m];
            let mut rmax = vec![0.0f64; m];
            for j in 0..n {
                for k in col_start[j]..col_start[j + 1] {
                    let v = (val[k] * col_scale[j]).abs();
                    let i = row_idx[k];
                    rmin[i] = rmin[i].min(v);
                    rmax[i] = rmax[i].max(v);
                }
            }
            for i in 0..m {
                if rmax[i] > 0.0 {
                    row_scale[i] = 1.0 / (rmin[i] * rmax[i]).sqrt();
                }
            }
            for j in 0..n {
                let mut cmin = f64::INFINITY;
                let mut cmax = 0.0f64;
                for k in col_start[j]..col_start[j + 1] {
                    let v = (val[k] * row_scale[row_idx[k]]).abs();
                    cmin = cmin.min(v);
                    cmax = cmax.max(v);
                }
                if cmax > 0.0 {
                    col_scale[j] = 1.0 / (cmin * cmax).sqrt();
                }
            }
        }
        for r in row_scale.iter_mut() {
            *r = pow2(*r);
        }
        for c in col_scale.iter_mut() {
            *c = pow2(*c);
        }
        for j in 0..n {
            for k in col_start[j]..col_start[j + 1] {
                val[k] *= row_scale[row_idx[k]] * col_scale[j];
            }
        }

        let cmax = (0..n).map(|j| (lp.objective[j] * col_scale[j]).abs()).fold(0.0, f64::max);
        let obj_scale = if cmax > 0.0 { pow2(1.0 / cmax) } else { 1.0 };
        let mut cost = vec![0.0; n + m];
        let mut lower = vec![0.0; n + m];
        let mut upper = vec![0.0; n + m];
        for j in 0..n {
            cost[j] = lp.objective[j] * col_scale[j] * obj_scale;
            lower[j] = lp.lower[j] / col_scale[j];
            upper[j] = lp.upper[j] / col_scale[j];
        }
        for (i, row) in lp.rows.iter().enumerate() {
            let b = row.rhs * row_scale[i];
            let (l, u) = match row.sense {
                RowSense::Le => (f64::NEG_INFINITY, b),
                RowSense::Ge => (b, f64::INFINITY),
                RowSense::Eq => (b, b),
            };
            lower[n + i] = l;
            upper[n + i] = u;
        }
        let mut row_start = vec![0usize; m + 1];
        for &i in &row_idx {
            row_start[i + 1] += 1;
        }
        for i in 0..m {
            row_start[i + 1] += row_start[i];
        }
        let mut col_idx = vec![0usize; nnz];
        let mut rval = vec![0.0; nnz];
        let mut fill = row_start.clone();
        for j in 0..n {
            for k in col_start[j]..col_start[j + 1] {
                let i = row_idx[k];
                col_idx[fill[i]] = j;
                rval[fill[i]] = val[k];
                fill[i] += 1;
            }
        }
        Scaled {
            m,
            n,
            col_start,
            row_idx,
            val,
            row_start,
            col_idx,
            rval,
            col_scale,
            cost,
            lower,
            upper,
            objective: lp.objective.clone(),
            offset: lp.objective_offset,
        }
    }

    /// Converts an original-space column bound to the scaled space.
    pub fn scale_col_value(&self, j: usize, v: f64) -> f64 {
        v / self.col_scale[j]
    }

    fn column(&self, k: usize, out: &mut Vec<(usize, f64)>) {
        if k < self.n {
            for t in self.col_start[k]..self.col_start[k + 1] {
                out.push((self.row_idx[t], self.val[t]));
            }
        } else {
            out.push((k - self.n, -1.0));
        }
    }

    fn dot_column(&self, k: usize, y: &[f64]) -> f64 {
        if k < self.n {
            let mut s = 0.0;
            for t in self.col_start[k]..self.col_start[k + 1] {
                s += self.val[t] * y[self.row_idx[t]];
            }
            s
        } else {
            -y[k - self.n]
        }
    }

    fn unscale(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|j| x[j] * self.col_scale[j]).collect()
    }

    fn objective(&self, values: &[f64]) -> f64 {
        self.offset + self.objective.iter().zip(values).map(|(c, v)| c * v).sum::<f64>()
    }
}

fn nonbasic_value(state: VarState, l: f64, u: f64) -> f64 {
    match state {
        VarState::Lower => l,
        VarState::Upper => u,
        _ => 0.0,
    }
}

/// Picks a legal nonbasic state for the given bounds, preferring `wanted`.
fn normalise_state(wanted: VarState, l: f64, u: f64) -> VarState {
    match wanted {
        VarState::Lower if l.is_finite() => VarState::Lower,
        VarState::Upper if u.is_finite() => VarState::Upper,
        _ => {
            if l.is_finite() && u.is_finite() {
                if l.abs() <= u.abs() { VarState::Lower } else { VarState::Upper }
            } else if l.is_finite() {
                VarState::Lower
            } else if u.is_finite() {
                VarState::Upper
            } else {
                VarState::Free
            }
        }
    }
}

enum Step {
    Flip,
    Pivot { row: usize, bound: f64 },
}

struct Engine<'a> {
    sc: &'a Scaled,
    opts: &'a LpOptions,
    lower: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
    state: Vec<VarState>,
    head: Vec<usize>,
    factor: Option<BasisFactor>,
    fresh: bool,
    iterations: usize,
    degenerate_run: usize,
    bland: bool,
    col_buf: Vec<(usize, f64)>,
    /// Bounds relaxed by `shift_residual`: `(variable, lower, upper)`.
    shifted: Vec<(usize, f64, f64)>,
}

pub(crate) fn run(
    sc: &Scaled,
    lower: Vec<f64>,
    upper: Vec<f64>,
    warm: Option<&Basis>,
    opts: &LpOptions,
) -> LpRun {
    let (n, m) = (sc.n, sc.m);
    let (head, mut state) = match warm {
        Some(b) if b.head.len() == m && b.state.len() == n + m => (b.head.clone(), b.state.clone()),
        _ => {
            let mut state = vec![VarState::Lower; n + m];
            for i in 0..m {
                state[n + i] = VarState::Basic;
            }
            ((n..n + m).collect(), state)
        }
    };
    let mut x = vec![0.0; n + m];
    for k in 0..n + m {
        if state[k] != VarState::Basic {
            state[k] = normalise_state(state[k], lower[k], upper[k]);
            x[k] = nonbasic_value(state[k], lower[k], upper[k]);
        }
    }
    let mut eng = Engine {
        sc,
        opts,
        lower,
        upper,
        x,
        state,
        head,
        factor: None,
        fresh: false,
        iterations: 0,
        degenerate_run: 0,
        bland: false,
        col_buf: Vec::new(),
        shifted: Vec::new(),
    };
    let outcome = eng.solve();
    let values = sc.unscale(&eng.x);
    let objective = sc.objective(&values);
    LpRun {
        outcome,
        values,
        objective,
        basis: Basis { head: eng.head, state: eng.state },
        iterations: eng.iterations,
    }
}

impl<'a> Engine<'a> {
    fn refactor(&mut self) {
        let n = self.sc.n;
        for _attempt in 0..=self.sc.m {
            let sc = self.sc;
            let head = &self.head;
            match BasisFactor::factorize(sc.m, |p, out| sc.column(head[p], out)) {
                Ok(f) => {
                    self.factor = Some(f);
                    break;
                }
                Err(sing) => {
                    log::debug!("singular basis, replacing {} columns with slacks", sing.positions.len());
                    for (&p, &r) in sing.positions.iter().zip(&sing.rows) {
                        let k = self.head[p];
                        let (l, u) = (self.lower[k], self.upper[k]);
                        let wanted = if (self.x[k] - l).abs() <= (self.x[k] - u).abs() {
                            VarState::Lower
                        } else {
                            VarState::Upper
                        };
                        self.state[k] = normalise_state(wanted, l, u);
                        self.x[k] = nonbasic_value(self.state[k], l, u);
                        let slack = n + r;
                        self.head[p] = slack;
                        self.state[slack] = VarState::Basic;
                    }
                }
            }
        }
        self.compute_basics();
        self.fresh = true;
    }

    fn compute_basics(&mut self) {
        let (n, m) = (self.sc.n, self.sc.m);
        let mut r = vec![0.0; m];
        let mut buf = std::mem::take(&mut self.col_buf);
        for k in 0..n + m {
            if self.state[k] == VarState::Basic || self.x[k] == 0.0 {
                continue;
            }
            buf.clear();
            self.sc.column(k, &mut buf);
            for &(i, a) in &buf {
                r[i] -= a * self.x[k];
            }
        }
        self.col_buf = buf;
        self.factor.as_ref().expect("factorized").ftran(&mut r);
        for p in 0..m {
            self.x[self.head[p]] = r[p];
        }
    }

    /// Relaxes the bounds of basic variables whose remaining infeasibility is
    /// round-off sized, so that the primal phase can proceed to optimality.
    /// Returns false when some infeasibility is too large to shift.
    fn shift_residual(&mut self) -> bool {
        let mut shifts = Vec::new();
        for &k in &self.head {
            let (x, l, u) = (self.x[k], self.lower[k], self.upper[k]);
            if self.below(k) {
                if l - x > SHIFT_LIMIT * l.abs().max(1.0) {
                    return false;
                }
                shifts.push((k, l, u, x, u));
            } else if self.above(k) {
                if x - u > SHIFT_LIMIT * u.abs().max(1.0) {
                    return false;
                }
                shifts.push((k, l, u, l, x));
            }
        }
        if shifts.is_empty() {
            return false;
        }
        log::debug!("shifting {} bounds by round-off infeasibilities", shifts.len());
        for (k, l, u, nl, nu) in shifts {
            self.shifted.push((k, l, u));
            self.lower[k] = nl;
            self.upper[k] = nu;
        }
        true
    }

    /// Restores shifted bounds; nonbasic variables return to their true bounds.
    fn unshift(&mut self) {
        if self.shifted.is_empty() {
            return;
        }
        let mut moved = false;
        for (k, l, u) in std::mem::take(&mut self.shifted) {
            self.lower[k] = l;
            self.upper[k] = u;
            if self.state[k] != VarState::Basic {
                self.state[k] = normalise_state(self.state[k], l, u);
                self.x[k] = nonbasic_value(self.state[k], l, u);
                moved = true;
            }
        }
        if moved {
            self.compute_basics();
        }
    }

    fn tol_at(&self, bound: f64) -> f64 {
        self.opts.primal_tol * bound.abs().max(1.0)
    }

    fn below(&self, k: usize) -> bool {
        self.x[k] < self.lower[k] - self.tol_at(self.lower[k])
    }

    fn above(&self, k: usize) -> bool {
        self.x[k] > self.upper[k] + self.tol_at(self.upper[k])
    }

    fn solve(&mut self) -> LpOutcome {
        let (n, m) = (self.sc.n, self.sc.m);
        self.refactor();
        if let Some(outcome) = self.dual_phase() {
            return outcome;
        }
        let mut numerical_retries = 0;
        loop {
            if self.iterations >= self.opts.max_iterations {
                return LpOutcome::IterationLimit;
            }
            if self.iterations % 64 == 0 {
                if let Some(d) = self.opts.deadline {
                    if Instant::now() >= d {
                        return LpOutcome::TimeLimit;
                    }
                }
            }
            if self.factor.as_ref().map_or(true, |f| f.num_updates() >= self.opts.refactor_interval) {
                self.refactor();
            }

            let mut cb = vec![0.0; m];
            let mut phase1 = false;
            for p in 0..m {
                let k = self.head[p];
                if self.below(k) {
                    cb[p] = -1.0;
                    phase1 = true;
                } else if self.above(k) {
                    cb[p] = 1.0;
                    phase1 = true;
                }
            }
            if !phase1 {
                for p in 0..m {
                    cb[p] = self.sc.cost[self.head[p]];
                }
            }
            let mut y = cb;
            self.factor.as_ref().unwrap().btran(&mut y);

            let Some((q, dir, dq)) = self.price(&y, phase1) else {
                if !self.fresh {
                    self.refactor();
                    continue;
                }
                if !phase1 {
                    self.unshift();
                    return LpOutcome::Optimal;
                }
                if !self.shift_residual() {
                    return LpOutcome::Infeasible;
                }
                continue;
            };

            let mut alpha = vec![0.0; m];
            let mut buf = std::mem::take(&mut self.col_buf);
            buf.clear();
            self.sc.column(q, &mut buf);
            for &(i, a) in &buf {
                alpha[i] = a;
            }
            self.col_buf = buf;
            self.factor.as_ref().unwrap().ftran(&mut alpha);

            let (step, theta) = match self.ratio_test(q, dir, &alpha) {
                Some(s) => s,
                None => {
                    if !phase1 && self.fresh {
                        return LpOutcome::Unbounded;
                    }
                    if self.fresh {
                        numerical_retries += 1;
                        if numerical_retries > 3 {
                            return LpOutcome::Numerical;
                        }
                    }
                    self.refactor();
                    continue;
                }
            };

            if let Step::Pivot { row, .. } = step {
                if alpha[row].abs() < 1e-7 && !self.fresh {
                    // Suspiciously small pivot on a stale factorization.
                    self.refactor();
                    continue;
                }
            }

            self.iterations += 1;
            if theta > 0.0 {
                for p in 0..m {
                    if alpha[p] != 0.0 {
                        self.x[self.head[p]] -= dir * theta * alpha[p];
                    }
                }
                self.x[q] += dir * theta;
            }
            if theta * dq.abs() <= 1e-12 {
                self.degenerate_run += 1;
                if self.degenerate_run > DEGENERATE_LIMIT {
                    self.bland = true;
                }
            } else {
                self.degenerate_run = 0;
                self.bland = false;
            }
            match step {
                Step::Flip => {
                    if dir > 0.0 {
                        self.state[q] = VarState::Upper;
                        self.x[q] = self.upper[q];
                    } else {
                        self.state[q] = VarState::Lower;
                        self.x[q] = self.lower[q];
                    }
                    self.fresh = false;
                }
                Step::Pivot { row, bound } => {
                    let k = self.head[row];
                    self.x[k] = bound;
                    self.state[k] = if bound == self.lower[k] { VarState::Lower } else { VarState::Upper };
                    self.head[row] = q;
                    self.state[q] = VarState::Basic;
                    self.factor.as_mut().unwrap().update(row, &alpha);
                    self.fresh = false;
                }
            }
            let _ = n;
        }
    }

    /// Reduced costs of all variables for the current basis (zero for basics).
    fn reduced_costs(&self) -> Vec<f64> {
        let (n, m) = (self.sc.n, self.sc.m);
        let mut y: Vec<f64> = (0..m).map(|p| self.sc.cost[self.head[p]]).collect();
        self.factor.as_ref().expect("factorized").btran(&mut y);
        (0..n + m)
            .map(|k| if self.state[k] == VarState::Basic { 0.0 } else { self.sc.cost[k] - self.sc.dot_column(k, &y) })
            .collect()
    }

    /// Pivot row `alpha_r = rho^T A` over all variables (slacks included).
    fn pivot_row(&self, rho: &[f64], out: &mut [f64]) {
        let n = self.sc.n;
        out.iter_mut().for_each(|v| *v = 0.0);
        for (i, &r) in rho.iter().enumerate() {
            if r == 0.0 {
                continue;
            }
            for t in self.sc.row_start[i]..self.sc.row_start[i + 1] {
                out[self.sc.col_idx[t]] += r * self.sc.rval[t];
            }
            out[n + i] = -r;
        }
    }

    /// Dual simplex with dual steepest-edge pricing. Nonbasic variables whose
    /// reduced cost has the wrong sign are moved to their opposite bound, or
    /// to a temporary artificial bound when that bound is infinite.
    ///
    /// Returns an outcome only when it is final; otherwise the primal loop
    /// takes over from the current basis (and certifies optimality).
    fn dual_phase(&mut self) -> Option<LpOutcome> {
        const BIG: f64 = 1e7;
        let (n, m) = (self.sc.n, self.sc.m);
        let tol = self.opts.dual_tol;
        let mut d = self.reduced_costs();
        let mut artificial: Vec<(usize, f64, f64)> = Vec::new();
        let mut moved = false;
        for k in 0..n + m {
            let st = self.state[k];
            if st == VarState::Basic || self.lower[k] == self.upper[k] {
                continue;
            }
            let (l, u) = (self.lower[k], self.upper[k]);
            let want = match st {
                VarState::Lower if d[k] < -tol => VarState::Upper,
                VarState::Upper if d[k] > tol => VarState::Lower,
                VarState::Free if d[k] > tol => VarState::Lower,
                VarState::Free if d[k] < -tol => VarState::Upper,
                _ => continue,
            };
            match want {
                VarState::Upper if !u.is_finite() => {
                    artificial.push((k, l, u));
                    self.upper[k] = self.x[k].max(0.0) + BIG;
                }
                VarState::Lower if !l.is_finite() => {
                    artificial.push((k, l, u));
                    self.lower[k] = self.x[k].min(0.0) - BIG;
                }
                _ => {}
            }
            if artificial.len() > m.max(16) {
                // Far from dual feasible; leave it to the primal method.
                for &(k, l, u) in &artificial {
                    self.lower[k] = l;
                    self.upper[k] = u;
                }
                return None;
            }
            self.state[k] = want;
            self.x[k] = nonbasic_value(want, self.lower[k], self.upper[k]);
            moved = true;
        }
        if moved {
            self.compute_basics();
        }
        let restore = |eng: &mut Engine, artificial: &[(usize, f64, f64)]| {
            let mut shifted = false;
            for &(k, l, u) in artificial {
                eng.lower[k] = l;
                eng.upper[k] = u;
                if eng.state[k] != VarState::Basic {
                    let st = normalise_state(eng.state[k], l, u);
                    let v = nonbasic_value(st, l, u);
                    shifted |= v != eng.x[k];
                    eng.state[k] = st;
                    eng.x[k] = v;
                }
            }
            if shifted {
                eng.compute_basics();
            }
        };

        let mut weights = vec![1.0; m];
        let mut rho = vec![0.0; m];
        let mut row = vec![0.0; n + m];
        let mut stall = 0usize;
        let mut last_obj = f64::NEG_INFINITY;
        let mut retries = 0;
        loop {
            if self.iterations >= self.opts.max_iterations {
                return Some(LpOutcome::IterationLimit);
            }
            if self.iterations % 64 == 0 {
                if let Some(dl) = self.opts.deadline {
                    if Instant::now() >= dl {
                        return Some(LpOutcome::TimeLimit);
                    }
                }
            }
            if self.factor.as_ref().map_or(true, |f| f.num_updates() >= self.opts.refactor_interval) {
                self.refactor();
                d = self.reduced_costs();
            }

            // Leaving row: largest squared infeasibility over its weight.
            let mut leave: Option<(usize, f64)> = None;
            let mut best = 0.0;
            for p in 0..m {
                let k = self.head[p];
                let infeas = if self.below(k) {
                    self.lower[k] - self.x[k]
                } else if self.above(k) {
                    self.x[k] - self.upper[k]
                } else {
                    continue;
                };
                let score = infeas * infeas / weights[p];
                if score > best {
                    best = score;
                    leave = Some((p, if self.below(k) { self.lower[k] } else { self.upper[k] }));
                }
            }
            let Some((r, target)) = leave else {
                restore(self, &artificial);
                return None;
            };
            let kr = self.head[r];
            let increase = self.x[kr] < target;

            rho.iter_mut().for_each(|v| *v = 0.0);
            rho[r] = 1.0;
            self.factor.as_ref().unwrap().btran(&mut rho);
            self.pivot_row(&rho, &mut row);

            // Ratio test over eligible nonbasic variables (Harris two-pass).
            let mut bound_ratio = f64::INFINITY;
            let mut cands: Vec<(usize, f64)> = Vec::new();
            for k in 0..n + m {
                let st = self.state[k];
                if st == VarState::Basic || self.lower[k] == self.upper[k] {
                    continue;
                }
                let a = row[k];
                if a.abs() < PIVOT_TOL {
                    continue;
                }
                // Moving x_k by +1 changes x_kr by -a.
                let ok = match st {
                    VarState::Lower => (a < 0.0) == increase,
                    VarState::Upper => (a > 0.0) == increase,
                    VarState::Free => true,
                    VarState::Basic => false,
                };
                if !ok {
                    continue;
                }
                let dk = match st {
                    VarState::Lower => d[k].max(0.0),
                    VarState::Upper => (-d[k]).max(0.0),
                    _ => d[k].abs(),
                };
                bound_ratio = bound_ratio.min((dk + tol) / a.abs());
                cands.push((k, dk / a.abs()));
            }
            let mut enter: Option<usize> = None;
            for &(k, ratio) in &cands {
                if ratio <= bound_ratio {
                    let better = match enter {
                        None => true,
                        Some(e) => row[k].abs() > row[e].abs() || (row[k].abs() == row[e].abs() && k < e),
                    };
                    if better {
                        enter = Some(k);
                    }
                }
            }
            let Some(q) = enter else {
                if !self.fresh {
                    self.refactor();
                    d = self.reduced_costs();
                    continue;
                }
                if artificial.is_empty() {
                    return Some(LpOutcome::Infeasible);
                }
                restore(self, &artificial);
                return None;
            };

            let mut alpha = vec![0.0; m];
            let mut buf = std::mem::take(&mut self.col_buf);
            buf.clear();
            self.sc.column(q, &mut buf);
            for &(i, a) in &buf {
                alpha[i] = a;
            }
            self.col_buf = buf;
            self.factor.as_ref().unwrap().ftran(&mut alpha);
            let arq = alpha[r];
            if arq.abs() < 1e-9 || (arq - row[q]).abs() > 1e-6 * (1.0 + arq.abs()) {
                // The row and column disagree: the factorization has drifted.
                retries += 1;
                if retries > 5 {
                    restore(self, &artificial);
                    return None;
                }
                self.refactor();
                d = self.reduced_costs();
                continue;
            }

            let mut tau = rho.clone();
            self.factor.as_ref().unwrap().ftran(&mut tau);

            // Dual update.
            let theta_d = d[q] / arq;
            if theta_d != 0.0 {
                for k in 0..n + m {
                    if self.state[k] != VarState::Basic && row[k] != 0.0 {
                        d[k] -= theta_d * row[k];
                    }
                }
            }
            d[q] = 0.0;
            d[kr] = -theta_d;

            // Primal update.
            let theta_p = (self.x[kr] - target) / arq;
            for p in 0..m {
                if alpha[p] != 0.0 {
                    self.x[self.head[p]] -= theta_p * alpha[p];
                }
            }
            self.x[q] += theta_p;
            self.x[kr] = target;

            // Steepest-edge weights.
            let wr = weights[r];
            for p in 0..m {
                if p == r || alpha[p] == 0.0 {
                    continue;
                }
                let ratio = alpha[p] / arq;
                weights[p] = (weights[p] - 2.0 * ratio * tau[p] + ratio * ratio * wr).max(1e-4);
            }
            weights[r] = (wr / (arq * arq)).max(1e-4);

            self.state[kr] = if target == self.lower[kr] { VarState::Lower } else { VarState::Upper };
            self.head[r] = q;
            self.state[q] = VarState::Basic;
            self.factor.as_mut().unwrap().update(r, &alpha);
            self.fresh = false;
            self.iterations += 1;

            let obj: f64 = (0..n).map(|j| self.sc.cost[j] * self.x[j]).sum();
            if obj > last_obj + 1e-12 * obj.abs().max(1.0) {
                last_obj = obj;
                stall = 0;
            } else {
                stall += 1;
                if stall > 2000.max(self.sc.m) {
                    restore(self, &artificial);
                    return None;
                }
            }
        }
    }

    /// Chooses the entering variable: returns `(index, direction, reduced cost)`.
    fn price(&self, y: &[f64], phase1: bool) -> Option<(usize, f64, f64)> {
        let (n, m) = (self.sc.n, self.sc.m);
        let tol = self.opts.dual_tol;
        let mut best: Option<(usize, f64, f64)> = None;
        let mut best_score = 0.0;
        for k in 0..n + m {
            let st = self.state[k];
            if st == VarState::Basic {
                continue;
            }
            if st != VarState::Free && self.lower[k] == self.upper[k] {
                continue;
            }
            let c = if phase1 { 0.0 } else { self.sc.cost[k] };
            let d = c - self.sc.dot_column(k, y);
            let dir = match st {
                VarState::Lower if d < -tol => 1.0,
                VarState::Upper if d > tol => -1.0,
                VarState::Free if d.abs() > tol => -d.signum(),
                _ => continue,
            };
            if self.bland {
                return Some((k, dir, d));
            }
            if d.abs() > best_score {
                best_score = d.abs();
                best = Some((k, dir, d));
            }
        }
        best
    }

    /// Bound the entering variable's step. Returns `None` when nothing
    /// blocks it.
    fn ratio_test(&self, q: usize, dir: f64, alpha: &[f64]) -> Option<(Step, f64)> {
        let m = self.sc.m;
        let flip = self.upper[q] - self.lower[q];
        // Each candidate: (position, exact step, blocking bound).
        let mut cands: Vec<(usize, f64, f64)> = Vec::new();
        let mut theta_max = flip;
        for p in 0..m {
            let a = alpha[p];
            if a.abs() < PIVOT_TOL {
                continue;
            }
            let rate = -dir * a;
            let k = self.head[p];
            let (xv, l, u) = (self.x[k], self.lower[k], self.upper[k]);
            let bound = if rate < 0.0 {
                if self.above(k) {
                    u
                } else if l.is_finite() && !self.below(k) {
                    l
                } else {
                    continue;
                }
            } else if self.below(k) {
                l
            } else if u.is_finite() && !self.above(k) {
                u
            } else {
                continue;
            };
            let tol = self.tol_at(bound);
            let (exact, relaxed) = if rate < 0.0 {
                ((xv - bound) / -rate, (xv - bound + tol) / -rate)
            } else {
                ((bound - xv) / rate, (bound + tol - xv) / rate)
            };
            if !self.bland {
                theta_max = theta_max.min(relaxed);
            }
            cands.push((p, exact, bound));
        }
        if self.bland {
            let min_exact = cands.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
            if flip <= min_exact {
                return if flip.is_finite() { Some((Step::Flip, flip)) } else { None };
            }
            let mut best: Option<(usize, f64, f64)> = None;
            for &(p, e, b) in &cands {
                if e <= min_exact + 1e-12 {
                    let better = match best {
                        None => true,
                        Some((bp, _, _)) => self.head[p] < self.head[bp],
                    };
                    if better {
                        best = Some((p, e, b));
                    }
                }
            }
            let (p, e, b) = best?;
            return Some((Step::Pivot { row: p, bound: b }, e.max(0.0)));
        }
        if flip.is_finite() && flip <= theta_max {
            return Some((Step::Flip, flip));
        }
        let mut best: Option<(usize, f64, f64)> = None;
        for &(p, e, b) in &cands {
            if e <= theta_max {
                let better = match best {
                    None => true,
                    Some((bp, _, _)) => alpha[p].abs() > alpha[bp].abs(),
                };
                if better {
                    best = Some((p, e, b));
                }
            }
        }
        let (p, e, b) = best?;
        Some((Step::Pivot { row: p, bound: b }, e.max(0.0)))
    }
}
