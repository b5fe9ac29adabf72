//! Sparse LU factorization of a simplex basis with product-form updates.
//!
//! The basis is addressed by position: column `p` of the basis matrix is the
//! constraint column of the variable in basis slot `p`. Vectors handed to
//! [`BasisFactor::ftran`] are indexed by row and come back indexed by
//! position; [`BasisFactor::btran`] goes the other way.

use std::collections::BTreeSet;

/// Pivots smaller than this are treated as structural zeros.
const ZERO_PIVOT: f64 = 1e-11;
/// Entries that cancel below this are dropped from the active submatrix.
const DROP: f64 = 1e-14;
/// Markowitz threshold: a pivot must be at least this fraction of the largest
/// entry in its column.
const THRESHOLD: f64 = 0.1;
/// How many candidate columns the Markowitz search inspects.
const SEARCH_COLUMNS: usize = 4;

#[derive(Debug, Clone)]
pub struct Singular {
    /// Basis positions that received no pivot.
    pub positions: Vec<usize>,
    /// Rows that received no pivot, same length as `positions`.
    pub rows: Vec<usize>,
}

struct Step {
    row: usize,
    pos: usize,
    diag: f64,
    l: (usize, usize),
    u: (usize, usize),
}

struct Eta {
    pos: usize,
    pivot: f64,
    range: (usize, usize),
}

pub struct BasisFactor {
    m: usize,
    steps: Vec<Step>,
    l_idx: Vec<usize>,
    l_val: Vec<f64>,
    u_idx: Vec<usize>,
    u_val: Vec<f64>,
    etas: Vec<Eta>,
    eta_idx: Vec<usize>,
    eta_val: Vec<f64>,
}

impl BasisFactor {
    /// Factorizes the `m x m` matrix whose column `p` is `column(p)` given as
    /// `(row, value)` pairs.
    pub fn factorize<F>(m: usize, column: F) -> Result<Self, Singular>
    where
        F: Fn(usize, &mut Vec<(usize, f64)>),
    {
        let mut f = BasisFactor {
            m,
            steps: Vec::with_capacity(m),
            l_idx: Vec::new(),
            l_val: Vec::new(),
            u_idx: Vec::new(),
            u_val: Vec::new(),
            etas: Vec::new(),
            eta_idx: Vec::new(),
            eta_val: Vec::new(),
        };
        let mut active = Active::new(m, &column);
        while f.steps.len() < m {
            let Some((r, c)) = active.choose_pivot() else { break };
            active.eliminate(r, c, &mut f);
        }
        if f.steps.len() < m {
            let positions: Vec<usize> = (0..m).filter(|&p| active.col_alive[p]).collect();
            let rows: Vec<usize> = (0..m).filter(|&i| active.row_alive[i]).collect();
            return Err(Singular { positions, rows });
        }
        Ok(f)
    }

    pub fn num_updates(&self) -> usize {
        self.etas.len()
    }

    /// Solves `B x = b` in place: `b` is indexed by row on entry and by basis
    /// position on exit.
    pub fn ftran(&self, b: &mut Vec<f64>) {
        // Forward elimination with the stored L multipliers.
        for s in &self.steps {
            let br = b[s.row];
            if br != 0.0 {
                for k in s.l.0..s.l.1 {
                    b[self.l_idx[k]] -= self.l_val[k] * br;
                }
            }
        }
        // Back substitution through U in reverse pivot order.
        let mut x = vec![0.0; self.m];
        for s in self.steps.iter().rev() {
            let mut v = b[s.row];
            for k in s.u.0..s.u.1 {
                v -= self.u_val[k] * x[self.u_idx[k]];
            }
            x[s.pos] = v / s.diag;
        }
        for e in &self.etas {
            let xr = x[e.pos];
            if xr != 0.0 {
                let xr = xr / e.pivot;
                x[e.pos] = xr;
                for k in e.range.0..e.range.1 {
                    x[self.eta_idx[k]] -= self.eta_val[k] * xr;
                }
            }
        }
        *b = x;
    }

    /// Solves `B^T y = c` in place: `c` is indexed by basis position on entry
    /// and by row on exit.
    pub fn btran(&self, c: &mut Vec<f64>) {
        for e in self.etas.iter().rev() {
            let mut v = c[e.pos];
            for k in e.range.0..e.range.1 {
                v -= self.eta_val[k] * c[self.eta_idx[k]];
            }
            c[e.pos] = v / e.pivot;
        }
        // U^T solve in pivot order, pushing each solved value forward.
        let mut z = vec![0.0; self.m];
        for s in &self.steps {
            let v = c[s.pos] / s.diag;
            z[s.row] = v;
            if v != 0.0 {
                for k in s.u.0..s.u.1 {
                    c[self.u_idx[k]] -= self.u_val[k] * v;
                }
            }
        }
        // L^T in reverse.
        for s in self.steps.iter().rev() {
            let mut v = z[s.row];
            for k in s.l.0..s.l.1 {
                v -= self.l_val[k] * z[self.l_idx[k]];
            }
            z[s.row] = v;
        }
        *c = z;
    }

    /// Records the replacement of the variable in slot `pos` by a column
    /// whose FTRAN image is `alpha` (indexed by position).
    pub fn update(&mut self, pos: usize, alpha: &[f64]) {
        let start = self.eta_idx.len();
        for (i, &a) in alpha.iter().enumerate() {
            if i != pos && a.abs() > DROP {
                self.eta_idx.push(i);
                self.eta_val.push(a);
            }
        }
        self.etas.push(Eta { pos, pivot: alpha[pos], range: (start, self.eta_idx.len()) });
    }
}

/// Active submatrix during elimination, stored column-wise with a row
/// pattern index.
struct Active {
    cols: Vec<Vec<(usize, f64)>>,
    rows: Vec<Vec<usize>>,
    col_alive: Vec<bool>,
    row_alive: Vec<bool>,
    col_queue: Vec<usize>,
    row_queue: Vec<usize>,
    marker: Vec<usize>,
    /// Live nonempty columns ordered by `(count, column)`.
    by_count: BTreeSet<(usize, usize)>,
    /// Count under which each column is filed in `by_count`.
    filed: Vec<usize>,
}

impl Active {
    fn new<F>(m: usize, column: &F) -> Self
    where
        F: Fn(usize, &mut Vec<(usize, f64)>),
    {
        let mut cols = Vec::with_capacity(m);
        let mut rows = vec![Vec::new(); m];
        let mut buf = Vec::new();
        for p in 0..m {
            buf.clear();
            column(p, &mut buf);
            let mut col: Vec<(usize, f64)> = Vec::with_capacity(buf.len());
            for &(i, v) in &buf {
                if v != 0.0 {
                    col.push((i, v));
                    rows[i].push(p);
                }
            }
            cols.push(col);
        }
        let col_queue: Vec<usize> = (0..m).rev().filter(|&p| cols[p].len() == 1).collect();
        let row_queue: Vec<usize> = (0..m).rev().filter(|&i| rows[i].len() == 1).collect();
        let filed: Vec<usize> = cols.iter().map(|c| c.len()).collect();
        let by_count = (0..m).filter(|&p| filed[p] > 0).map(|p| (filed[p], p)).collect();
        Active {
            cols,
            rows,
            col_alive: vec![true; m],
            row_alive: vec![true; m],
            col_queue,
            row_queue,
            marker: vec![usize::MAX; m],
            by_count,
            filed,
        }
    }

    fn refile(&mut self, c: usize) {
        let n = if self.col_alive[c] { self.cols[c].len() } else { 0 };
        if n != self.filed[c] {
            if self.filed[c] > 0 {
                self.by_count.remove(&(self.filed[c], c));
            }
            if n > 0 {
                self.by_count.insert((n, c));
            }
            self.filed[c] = n;
        }
    }

    fn col_max(&self, c: usize) -> f64 {
        self.cols[c].iter().fold(0.0f64, |m, &(_, v)| m.max(v.abs()))
    }

    fn choose_pivot(&mut self) -> Option<(usize, usize)> {
        while let Some(c) = self.col_queue.pop() {
            if self.col_alive[c] && self.cols[c].len() == 1 {
                let (r, v) = self.cols[c][0];
                if v.abs() > ZERO_PIVOT {
                    return Some((r, c));
                }
            }
        }
        while let Some(r) = self.row_queue.pop() {
            if self.row_alive[r] && self.rows[r].len() == 1 {
                let c = self.rows[r][0];
                let v = self.cols[c].iter().find(|e| e.0 == r).map(|e| e.1).unwrap_or(0.0);
                if v.abs() > ZERO_PIVOT && v.abs() >= THRESHOLD * self.col_max(c) {
                    return Some((r, c));
                }
            }
        }
        self.markowitz()
    }

    fn markowitz(&self) -> Option<(usize, usize)> {
        let mut best: Option<(usize, f64, usize, usize)> = None;
        let mut inspected = 0;
        for &(count, c) in &self.by_count {
            if inspected >= SEARCH_COLUMNS && best.is_some() {
                break;
            }
            let cmax = self.col_max(c);
            if cmax <= ZERO_PIVOT {
                continue;
            }
            inspected += 1;
            for &(r, v) in &self.cols[c] {
                if v.abs() < THRESHOLD * cmax {
                    continue;
                }
                let cost = (self.rows[r].len() - 1) * (count - 1);
                let better = match best {
                    None => true,
                    Some((bc, bv, _, _)) => cost < bc || (cost == bc && v.abs() > bv),
                };
                if better {
                    best = Some((cost, v.abs(), r, c));
                }
            }
        }
        best.map(|(_, _, r, c)| (r, c))
    }

    fn eliminate(&mut self, r: usize, c: usize, f: &mut BasisFactor) {
        let col_c = std::mem::take(&mut self.cols[c]);
        let diag = col_c.iter().find(|e| e.0 == r).map(|e| e.1).expect("pivot entry present");
        let l_start = f.l_idx.len();
        for &(i, v) in &col_c {
            if i != r {
                f.l_idx.push(i);
                f.l_val.push(v / diag);
            }
        }
        let l_end = f.l_idx.len();

        let row_r = std::mem::take(&mut self.rows[r]);
        let u_start = f.u_idx.len();
        for &j in &row_r {
            if j == c {
                continue;
            }
            let col = &mut self.cols[j];
            let k = col.iter().position(|e| e.0 == r).expect("row pattern consistent");
            let (_, urj) = col.swap_remove(k);
            f.u_idx.push(j);
            f.u_val.push(urj);
            if l_end > l_start {
                for (k, &(i, _)) in col.iter().enumerate() {
                    self.marker[i] = k;
                }
                for t in l_start..l_end {
                    let i = f.l_idx[t];
                    let delta = -f.l_val[t] * urj;
                    let k = self.marker[i];
                    if k < col.len() && col[k].0 == i {
                        col[k].1 += delta;
                    } else {
                        col.push((i, delta));
                        self.marker[i] = col.len() - 1;
                        self.rows[i].push(j);
                    }
                }
                // Drop cancelled entries and their row pattern references.
                let mut k = 0;
                while k < col.len() {
                    if col[k].1.abs() <= DROP {
                        let i = col[k].0;
                        col.swap_remove(k);
                        if let Some(q) = self.rows[i].iter().position(|&x| x == j) {
                            self.rows[i].swap_remove(q);
                            if self.rows[i].len() == 1 {
                                self.row_queue.push(i);
                            }
                        }
                    } else {
                        k += 1;
                    }
                }
                for &(i, _) in col.iter() {
                    self.marker[i] = usize::MAX;
                }
            }
            if col.len() == 1 {
                self.col_queue.push(j);
            }
            self.refile(j);
        }
        let u_end = f.u_idx.len();

        for &(i, _) in &col_c {
            if i != r {
                if let Some(q) = self.rows[i].iter().position(|&x| x == c) {
                    self.rows[i].swap_remove(q);
                }
                if self.rows[i].len() == 1 {
                    self.row_queue.push(i);
                }
            }
        }
        self.col_alive[c] = false;
        self.refile(c);
        self.row_alive[r] = false;
        f.steps.push(Step { row: r, pos: c, diag, l: (l_start, l_end), u: (u_start, u_end) });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_factor(a: &[Vec<f64>]) -> Result<BasisFactor, Singular> {
        let m = a.len();
        BasisFactor::factorize(m, |p, out| {
            for i in 0..m {
                if a[i][p] != 0.0 {
                    out.push((i, a[i][p]));
                }
            }
        })
    }

    fn matvec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
        a.iter().map(|row| row.iter().zip(x).map(|(u, v)| u * v).sum()).collect()
    }

    #[test]
    fn solves_small_dense_system() {
        let a = vec![vec![4.0, 1.0, 0.0], vec![2.0, 5.0, 1.0], vec![0.0, 3.0, 6.0]];
        let f = dense_factor(&a).unwrap();
        let x_true = vec![1.0, -2.0, 0.5];
        let mut b = matvec(&a, &x_true);
        f.ftran(&mut b);
        for (u, v) in b.iter().zip(&x_true) {
            assert!((u - v).abs() < 1e-12);
        }
        // B^T y = c
        let y_true = vec![0.3, 0.7, -1.1];
        let at: Vec<Vec<f64>> = (0..3).map(|j| (0..3).map(|i| a[i][j]).collect()).collect();
        let mut c = matvec(&at, &y_true);
        f.btran(&mut c);
        for (u, v) in c.iter().zip(&y_true) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn reports_singular_columns() {
        let a = vec![vec![1.0, 2.0, 0.0], vec![2.0, 4.0, 0.0], vec![0.0, 0.0, 1.0]];
        let err = dense_factor(&a).err().expect("singular");
        assert_eq!(err.positions.len(), 1);
        assert_eq!(err.rows.len(), 1);
    }

    #[test]
    fn eta_update_matches_refactor() {
        let mut a = vec![vec![2.0, 0.0, 1.0], vec![1.0, 3.0, 0.0], vec![0.0, 1.0, 4.0]];
        let mut f = dense_factor(&a).unwrap();
        let new_col = [1.0, -1.0, 2.0];
        let mut alpha = new_col.to_vec();
        f.ftran(&mut alpha);
        f.update(1, &alpha);
        for i in 0..3 {
            a[i][1] = new_col[i];
        }
        let x_true = vec![0.5, 1.5, -2.0];
        let mut b = matvec(&a, &x_true);
        f.ftran(&mut b);
        for (u, v) in b.iter().zip(&x_true) {
            assert!((u - v).abs() < 1e-12, "{b:?}");
        }
        let at: Vec<Vec<f64>> = (0..3).map(|j| (0..3).map(|i| a[i][j]).collect()).collect();
        let mut c = matvec(&at, &x_true);
        f.btran(&mut c);
        for (u, v) in c.iter().zip(&x_true) {
            assert!((u - v).abs() < 1e-12, "{c:?}");
        }
    }
}
