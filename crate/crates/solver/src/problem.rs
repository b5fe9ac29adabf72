//! Sparse linear program container shared by the simplex, branch-and-bound and
//! MPS exchange code.

use crate::SolverError;

/// Sense of a linear row `expr <sense> rhs`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RowSense {
    Le,
    Eq,
    Ge,
}

impl RowSense {
    pub fn symbol(self) -> &'static str {
        match self {
            RowSense::Le => "<=",
            RowSense::Eq => "=",
            RowSense::Ge => ">=",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    /// Deduplicated `(column, coefficient)` pairs sorted by column.
    pub coeffs: Vec<(usize, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

impl Row {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * values[j]).sum()
    }

    /// Amount by which `values` violates the row (zero when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.activity(values);
        match self.sense {
            RowSense::Le => (lhs - self.rhs).max(0.0),
            RowSense::Ge => (self.rhs - lhs).max(0.0),
            RowSense::Eq => (lhs - self.rhs).abs(),
        }
    }

    /// Magnitude used to normalise violations: the largest of one, the
    /// right-hand side and the absolute terms of the activity.
    pub fn magnitude(&self, values: &[f64]) -> f64 {
        let terms: f64 = self.coeffs.iter().map(|&(j, a)| (a * values[j]).abs()).sum();
        1.0f64.max(self.rhs.abs()).max(terms)
    }
}

/// A minimisation problem over bounded columns with linear rows.
///
/// Columns carry `[lower, upper]` bounds (infinite bounds allowed) and an
/// integrality flag. Names are optional but, when present, are used by the
/// MPS writer's sidecar map and by solution import.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub objective_offset: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub integer: Vec<bool>,
    pub rows: Vec<Row>,
    pub col_names: Vec<String>,
    pub row_names: Vec<String>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_cols(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_nonzeros(&self) -> usize {
        self.rows.iter().map(|r| r.coeffs.len()).sum()
    }

    pub fn num_integer(&self) -> usize {
        self.integer.iter().filter(|&&b| b).count()
    }

    pub fn add_column(&mut self, name: impl Into<String>, cost: f64, lower: f64, upper: f64) -> usize {
        self.objective.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.integer.push(false);
        self.col_names.push(name.into());
        self.objective.len() - 1
    }

    pub fn add_binary(&mut self, name: impl Into<String>, cost: f64) -> usize {
        let j = self.add_column(name, cost, 0.0, 1.0);
        self.integer[j] = true;
        j
    }

    /// Adds a row, summing duplicate columns and dropping exact zeros.
    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        coeffs: impl IntoIterator<Item = (usize, f64)>,
        sense: RowSense,
        rhs: f64,
    ) -> usize {
        let row = Row { coeffs: dedup_coeffs(coeffs), sense, rhs };
        self.rows.push(row);
        self.row_names.push(name.into());
        self.rows.len() - 1
    }

    pub fn evaluate_objective(&self, values: &[f64]) -> f64 {
        self.objective_offset
            + self.objective.iter().zip(values).map(|(c, x)| c * x).sum::<f64>()
    }

    /// Structural sanity: finite coefficients, consistent lengths, valid
    /// column references and `lower <= upper`.
    pub fn check(&self) -> Result<(), SolverError> {
        let n = self.num_cols();
        if self.lower.len() != n || self.upper.len() != n || self.integer.len() != n {
            return Err(SolverError::Malformed("column vectors have different lengths".into()));
        }
        for j in 0..n {
            if !self.objective[j].is_finite() {
                return Err(SolverError::Malformed(format!("objective coefficient of column {j} is not finite")));
            }
            if self.lower[j].is_nan() || self.upper[j].is_nan() || self.lower[j] > self.upper[j] {
                return Err(SolverError::Malformed(format!("column {j} has invalid bounds")));
            }
            if self.lower[j] == f64::INFINITY || self.upper[j] == f64::NEG_INFINITY {
                return Err(SolverError::Malformed(format!("column {j} has an empty domain")));
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(SolverError::Malformed(format!("row {i} has a non-finite right-hand side")));
            }
            for &(j, a) in &row.coeffs {
                if j >= n {
                    return Err(SolverError::Malformed(format!("row {i} references missing column {j}")));
                }
                if !a.is_finite() {
                    return Err(SolverError::Malformed(format!("row {i} has a non-finite coefficient")));
                }
            }
        }
        Ok(())
    }

    /// Largest row violation, absolute and normalised by row magnitude.
    pub fn max_row_violation(&self, values: &[f64]) -> (f64, f64) {
        self.rows.iter().fold((0.0f64, 0.0f64), |(abs, rel), row| {
            let v = row.violation(values);
            (abs.max(v), rel.max(v / row.magnitude(values)))
        })
    }

    pub fn max_bound_violation(&self, values: &[f64]) -> f64 {
        (0..self.num_cols())
            .map(|j| (self.lower[j] - values[j]).max(values[j] - self.upper[j]).max(0.0))
            .fold(0.0, f64::max)
    }

    pub fn max_integrality_violation(&self, values: &[f64]) -> f64 {
        (0..self.num_cols())
            .filter(|&j| self.integer[j])
            .map(|j| (values[j] - values[j].round()).abs())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn dedup_coeffs(coeffs: impl IntoIterator<Item = (usize, f64)>) -> Vec<(usize, f64)> {
    let mut v: Vec<(usize, f64)> = coeffs.into_iter().collect();
    v.sort_by_key(|&(j, _)| j);
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(v.len());
    for (j, a) in v {
        match out.last_mut() {
            Some(last) if last.0 == j => last.1 += a,
            _ => out.push((j, a)),
        }
    }
    out.retain(|&(_, a)| a != 0.0);
    out
}
