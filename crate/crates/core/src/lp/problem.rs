//! Sparse linear program in bounded form.
//!
//! ```text
//! min  cᵀx
//! s.t. a_r x (=, ≤, ≥) b_r      for every row r
//!      l ≤ x ≤ u
//! ```
//!
//! Rows and columns carry names so that every coefficient can be traced back
//! to the model entity that produced it. Matrix entries are collected as
//! triplets and compressed column-wise on [`LpBuilder::build`]; duplicate
//! `(row, col)` pairs are summed.

use serde::Serialize;
use thiserror::Error;

/// Relation between a row activity and its right-hand side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RowSense {
    Eq,
    Le,
    Ge,
}

impl RowSense {
    pub fn symbol(self) -> &'static str {
        match self {
            RowSense::Eq => "=",
            RowSense::Le => "<=",
            RowSense::Ge => ">=",
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum LpError {
    #[error("row `{0}` has no nonzero coefficient")]
    EmptyRow(String),
    #[error("non-finite {what} in `{name}`")]
    NonFinite { what: &'static str, name: String },
    #[error("column `{name}` has inconsistent bounds [{lower}, {upper}]")]
    BadBounds { name: String, lower: f64, upper: f64 },
    #[error("coefficient references column {col} but the problem has {num_cols} columns")]
    ColumnOutOfRange { col: usize, num_cols: usize },
    #[error("objective has {got} entries, expected {expected}")]
    ObjectiveLength { got: usize, expected: usize },
}

/// Incremental constructor for [`LpProblem`].
#[derive(Clone, Debug, Default)]
pub struct LpBuilder {
    name: String,
    col_names: Vec<String>,
    obj: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    row_names: Vec<String>,
    senses: Vec<RowSense>,
    rhs: Vec<f64>,
    triplets: Vec<(usize, usize, f64)>,
}

impl LpBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn num_cols(&self) -> usize {
        self.col_names.len()
    }

    pub fn num_rows(&self) -> usize {
        self.row_names.len()
    }

    /// Adds a column and returns its index.
    pub fn add_col(&mut self, name: impl Into<String>, obj: f64, lower: f64, upper: f64) -> usize {
        self.col_names.push(name.into());
        self.obj.push(obj);
        self.lower.push(lower);
        self.upper.push(upper);
        self.col_names.len() - 1
    }

    /// Adds a row `Σ coeffs (sense) rhs` and returns its index.
    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        sense: RowSense,
        rhs: f64,
        coeffs: &[(usize, f64)],
    ) -> usize {
        let row = self.row_names.len();
        self.row_names.push(name.into());
        self.senses.push(sense);
        self.rhs.push(rhs);
        self.triplets
            .extend(coeffs.iter().map(|&(col, val)| (row, col, val)));
        row
    }

    pub fn add_obj(&mut self, col: usize, delta: f64) {
        self.obj[col] += delta;
    }

    pub fn set_obj(&mut self, obj: Vec<f64>) {
        self.obj = obj;
    }

    pub fn build(self) -> Result<LpProblem, LpError> {
        let num_cols = self.col_names.len();
        let num_rows = self.row_names.len();
        if self.obj.len() != num_cols {
            return Err(LpError::ObjectiveLength {
                got: self.obj.len(),
                expected: num_cols,
            });
        }
        for j in 0..num_cols {
            let (l, u) = (self.lower[j], self.upper[j]);
            if !self.obj[j].is_finite() {
                return Err(LpError::NonFinite {
                    what: "objective coefficient",
                    name: self.col_names[j].clone(),
                });
            }
            if l.is_nan() || u.is_nan() || l > u || l == f64::INFINITY || u == f64::NEG_INFINITY {
                return Err(LpError::BadBounds {
                    name: self.col_names[j].clone(),
                    lower: l,
                    upper: u,
                });
            }
        }
        for r in 0..num_rows {
            if !self.rhs[r].is_finite() {
                return Err(LpError::NonFinite {
                    what: "right-hand side",
                    name: self.row_names[r].clone(),
                });
            }
        }

        let mut triplets = self.triplets;
        for &(row, col, val) in &triplets {
            if col >= num_cols {
                return Err(LpError::ColumnOutOfRange { col, num_cols });
            }
            if !val.is_finite() {
                return Err(LpError::NonFinite {
                    what: "coefficient",
                    name: self.row_names[row].clone(),
                });
            }
        }
        triplets.sort_by_key(|&(row, col, _)| (col, row));

        let mut col_start = Vec::with_capacity(num_cols + 1);
        let mut row_index = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut row_nnz = vec![0usize; num_rows];
        let mut it = triplets.into_iter().peekable();
        col_start.push(0);
        for col in 0..num_cols {
            while let Some(&(row, c, val)) = it.peek() {
                if c != col {
                    break;
                }
                it.next();
                let mut sum = val;
                while let Some(&(r2, c2, v2)) = it.peek() {
                    if r2 == row && c2 == col {
                        sum += v2;
                        it.next();
                    } else {
                        break;
                    }
                }
                if sum != 0.0 {
                    row_index.push(row);
                    values.push(sum);
                    row_nnz[row] += 1;
                }
            }
            col_start.push(row_index.len());
        }
        if let Some(r) = row_nnz.iter().position(|&n| n == 0) {
            return Err(LpError::EmptyRow(self.row_names[r].clone()));
        }

        Ok(LpProblem {
            name: self.name,
            col_names: self.col_names,
            obj: self.obj,
            lower: self.lower,
            upper: self.upper,
            row_names: self.row_names,
            senses: self.senses,
            rhs: self.rhs,
            col_start,
            row_index,
            values,
        })
    }
}

/// An assembled, immutable linear program with compressed sparse columns.
#[derive(Clone, Debug, PartialEq)]
pub struct LpProblem {
    name: String,
    col_names: Vec<String>,
    obj: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    row_names: Vec<String>,
    senses: Vec<RowSense>,
    rhs: Vec<f64>,
    col_start: Vec<usize>,
    row_index: Vec<usize>,
    values: Vec<f64>,
}

impl LpProblem {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_cols(&self) -> usize {
        self.col_names.len()
    }

    pub fn num_rows(&self) -> usize {
        self.row_names.len()
    }

    pub fn num_nonzeros(&self) -> usize {
        self.values.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.obj
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn senses(&self) -> &[RowSense] {
        &self.senses
    }

    pub fn col_name(&self, col: usize) -> &str {
        &self.col_names[col]
    }

    pub fn row_name(&self, row: usize) -> &str {
        &self.row_names[row]
    }

    pub fn col_names(&self) -> &[String] {
        &self.col_names
    }

    pub fn row_names(&self) -> &[String] {
        &self.row_names
    }

    /// Row indices and values of column `col`, rows ascending.
    pub fn column(&self, col: usize) -> (&[usize], &[f64]) {
        let range = self.col_start[col]..self.col_start[col + 1];
        (&self.row_index[range.clone()], &self.values[range])
    }

    /// All nonzeros as `(row, col, value)`, ordered by column then row.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.num_cols()).flat_map(move |col| {
            let (rows, vals) = self.column(col);
            rows.iter().zip(vals).map(move |(&r, &v)| (r, col, v))
        })
    }

    pub fn coefficient(&self, row: usize, col: usize) -> f64 {
        let (rows, vals) = self.column(col);
        match rows.binary_search(&row) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    /// `A x` for every row.
    pub fn row_activity(&self, x: &[f64]) -> Vec<f64> {
        let mut act = vec![0.0; self.num_rows()];
        for (r, c, v) in self.triplets() {
            act[r] += v * x[c];
        }
        act
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.obj.iter().zip(x).map(|(c, x)| c * x).sum()
    }

    /// Copies the problem back into a builder so rows or columns can be added.
    pub fn to_builder(&self) -> LpBuilder {
        LpBuilder {
            name: self.name.clone(),
            col_names: self.col_names.clone(),
            obj: self.obj.clone(),
            lower: self.lower.clone(),
            upper: self.upper.clone(),
            row_names: self.row_names.clone(),
            senses: self.senses.clone(),
            rhs: self.rhs.clone(),
            triplets: self.triplets().collect(),
        }
    }

    pub fn with_objective(&self, obj: Vec<f64>) -> Result<LpProblem, LpError> {
        if obj.len() != self.num_cols() {
            return Err(LpError::ObjectiveLength {
                got: obj.len(),
                expected: self.num_cols(),
            });
        }
        if let Some(j) = obj.iter().position(|c| !c.is_finite()) {
            return Err(LpError::NonFinite {
                what: "objective coefficient",
                name: self.col_names[j].clone(),
            });
        }
        Ok(LpProblem {
            obj,
            ..self.clone()
        })
    }

    /// Returns a copy with one right-hand side replaced.
    pub fn with_rhs(&self, row: usize, value: f64) -> LpProblem {
        let mut rhs = self.rhs.clone();
        rhs[row] = value;
        LpProblem {
            rhs,
            ..self.clone()
        }
    }

    pub fn find_row(&self, name: &str) -> Option<usize> {
        self.row_names.iter().position(|n| n == name)
    }

    pub fn find_col(&self, name: &str) -> Option<usize> {
        self.col_names.iter().position(|n| n == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed() {
        let mut b = LpBuilder::new("dup");
        let x = b.add_col("x", 1.0, 0.0, f64::INFINITY);
        b.add_row("r", RowSense::Le, 3.0, &[(x, 1.0), (x, 2.0)]);
        let lp = b.build().unwrap();
        assert_eq!(lp.num_nonzeros(), 1);
        assert_eq!(lp.coefficient(0, x), 3.0);
    }

    #[test]
    fn cancelled_row_is_rejected() {
        let mut b = LpBuilder::new("cancel");
        let x = b.add_col("x", 1.0, 0.0, 1.0);
        b.add_row("r", RowSense::Eq, 0.0, &[(x, 1.0), (x, -1.0)]);
        assert_eq!(b.build(), Err(LpError::EmptyRow("r".into())));
    }

    #[test]
    fn rejects_infinite_rhs_and_inverted_bounds() {
        let mut b = LpBuilder::new("bad");
        let x = b.add_col("x", 0.0, 0.0, 1.0);
        b.add_row("r", RowSense::Le, f64::INFINITY, &[(x, 1.0)]);
        assert!(matches!(b.build(), Err(LpError::NonFinite { .. })));

        let mut b = LpBuilder::new("bad");
        let x = b.add_col("x", 0.0, 2.0, 1.0);
        b.add_row("r", RowSense::Le, 1.0, &[(x, 1.0)]);
        assert!(matches!(b.build(), Err(LpError::BadBounds { .. })));
    }

    #[test]
    fn builder_round_trip_preserves_problem() {
        let mut b = LpBuilder::new("rt");
        let x = b.add_col("x", 1.0, 0.0, 4.0);
        let y = b.add_col("y", -2.0, f64::NEG_INFINITY, f64::INFINITY);
        b.add_row("a", RowSense::Ge, 1.0, &[(y, 1.0), (x, 2.0)]);
        b.add_row("b", RowSense::Eq, 0.5, &[(x, 1.0)]);
        let lp = b.build().unwrap();
        assert_eq!(lp.to_builder().build().unwrap(), lp);
        assert_eq!(lp.row_activity(&[1.0, 2.0]), vec![4.0, 1.0]);
    }
}
