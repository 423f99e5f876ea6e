//! Embedded LP solver: bounded-variable revised simplex.
//!
//! Variable bounds are handled implicitly (nonbasic variables sit at a
//! bound), so the basis dimension equals the number of rows. The solver
//! reports the basis duals and reduced costs alongside the primal point.
//!
//! Sign convention: for `min cᵀx`, the dual `y_r` of row `r` is the rate of
//! change of the optimal objective with respect to `b_r`. Duals of `≤` rows
//! are therefore `≤ 0`, duals of `≥` rows `≥ 0`, and equality rows are free.
//! Analysis code flips signs where a positive "price" is wanted. At degenerate
//! optima the duals are not unique; the values reported are those of the
//! final basis.

mod kkt;
mod lu;
mod simplex;

pub use kkt::{verify_kkt, KktReport};

use serde::Serialize;
use thiserror::Error;

use crate::lp::LpProblem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    IterLimit,
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    /// Primal feasibility tolerance (bound and row violations).
    pub tol_feas: f64,
    /// Dual feasibility tolerance on reduced costs.
    pub tol_opt: f64,
    pub max_iter: usize,
    /// Basis updates between fresh factorizations.
    pub refactor_every: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol_feas: 1e-9,
            tol_opt: 1e-9,
            max_iter: 1_000_000,
            refactor_every: 100,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SolveError {
    #[error("basis factorization failed after {0} repair attempts")]
    Singular(usize),
}

/// Result of a solve. For non-optimal statuses the vectors hold the last
/// iterate and carry no optimality guarantee.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Solution {
    pub status: Status,
    pub objective: f64,
    pub x: Vec<f64>,
    /// One dual per row, see the module docs for the sign convention.
    pub duals: Vec<f64>,
    /// `c_j − a_jᵀ y` per column.
    pub reduced_costs: Vec<f64>,
    pub iterations: usize,
}

impl Solution {
    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }
}

/// Minimizes `lp` with the bounded revised simplex method.
pub fn solve(lp: &LpProblem, opts: &SolveOptions) -> Result<Solution, SolveError> {
    simplex::Simplex::new(lp, opts).run()
}
