use super::lu::{Columns, LuFactors, Singular};
use super::{SolveError, SolveOptions, Solution, Status};
use crate::lp::{LpProblem, RowSense};

/// Pivot elements smaller than this are never accepted in the ratio test.
const PIVOT_TOL: f64 = 1e-9;
/// Consecutive degenerate steps before switching to Bland's rule.
const STALL_LIMIT: usize = 60;
/// Consecutive failed factorizations tolerated before giving up.
const MAX_REPAIRS: usize = 8;
/// Times an apparently optimal basis may be rejected on re-verification.
const MAX_REVERIFY: usize = 20;
/// Relative size of the random outward shift applied to variable bounds
/// against degeneracy; removed again before the final optimality check.
const PERTURBATION: f64 = 1e-6;
/// Relative disagreement between the column and row computations of the
/// pivot element that triggers a refactorization.
const PIVOT_CHECK: f64 = 1e-8;
/// A devex weight this many times its exact value resets the framework.
const DEVEX_RESET: f64 = 3.0;
/// Entries of `B⁻ᵀ e_r` below this are skipped when forming the pivot row.
const ROW_DROP: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq)]
enum VarStatus {
    Basic(usize),
    AtLower,
    AtUpper,
    /// Nonbasic free variable held at zero.
    Free,
}

enum Step {
    Flip,
    Pivot { pos: usize, to_upper: bool },
    Unbounded,
}

/// The constraint matrix stored both ways; logical columns are implicit.
struct Matrix {
    col_start: Vec<usize>,
    col_row: Vec<usize>,
    col_val: Vec<f64>,
    row_start: Vec<usize>,
    row_col: Vec<usize>,
    row_val: Vec<f64>,
}

impl Matrix {
    fn new(lp: &LpProblem) -> Self {
        let (n, m) = (lp.num_cols(), lp.num_rows());
        let mut col_start = vec![0];
        let mut col_row = Vec::new();
        let mut col_val = Vec::new();
        let mut row_len = vec![0usize; m];
        for j in 0..n {
            let (rows, vals) = lp.column(j);
            for (&r, &v) in rows.iter().zip(vals) {
                if v != 0.0 {
                    col_row.push(r);
                    col_val.push(v);
                    row_len[r] += 1;
                }
            }
            col_start.push(col_row.len());
        }
        let mut row_start = vec![0; m + 1];
        for r in 0..m {
            row_start[r + 1] = row_start[r] + row_len[r];
        }
        let mut fill = row_start[..m].to_vec();
        let mut row_col = vec![0; col_row.len()];
        let mut row_val = vec![0.0; col_row.len()];
        for j in 0..n {
            for e in col_start[j]..col_start[j + 1] {
                let r = col_row[e];
                row_col[fill[r]] = j;
                row_val[fill[r]] = col_val[e];
                fill[r] += 1;
            }
        }
        Matrix {
            col_start,
            col_row,
            col_val,
            row_start,
            row_col,
            row_val,
        }
    }

    fn col(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.col_start[j]..self.col_start[j + 1];
        self.col_row[range.clone()].iter().copied().zip(self.col_val[range].iter().copied())
    }
}

pub(super) struct Simplex<'a> {
    lp: &'a LpProblem,
    opts: &'a SolveOptions,
    a: Matrix,
    n: usize,
    m: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    /// Unperturbed bounds while a perturbation is active.
    original: Option<(Vec<f64>, Vec<f64>)>,
    cost: Vec<f64>,
    x: Vec<f64>,
    status: Vec<VarStatus>,
    basis: Vec<usize>,
    lu: LuFactors,
    /// Reduced costs of the current phase, zero for basic variables.
    d: Vec<f64>,
    /// Basic costs, by position, that `d` was computed against.
    basic_cost: Vec<f64>,
    /// Devex reference weights and framework membership.
    weight: Vec<f64>,
    reference: Vec<bool>,
    // Scratch buffers.
    alpha: Vec<f64>,
    /// Positions where `alpha` is nonzero.
    alpha_nz: Vec<usize>,
    rho: Vec<f64>,
    row: Vec<f64>,
    row_mark: Vec<bool>,
    row_touched: Vec<usize>,
    basis_cols: Columns,
    iterations: usize,
    repairs: usize,
}

impl<'a> Simplex<'a> {
    pub fn new(lp: &'a LpProblem, opts: &'a SolveOptions) -> Self {
        let n = lp.num_cols();
        let m = lp.num_rows();
        let mut lower = lp.lower().to_vec();
        let mut upper = lp.upper().to_vec();
        for &sense in lp.senses() {
            let (l, u) = match sense {
                RowSense::Le => (0.0, f64::INFINITY),
                RowSense::Ge => (f64::NEG_INFINITY, 0.0),
                RowSense::Eq => (0.0, 0.0),
            };
            lower.push(l);
            upper.push(u);
        }
        let mut cost = lp.objective().to_vec();
        cost.resize(n + m, 0.0);
        let original = Some((lower.clone(), upper.clone()));
        perturb(&mut lower, &mut upper);

        let mut x = vec![0.0; n + m];
        let mut status = Vec::with_capacity(n + m);
        for j in 0..n {
            let (st, v) = if lower[j].is_finite() {
                (VarStatus::AtLower, lower[j])
            } else if upper[j].is_finite() {
                (VarStatus::AtUpper, upper[j])
            } else {
                (VarStatus::Free, 0.0)
            };
            status.push(st);
            x[j] = v;
        }
        let basis: Vec<usize> = (n..n + m).collect();
        for r in 0..m {
            status.push(VarStatus::Basic(r));
        }
        let mut identity = Columns::default();
        for r in 0..m {
            identity.push([(r, 1.0)]);
        }
        let lu = LuFactors::factorize(m, &identity).expect("identity basis");

        let mut s = Simplex {
            lp,
            opts,
            a: Matrix::new(lp),
            n,
            m,
            lower,
            upper,
            original,
            cost,
            x,
            status,
            basis,
            lu,
            d: vec![0.0; n + m],
            basic_cost: vec![0.0; m],
            weight: vec![1.0; n + m],
            reference: vec![false; n + m],
            alpha: vec![0.0; m],
            alpha_nz: Vec::new(),
            rho: vec![0.0; m],
            row: vec![0.0; n + m],
            row_mark: vec![false; n + m],
            row_touched: Vec::new(),
            basis_cols: Columns::default(),
            iterations: 0,
            repairs: 0,
        };
        s.recompute_basic_values();
        s.reset_devex();
        s
    }

    fn is_basic(&self, j: usize) -> bool {
        matches!(self.status[j], VarStatus::Basic(_))
    }

    fn refactor(&mut self) -> Result<(), SolveError> {
        loop {
            let mut cols = std::mem::take(&mut self.basis_cols);
            cols.clear();
            for &j in &self.basis {
                if j < self.n {
                    cols.push(self.a.col(j));
                } else {
                    cols.push([(j - self.n, 1.0)]);
                }
            }
            let result = LuFactors::factorize(self.m, &cols);
            self.basis_cols = cols;
            match result {
                Ok(lu) => {
                    self.lu = lu;
                    self.repairs = 0;
                    self.recompute_basic_values();
                    return Ok(());
                }
                Err(singular) => {
                    self.repairs += 1;
                    if self.repairs > MAX_REPAIRS {
                        return Err(SolveError::Singular(MAX_REPAIRS));
                    }
                    self.repair(singular);
                }
            }
        }
    }

    /// Replaces unpivotable basis columns by the logicals of uncovered rows.
    fn repair(&mut self, singular: Singular) {
        for (&pos, &row) in singular.positions.iter().zip(&singular.rows) {
            let out = self.basis[pos];
            let (st, v) = self.nearest_bound(out);
            self.status[out] = st;
            self.x[out] = v;
            let logical = self.n + row;
            self.basis[pos] = logical;
            self.status[logical] = VarStatus::Basic(pos);
        }
    }

    fn nearest_bound(&self, j: usize) -> (VarStatus, f64) {
        let (l, u, v) = (self.lower[j], self.upper[j], self.x[j]);
        match (l.is_finite(), u.is_finite()) {
            (true, true) => {
                if (v - l).abs() <= (u - v).abs() {
                    (VarStatus::AtLower, l)
                } else {
                    (VarStatus::AtUpper, u)
                }
            }
            (true, false) => (VarStatus::AtLower, l),
            (false, true) => (VarStatus::AtUpper, u),
            (false, false) => (VarStatus::Free, 0.0),
        }
    }

    fn recompute_basic_values(&mut self) {
        let mut rhs = self.lp.rhs().to_vec();
        for j in 0..self.n + self.m {
            let xj = self.x[j];
            if self.is_basic(j) || xj == 0.0 {
                continue;
            }
            if j < self.n {
                for (r, v) in self.a.col(j) {
                    rhs[r] -= v * xj;
                }
            } else {
                rhs[j - self.n] -= xj;
            }
        }
        self.lu.ftran(&mut rhs);
        for (pos, &j) in self.basis.iter().enumerate() {
            self.x[j] = rhs[pos];
        }
    }

    /// Phase-one cost of basic variable `j`: the gradient of its bound violation.
    fn infeasibility_cost(&self, j: usize) -> f64 {
        let tol = self.opts.tol_feas;
        if self.x[j] < self.lower[j] - tol {
            -1.0
        } else if self.x[j] > self.upper[j] + tol {
            1.0
        } else {
            0.0
        }
    }

    fn max_infeasibility(&self) -> f64 {
        self.basis
            .iter()
            .map(|&j| (self.lower[j] - self.x[j]).max(self.x[j] - self.upper[j]).max(0.0))
            .fold(0.0, f64::max)
    }

    fn phase_cost(&self, j: usize, phase_one: bool) -> f64 {
        match (phase_one, self.is_basic(j)) {
            (true, true) => self.infeasibility_cost(j),
            (true, false) => 0.0,
            (false, _) => self.cost[j],
        }
    }

    /// True if some basic variable's phase-one cost differs from the one
    /// the reduced costs were computed with.
    fn phase_one_costs_changed(&self) -> bool {
        self.basis
            .iter()
            .zip(&self.basic_cost)
            .any(|(&j, &c)| self.infeasibility_cost(j) != c)
    }

    /// Row duals `y = B⁻ᵀ c_B` of the given phase.
    fn duals(&mut self, phase_one: bool) -> Vec<f64> {
        let mut y: Vec<f64> = self.basis.iter().map(|&j| self.phase_cost(j, phase_one)).collect();
        self.lu.btran(&mut y);
        y
    }

    fn reduced_cost(&self, j: usize, y: &[f64], phase_one: bool) -> f64 {
        let c = self.phase_cost(j, phase_one);
        if j < self.n {
            c - self.a.col(j).map(|(r, v)| v * y[r]).sum::<f64>()
        } else {
            c - y[j - self.n]
        }
    }

    fn recompute_reduced_costs(&mut self, phase_one: bool) {
        for pos in 0..self.m {
            self.basic_cost[pos] = self.phase_cost(self.basis[pos], phase_one);
        }
        let mut y = self.basic_cost.clone();
        self.lu.btran(&mut y);
        for j in 0..self.n {
            self.d[j] = if self.is_basic(j) {
                0.0
            } else {
                let c = if phase_one { 0.0 } else { self.cost[j] };
                c - self.a.col(j).map(|(r, v)| v * y[r]).sum::<f64>()
            };
        }
        for (i, &yi) in y.iter().enumerate() {
            let j = self.n + i;
            self.d[j] = if self.is_basic(j) { 0.0 } else { -yi };
        }
    }

    fn reset_devex(&mut self) {
        for j in 0..self.n + self.m {
            self.weight[j] = 1.0;
            self.reference[j] = !self.is_basic(j);
        }
    }

    /// Direction (+1 increase, −1 decrease) in which nonbasic `j` improves
    /// the objective, if any.
    fn improving_direction(&self, j: usize) -> Option<f64> {
        let tol = self.opts.tol_opt;
        let d = self.d[j];
        if self.lower[j] == self.upper[j] {
            return None;
        }
        match self.status[j] {
            VarStatus::Basic(_) => None,
            VarStatus::AtLower if d < -tol => Some(1.0),
            VarStatus::AtUpper if d > tol => Some(-1.0),
            VarStatus::Free if d.abs() > tol => Some(if d < 0.0 { 1.0 } else { -1.0 }),
            _ => None,
        }
    }

    fn choose_entering(&self, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.n + self.m {
            if let Some(dir) = self.improving_direction(j) {
                if bland {
                    return Some((j, dir));
                }
                let score = self.d[j] * self.d[j] / self.weight[j];
                if best.is_none_or(|(_, _, s)| score > s) {
                    best = Some((j, dir, score));
                }
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    /// Ratio test for entering `q` moving in direction `dir`, with
    /// `self.alpha = B⁻¹ a_q`. Returns the step length and what blocks it.
    fn ratio_test(&self, q: usize, dir: f64, phase_one: bool, bland: bool) -> (f64, Step) {
        let tol = if bland { 0.0 } else { self.opts.tol_feas };
        let ftol = self.opts.tol_feas;
        let range = self.upper[q] - self.lower[q];

        // Each candidate yields (exact ratio, relaxed ratio, |rate|, leaves at upper).
        let candidate = |pos: usize| -> Option<(f64, f64, f64, bool)> {
            let rate = -dir * self.alpha[pos];
            if rate.abs() < PIVOT_TOL {
                return None;
            }
            let j = self.basis[pos];
            let (xj, l, u) = (self.x[j], self.lower[j], self.upper[j]);
            if phase_one && xj < l - ftol {
                (rate > 0.0).then(|| {
                    let r = (l - xj) / rate;
                    (r, r, rate, false)
                })
            } else if phase_one && xj > u + ftol {
                (rate < 0.0).then(|| {
                    let r = (xj - u) / -rate;
                    (r, r, -rate, true)
                })
            } else if rate > 0.0 && u.is_finite() {
                Some(((u - xj) / rate, (u + tol - xj) / rate, rate, true))
            } else if rate < 0.0 && l.is_finite() {
                Some(((xj - l) / -rate, (xj - l + tol) / -rate, -rate, false))
            } else {
                None
            }
        };

        if bland {
            let mut best: Option<(usize, f64, bool)> = None;
            let mut min = f64::INFINITY;
            for &pos in &self.alpha_nz {
                if let Some((r, _, _, _)) = candidate(pos) {
                    min = min.min(r);
                }
            }
            if min == f64::INFINITY {
                return self.no_block(range);
            }
            if range <= min {
                return (range, Step::Flip);
            }
            let tie = 1e-12 * (1.0 + min.abs());
            for &pos in &self.alpha_nz {
                if let Some((r, _, _, up)) = candidate(pos) {
                    if r <= min + tie && best.is_none_or(|(p, _, _)| self.basis[pos] < self.basis[p]) {
                        best = Some((pos, r, up));
                    }
                }
            }
            let (pos, r, to_upper) = best.expect("a blocking candidate");
            return (r.max(0.0), Step::Pivot { pos, to_upper });
        }

        let mut bound = f64::INFINITY;
        for &pos in &self.alpha_nz {
            if let Some((_, relaxed, _, _)) = candidate(pos) {
                bound = bound.min(relaxed);
            }
        }
        if bound == f64::INFINITY {
            return self.no_block(range);
        }
        if range <= bound {
            return (range, Step::Flip);
        }
        let mut best: Option<(usize, f64, f64, bool)> = None;
        for &pos in &self.alpha_nz {
            if let Some((r, _, rate, up)) = candidate(pos) {
                if r <= bound && best.is_none_or(|(_, _, br, _)| rate > br) {
                    best = Some((pos, r, rate, up));
                }
            }
        }
        let (pos, r, _, to_upper) = best.expect("a candidate within the bound");
        (r.max(0.0), Step::Pivot { pos, to_upper })
    }

    fn no_block(&self, range: f64) -> (f64, Step) {
        if range.is_finite() {
            (range, Step::Flip)
        } else {
            (f64::INFINITY, Step::Unbounded)
        }
    }

    /// Fills `self.row` with row `r` of `B⁻¹ A` over the nonbasic variables,
    /// recording touched indices in `self.row_touched`.
    fn pivot_row(&mut self, r: usize) {
        for &j in &self.row_touched {
            self.row[j] = 0.0;
            self.row_mark[j] = false;
        }
        self.row_touched.clear();
        self.rho.iter_mut().for_each(|v| *v = 0.0);
        self.rho[r] = 1.0;
        self.lu.btran(&mut self.rho);
        for i in 0..self.m {
            let p = self.rho[i];
            if p.abs() < ROW_DROP {
                continue;
            }
            for e in self.a.row_start[i]..self.a.row_start[i + 1] {
                let j = self.a.row_col[e];
                if !self.row_mark[j] {
                    self.row_mark[j] = true;
                    self.row_touched.push(j);
                }
                self.row[j] += p * self.a.row_val[e];
            }
            let logical = self.n + i;
            self.row[logical] = p;
            self.row_mark[logical] = true;
            self.row_touched.push(logical);
        }
    }

    pub fn run(mut self) -> Result<Solution, SolveError> {
        let mut bland = false;
        let mut degenerate = 0usize;
        let mut reverify = 0usize;
        let mut last_phase_one = None;
        let mut stale = true;

        loop {
            if self.lu.num_etas() >= self.opts.refactor_every || self.lu.eta_file_heavy() {
                self.refactor()?;
                stale = true;
            }
            let phase_one = self.max_infeasibility() > self.opts.tol_feas;
            if last_phase_one != Some(phase_one) {
                last_phase_one = Some(phase_one);
                degenerate = 0;
                bland = false;
                stale = true;
            }
            if phase_one && !stale && self.phase_one_costs_changed() {
                stale = true;
            }
            if stale {
                self.recompute_reduced_costs(phase_one);
                stale = false;
            }

            let Some((q, dir)) = self.choose_entering(bland) else {
                // Confirm on a fresh factorization before concluding.
                if self.lu.num_etas() > 0 && reverify < MAX_REVERIFY {
                    reverify += 1;
                    self.refactor()?;
                    stale = true;
                    continue;
                }
                if self.remove_perturbation() {
                    reverify = 0;
                    last_phase_one = None;
                    continue;
                }
                if phase_one {
                    return Ok(self.finish(Status::Infeasible));
                }
                return Ok(self.finish(Status::Optimal));
            };

            if self.iterations >= self.opts.max_iter {
                return Ok(self.finish(Status::IterLimit));
            }

            for &pos in &self.alpha_nz {
                self.alpha[pos] = 0.0;
            }
            if q < self.n {
                for (r, v) in self.a.col(q) {
                    self.alpha[r] = v;
                }
            } else {
                self.alpha[q - self.n] = 1.0;
            }
            self.lu.ftran(&mut self.alpha);
            self.alpha_nz.clear();
            for (pos, &a) in self.alpha.iter().enumerate() {
                if a != 0.0 {
                    self.alpha_nz.push(pos);
                }
            }
            let (theta, step) = self.ratio_test(q, dir, phase_one, bland);

            if theta.abs() * self.d[q].abs() < 1e-12 {
                degenerate += 1;
                bland = degenerate > STALL_LIMIT;
            } else {
                degenerate = 0;
                bland = false;
            }

            match step {
                Step::Unbounded => {
                    // Impossible in phase one and only trusted on fresh
                    // factors otherwise; refresh and retry.
                    if phase_one || (self.lu.num_etas() > 0 && reverify < MAX_REVERIFY) {
                        reverify += 1;
                        self.refactor()?;
                        stale = true;
                        bland = phase_one;
                        continue;
                    }
                    return Ok(self.finish(Status::Unbounded));
                }
                Step::Flip => {
                    self.apply_step(q, dir, theta);
                    let (st, v) = if dir > 0.0 {
                        (VarStatus::AtUpper, self.upper[q])
                    } else {
                        (VarStatus::AtLower, self.lower[q])
                    };
                    self.status[q] = st;
                    self.x[q] = v;
                }
                Step::Pivot { pos, to_upper } => {
                    let pivot = self.alpha[pos];
                    self.pivot_row(pos);
                    let check = self.row[q];
                    if (check - pivot).abs() > PIVOT_CHECK * (1.0 + pivot.abs()) && self.lu.num_etas() > 0 {
                        self.refactor()?;
                        stale = true;
                        continue;
                    }
                    let reset = self.update_pricing(q, pos, pivot, phase_one);
                    self.apply_step(q, dir, theta);
                    let out = self.basis[pos];
                    let (st, v) = if self.lower[out] == self.upper[out] || !to_upper {
                        (VarStatus::AtLower, self.lower[out])
                    } else {
                        (VarStatus::AtUpper, self.upper[out])
                    };
                    self.status[out] = st;
                    self.x[out] = v;
                    self.basis[pos] = q;
                    self.status[q] = VarStatus::Basic(pos);
                    self.lu.push_eta(pos, &self.alpha);
                    if reset {
                        self.reset_devex();
                    }
                }
            }
            self.iterations += 1;
        }
    }

    /// Updates reduced costs and devex weights for `q` replacing the basic
    /// variable at `pos`, using the pivot row in `self.row`. Returns true
    /// if the devex framework should be reset after the basis change.
    fn update_pricing(&mut self, q: usize, pos: usize, pivot: f64, phase_one: bool) -> bool {
        let out = self.basis[pos];
        let exact: f64 = (if self.reference[q] { 1.0 } else { 0.0 })
            + self
                .alpha_nz
                .iter()
                .filter(|&&pos| self.reference[self.basis[pos]])
                .map(|&pos| self.alpha[pos] * self.alpha[pos])
                .sum::<f64>();
        let exact = exact.max(1e-12);
        let reset = self.weight[q] > DEVEX_RESET * exact;
        let wq = exact;

        let theta_d = self.d[q] / pivot;
        for &j in &self.row_touched {
            if j == q || self.is_basic(j) {
                continue;
            }
            let a = self.row[j];
            self.d[j] -= theta_d * a;
            let ratio = a / pivot;
            self.weight[j] = self.weight[j].max(ratio * ratio * wq);
        }
        let (c_q, c_out) = if phase_one { (0.0, 0.0) } else { (self.cost[q], self.cost[out]) };
        self.d[q] = 0.0;
        self.d[out] = c_out - self.basic_cost[pos] - theta_d;
        self.basic_cost[pos] = c_q;
        self.weight[out] = (wq / (pivot * pivot)).max(1.0);
        reset
    }

    /// Restores the original bounds, moving nonbasic variables onto them.
    /// Returns false if no perturbation was active.
    fn remove_perturbation(&mut self) -> bool {
        let Some((lower, upper)) = self.original.take() else {
            return false;
        };
        self.lower = lower;
        self.upper = upper;
        for j in 0..self.n + self.m {
            let v = match self.status[j] {
                VarStatus::Basic(_) => continue,
                VarStatus::AtLower => self.lower[j],
                VarStatus::AtUpper => self.upper[j],
                VarStatus::Free => 0.0,
            };
            self.x[j] = v;
        }
        self.recompute_basic_values();
        true
    }

    fn apply_step(&mut self, q: usize, dir: f64, theta: f64) {
        if theta == 0.0 {
            return;
        }
        self.x[q] += dir * theta;
        for &pos in &self.alpha_nz {
            let j = self.basis[pos];
            self.x[j] -= dir * theta * self.alpha[pos];
        }
    }

    fn finish(mut self, status: Status) -> Solution {
        let phase_one = status == Status::Infeasible;
        let y = self.duals(phase_one);
        let reduced_costs = (0..self.n)
            .map(|j| match self.status[j] {
                VarStatus::Basic(_) => 0.0,
                _ => self.reduced_cost(j, &y, phase_one),
            })
            .collect();
        let x: Vec<f64> = self.x[..self.n].to_vec();
        Solution {
            status,
            objective: self.lp.objective_value(&x),
            x,
            duals: y,
            reduced_costs,
            iterations: self.iterations,
        }
    }
}

/// Widens every non-fixed finite bound by a deterministic pseudo-random
/// amount in `[1, 2) · PERTURBATION · (1 + |bound|)`.
fn perturb(lower: &mut [f64], upper: &mut [f64]) {
    let mut state: u64 = 0x9E37_79B9_7F4A_7C15;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        1.0 + (state >> 11) as f64 / (1u64 << 53) as f64
    };
    for (l, u) in lower.iter_mut().zip(upper.iter_mut()) {
        if *l == *u {
            continue;
        }
        if l.is_finite() {
            *l -= next() * PERTURBATION * (1.0 + l.abs());
        }
        if u.is_finite() {
            *u += next() * PERTURBATION * (1.0 + u.abs());
        }
    }
}
