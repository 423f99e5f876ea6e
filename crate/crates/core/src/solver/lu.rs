//! Sparse LU factorization of simplex bases with product-form updates.
//!
//! The basis `B` is factorized by right-looking Gaussian elimination with
//! Markowitz pivot selection and threshold partial pivoting. Column singletons
//! are taken first, so the (mostly triangular) bases produced by time-expanded
//! energy models factor with almost no fill. Basis changes between
//! refactorizations are applied as eta columns.

/// Relative threshold for accepting a pivot in its column.
const PIVOT_THRESHOLD: f64 = 0.1;
/// Absolute magnitude below which an entry cannot be a pivot.
const SINGULAR_TOL: f64 = 1e-11;
/// Number of lowest-count columns inspected by the Markowitz search.
const MARKOWITZ_CANDIDATES: usize = 4;
const DROP_TOL: f64 = 1e-14;

/// Failure to factorize: the listed basis positions could not be pivoted,
/// leaving the listed rows uncovered.
#[derive(Debug, Clone)]
pub(crate) struct Singular {
    pub positions: Vec<usize>,
    pub rows: Vec<usize>,
}

#[derive(Debug, Clone)]
struct Eta {
    pos: usize,
    pivot: f64,
    idx: Vec<usize>,
    val: Vec<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct LuFactors {
    m: usize,
    // L as elimination etas: row l_piv[k] scaled into the rows listed.
    l_piv: Vec<usize>,
    l_start: Vec<usize>,
    l_idx: Vec<usize>,
    l_val: Vec<f64>,
    // U rows in pivot order; off-diagonal entries indexed by basis position.
    u_row: Vec<usize>,
    u_pos: Vec<usize>,
    u_diag: Vec<f64>,
    u_start: Vec<usize>,
    u_idx: Vec<usize>,
    u_val: Vec<f64>,
    etas: Vec<Eta>,
    eta_nnz: usize,
    work: Vec<f64>,
}

/// Basis columns in compressed form, filled one column at a time.
#[derive(Debug, Clone, Default)]
pub(crate) struct Columns {
    start: Vec<usize>,
    index: Vec<usize>,
    value: Vec<f64>,
}

impl Columns {
    pub fn clear(&mut self) {
        self.start.clear();
        self.index.clear();
        self.value.clear();
    }

    pub fn push(&mut self, entries: impl IntoIterator<Item = (usize, f64)>) {
        if self.start.is_empty() {
            self.start.push(0);
        }
        for (i, v) in entries {
            if v != 0.0 {
                self.index.push(i);
                self.value.push(v);
            }
        }
        self.start.push(self.index.len());
    }

    fn len(&self) -> usize {
        self.start.len().saturating_sub(1)
    }

    fn range(&self, j: usize) -> std::ops::Range<usize> {
        self.start[j]..self.start[j + 1]
    }
}

impl LuFactors {
    /// Factorizes the `m × m` matrix whose column `k` is `b`'s column `k`.
    ///
    /// Row and column singletons are eliminated first on the original
    /// entries; what remains goes through Markowitz elimination.
    pub fn factorize(m: usize, b: &Columns) -> Result<Self, Singular> {
        debug_assert_eq!(b.len(), m);
        let nnz = b.index.len();
        let mut f = LuFactors {
            m,
            l_piv: Vec::new(),
            l_start: vec![0],
            l_idx: Vec::new(),
            l_val: Vec::new(),
            u_row: Vec::with_capacity(m),
            u_pos: Vec::with_capacity(m),
            u_diag: Vec::with_capacity(m),
            u_start: Vec::with_capacity(m + 1),
            u_idx: Vec::with_capacity(nnz),
            u_val: Vec::with_capacity(nnz),
            etas: Vec::new(),
            eta_nnz: 0,
            work: vec![0.0; m],
        };
        f.u_start.push(0);

        // Row-wise index of the entries.
        let mut row_count = vec![0usize; m];
        for &i in &b.index {
            row_count[i] += 1;
        }
        let mut row_start = vec![0usize; m + 1];
        for i in 0..m {
            row_start[i + 1] = row_start[i] + row_count[i];
        }
        let mut row_entry = vec![0usize; nnz];
        let mut entry_col = vec![0usize; nnz];
        let mut fill = row_start[..m].to_vec();
        for j in 0..m {
            for e in b.range(j) {
                let i = b.index[e];
                row_entry[fill[i]] = e;
                fill[i] += 1;
                entry_col[e] = j;
            }
        }
        let mut col_count: Vec<usize> = (0..m).map(|j| b.range(j).len()).collect();
        let mut col_active = vec![true; m];
        let mut row_active = vec![true; m];
        let mut col_queue: Vec<usize> = (0..m).filter(|&j| col_count[j] == 1).collect();
        let mut row_queue: Vec<usize> = (0..m).filter(|&i| row_count[i] == 1).collect();

        loop {
            if let Some(j) = col_queue.pop() {
                if !col_active[j] || col_count[j] != 1 {
                    continue;
                }
                let e = b.range(j).find(|&e| row_active[b.index[e]]).expect("one active entry");
                let (i, v) = (b.index[e], b.value[e]);
                if v.abs() < SINGULAR_TOL {
                    continue;
                }
                f.u_row.push(i);
                f.u_pos.push(j);
                f.u_diag.push(v);
                for &e2 in &row_entry[row_start[i]..row_start[i + 1]] {
                    let j2 = entry_col[e2];
                    if j2 != j && col_active[j2] {
                        f.u_idx.push(j2);
                        f.u_val.push(b.value[e2]);
                        col_count[j2] -= 1;
                        if col_count[j2] == 1 {
                            col_queue.push(j2);
                        }
                    }
                }
                f.u_start.push(f.u_idx.len());
                row_active[i] = false;
                col_active[j] = false;
                continue;
            }
            if let Some(i) = row_queue.pop() {
                if !row_active[i] || row_count[i] != 1 {
                    continue;
                }
                let e = row_entry[row_start[i]..row_start[i + 1]]
                    .iter()
                    .copied()
                    .find(|&e| col_active[entry_col[e]])
                    .expect("one active entry");
                let (j, v) = (entry_col[e], b.value[e]);
                let cmax = b
                    .range(j)
                    .filter(|&e2| row_active[b.index[e2]])
                    .map(|e2| b.value[e2].abs())
                    .fold(0.0, f64::max);
                if v.abs() < SINGULAR_TOL || v.abs() < PIVOT_THRESHOLD * cmax {
                    continue;
                }
                let l_before = f.l_idx.len();
                for e2 in b.range(j) {
                    let i2 = b.index[e2];
                    if i2 != i && row_active[i2] {
                        f.l_idx.push(i2);
                        f.l_val.push(b.value[e2] / v);
                        row_count[i2] -= 1;
                        if row_count[i2] == 1 {
                            row_queue.push(i2);
                        }
                    }
                }
                if f.l_idx.len() > l_before {
                    f.l_piv.push(i);
                    f.l_start.push(f.l_idx.len());
                }
                f.u_row.push(i);
                f.u_pos.push(j);
                f.u_diag.push(v);
                f.u_start.push(f.u_idx.len());
                row_active[i] = false;
                col_active[j] = false;
                continue;
            }
            break;
        }

        let remaining = col_active.iter().filter(|&&a| a).count();
        if remaining > 0 {
            let cols: Vec<Vec<(usize, f64)>> = (0..m)
                .map(|j| {
                    if !col_active[j] {
                        return Vec::new();
                    }
                    b.range(j)
                        .filter(|&e| row_active[b.index[e]])
                        .map(|e| (b.index[e], b.value[e]))
                        .collect()
                })
                .collect();
            let mut active = ActiveMatrix::new(m, cols, col_active, row_active);
            for _ in 0..remaining {
                let Some((p, q)) = active.select_pivot() else {
                    let positions = (0..m).filter(|&j| active.col_active[j]).collect();
                    let rows = (0..m).filter(|&i| active.row_active[i]).collect();
                    return Err(Singular { positions, rows });
                };
                active.eliminate(p, q, &mut f);
            }
        }
        Ok(f)
    }

    /// True once the eta file costs more to apply than a fresh factor.
    pub fn eta_file_heavy(&self) -> bool {
        self.eta_nnz > 4 * (self.l_idx.len() + self.u_idx.len() + self.m)
    }

    pub fn num_etas(&self) -> usize {
        self.etas.len()
    }

    /// Solves `B x = b`. `b` is indexed by row, the result by basis position.
    pub fn ftran(&mut self, b: &mut [f64]) {
        for k in 0..self.l_piv.len() {
            let piv = b[self.l_piv[k]];
            if piv != 0.0 {
                for e in self.l_start[k]..self.l_start[k + 1] {
                    b[self.l_idx[e]] -= self.l_val[e] * piv;
                }
            }
        }
        let x = &mut self.work;
        for k in (0..self.u_row.len()).rev() {
            let mut v = b[self.u_row[k]];
            for e in self.u_start[k]..self.u_start[k + 1] {
                v -= self.u_val[e] * x[self.u_idx[e]];
            }
            x[self.u_pos[k]] = v / self.u_diag[k];
        }
        for eta in &self.etas {
            let xr = x[eta.pos] / eta.pivot;
            x[eta.pos] = xr;
            if xr != 0.0 {
                for (&i, &a) in eta.idx.iter().zip(&eta.val) {
                    x[i] -= a * xr;
                }
            }
        }
        b.copy_from_slice(x);
    }

    /// Solves `Bᵀ y = c`. `c` is indexed by basis position, the result by row.
    pub fn btran(&mut self, c: &mut [f64]) {
        for eta in self.etas.iter().rev() {
            let mut v = c[eta.pos];
            for (&i, &a) in eta.idx.iter().zip(&eta.val) {
                v -= a * c[i];
            }
            c[eta.pos] = v / eta.pivot;
        }
        let y = &mut self.work;
        for k in 0..self.u_row.len() {
            let w = c[self.u_pos[k]] / self.u_diag[k];
            y[self.u_row[k]] = w;
            if w != 0.0 {
                for e in self.u_start[k]..self.u_start[k + 1] {
                    c[self.u_idx[e]] -= self.u_val[e] * w;
                }
            }
        }
        for k in (0..self.l_piv.len()).rev() {
            let mut v = y[self.l_piv[k]];
            for e in self.l_start[k]..self.l_start[k + 1] {
                v -= self.l_val[e] * y[self.l_idx[e]];
            }
            y[self.l_piv[k]] = v;
        }
        c.copy_from_slice(y);
    }

    /// Records that basis position `pos` now holds a column whose
    /// representation in the old basis is `alpha` (dense, by position).
    pub fn push_eta(&mut self, pos: usize, alpha: &[f64]) {
        let mut idx = Vec::new();
        let mut val = Vec::new();
        for (i, &a) in alpha.iter().enumerate() {
            if i != pos && a.abs() > DROP_TOL {
                idx.push(i);
                val.push(a);
            }
        }
        self.eta_nnz += idx.len();
        self.etas.push(Eta {
            pos,
            pivot: alpha[pos],
            idx,
            val,
        });
    }
}

/// Working copy of the not-yet-eliminated submatrix.
struct ActiveMatrix {
    cols: Vec<Vec<(usize, f64)>>,
    rows: Vec<Vec<usize>>,
    col_active: Vec<bool>,
    row_active: Vec<bool>,
    col_count: Vec<usize>,
    row_count: Vec<usize>,
    // Lazy buckets: col j may appear in several buckets; valid only where
    // its current count matches.
    buckets: Vec<Vec<usize>>,
    min_bucket: usize,
    // Schur update scratch: multiplier by row, and the last column stamp
    // that saw each row.
    mult: Vec<f64>,
    seen: Vec<usize>,
}

impl ActiveMatrix {
    /// `cols` holds the active part of each active column; inactive
    /// columns are empty.
    fn new(m: usize, cols: Vec<Vec<(usize, f64)>>, col_active: Vec<bool>, row_active: Vec<bool>) -> Self {
        let mut rows = vec![Vec::new(); m];
        for (j, c) in cols.iter().enumerate() {
            for &(i, _) in c {
                rows[i].push(j);
            }
        }
        let col_count: Vec<usize> = cols.iter().map(Vec::len).collect();
        let row_count: Vec<usize> = rows.iter().map(Vec::len).collect();
        let mut buckets = vec![Vec::new(); m + 2];
        for (j, &n) in col_count.iter().enumerate() {
            if col_active[j] {
                buckets[n.min(m + 1)].push(j);
            }
        }
        ActiveMatrix {
            cols,
            rows,
            col_active,
            row_active,
            col_count,
            row_count,
            buckets,
            min_bucket: 0,
            mult: vec![0.0; m],
            seen: vec![usize::MAX; m],
        }
    }

    fn touch(&mut self, j: usize) {
        let n = self.col_count[j].min(self.buckets.len() - 1);
        self.buckets[n].push(j);
        if n < self.min_bucket {
            self.min_bucket = n;
        }
    }

    fn col_max(&self, j: usize) -> f64 {
        self.cols[j]
            .iter()
            .map(|&(_, v)| v.abs())
            .fold(0.0, f64::max)
    }

    /// Returns `(row, col)` of the next pivot, or `None` if the remaining
    /// submatrix is numerically singular.
    fn select_pivot(&mut self) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize, usize, f64)> = None; // (merit, row, col, |v|)
        let mut inspected = 0;
        let mut n = self.min_bucket;
        while n < self.buckets.len() {
            let mut k = 0;
            while k < self.buckets[n].len() {
                let j = self.buckets[n][k];
                if !self.col_active[j] || self.col_count[j] != n {
                    self.buckets[n].swap_remove(k);
                    continue;
                }
                k += 1;
                if n == 0 {
                    // structurally empty column
                    return None;
                }
                let cmax = self.col_max(j);
                if cmax < SINGULAR_TOL {
                    continue;
                }
                for &(i, v) in &self.cols[j] {
                    let a = v.abs();
                    if a < SINGULAR_TOL || a < PIVOT_THRESHOLD * cmax {
                        continue;
                    }
                    let merit = (self.row_count[i] - 1) * (n - 1);
                    let better = match best {
                        None => true,
                        Some((bm, _, _, ba)) => merit < bm || (merit == bm && a > ba),
                    };
                    if better {
                        best = Some((merit, i, j, a));
                    }
                }
                inspected += 1;
                if let Some((merit, i, j, _)) = best {
                    if merit == 0 || inspected >= MARKOWITZ_CANDIDATES {
                        return Some((i, j));
                    }
                }
            }
            if self.buckets[n].is_empty() && n == self.min_bucket {
                self.min_bucket = n + 1;
            }
            n += 1;
        }
        best.map(|(_, i, j, _)| (i, j))
    }

    fn eliminate(&mut self, p: usize, q: usize, f: &mut LuFactors) {
        let pivot = self
            .cols[q]
            .iter()
            .find(|&&(i, _)| i == p)
            .map(|&(_, v)| v)
            .expect("pivot entry present");

        // U row p: entries of row p in the other active columns.
        let mut urow: Vec<(usize, f64)> = Vec::new();
        let row_p = std::mem::take(&mut self.rows[p]);
        for &j in &row_p {
            if j == q || !self.col_active[j] {
                continue;
            }
            if let Some(k) = self.cols[j].iter().position(|&(i, _)| i == p) {
                let (_, v) = self.cols[j].swap_remove(k);
                self.col_count[j] -= 1;
                urow.push((j, v));
            }
        }
        for &(j, _) in &urow {
            self.touch(j);
        }

        // L multipliers from column q.
        let col_q = std::mem::take(&mut self.cols[q]);
        let mut lcol: Vec<(usize, f64)> = Vec::with_capacity(col_q.len());
        for &(i, v) in &col_q {
            if i == p {
                continue;
            }
            lcol.push((i, v / pivot));
            self.row_count[i] -= 1;
        }
        self.col_active[q] = false;
        self.row_active[p] = false;

        // Schur complement update.
        if !lcol.is_empty() {
            for &(i, l) in &lcol {
                self.mult[i] = l;
            }
            for &(j, u) in &urow {
                for e in self.cols[j].iter_mut() {
                    let i = e.0;
                    if self.mult[i] != 0.0 {
                        e.1 -= self.mult[i] * u;
                        self.seen[i] = j;
                    }
                }
                for &(i, l) in &lcol {
                    if self.seen[i] != j && l != 0.0 {
                        self.cols[j].push((i, -l * u));
                        self.col_count[j] += 1;
                        self.row_count[i] += 1;
                        self.rows[i].push(j);
                    }
                }
            }
            for &(i, _) in &lcol {
                self.mult[i] = 0.0;
                self.seen[i] = usize::MAX;
            }
        }
        if !lcol.is_empty() {
            for &(j, _) in &urow {
                self.touch(j);
            }
        }

        let l_before = f.l_idx.len();
        for &(i, l) in &lcol {
            if l.abs() > DROP_TOL {
                f.l_idx.push(i);
                f.l_val.push(l);
            }
        }
        if f.l_idx.len() > l_before {
            f.l_piv.push(p);
            f.l_start.push(f.l_idx.len());
        }

        f.u_row.push(p);
        f.u_pos.push(q);
        f.u_diag.push(pivot);
        for &(j, u) in &urow {
            if u.abs() > DROP_TOL {
                f.u_idx.push(j);
                f.u_val.push(u);
            }
        }
        f.u_start.push(f.u_idx.len());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_to_cols(a: &[Vec<f64>]) -> Columns {
        let m = a.len();
        let mut c = Columns::default();
        for j in 0..m {
            c.push((0..m).map(|i| (i, a[i][j])));
        }
        c
    }

    fn matvec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
        a.iter()
            .map(|row| row.iter().zip(x).map(|(a, x)| a * x).sum())
            .collect()
    }

    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((*seed >> 11) as f64) / ((1u64 << 53) as f64)
    }

    fn random_matrix(m: usize, density: f64, seed: &mut u64) -> Vec<Vec<f64>> {
        let mut a = vec![vec![0.0; m]; m];
        for (i, row) in a.iter_mut().enumerate() {
            row[i] = 1.0 + lcg(seed);
            for v in row.iter_mut() {
                if lcg(seed) < density {
                    *v = lcg(seed) * 4.0 - 2.0;
                }
            }
        }
        a
    }

    #[test]
    fn solves_random_sparse_systems() {
        let mut seed = 7;
        for m in [1, 2, 5, 17, 40] {
            let a = random_matrix(m, 0.15, &mut seed);
            let mut lu = LuFactors::factorize(m, &dense_to_cols(&a)).unwrap();
            let x: Vec<f64> = (0..m).map(|k| k as f64 - 3.0).collect();
            let mut b = matvec(&a, &x);
            lu.ftran(&mut b);
            for k in 0..m {
                assert!((b[k] - x[k]).abs() < 1e-9, "ftran m={m}");
            }
            // Bᵀ y = c
            let at: Vec<Vec<f64>> = (0..m).map(|i| (0..m).map(|j| a[j][i]).collect()).collect();
            let y: Vec<f64> = (0..m).map(|k| 0.5 * k as f64 + 1.0).collect();
            let mut c = matvec(&at, &y);
            lu.btran(&mut c);
            for k in 0..m {
                assert!((c[k] - y[k]).abs() < 1e-9, "btran m={m}");
            }
        }
    }

    #[test]
    fn eta_updates_track_column_replacement() {
        let mut seed = 11;
        let m = 12;
        let mut a = random_matrix(m, 0.2, &mut seed);
        let mut lu = LuFactors::factorize(m, &dense_to_cols(&a)).unwrap();
        for step in 0..5 {
            let pos = (step * 5) % m;
            let newcol: Vec<f64> = (0..m).map(|i| if i == pos { 3.0 } else { lcg(&mut seed) - 0.5 }).collect();
            let mut alpha = newcol.clone();
            lu.ftran(&mut alpha);
            lu.push_eta(pos, &alpha);
            for i in 0..m {
                a[i][pos] = newcol[i];
            }
            let x: Vec<f64> = (0..m).map(|k| (k % 3) as f64 + 0.25).collect();
            let mut b = matvec(&a, &x);
            lu.ftran(&mut b);
            for k in 0..m {
                assert!((b[k] - x[k]).abs() < 1e-8);
            }
            let at: Vec<Vec<f64>> = (0..m).map(|i| (0..m).map(|j| a[j][i]).collect()).collect();
            let mut c = matvec(&at, &x);
            lu.btran(&mut c);
            for k in 0..m {
                assert!((c[k] - x[k]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn reports_singular_positions() {
        let a = vec![
            vec![1.0, 2.0, 0.0],
            vec![2.0, 4.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        let err = LuFactors::factorize(3, &dense_to_cols(&a)).unwrap_err();
        assert_eq!(err.positions.len(), 1);
        assert_eq!(err.rows.len(), 1);
    }

    #[test]
    fn permuted_identity_factors_without_fill() {
        let m = 6;
        let mut cols = Columns::default();
        for j in 0..m {
            cols.push([((j + 2) % m, -1.0)]);
        }
        let mut lu = LuFactors::factorize(m, &cols).unwrap();
        assert!(lu.l_idx.is_empty() && lu.u_idx.is_empty());
        let mut b: Vec<f64> = (0..m).map(|i| i as f64).collect();
        lu.ftran(&mut b);
        for j in 0..m {
            assert_eq!(b[j], -(((j + 2) % m) as f64));
        }
    }
}
