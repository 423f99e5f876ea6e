//! Brute-force LP oracle: enumerate every basic solution of the bounded
//! standard form and keep the best feasible one.
//!
//! Rows become equalities with one logical per row (`≤`: s ≥ 0, `≥`: s ≤ 0,
//! `=`: s = 0). A basic solution picks `m` basic columns, puts every other
//! column at one of its finite bounds, and solves for the basics by dense
//! Gaussian elimination. Only meant for a handful of columns.

use hubopt::lp::{LpBuilder, LpProblem, RowSense};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub enum OracleResult {
    Optimal(f64),
    Infeasible,
}

struct Column {
    entries: Vec<f64>,
    cost: f64,
    lower: f64,
    upper: f64,
}

fn columns(lp: &LpProblem) -> Vec<Column> {
    let m = lp.num_rows();
    let mut cols = Vec::new();
    for j in 0..lp.num_cols() {
        let mut entries = vec![0.0; m];
        for r in 0..m {
            entries[r] = lp.coefficient(r, j);
        }
        cols.push(Column {
            entries,
            cost: lp.objective()[j],
            lower: lp.lower()[j],
            upper: lp.upper()[j],
        });
    }
    for r in 0..m {
        let mut entries = vec![0.0; m];
        entries[r] = 1.0;
        let (lower, upper) = match lp.senses()[r] {
            RowSense::Le => (0.0, f64::INFINITY),
            RowSense::Ge => (f64::NEG_INFINITY, 0.0),
            RowSense::Eq => (0.0, 0.0),
        };
        cols.push(Column {
            entries,
            cost: 0.0,
            lower,
            upper,
        });
    }
    cols
}

/// Solves the dense square system in place; `None` when singular.
fn gauss(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let m = b.len();
    for k in 0..m {
        let p = (k..m).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
        if a[p][k].abs() < 1e-10 {
            return None;
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..m {
            let f = a[i][k] / a[k][k];
            if f != 0.0 {
                for c in k..m {
                    a[i][c] -= f * a[k][c];
                }
                b[i] -= f * b[k];
            }
        }
    }
    let mut x = vec![0.0; m];
    for k in (0..m).rev() {
        let s: f64 = (k + 1..m).map(|c| a[k][c] * x[c]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    Some(x)
}

fn combinations(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::new(), f);
}

/// Minimum objective over all basic feasible solutions. Assumes the
/// feasible set is bounded and that no column is free.
pub fn enumerate_optimum(lp: &LpProblem) -> OracleResult {
    let m = lp.num_rows();
    let cols = columns(lp);
    let total = cols.len();
    let rhs = lp.rhs().to_vec();
    let tol = 1e-9;
    let mut best: Option<f64> = None;

    combinations(total, m, &mut |basic| {
        let nonbasic: Vec<usize> = (0..total).filter(|j| !basic.contains(j)).collect();
        // Each nonbasic takes a finite bound; two choices only when both are
        // finite and distinct.
        let choices: Vec<Vec<f64>> = nonbasic
            .iter()
            .map(|&j| {
                let c = &cols[j];
                let mut v = Vec::new();
                if c.lower.is_finite() {
                    v.push(c.lower);
                }
                if c.upper.is_finite() && c.upper != c.lower {
                    v.push(c.upper);
                }
                v
            })
            .collect();
        if choices.iter().any(|c| c.is_empty()) {
            return;
        }
        let mat: Vec<Vec<f64>> = (0..m)
            .map(|r| basic.iter().map(|&j| cols[j].entries[r]).collect())
            .collect();
        let combos: usize = choices.iter().map(Vec::len).product();
        for mut code in 0..combos {
            let mut b = rhs.clone();
            let mut obj = 0.0;
            for (k, &j) in nonbasic.iter().enumerate() {
                let v = choices[k][code % choices[k].len()];
                code /= choices[k].len();
                if v != 0.0 {
                    for r in 0..m {
                        b[r] -= cols[j].entries[r] * v;
                    }
                }
                obj += cols[j].cost * v;
            }
            let Some(xb) = gauss(mat.clone(), b) else {
                return;
            };
            let feasible = basic
                .iter()
                .zip(&xb)
                .all(|(&j, &v)| v >= cols[j].lower - tol && v <= cols[j].upper + tol);
            if feasible {
                obj += basic.iter().zip(&xb).map(|(&j, &v)| cols[j].cost * v).sum::<f64>();
                best = Some(best.map_or(obj, |b: f64| b.min(obj)));
            }
        }
    });

    match best {
        Some(v) => OracleResult::Optimal(v),
        None => OracleResult::Infeasible,
    }
}

/// Random bounded LP with `n ≤ 8` columns and `m ≤ 5` rows. A budget row
/// `Σx ≤ S` keeps the feasible set bounded; a few columns get finite upper
/// bounds or negative lower bounds.
pub fn random_lp(seed: u64) -> LpProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=8);
    let m = rng.gen_range(1..=4);
    let mut b = LpBuilder::new(format!("random{seed}"));
    let cols: Vec<usize> = (0..n)
        .map(|j| {
            let c = (rng.gen_range(-10.0_f64..10.0) * 4.0).round() / 4.0;
            let (l, u) = match rng.gen_range(0..6) {
                0 => (0.0, rng.gen_range(1..6) as f64),
                1 => (-(rng.gen_range(1..4) as f64), f64::INFINITY),
                _ => (0.0, f64::INFINITY),
            };
            b.add_col(format!("x{j}"), c, l, u)
        })
        .collect();
    for r in 0..m {
        let mut coeffs: Vec<(usize, f64)> = Vec::new();
        for &j in &cols {
            if rng.gen_bool(0.7) {
                let v = (rng.gen_range(-5.0_f64..5.0) * 2.0).round() / 2.0;
                if v != 0.0 {
                    coeffs.push((j, v));
                }
            }
        }
        if coeffs.is_empty() {
            coeffs.push((cols[rng.gen_range(0..n)], 1.0));
        }
        let sense = match rng.gen_range(0..10) {
            0..=5 => RowSense::Le,
            6..=8 => RowSense::Ge,
            _ => RowSense::Eq,
        };
        let rhs = (rng.gen_range(-4.0_f64..12.0) * 2.0).round() / 2.0;
        b.add_row(format!("r{r}"), sense, rhs, &coeffs);
    }
    let budget = rng.gen_range(5..20) as f64;
    let all: Vec<(usize, f64)> = cols.iter().map(|&j| (j, 1.0)).collect();
    b.add_row("budget", RowSense::Le, budget, &all);
    b.build().expect("random lp is well formed")
}
