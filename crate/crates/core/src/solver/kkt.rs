use serde::Serialize;

use super::Solution;
use crate::lp::{LpProblem, RowSense};

/// Max-norm optimality residuals of a primal/dual pair.
///
/// Reduced costs are recomputed from the duals rather than taken from the
/// solution, so the report checks the solver instead of echoing it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KktReport {
    /// Largest row or bound violation of `x`.
    pub primal_res: f64,
    /// Largest sign violation of the row duals or of `c − Aᵀy`.
    pub dual_res: f64,
    /// `|cᵀx − dual objective| / (1 + |cᵀx|)`.
    pub gap: f64,
    /// Largest complementary-slackness product.
    pub comp_slack: f64,
}

impl KktReport {
    pub fn max(&self) -> f64 {
        self.primal_res
            .max(self.dual_res)
            .max(self.gap)
            .max(self.comp_slack)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max() <= tol
    }
}

pub fn verify_kkt(lp: &LpProblem, solution: &Solution) -> KktReport {
    let x = &solution.x;
    let y = &solution.duals;
    let act = lp.row_activity(x);

    let mut primal_res: f64 = 0.0;
    let mut dual_res: f64 = 0.0;
    let mut comp_slack: f64 = 0.0;
    let mut dual_obj = 0.0;

    for r in 0..lp.num_rows() {
        let slack = lp.rhs()[r] - act[r];
        let (viol, sign_viol) = match lp.senses()[r] {
            RowSense::Eq => (slack.abs(), 0.0),
            RowSense::Le => ((-slack).max(0.0), y[r].max(0.0)),
            RowSense::Ge => (slack.max(0.0), (-y[r]).max(0.0)),
        };
        primal_res = primal_res.max(viol);
        dual_res = dual_res.max(sign_viol);
        if lp.senses()[r] != RowSense::Eq {
            comp_slack = comp_slack.max((y[r] * slack).abs());
        }
        dual_obj += y[r] * lp.rhs()[r];
    }

    for j in 0..lp.num_cols() {
        let (rows, vals) = lp.column(j);
        let d = lp.objective()[j] - rows.iter().zip(vals).map(|(&r, &v)| v * y[r]).sum::<f64>();
        let (l, u) = (lp.lower()[j], lp.upper()[j]);
        primal_res = primal_res.max(l - x[j]).max(x[j] - u);

        let z_lower = d.max(0.0);
        let z_upper = (-d).max(0.0);
        if l.is_finite() {
            comp_slack = comp_slack.max((z_lower * (x[j] - l)).abs());
            dual_obj += z_lower * l;
        } else {
            dual_res = dual_res.max(z_lower);
        }
        if u.is_finite() {
            comp_slack = comp_slack.max((z_upper * (u - x[j])).abs());
            dual_obj -= z_upper * u;
        } else {
            dual_res = dual_res.max(z_upper);
        }
    }

    let primal_obj = lp.objective_value(x);
    KktReport {
        primal_res,
        dual_res,
        gap: (primal_obj - dual_obj).abs() / (1.0 + primal_obj.abs()),
        comp_slack,
    }
}
