use thiserror::Error;

use super::varmap::{Role, VariableMap};
use crate::model::{CapacityBlock, EnergySystem, EnsPolicy, Node, StorageTech};

#[derive(Debug, Error, PartialEq)]
pub enum AnnuityError {
    #[error("wacc must lie in (0, 1), got {0}")]
    Wacc(f64),
    #[error("lifetime must be at least one year, got {0}")]
    Lifetime(f64),
    #[error("capex must be finite, got {0}")]
    Capex(f64),
}

/// Equivalent annual cost of an investment: `capex · w / (1 − (1 + w)^−L)`.
pub fn annualize_capex(capex: f64, lifetime: f64, wacc: f64) -> Result<f64, AnnuityError> {
    if !(wacc > 0.0 && wacc < 1.0) {
        return Err(AnnuityError::Wacc(wacc));
    }
    if !(lifetime >= 1.0 && lifetime.is_finite()) {
        return Err(AnnuityError::Lifetime(lifetime));
    }
    if !capex.is_finite() {
        return Err(AnnuityError::Capex(capex));
    }
    Ok(capex * wacc / -(-lifetime * wacc.ln_1p()).exp_m1())
}

/// Objective coefficients owned by one node, as `(column, coefficient)`.
/// The node's cost at a solution is the dot product with `x`.
pub fn node_cost_terms(system: &EnergySystem, varmap: &VariableMap, node: &Node) -> Result<Vec<(usize, f64)>, AnnuityError> {
    let nu = system.time.years;
    let dt = system.time.step_hours;
    let steps = system.time.steps;
    let w = system.wacc;
    let mut terms = Vec::new();
    let id = node.id();
    let col = |role: Role| varmap.scalar(id, &role).expect("capacity column registered");

    match node {
        Node::Conversion(c) => {
            let zeta = annualize_capex(c.capex, c.lifetime, w)?;
            terms.push((col(Role::Capacity), nu * (zeta + c.fom)));
            for t in 0..steps {
                let q = varmap.flow(id, &c.reference, t).expect("reference flow registered");
                terms.push((q, c.vom.at(t) * dt));
            }
        }
        Node::Storage(s) => {
            let fixed = |b: &CapacityBlock| annualize_capex(b.capex, b.lifetime, w).map(|z| nu * (z + b.fom));
            terms.push((col(Role::StockCapacity), fixed(&s.stock)?));
            terms.push((col(Role::FlowCapacity), fixed(&s.flow)?));
            for t in 0..steps {
                let e = varmap.at(id, &Role::Stock, t).expect("stock registered");
                terms.push((e, s.stock.vom.at(t)));
                let q = varmap.flow(id, StorageTech::CHARGE, t).expect("charge flow registered");
                terms.push((q, s.flow.vom.at(t) * dt));
            }
        }
    }
    terms.retain(|&(_, v)| v != 0.0);
    Ok(terms)
}

/// Objective vector without emission fees: node costs plus ENS penalties.
pub fn assemble_objective(system: &EnergySystem, varmap: &VariableMap) -> Result<Vec<f64>, AnnuityError> {
    let mut c = vec![0.0; varmap.len()];
    for node in &system.nodes {
        for (col, v) in node_cost_terms(system, varmap, node)? {
            c[col] += v;
        }
    }
    let dt = system.time.step_hours;
    for he in &system.hyperedges {
        if let EnsPolicy::Penalized { price } = he.ens {
            for t in 0..system.time.steps {
                c[varmap.ens(&he.id, t).expect("ens registered")] += price * dt;
            }
        }
    }
    Ok(c)
}
