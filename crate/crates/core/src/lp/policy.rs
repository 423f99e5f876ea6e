use super::compile::CompileError;
use super::problem::{LpProblem, RowSense};
use super::varmap::VariableMap;
use crate::model::{AtmosphereRole, EmissionPolicy, EnergySystem};

/// Per-column weight of each tagged flow in the net atmospheric release,
/// `+δt` for releases and `−δt` for captures.
pub fn net_release_terms(system: &EnergySystem, varmap: &VariableMap) -> Vec<(usize, f64)> {
    let dt = system.time.step_hours;
    let mut terms = Vec::new();
    for (port, role) in system.atmosphere_ports() {
        let sign = match role {
            AtmosphereRole::Releases => 1.0,
            AtmosphereRole::Captures => -1.0,
            AtmosphereRole::None => continue,
        };
        for t in 0..system.time.steps {
            let col = varmap.flow(&port.node, &port.port, t).expect("tagged port compiled");
            terms.push((col, sign * dt));
        }
    }
    terms
}

/// Adds the emission policy to a compiled LP.
///
/// A cap adds the row `co2_cap`: net release over the horizon `≤ κ·ν`, and
/// records it in `varmap`. A price adds `±π·δt` to the objective of every
/// tagged flow. Flows are per hour, so both weight them by the step length.
pub fn emit_co2_policy(system: &EnergySystem, lp: &LpProblem, varmap: &mut VariableMap) -> Result<LpProblem, CompileError> {
    match system.emission {
        EmissionPolicy::None => Ok(lp.clone()),
        EmissionPolicy::Cap { kt_per_year } => {
            let terms = net_release_terms(system, varmap);
            if terms.is_empty() {
                return Err(CompileError::NoAtmospherePorts);
            }
            let mut b = lp.to_builder();
            let row = b.add_row("co2_cap", RowSense::Le, kt_per_year * system.time.years, &terms);
            varmap.set_co2_cap_row(row);
            Ok(b.build()?)
        }
        EmissionPolicy::Price { meur_per_kt } => {
            let mut c = lp.objective().to_vec();
            for (col, w) in net_release_terms(system, varmap) {
                c[col] += meur_per_kt * w;
            }
            Ok(lp.with_objective(c)?)
        }
    }
}
