//! Economic indicators derived from a solved system.
//!
//! Duals follow the solver convention (`∂objective/∂rhs`); the functions here
//! convert them to positive prices in €/t or €/MWh. Costs are in M€ over the
//! horizon, so a dual in M€/kt is multiplied by 1000 to get €/t.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::lp::{net_release_terms, node_cost_terms, AnnuityError, LpProblem, Role, VariableMap};
use crate::model::{Category, EmissionPolicy, EnergySystem, EnsPolicy, Node, Unit};
use crate::solver::{verify_kkt, KktReport, Solution, Status};

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("solution is {0:?}, not optimal")]
    NotOptimal(Status),
    #[error("node `{0}` has no cost category")]
    UnmappedCategory(String),
    #[error("emission policy is not a cap")]
    NotCapMode,
    #[error("hyperedge `{0}` does not forbid unserved energy")]
    NotForbidden(String),
    #[error("unknown hyperedge `{0}`")]
    UnknownHyperedge(String),
    #[error("system has no methane accounting tags")]
    NoMethaneTags,
    #[error("no methane delivered")]
    ZeroMethane,
    #[error(transparent)]
    Annuity(#[from] AnnuityError),
}

fn require_optimal(solution: &Solution) -> Result<(), AnalysisError> {
    if solution.is_optimal() {
        Ok(())
    } else {
        Err(AnalysisError::NotOptimal(solution.status))
    }
}

fn dot(terms: &[(usize, f64)], x: &[f64]) -> f64 {
    terms.iter().map(|&(j, c)| c * x[j]).sum()
}

/// Cost of one node at the solution, M€ over the horizon.
pub fn node_cost(system: &EnergySystem, varmap: &VariableMap, node: &Node, x: &[f64]) -> Result<f64, AnalysisError> {
    Ok(dot(&node_cost_terms(system, varmap, node)?, x))
}

/// Total energy-not-served penalty, M€.
pub fn ens_penalty(system: &EnergySystem, varmap: &VariableMap, x: &[f64]) -> f64 {
    let dt = system.time.step_hours;
    let mut total = 0.0;
    for he in &system.hyperedges {
        if let EnsPolicy::Penalized { price } = he.ens {
            for t in 0..system.time.steps {
                total += price * dt * x[varmap.ens(&he.id, t).expect("ens registered")];
            }
        }
    }
    total
}

/// Total emission fees under a price policy, M€ (negative when capture
/// outweighs release).
pub fn co2_fees(system: &EnergySystem, varmap: &VariableMap, x: &[f64]) -> f64 {
    match system.emission {
        EmissionPolicy::Price { meur_per_kt } => meur_per_kt * dot(&net_release_terms(system, varmap), x),
        _ => 0.0,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CostBreakdown {
    /// Every cluster of the system, including those with nothing built.
    pub by_cluster: BTreeMap<String, f64>,
    /// Every category, keyed by its label.
    pub by_category: BTreeMap<String, f64>,
    pub by_node: BTreeMap<String, f64>,
    pub ens_penalty: f64,
    pub co2_fees: f64,
    /// Node costs plus penalties and fees; equals the LP objective.
    pub total: f64,
}

impl CostBreakdown {
    pub fn node_total(&self) -> f64 {
        self.by_node.values().sum()
    }
}

/// Attributes each node's cost to its cluster and category.
pub fn cost_breakdown(system: &EnergySystem, varmap: &VariableMap, solution: &Solution) -> Result<CostBreakdown, AnalysisError> {
    require_optimal(solution)?;
    let x = &solution.x;
    let mut by_cluster: BTreeMap<String, f64> = system.clusters().into_iter().map(|c| (c, 0.0)).collect();
    let mut by_category: BTreeMap<String, f64> = Category::ALL.iter().map(|c| (c.label().to_string(), 0.0)).collect();
    let mut by_node = BTreeMap::new();
    for node in &system.nodes {
        let category = node
            .category()
            .ok_or_else(|| AnalysisError::UnmappedCategory(node.id().to_string()))?;
        let cost = node_cost(system, varmap, node, x)?;
        *by_cluster.entry(node.cluster().to_string()).or_default() += cost;
        *by_category.entry(category.label().to_string()).or_default() += cost;
        by_node.insert(node.id().to_string(), cost);
    }
    let ens_penalty = ens_penalty(system, varmap, x);
    let co2_fees = co2_fees(system, varmap, x);
    let total = by_node.values().sum::<f64>() + ens_penalty + co2_fees;
    Ok(CostBreakdown {
        by_cluster,
        by_category,
        by_node,
        ens_penalty,
        co2_fees,
        total,
    })
}

/// Marginal cost of the emission cap in €/t: the magnitude of the cap row's
/// dual times 1000. Zero when the cap is slack.
pub fn co2_shadow_price(system: &EnergySystem, varmap: &VariableMap, solution: &Solution) -> Result<f64, AnalysisError> {
    if !matches!(system.emission, EmissionPolicy::Cap { .. }) {
        return Err(AnalysisError::NotCapMode);
    }
    require_optimal(solution)?;
    let row = varmap.co2_cap_row().ok_or(AnalysisError::NotCapMode)?;
    Ok(solution.duals[row].abs() * 1000.0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsPrices {
    pub hyperedge: String,
    /// Marginal cost of one more unit of demand per step, € per MWh (or per t
    /// for mass commodities).
    pub series: Vec<f64>,
    pub argmax: usize,
    pub max: f64,
}

/// Shadow prices of a hyperedge's balance rows.
pub fn ens_shadow_prices(
    system: &EnergySystem,
    varmap: &VariableMap,
    solution: &Solution,
    hyperedge: &str,
) -> Result<EnsPrices, AnalysisError> {
    let he = system
        .hyperedge(hyperedge)
        .ok_or_else(|| AnalysisError::UnknownHyperedge(hyperedge.to_string()))?;
    if he.ens != EnsPolicy::Forbidden {
        return Err(AnalysisError::NotForbidden(hyperedge.to_string()));
    }
    require_optimal(solution)?;
    let dt = system.time.step_hours;
    let series: Vec<f64> = (0..system.time.steps)
        .map(|t| solution.duals[varmap.balance_row(hyperedge, t).expect("balance row")] * 1000.0 / dt)
        .collect();
    // first maximum wins ties, so the result is deterministic
    let (argmax, max) = series
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (t, v)| if v > best.1 { (t, v) } else { best });
    Ok(EnsPrices {
        hyperedge: hyperedge.to_string(),
        series,
        argmax,
        max,
    })
}

/// Levelized cost of the delivered methane in €/MWh (HHV): the objective
/// minus demand-centre power, unserved-energy penalties and CO2 export,
/// divided by the energy delivered over the horizon.
pub fn methane_cost(system: &EnergySystem, varmap: &VariableMap, solution: &Solution) -> Result<f64, AnalysisError> {
    let tags = system.methane.as_ref().ok_or(AnalysisError::NoMethaneTags)?;
    require_optimal(solution)?;
    let x = &solution.x;
    let mut excluded = ens_penalty(system, varmap, x);
    for id in tags.power_nodes.iter().chain(&tags.co2_export_nodes) {
        if let Some(node) = system.node(id) {
            excluded += node_cost(system, varmap, node, x)?;
        }
    }
    let node = system.node(&tags.delivery.node).ok_or(AnalysisError::NoMethaneTags)?;
    let port = node.port(&tags.delivery.port).ok_or(AnalysisError::NoMethaneTags)?;
    let per_unit = match system.commodity(port.commodity).map(|c| c.unit) {
        Some(Unit::Energy) => 1.0,
        _ => tags.hhv_mwh_per_t,
    };
    let dt = system.time.step_hours;
    let delivered_gwh: f64 = (0..system.time.steps)
        .map(|t| x[varmap.flow(&tags.delivery.node, &tags.delivery.port, t).expect("delivery flow")] * dt * per_unit)
        .sum();
    if delivered_gwh <= 0.0 {
        return Err(AnalysisError::ZeroMethane);
    }
    Ok((solution.objective - excluded) / delivered_gwh * 1000.0)
}

/// Net release to the atmosphere in kt per year.
pub fn net_co2_balance(system: &EnergySystem, varmap: &VariableMap, solution: &Solution) -> f64 {
    dot(&net_release_terms(system, varmap), &solution.x) / system.time.years
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CapacityEntry {
    pub node: String,
    pub cluster: String,
    pub category: Option<Category>,
    /// Total capacity (preinstalled plus new) in reference units per hour;
    /// charge-flow capacity for storage.
    pub capacity: f64,
    /// Total stock capacity for storage nodes.
    pub stock: Option<f64>,
}

pub fn capacities(system: &EnergySystem, varmap: &VariableMap, solution: &Solution) -> Vec<CapacityEntry> {
    let x = &solution.x;
    let val = |node: &str, role: Role| x[varmap.scalar(node, &role).expect("capacity column")].max(0.0);
    system
        .nodes
        .iter()
        .map(|n| {
            let (capacity, stock) = match n {
                Node::Conversion(c) => (c.preinstalled + val(&c.id, Role::Capacity), None),
                Node::Storage(s) => (
                    s.flow.preinstalled + val(&s.id, Role::FlowCapacity),
                    Some(s.stock.preinstalled + val(&s.id, Role::StockCapacity)),
                ),
            };
            CapacityEntry {
                node: n.id().to_string(),
                cluster: n.cluster().to_string(),
                category: n.category(),
                capacity,
                stock,
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub scenario: String,
    pub status: Status,
    /// M€ over the horizon.
    pub objective: f64,
    pub iterations: usize,
    pub capacities: Vec<CapacityEntry>,
    pub costs: Option<CostBreakdown>,
    /// €/t, cap policy only.
    pub co2_shadow_price: Option<f64>,
    /// Balance-row prices of every energy hyperedge with demand and no
    /// unserved-energy slack.
    pub ens_prices: Vec<EnsPrices>,
    /// €/MWh HHV, when methane accounting tags are present.
    pub methane_cost: Option<f64>,
    /// kt per year.
    pub net_co2_balance: f64,
    pub kkt: Option<KktReport>,
}

/// Collects every indicator that applies to the system's policies. A
/// non-optimal solution yields a report with only status and objective.
pub fn scenario_report(
    name: &str,
    system: &EnergySystem,
    lp: &LpProblem,
    varmap: &VariableMap,
    solution: &Solution,
) -> Result<ScenarioReport, AnalysisError> {
    let mut report = ScenarioReport {
        scenario: name.to_string(),
        status: solution.status,
        objective: solution.objective,
        iterations: solution.iterations,
        capacities: Vec::new(),
        costs: None,
        co2_shadow_price: None,
        ens_prices: Vec::new(),
        methane_cost: None,
        net_co2_balance: 0.0,
        kkt: None,
    };
    if !solution.is_optimal() {
        return Ok(report);
    }
    report.capacities = capacities(system, varmap, solution);
    report.costs = Some(cost_breakdown(system, varmap, solution)?);
    if matches!(system.emission, EmissionPolicy::Cap { .. }) {
        report.co2_shadow_price = Some(co2_shadow_price(system, varmap, solution)?);
    }
    for he in &system.hyperedges {
        let energy = system.commodity(&he.commodity).map(|c| c.unit) == Some(Unit::Energy);
        let has_demand = he.demand.iter().any(|&d| d != 0.0);
        if he.ens == EnsPolicy::Forbidden && energy && has_demand {
            report.ens_prices.push(ens_shadow_prices(system, varmap, solution, &he.id)?);
        }
    }
    report.methane_cost = match methane_cost(system, varmap, solution) {
        Ok(v) => Some(v),
        Err(AnalysisError::NoMethaneTags | AnalysisError::ZeroMethane) => None,
        Err(e) => return Err(e),
    };
    report.net_co2_balance = net_co2_balance(system, varmap, solution);
    report.kkt = Some(verify_kkt(lp, solution));
    Ok(report)
}
