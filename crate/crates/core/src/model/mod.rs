//! Hypergraph energy-system model.
//!
//! Nodes are conversion or storage technologies, each owning capacity
//! variables and a set of commodity ports. Hyperedges balance a commodity
//! across the ports they reference, minus an exogenous demand. Units are
//! fixed system-wide: energy flows in GWh/h, mass flows in kt/h, costs in M€.

mod hub;
mod validate;

pub use hub::{force_hub, HubError};
pub use validate::{validate_system, ValidationReport, Violation, ViolationKind};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    /// Number of time steps `T`, indexed `0..T`.
    pub steps: usize,
    /// Length of one step in hours.
    pub step_hours: f64,
    /// Years spanned by the horizon, used to scale annualized costs. Not
    /// tied to `steps * step_hours`.
    pub years: f64,
}

impl TimeGrid {
    pub fn new(steps: usize, step_hours: f64, years: f64) -> Self {
        Self {
            steps,
            step_hours,
            years,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Unit {
    /// GWh (flows in GWh/h)
    Energy,
    /// kt (flows in kt/h)
    Mass,
    /// kt of water
    Water,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Commodity {
    pub id: String,
    pub unit: Unit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    In,
    Out,
}

/// Membership of a flow in the net atmospheric CO2 balance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AtmosphereRole {
    #[default]
    None,
    /// Flow is CO2 released to the atmosphere.
    Releases,
    /// Flow is CO2 captured from the atmosphere.
    Captures,
}

/// Cost-reporting group of a node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Flexibility,
    Co2Infra,
    Power,
    Conversion,
    Transport,
}

impl Category {
    pub const ALL: [Category; 5] = [
        Category::Flexibility,
        Category::Co2Infra,
        Category::Power,
        Category::Conversion,
        Category::Transport,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Category::Flexibility => "Flexibility",
            Category::Co2Infra => "CO2 Infra",
            Category::Power => "Power",
            Category::Conversion => "Conversion",
            Category::Transport => "Transport",
        }
    }
}

/// A per-step parameter that is usually constant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Profile {
    Constant(f64),
    Series(Vec<f64>),
}

impl Default for Profile {
    fn default() -> Self {
        Profile::Constant(0.0)
    }
}

impl Profile {
    pub fn at(&self, t: usize) -> f64 {
        match self {
            Profile::Constant(v) => *v,
            Profile::Series(s) => s[t],
        }
    }

    pub fn values(&self) -> &[f64] {
        match self {
            Profile::Constant(v) => std::slice::from_ref(v),
            Profile::Series(s) => s,
        }
    }

    pub fn len_ok(&self, steps: usize) -> bool {
        match self {
            Profile::Constant(_) => true,
            Profile::Series(s) => s.len() == steps,
        }
    }
}

/// One commodity port of a conversion node.
///
/// `factor` is the flow through this port per unit of reference flow, so the
/// reference port has factor 1 and a port with factor 0 carries nothing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Port {
    pub commodity: String,
    pub direction: Direction,
    pub factor: f64,
    /// Steps by which this port's flow lags the reference flow.
    #[serde(default)]
    pub delay: usize,
    #[serde(default)]
    pub atmosphere: AtmosphereRole,
}

impl Port {
    pub fn input(commodity: impl Into<String>, factor: f64) -> Self {
        Port {
            commodity: commodity.into(),
            direction: Direction::In,
            factor,
            delay: 0,
            atmosphere: AtmosphereRole::None,
        }
    }

    pub fn output(commodity: impl Into<String>, factor: f64) -> Self {
        Port {
            commodity: commodity.into(),
            direction: Direction::Out,
            factor,
            delay: 0,
            atmosphere: AtmosphereRole::None,
        }
    }

    pub fn with_delay(mut self, delay: usize) -> Self {
        self.delay = delay;
        self
    }

    pub fn with_atmosphere(mut self, role: AtmosphereRole) -> Self {
        self.atmosphere = role;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConversionTech {
    pub id: String,
    pub cluster: String,
    pub category: Option<Category>,
    /// Name of the reference port; capacity is sized in its units.
    pub reference: String,
    /// Ports keyed by port name.
    pub ports: BTreeMap<String, Port>,
    pub preinstalled: f64,
    /// Upper bound on total capacity; `f64::INFINITY` when unlimited.
    pub max_potential: f64,
    /// Availability per step in `[0, 1]`; `None` for dispatchable plant.
    pub capacity_factor: Option<Vec<f64>>,
    pub must_run: f64,
    pub ramp_up: Option<f64>,
    pub ramp_down: Option<f64>,
    /// Port whose flow the must-run and ramping limits apply to. Defaults to
    /// the reference port.
    pub operating_port: Option<String>,
    /// Overnight investment cost, M€ per capacity unit.
    pub capex: f64,
    pub lifetime: f64,
    /// Fixed O&M, M€ per capacity unit per year.
    pub fom: f64,
    /// Variable O&M, M€ per unit of reference flow.
    pub vom: Profile,
}

impl ConversionTech {
    /// A dispatchable node with only a reference port and no costs.
    pub fn new(
        id: impl Into<String>,
        cluster: impl Into<String>,
        reference: impl Into<String>,
        commodity: impl Into<String>,
        direction: Direction,
    ) -> Self {
        let reference = reference.into();
        let mut ports = BTreeMap::new();
        ports.insert(
            reference.clone(),
            Port {
                commodity: commodity.into(),
                direction,
                factor: 1.0,
                delay: 0,
                atmosphere: AtmosphereRole::None,
            },
        );
        ConversionTech {
            id: id.into(),
            cluster: cluster.into(),
            category: None,
            reference,
            ports,
            preinstalled: 0.0,
            max_potential: f64::INFINITY,
            capacity_factor: None,
            must_run: 0.0,
            ramp_up: None,
            ramp_down: None,
            operating_port: None,
            capex: 0.0,
            lifetime: 1.0,
            fom: 0.0,
            vom: Profile::Constant(0.0),
        }
    }

    pub fn with_port(mut self, name: impl Into<String>, port: Port) -> Self {
        self.ports.insert(name.into(), port);
        self
    }

    pub fn operating_port(&self) -> &str {
        self.operating_port.as_deref().unwrap_or(&self.reference)
    }
}

/// Capacity variable of a storage node (stock or flow side).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityBlock {
    pub preinstalled: f64,
    pub max: f64,
    pub capex: f64,
    pub fom: f64,
    pub lifetime: f64,
    pub vom: Profile,
}

impl Default for CapacityBlock {
    fn default() -> Self {
        CapacityBlock {
            preinstalled: 0.0,
            max: f64::INFINITY,
            capex: 0.0,
            fom: 0.0,
            lifetime: 1.0,
            vom: Profile::Constant(0.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StorageTech {
    pub id: String,
    pub cluster: String,
    pub category: Option<Category>,
    /// Commodity flowing through the `charge` and `discharge` ports.
    pub commodity: String,
    pub self_discharge: f64,
    pub charge_eff: f64,
    pub discharge_eff: f64,
    /// Minimum state of charge as a fraction of installed stock capacity.
    pub min_soc: f64,
    /// Maximum discharge flow per unit of charge-flow capacity.
    pub discharge_ratio: f64,
    /// Other commodities consumed per unit of charge flow, keyed by commodity.
    pub aux: BTreeMap<String, f64>,
    /// Stock side: capacity in commodity units; VOM per unit stock per step.
    pub stock: CapacityBlock,
    /// Flow side: charge capacity in commodity units per hour; VOM per unit
    /// charged.
    pub flow: CapacityBlock,
}

impl StorageTech {
    pub const CHARGE: &'static str = "charge";
    pub const DISCHARGE: &'static str = "discharge";

    pub fn new(id: impl Into<String>, cluster: impl Into<String>, commodity: impl Into<String>) -> Self {
        StorageTech {
            id: id.into(),
            cluster: cluster.into(),
            category: None,
            commodity: commodity.into(),
            self_discharge: 0.0,
            charge_eff: 1.0,
            discharge_eff: 1.0,
            min_soc: 0.0,
            discharge_ratio: 1.0,
            aux: BTreeMap::new(),
            stock: CapacityBlock::default(),
            flow: CapacityBlock::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Conversion(ConversionTech),
    Storage(StorageTech),
}

/// Port of a node as seen from a hyperedge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PortInfo<'a> {
    pub name: &'a str,
    pub commodity: &'a str,
    pub direction: Direction,
}

impl Node {
    pub fn id(&self) -> &str {
        match self {
            Node::Conversion(c) => &c.id,
            Node::Storage(s) => &s.id,
        }
    }

    pub fn cluster(&self) -> &str {
        match self {
            Node::Conversion(c) => &c.cluster,
            Node::Storage(s) => &s.cluster,
        }
    }

    pub fn category(&self) -> Option<Category> {
        match self {
            Node::Conversion(c) => c.category,
            Node::Storage(s) => s.category,
        }
    }

    /// All ports in a stable order.
    pub fn ports(&self) -> Vec<PortInfo<'_>> {
        match self {
            Node::Conversion(c) => c
                .ports
                .iter()
                .map(|(name, p)| PortInfo {
                    name,
                    commodity: &p.commodity,
                    direction: p.direction,
                })
                .collect(),
            Node::Storage(s) => {
                let mut v = vec![
                    PortInfo {
                        name: StorageTech::CHARGE,
                        commodity: &s.commodity,
                        direction: Direction::In,
                    },
                    PortInfo {
                        name: StorageTech::DISCHARGE,
                        commodity: &s.commodity,
                        direction: Direction::Out,
                    },
                ];
                v.extend(s.aux.keys().map(|c| PortInfo {
                    name: c,
                    commodity: c,
                    direction: Direction::In,
                }));
                v
            }
        }
    }

    pub fn port(&self, name: &str) -> Option<PortInfo<'_>> {
        self.ports().into_iter().find(|p| p.name == name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PortRef {
    pub node: String,
    pub port: String,
}

impl PortRef {
    pub fn new(node: impl Into<String>, port: impl Into<String>) -> Self {
        PortRef {
            node: node.into(),
            port: port.into(),
        }
    }
}

impl std::fmt::Display for PortRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}.{}", self.node, self.port)
    }
}

impl std::str::FromStr for PortRef {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once('.') {
            Some((node, port)) if !node.is_empty() && !port.is_empty() => Ok(PortRef::new(node, port)),
            _ => Err(format!("expected `<node>.<port>`, got `{s}`")),
        }
    }
}

/// Treatment of unmet demand on a hyperedge.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsPolicy {
    /// The balance must hold exactly.
    Forbidden,
    /// A nonnegative slack enters the balance at `price` M€ per commodity
    /// unit (for electricity, M€/GWh = k€/MWh).
    Penalized { price: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperedge {
    pub id: String,
    /// Optional cluster label, used when forcing a hub.
    pub cluster: Option<String>,
    pub commodity: String,
    /// Ports whose flow enters the balance positively.
    pub producers: Vec<PortRef>,
    /// Ports whose flow enters the balance negatively.
    pub consumers: Vec<PortRef>,
    /// Exogenous demand per step.
    pub demand: Vec<f64>,
    pub ens: EnsPolicy,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmissionPolicy {
    #[default]
    None,
    /// Net release limited to `kt_per_year` times the horizon length in years.
    Cap { kt_per_year: f64 },
    /// Net release charged at `meur_per_kt` (0.08 M€/kt = 80 €/t).
    Price { meur_per_kt: f64 },
}

/// Tags needed to derive a synthetic-methane cost from a solved system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethaneAccounting {
    /// Port delivering methane to the demand centre.
    pub delivery: PortRef,
    /// Electricity production nodes of the demand centre.
    pub power_nodes: Vec<String>,
    /// Nodes exporting CO2 for sequestration.
    pub co2_export_nodes: Vec<String>,
    /// Higher heating value of methane in MWh/t, used when the delivery
    /// commodity is measured in mass.
    pub hhv_mwh_per_t: f64,
}

pub const DEFAULT_CH4_HHV_MWH_PER_T: f64 = 15.44;
pub const DEFAULT_WACC: f64 = 0.07;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergySystem {
    pub time: TimeGrid,
    pub commodities: Vec<Commodity>,
    pub nodes: Vec<Node>,
    pub hyperedges: Vec<Hyperedge>,
    pub emission: EmissionPolicy,
    pub wacc: f64,
    /// Cluster of the energy demand centre; never removed by [`force_hub`].
    pub demand_cluster: String,
    pub methane: Option<MethaneAccounting>,
}

impl EnergySystem {
    pub fn new(time: TimeGrid, demand_cluster: impl Into<String>) -> Self {
        EnergySystem {
            time,
            commodities: Vec::new(),
            nodes: Vec::new(),
            hyperedges: Vec::new(),
            emission: EmissionPolicy::None,
            wacc: DEFAULT_WACC,
            demand_cluster: demand_cluster.into(),
            methane: None,
        }
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id() == id)
    }

    pub fn hyperedge(&self, id: &str) -> Option<&Hyperedge> {
        self.hyperedges.iter().find(|h| h.id == id)
    }

    pub fn commodity(&self, id: &str) -> Option<&Commodity> {
        self.commodities.iter().find(|c| c.id == id)
    }

    /// Every cluster label used by a node or hyperedge, plus the demand
    /// centre.
    pub fn clusters(&self) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = self.nodes.iter().map(|n| n.cluster().to_string()).collect();
        out.extend(self.hyperedges.iter().filter_map(|h| h.cluster.clone()));
        out.insert(self.demand_cluster.clone());
        out
    }

    /// Ports tagged as atmospheric release or capture, in node order.
    pub fn atmosphere_ports(&self) -> Vec<(PortRef, AtmosphereRole)> {
        let mut out = Vec::new();
        for node in &self.nodes {
            if let Node::Conversion(c) = node {
                for (name, port) in &c.ports {
                    if port.atmosphere != AtmosphereRole::None {
                        out.push((PortRef::new(&c.id, name), port.atmosphere));
                    }
                }
            }
        }
        out
    }
}
