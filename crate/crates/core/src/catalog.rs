//! Technology presets.
//!
//! Units follow the model: electricity in GWh, CO2, H2, water and CH4 in kt,
//! capacities per hour, costs in M€. Every numeric field of a template is
//! tagged with where its value comes from. Values tagged [`Source::Antecedent`]
//! are placeholders standing in for the earlier power-to-gas studies the
//! published setup builds on; override them before drawing conclusions.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::model::{
    AtmosphereRole, CapacityBlock, Category, ConversionTech, Direction, Node, Port, Profile, StorageTech,
};

/// Energy content of methane, GWh per kt (HHV).
const CH4_GWH_PER_KT: f64 = 15.44;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "note", rename_all = "snake_case")]
pub enum Source {
    /// Value stated with the published parameter set.
    Published(&'static str),
    /// Computed from published values; the note gives the arithmetic.
    Derived(&'static str),
    /// Placeholder for a value inherited from antecedent studies.
    Antecedent(&'static str),
    /// Structural default (no delay, no preinstalled capacity, factor 1 on
    /// the reference port).
    Neutral,
}

#[derive(Clone, Debug, Serialize)]
pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    pub node: Node,
    /// Source of each numeric field, keyed by its dotted path in the node.
    pub sources: BTreeMap<String, Source>,
}

impl Preset {
    /// The template under a concrete id and cluster.
    pub fn instantiate(&self, id: &str, cluster: &str) -> Node {
        let mut node = self.node.clone();
        match &mut node {
            Node::Conversion(c) => {
                c.id = id.to_string();
                c.cluster = cluster.to_string();
            }
            Node::Storage(s) => {
                s.id = id.to_string();
                s.cluster = cluster.to_string();
            }
        }
        node
    }

    /// Paths of fields holding placeholder values.
    pub fn placeholders(&self) -> Vec<&str> {
        self.sources
            .iter()
            .filter(|(_, s)| matches!(s, Source::Antecedent(_)))
            .map(|(p, _)| p.as_str())
            .collect()
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum CatalogError {
    #[error("unknown preset `{0}`; available: {1}")]
    Unknown(String, String),
}

/// Numeric leaves of a node as dotted paths. Infinite potentials serialize
/// to null and are skipped.
pub fn numeric_fields(node: &Node) -> BTreeMap<String, f64> {
    fn walk(prefix: &str, v: &serde_json::Value, out: &mut BTreeMap<String, f64>) {
        match v {
            serde_json::Value::Number(n) => {
                out.insert(prefix.to_string(), n.as_f64().unwrap_or(f64::NAN));
            }
            serde_json::Value::Object(map) => {
                for (k, v) in map {
                    let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(&path, v, out);
                }
            }
            serde_json::Value::Array(items) => {
                for (i, v) in items.iter().enumerate() {
                    walk(&format!("{prefix}.{i}"), v, out);
                }
            }
            _ => {}
        }
    }
    let mut out = BTreeMap::new();
    walk("", &serde_json::to_value(node).expect("node serializes"), &mut out);
    out
}

fn finish(name: &'static str, summary: &'static str, node: Node, cites: &[(&[&str], Source)]) -> Preset {
    let mut sources = BTreeMap::new();
    for (paths, source) in cites {
        for p in *paths {
            sources.insert((*p).to_string(), source.clone());
        }
    }
    for path in numeric_fields(&node).into_keys() {
        sources.entry(path).or_insert(Source::Neutral);
    }
    Preset {
        name,
        summary,
        node,
        sources,
    }
}

fn conversion(reference: &str, commodity: &str, direction: Direction, category: Category) -> ConversionTech {
    let mut c = ConversionTech::new("template", "BE", reference, commodity, direction);
    c.category = Some(category);
    c
}

const NEGLECTED: Source = Source::Published("VOM and FOM neglected for capture units");

fn pccc(name: &'static str, summary: &'static str) -> Preset {
    let mut c = conversion("co2_flue", "co2", Direction::In, Category::Co2Infra)
        .with_port("electricity", Port::input("electricity", 0.4125))
        .with_port("co2_captured", Port::output("co2", 0.9))
        .with_port(
            "co2_released",
            Port::output("co2", 0.1).with_atmosphere(AtmosphereRole::Releases),
        );
    c.capex = 3150.0;
    c.lifetime = 20.0;
    finish(
        name,
        summary,
        Node::Conversion(c),
        &[
            (&["capex"], Source::Published("PCCC capex 3150 M€ per kt/h")),
            (&["lifetime"], Source::Published("PCCC lifetime 20 years")),
            (&["ports.electricity.factor"], Source::Published("0.4125 GWh electricity per kt CO2 captured")),
            (
                &["ports.co2_captured.factor", "ports.co2_released.factor"],
                Source::Published("capture efficiency 90%"),
            ),
            (&["fom", "vom"], NEGLECTED),
        ],
    )
}

fn dac() -> Preset {
    let mut c = conversion("co2", "co2", Direction::Out, Category::Co2Infra)
        .with_port("electricity", Port::input("electricity", 0.1091))
        .with_port("hydrogen", Port::input("hydrogen", 0.0438))
        .with_port("water", Port::input("water", 5.0))
        .with_port("natural_gas", Port::input("ch4", 0.0));
    c.ports.get_mut("co2").unwrap().atmosphere = AtmosphereRole::Captures;
    c.capex = 4801.4;
    c.lifetime = 30.0;
    finish(
        "dac",
        "Direct air capture, CO2 drawn from the atmosphere",
        Node::Conversion(c),
        &[
            (&["capex"], Source::Published("DAC capex 4801.4 M€ per kt/h")),
            (&["lifetime"], Source::Published("DAC lifetime 30 years")),
            (&["ports.electricity.factor"], Source::Published("0.1091 GWh electricity per kt CO2")),
            (&["ports.hydrogen.factor"], Source::Published("0.0438 kt H2 per kt CO2")),
            (&["ports.water.factor"], Source::Published("5.0 kt water per kt CO2")),
            (
                &["ports.natural_gas.factor"],
                Source::Antecedent("gas use of DAC not in the published operating list, kept at 0"),
            ),
            (&["fom", "vom"], NEGLECTED),
        ],
    )
}

fn co2_carrier() -> Preset {
    // A boat cycle is load 24 h, sail 116 h, unload 24 h, return 116 h. Per
    // kt/h of delivered flow the fleet holds 280 kt of tank.
    const CYCLE_H: f64 = 2.0 * (24.0 + 116.0);
    let mut c = conversion("co2_out", "co2", Direction::Out, Category::Co2Infra)
        .with_port("co2_in", Port::input("co2", 1.0))
        .with_port("fuel", Port::input("ch4", 0.0150 / 24.0 * CYCLE_H / CH4_GWH_PER_KT));
    c.capex = 5.0 * CYCLE_H;
    c.lifetime = 40.0;
    finish(
        "co2_carrier",
        "CO2 shipping link, sized in delivered kt/h",
        Node::Conversion(c),
        &[
            (
                &["capex"],
                Source::Derived("5 M€ per kt of tank times a 280 h round trip (24 h loading, 116 h sailing)"),
            ),
            (&["lifetime"], Source::Published("carrier lifetime 40 years")),
            (
                &["ports.fuel.factor"],
                Source::Derived("0.0150 GWh/day per kt of tank over a 280 h cycle, burnt as CH4 at 15.44 GWh/kt"),
            ),
            (&["ports.co2_in.factor"], Source::Published("continuous flow between hubs, no losses")),
            (&["fom", "vom"], Source::Antecedent("carrier O&M not restated")),
        ],
    )
}

fn ch4_carrier() -> Preset {
    let mut c = conversion("ch4_out", "ch4", Direction::Out, Category::Transport)
        .with_port("ch4_in", Port::input("ch4", 1.02));
    c.capex = 2500.0;
    c.lifetime = 30.0;
    c.fom = 50.0;
    finish(
        "ch4_carrier",
        "Liquefied methane shipping link including regasification",
        Node::Conversion(c),
        &[(
            &["capex", "lifetime", "fom", "vom", "ports.ch4_in.factor"],
            Source::Antecedent("LNG chain parameters of the original hub study"),
        )],
    )
}

fn electrolysis() -> Preset {
    let mut c = conversion("hydrogen", "hydrogen", Direction::Out, Category::Conversion)
        .with_port("electricity", Port::input("electricity", 50.0))
        .with_port("water", Port::input("water", 9.0));
    c.capex = 30000.0;
    c.lifetime = 15.0;
    c.fom = 1500.0;
    finish(
        "electrolysis",
        "Water electrolysis, sized in kt/h of hydrogen",
        Node::Conversion(c),
        &[(
            &["capex", "lifetime", "fom", "vom", "ports.electricity.factor", "ports.water.factor"],
            Source::Antecedent("electrolyser parameters of the original hub study"),
        )],
    )
}

fn methanation() -> Preset {
    let mut c = conversion("ch4", "ch4", Direction::Out, Category::Conversion)
        .with_port("hydrogen", Port::input("hydrogen", 0.5))
        .with_port("co2", Port::input("co2", 2.75))
        .with_port("water", Port::output("water", 2.25));
    c.capex = 7500.0;
    c.lifetime = 20.0;
    c.fom = 300.0;
    finish(
        "methanation",
        "Sabatier methanation, sized in kt/h of methane",
        Node::Conversion(c),
        &[
            (
                &["ports.hydrogen.factor", "ports.co2.factor", "ports.water.factor"],
                Source::Antecedent("stoichiometric CO2 + 4 H2 -> CH4 + 2 H2O"),
            ),
            (
                &["capex", "lifetime", "fom", "vom"],
                Source::Antecedent("methanation costs of the original hub study"),
            ),
        ],
    )
}

fn renewable(name: &'static str, summary: &'static str, potential: Option<(f64, &'static str)>, capex: f64, fom: f64, lifetime: f64) -> Preset {
    let mut c = conversion("electricity", "electricity", Direction::Out, Category::Power);
    c.capex = capex;
    c.fom = fom;
    c.lifetime = lifetime;
    let mut cites: Vec<(&[&str], Source)> = vec![(
        &["capex", "fom", "vom", "lifetime"],
        Source::Antecedent("generation costs of the earlier Belgian study"),
    )];
    if let Some((kappa, note)) = potential {
        c.max_potential = kappa;
        cites.push((&["max_potential"], Source::Published(note)));
    }
    finish(name, summary, Node::Conversion(c), &cites)
}

fn ccgt() -> Preset {
    let eff = 0.55;
    let fuel = 1.0 / (eff * CH4_GWH_PER_KT);
    let mut c = conversion("electricity", "electricity", Direction::Out, Category::Power)
        .with_port("ch4", Port::input("ch4", fuel))
        .with_port("co2_flue", Port::output("co2", 2.75 * fuel));
    c.capex = 800.0;
    c.lifetime = 25.0;
    c.fom = 20.0;
    c.vom = Profile::Constant(0.004);
    finish(
        "ccgt_be",
        "Combined cycle gas turbine burning methane; flue CO2 leaves on its own port",
        Node::Conversion(c),
        &[
            (
                &["capex", "lifetime", "fom", "vom", "ports.ch4.factor"],
                Source::Antecedent("CCGT at 55% efficiency (HHV) with costs of the earlier Belgian study"),
            ),
            (&["ports.co2_flue.factor"], Source::Antecedent("2.75 kt CO2 per kt CH4 burnt")),
        ],
    )
}

fn hvdc() -> Preset {
    let mut c = conversion("electricity_out", "electricity", Direction::Out, Category::Transport)
        .with_port("electricity_in", Port::input("electricity", 1.03));
    c.capex = 600.0;
    c.lifetime = 40.0;
    c.fom = 6.0;
    finish(
        "hvdc",
        "HVDC line, 1000 km class; shorten by scaling capex and losses",
        Node::Conversion(c),
        &[(
            &["capex", "lifetime", "fom", "vom", "ports.electricity_in.factor"],
            Source::Antecedent("HVDC line of the original hub study"),
        )],
    )
}

fn co2_pipe() -> Preset {
    let mut c = conversion("co2_out", "co2", Direction::Out, Category::Co2Infra)
        .with_port("co2_in", Port::input("co2", 1.0))
        .with_port("electricity", Port::input("electricity", 0.01));
    c.capex = 1500.0;
    c.lifetime = 40.0;
    c.fom = 30.0;
    finish(
        "co2_pipe",
        "CO2 pipeline with compression",
        Node::Conversion(c),
        &[
            (
                &["capex", "lifetime", "fom", "vom", "ports.electricity.factor"],
                Source::Antecedent("pipeline costs not restated"),
            ),
            (&["ports.co2_in.factor"], Source::Published("continuous flow between hubs, no losses")),
        ],
    )
}

fn desalination() -> Preset {
    let mut c = conversion("water", "water", Direction::Out, Category::Conversion)
        .with_port("electricity", Port::input("electricity", 0.004));
    c.capex = 30.0;
    c.lifetime = 20.0;
    c.fom = 1.0;
    finish(
        "desalination",
        "Seawater desalination, sized in kt/h of water",
        Node::Conversion(c),
        &[(
            &["capex", "lifetime", "fom", "vom", "ports.electricity.factor"],
            Source::Antecedent("desalination unit of the original hub study"),
        )],
    )
}

fn store(
    name: &'static str,
    summary: &'static str,
    commodity: &str,
    stock: (f64, f64, f64),
    flow: (f64, f64, f64),
    effs: (f64, f64, f64),
) -> Preset {
    let mut s = StorageTech::new("template", "BE", commodity);
    s.category = Some(Category::Flexibility);
    (s.self_discharge, s.charge_eff, s.discharge_eff) = effs;
    s.stock = CapacityBlock {
        capex: stock.0,
        fom: stock.1,
        lifetime: stock.2,
        ..CapacityBlock::default()
    };
    s.flow = CapacityBlock {
        capex: flow.0,
        fom: flow.1,
        lifetime: flow.2,
        ..CapacityBlock::default()
    };
    finish(
        name,
        summary,
        Node::Storage(s),
        &[(
            &[
                "self_discharge",
                "charge_eff",
                "discharge_eff",
                "discharge_ratio",
                "min_soc",
                "stock.capex",
                "stock.fom",
                "stock.lifetime",
                "stock.vom",
                "flow.capex",
                "flow.fom",
                "flow.lifetime",
                "flow.vom",
            ],
            Source::Antecedent("storage parameters of the original hub study"),
        )],
    )
}

fn build(name: &str) -> Option<Preset> {
    Some(match name {
        "pccc" => pccc("pccc", "Post-combustion capture on industrial flue gas"),
        "pccc_ccgt" => pccc("pccc_ccgt", "Post-combustion capture on CCGT flue gas"),
        "dac" => dac(),
        "co2_carrier" => co2_carrier(),
        "ch4_carrier" => ch4_carrier(),
        "electrolysis" => electrolysis(),
        "methanation" => methanation(),
        "desalination" => desalination(),
        "wind_onshore_be" => renewable(
            "wind_onshore_be",
            "Onshore wind in Belgium; bind a capacity factor series",
            Some((8.4, "Belgian onshore wind potential 8.4 GW")),
            1040.0,
            12.6,
            30.0,
        ),
        "wind_offshore_be" => renewable(
            "wind_offshore_be",
            "Offshore wind in Belgium; bind a capacity factor series",
            Some((8.0, "Belgian offshore wind potential 8 GW")),
            2000.0,
            40.0,
            30.0,
        ),
        "solar_be" => renewable(
            "solar_be",
            "Solar PV in Belgium; bind a capacity factor series",
            Some((40.0, "Belgian solar potential 40 GW")),
            380.0,
            7.25,
            25.0,
        ),
        "solar" => renewable("solar", "Solar PV without potential limit", None, 380.0, 7.25, 25.0),
        "wind" => renewable("wind", "Onshore wind without potential limit", None, 1040.0, 12.6, 30.0),
        "ccgt_be" => ccgt(),
        "hvdc" => hvdc(),
        "co2_pipe" => co2_pipe(),
        "battery" => store(
            "battery",
            "Lithium-ion battery; stock in GWh, flow in GW",
            "electricity",
            (140.0, 0.0, 10.0),
            (160.0, 0.5, 10.0),
            (0.00004, 0.959, 0.959),
        ),
        "h2_tank" => store(
            "h2_tank",
            "Pressurised hydrogen storage; stock in kt",
            "hydrogen",
            (45.0, 2.25, 20.0),
            (0.0, 0.0, 20.0),
            (0.0, 1.0, 1.0),
        ),
        "co2_tank" => store(
            "co2_tank",
            "Liquefied CO2 buffer storage; stock in kt",
            "co2",
            (2.6, 0.1, 30.0),
            (0.0, 0.0, 30.0),
            (0.0, 1.0, 1.0),
        ),
        "ch4_tank" => store(
            "ch4_tank",
            "Liquefied methane storage; stock in kt",
            "ch4",
            (2.6, 0.1, 30.0),
            (0.0, 0.0, 30.0),
            (0.0, 1.0, 1.0),
        ),
        _ => return None,
    })
}

const NAMES: &[&str] = &[
    "battery",
    "ccgt_be",
    "ch4_carrier",
    "ch4_tank",
    "co2_carrier",
    "co2_pipe",
    "co2_tank",
    "dac",
    "desalination",
    "electrolysis",
    "h2_tank",
    "hvdc",
    "methanation",
    "pccc",
    "pccc_ccgt",
    "solar",
    "solar_be",
    "wind",
    "wind_offshore_be",
    "wind_onshore_be",
];

pub fn list_presets() -> Vec<&'static str> {
    NAMES.to_vec()
}

pub fn preset(name: &str) -> Result<Preset, CatalogError> {
    build(name).ok_or_else(|| CatalogError::Unknown(name.to_string(), NAMES.join(", ")))
}
