use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::{
    CapacityBlock, ConversionTech, Direction, EmissionPolicy, EnergySystem, EnsPolicy, Node, PortRef, Profile,
    StorageTech,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    DuplicateId,
    UnknownCommodity,
    UnknownNode,
    UnknownPort,
    CommodityMismatch,
    DirectionMismatch,
    LengthMismatch,
    OutOfRange,
    NonFinite,
    EmptyBalance,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Entity the violation is about, e.g. a node or hyperedge id.
    pub subject: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.subject, self.message)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Violation> {
        self.violations.iter()
    }

    pub fn contains(&self, kind: ViolationKind, needle: &str) -> bool {
        self.violations
            .iter()
            .any(|v| v.kind == kind && v.message.contains(needle))
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

struct Checker<'a> {
    sys: &'a EnergySystem,
    out: Vec<Violation>,
}

impl Checker<'_> {
    fn push(&mut self, kind: ViolationKind, subject: &str, message: String) {
        self.out.push(Violation {
            kind,
            subject: subject.to_string(),
            message,
        });
    }

    fn finite(&mut self, subject: &str, what: &str, v: f64) -> bool {
        if v.is_finite() {
            true
        } else {
            self.push(ViolationKind::NonFinite, subject, format!("{what} is {v}"));
            false
        }
    }

    fn range(&mut self, subject: &str, what: &str, v: f64, lo: f64, hi: f64) {
        if self.finite(subject, what, v) && !(lo..=hi).contains(&v) {
            self.push(
                ViolationKind::OutOfRange,
                subject,
                format!("{what} = {v} outside [{lo}, {hi}]"),
            );
        }
    }

    fn nonneg(&mut self, subject: &str, what: &str, v: f64) {
        self.range(subject, what, v, 0.0, f64::MAX);
    }

    fn positive(&mut self, subject: &str, what: &str, v: f64) {
        if self.finite(subject, what, v) && v <= 0.0 {
            self.push(ViolationKind::OutOfRange, subject, format!("{what} = {v} must be > 0"));
        }
    }

    fn series(&mut self, subject: &str, what: &str, values: &[f64], lo: f64, hi: f64) {
        let steps = self.sys.time.steps;
        if values.len() != steps {
            self.push(
                ViolationKind::LengthMismatch,
                subject,
                format!("{what} length {} != T = {steps}", values.len()),
            );
        }
        if let Some((t, &v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            self.push(ViolationKind::NonFinite, subject, format!("{what}[{t}] is {v}"));
        } else if let Some((t, &v)) = values.iter().enumerate().find(|(_, v)| !(lo..=hi).contains(*v)) {
            self.push(
                ViolationKind::OutOfRange,
                subject,
                format!("{what}[{t}] = {v} outside [{lo}, {hi}]"),
            );
        }
    }

    fn profile(&mut self, subject: &str, what: &str, p: &Profile) {
        match p {
            Profile::Constant(v) => self.nonneg(subject, what, *v),
            Profile::Series(s) => self.series(subject, what, s, 0.0, f64::MAX),
        }
    }

    fn lifetime(&mut self, subject: &str, what: &str, v: f64) {
        if self.finite(subject, what, v) && v < 1.0 {
            self.push(ViolationKind::OutOfRange, subject, format!("{what} = {v} must be >= 1"));
        }
    }

    fn commodity(&mut self, subject: &str, id: &str) {
        if self.sys.commodity(id).is_none() {
            self.push(ViolationKind::UnknownCommodity, subject, format!("unknown commodity `{id}`"));
        }
    }

    fn potential(&mut self, subject: &str, what: &str, lower: f64, upper: f64) {
        self.nonneg(subject, &format!("{what} preinstalled"), lower);
        if upper.is_nan() || upper <= 0.0 {
            self.push(
                ViolationKind::OutOfRange,
                subject,
                format!("{what} max potential = {upper} must be > 0"),
            );
        } else if lower > upper {
            self.push(
                ViolationKind::OutOfRange,
                subject,
                format!("{what} preinstalled {lower} exceeds max potential {upper}"),
            );
        }
    }

    fn conversion(&mut self, c: &ConversionTech) {
        let id = c.id.as_str();
        match c.ports.get(&c.reference) {
            None => self.push(
                ViolationKind::UnknownPort,
                id,
                format!("reference port `{}` not among ports", c.reference),
            ),
            Some(p) if p.factor != 1.0 => self.push(
                ViolationKind::OutOfRange,
                id,
                format!("reference port factor = {} must be 1", p.factor),
            ),
            Some(p) if p.delay != 0 => {
                self.push(ViolationKind::OutOfRange, id, "reference port delay must be 0".into())
            }
            Some(_) => {}
        }
        for (name, port) in &c.ports {
            self.commodity(id, &port.commodity);
            self.nonneg(id, &format!("port `{name}` factor"), port.factor);
        }
        self.potential(id, "capacity", c.preinstalled, c.max_potential);
        if let Some(cf) = &c.capacity_factor {
            self.series(id, "capacity_factor", cf, 0.0, 1.0);
        }
        self.range(id, "must_run", c.must_run, 0.0, 1.0);
        if let Some(r) = c.ramp_up {
            self.range(id, "ramp_up", r, 0.0, 1.0);
        }
        if let Some(r) = c.ramp_down {
            self.range(id, "ramp_down", r, 0.0, 1.0);
        }
        let constrained = c.must_run > 0.0 || c.ramp_up.is_some() || c.ramp_down.is_some();
        let op = c.operating_port();
        match c.ports.get(op) {
            None => self.push(ViolationKind::UnknownPort, id, format!("operating port `{op}` not among ports")),
            Some(p) if constrained && p.factor <= 0.0 => self.push(
                ViolationKind::OutOfRange,
                id,
                format!("operating port `{op}` needs a positive factor"),
            ),
            Some(_) => {}
        }
        self.nonneg(id, "capex", c.capex);
        self.lifetime(id, "lifetime", c.lifetime);
        self.nonneg(id, "fom", c.fom);
        self.profile(id, "vom", &c.vom);
    }

    fn block(&mut self, id: &str, what: &str, b: &CapacityBlock) {
        self.potential(id, what, b.preinstalled, b.max);
        self.nonneg(id, &format!("{what} capex"), b.capex);
        self.lifetime(id, &format!("{what} lifetime"), b.lifetime);
        self.nonneg(id, &format!("{what} fom"), b.fom);
        self.profile(id, &format!("{what} vom"), &b.vom);
    }

    fn storage(&mut self, s: &StorageTech) {
        let id = s.id.as_str();
        self.commodity(id, &s.commodity);
        self.range(id, "self_discharge", s.self_discharge, 0.0, 1.0);
        for (what, v) in [("charge_eff", s.charge_eff), ("discharge_eff", s.discharge_eff)] {
            if self.finite(id, what, v) && !(v > 0.0 && v <= 1.0) {
                self.push(ViolationKind::OutOfRange, id, format!("{what} = {v} outside (0, 1]"));
            }
        }
        self.range(id, "min_soc", s.min_soc, 0.0, 1.0);
        self.positive(id, "discharge_ratio", s.discharge_ratio);
        for (c, &phi) in &s.aux {
            if c == StorageTech::CHARGE || c == StorageTech::DISCHARGE {
                self.push(ViolationKind::DuplicateId, id, format!("aux port name `{c}` is reserved"));
            }
            self.commodity(id, c);
            self.nonneg(id, &format!("aux `{c}` factor"), phi);
        }
        self.block(id, "stock", &s.stock);
        self.block(id, "flow", &s.flow);
    }

    fn port_ref(&mut self, he: &str, commodity: &str, r: &PortRef, expect: Direction) {
        let Some(node) = self.sys.node(&r.node) else {
            self.push(ViolationKind::UnknownNode, he, format!("unknown node `{}`", r.node));
            return;
        };
        let Some(port) = node.port(&r.port) else {
            self.push(ViolationKind::UnknownPort, he, format!("unknown port `{r}`"));
            return;
        };
        if port.commodity != commodity {
            self.push(
                ViolationKind::CommodityMismatch,
                he,
                format!("port `{r}` carries `{}`, not `{commodity}`", port.commodity),
            );
        }
        if port.direction != expect {
            let role = match expect {
                Direction::Out => "producer",
                Direction::In => "consumer",
            };
            self.push(
                ViolationKind::DirectionMismatch,
                he,
                format!("port `{r}` has the wrong direction to be a {role}"),
            );
        }
    }

    fn run(mut self) -> Vec<Violation> {
        let sys = self.sys;
        let t = &sys.time;
        if t.steps < 2 {
            self.push(ViolationKind::OutOfRange, "time", format!("T = {} must be >= 2", t.steps));
        }
        self.positive("time", "step_hours", t.step_hours);
        self.positive("time", "years", t.years);
        if self.finite("system", "wacc", sys.wacc) && !(sys.wacc > 0.0 && sys.wacc < 1.0) {
            self.push(
                ViolationKind::OutOfRange,
                "system",
                format!("wacc = {} outside (0, 1)", sys.wacc),
            );
        }

        let mut seen = BTreeSet::new();
        for c in &sys.commodities {
            if !seen.insert(c.id.as_str()) {
                self.push(ViolationKind::DuplicateId, &c.id, "duplicate commodity id".into());
            }
        }
        // Node and hyperedge ids share the LP name space.
        let mut seen = BTreeSet::new();
        let ids = sys
            .nodes
            .iter()
            .map(Node::id)
            .chain(sys.hyperedges.iter().map(|h| h.id.as_str()));
        for id in ids {
            if id.is_empty() || id.contains(|c: char| c.is_whitespace() || c == '.') {
                self.push(
                    ViolationKind::OutOfRange,
                    id,
                    "ids must be non-empty without whitespace or dots".into(),
                );
            }
            if !seen.insert(id) {
                self.push(ViolationKind::DuplicateId, id, "duplicate node or hyperedge id".into());
            }
        }

        for node in &sys.nodes {
            match node {
                Node::Conversion(c) => self.conversion(c),
                Node::Storage(s) => self.storage(s),
            }
        }

        for he in &sys.hyperedges {
            let id = he.id.as_str();
            self.commodity(id, &he.commodity);
            for r in &he.producers {
                self.port_ref(id, &he.commodity, r, Direction::Out);
            }
            for r in &he.consumers {
                self.port_ref(id, &he.commodity, r, Direction::In);
            }
            self.series(id, "demand", &he.demand, f64::MIN, f64::MAX);
            let penalized = match he.ens {
                EnsPolicy::Forbidden => false,
                EnsPolicy::Penalized { price } => {
                    self.nonneg(id, "ens price", price);
                    true
                }
            };
            if he.producers.is_empty() && he.consumers.is_empty() && !penalized {
                self.push(
                    ViolationKind::EmptyBalance,
                    id,
                    "hyperedge references no ports and has no ENS slack".into(),
                );
            }
        }

        match sys.emission {
            EmissionPolicy::None => {}
            EmissionPolicy::Cap { kt_per_year } => self.nonneg("emission", "cap", kt_per_year),
            EmissionPolicy::Price { meur_per_kt } => self.nonneg("emission", "price", meur_per_kt),
        }

        if let Some(m) = &sys.methane {
            match sys.node(&m.delivery.node) {
                None => self.push(
                    ViolationKind::UnknownNode,
                    "methane",
                    format!("unknown node `{}`", m.delivery.node),
                ),
                Some(n) if n.port(&m.delivery.port).is_none() => self.push(
                    ViolationKind::UnknownPort,
                    "methane",
                    format!("unknown port `{}`", m.delivery),
                ),
                Some(_) => {}
            }
            for id in m.power_nodes.iter().chain(&m.co2_export_nodes) {
                if sys.node(id).is_none() {
                    self.push(ViolationKind::UnknownNode, "methane", format!("unknown node `{id}`"));
                }
            }
            self.positive("methane", "hhv", m.hhv_mwh_per_t);
        }

        // Stable order regardless of traversal details.
        let mut grouped: BTreeMap<(String, ViolationKind), Vec<String>> = BTreeMap::new();
        for v in self.out {
            grouped.entry((v.subject, v.kind)).or_default().push(v.message);
        }
        grouped
            .into_iter()
            .flat_map(|((subject, kind), msgs)| {
                msgs.into_iter().map(move |message| Violation {
                    kind,
                    subject: subject.clone(),
                    message,
                })
            })
            .collect()
    }
}

/// Checks references, series lengths and parameter ranges. An empty report
/// means the system compiles.
pub fn validate_system(system: &EnergySystem) -> ValidationReport {
    let checker = Checker {
        sys: system,
        out: Vec::new(),
    };
    ValidationReport {
        violations: checker.run(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Commodity, ConversionTech, Hyperedge, Port, TimeGrid, Unit};

    fn two_nodes() -> EnergySystem {
        let mut sys = EnergySystem::new(TimeGrid::new(3, 1.0, 1.0), "BE");
        sys.commodities.push(Commodity {
            id: "elec".into(),
            unit: Unit::Energy,
        });
        sys.nodes.push(Node::Conversion(ConversionTech::new(
            "gen", "BE", "out", "elec", Direction::Out,
        )));
        let load = ConversionTech::new("load", "BE", "in", "elec", Direction::In);
        sys.nodes.push(Node::Conversion(load));
        sys.hyperedges.push(Hyperedge {
            id: "grid".into(),
            cluster: None,
            commodity: "elec".into(),
            producers: vec![PortRef::new("gen", "out")],
            consumers: vec![PortRef::new("load", "in")],
            demand: vec![1.0; 3],
            ens: EnsPolicy::Forbidden,
        });
        sys
    }

    #[test]
    fn well_formed_system_is_clean() {
        let report = validate_system(&two_nodes());
        assert!(report.is_empty(), "{report}");
    }

    #[test]
    fn short_capacity_factor_is_reported() {
        let mut sys = two_nodes();
        if let Node::Conversion(c) = &mut sys.nodes[0] {
            c.capacity_factor = Some(vec![0.5; 2]);
        }
        let report = validate_system(&sys);
        assert!(report.contains(ViolationKind::LengthMismatch, "capacity_factor length"), "{report}");
    }

    #[test]
    fn dangling_node_is_reported() {
        let mut sys = two_nodes();
        sys.hyperedges[0].producers.push(PortRef::new("ghost", "out"));
        let report = validate_system(&sys);
        assert!(report.contains(ViolationKind::UnknownNode, "unknown node"), "{report}");
    }

    #[test]
    fn direction_and_commodity_mismatches_are_reported() {
        let mut sys = two_nodes();
        sys.commodities.push(Commodity {
            id: "gas".into(),
            unit: Unit::Energy,
        });
        if let Node::Conversion(c) = &mut sys.nodes[0] {
            c.ports.insert("fuel".into(), Port::input("gas", 2.0));
        }
        sys.hyperedges[0].consumers.push(PortRef::new("gen", "out"));
        sys.hyperedges[0].consumers.push(PortRef::new("gen", "fuel"));
        let report = validate_system(&sys);
        assert!(report.contains(ViolationKind::DirectionMismatch, "gen.out"), "{report}");
        assert!(report.contains(ViolationKind::CommodityMismatch, "gen.fuel"), "{report}");
    }

    #[test]
    fn ranges_are_checked() {
        let mut sys = two_nodes();
        sys.wacc = 0.0;
        if let Node::Conversion(c) = &mut sys.nodes[0] {
            c.capacity_factor = Some(vec![0.5, 1.5, 0.0]);
            c.preinstalled = 5.0;
            c.max_potential = 4.0;
            c.lifetime = 0.5;
        }
        let report = validate_system(&sys);
        assert!(report.contains(ViolationKind::OutOfRange, "capacity_factor[1]"));
        assert!(report.contains(ViolationKind::OutOfRange, "exceeds max potential"));
        assert!(report.contains(ViolationKind::OutOfRange, "lifetime"));
        assert!(report.contains(ViolationKind::OutOfRange, "wacc"));
    }

    #[test]
    fn reference_factor_must_be_one() {
        let mut sys = two_nodes();
        if let Node::Conversion(c) = &mut sys.nodes[0] {
            c.ports.get_mut("out").unwrap().factor = 2.0;
        }
        assert!(validate_system(&sys).contains(ViolationKind::OutOfRange, "reference port factor"));
    }
}
