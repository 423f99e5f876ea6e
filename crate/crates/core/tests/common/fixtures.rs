//! Small hand-checkable systems shared by the integration suites.

use hubopt::model::{
    AtmosphereRole, Commodity, ConversionTech, Direction, EmissionPolicy, EnergySystem, EnsPolicy, Hyperedge, Node,
    Port, PortRef, Profile, TimeGrid, Unit,
};

pub fn system(steps: usize, step_hours: f64, years: f64, commodities: &[(&str, Unit)]) -> EnergySystem {
    let mut sys = EnergySystem::new(TimeGrid::new(steps, step_hours, years), "BE");
    for &(id, unit) in commodities {
        sys.commodities.push(Commodity { id: id.into(), unit });
    }
    sys
}

/// Dispatchable generator of `commodity` with the given variable cost.
pub fn generator(id: &str, cluster: &str, commodity: &str, vom: f64) -> ConversionTech {
    let mut c = ConversionTech::new(id, cluster, "out", commodity, Direction::Out);
    c.vom = Profile::Constant(vom);
    c.category = Some(hubopt::model::Category::Power);
    c
}

pub fn hyperedge(id: &str, commodity: &str, producers: &[(&str, &str)], consumers: &[(&str, &str)], demand: Vec<f64>, ens: EnsPolicy) -> Hyperedge {
    Hyperedge {
        id: id.into(),
        cluster: None,
        commodity: commodity.into(),
        producers: producers.iter().map(|&(n, p)| PortRef::new(n, p)).collect(),
        consumers: consumers.iter().map(|&(n, p)| PortRef::new(n, p)).collect(),
        demand,
        ens,
    }
}

/// Two plants serve a flat electricity demand of 1 GWh/h. `dirty` emits
/// `factor` kt CO2 per GWh; `clean` emits nothing but costs more to run and
/// to build.
pub struct AbatementToy {
    pub steps: usize,
    pub step_hours: f64,
    pub years: f64,
    pub factor: f64,
    pub vom: (f64, f64),
    pub capex: (f64, f64),
    pub lifetime: f64,
    pub wacc: f64,
}

impl Default for AbatementToy {
    fn default() -> Self {
        AbatementToy {
            steps: 4,
            step_hours: 1.0,
            years: 0.5,
            factor: 0.4,
            vom: (0.01, 0.05),
            capex: (1.0, 3.0),
            lifetime: 10.0,
            wacc: 0.07,
        }
    }
}

impl AbatementToy {
    pub fn build(&self, policy: EmissionPolicy) -> EnergySystem {
        let mut sys = system(
            self.steps,
            self.step_hours,
            self.years,
            &[("elec", Unit::Energy), ("co2", Unit::Mass)],
        );
        sys.wacc = self.wacc;
        let mut dirty = generator("dirty", "BE", "elec", self.vom.0)
            .with_port("stack", Port::output("co2", self.factor).with_atmosphere(AtmosphereRole::Releases));
        dirty.capex = self.capex.0;
        dirty.lifetime = self.lifetime;
        let mut clean = generator("clean", "BE", "elec", self.vom.1);
        clean.capex = self.capex.1;
        clean.lifetime = self.lifetime;
        sys.nodes.push(Node::Conversion(dirty));
        sys.nodes.push(Node::Conversion(clean));
        sys.hyperedges.push(hyperedge(
            "grid",
            "elec",
            &[("dirty", "out"), ("clean", "out")],
            &[],
            vec![1.0; self.steps],
            EnsPolicy::Forbidden,
        ));
        sys.emission = policy;
        sys
    }

    /// Cost of avoiding one kt by shifting a constant slice of output from
    /// the dirty to the clean plant, M€/kt. Capacity follows the flat
    /// dispatch, so the annualized capex difference is spread over the
    /// horizon's energy.
    pub fn abatement_cost(&self) -> f64 {
        let annuity = |c: f64| c * self.wacc / (1.0 - (1.0 + self.wacc).powf(-self.lifetime));
        let energy = self.steps as f64 * self.step_hours;
        let per_gwh = (self.vom.1 - self.vom.0) + self.years * (annuity(self.capex.1) - annuity(self.capex.0)) / energy;
        per_gwh / self.factor
    }

    /// Total emissions with only the dirty plant, kt over the horizon.
    pub fn baseline_emissions(&self) -> f64 {
        self.factor * self.steps as f64 * self.step_hours
    }
}

/// CO2 supply for a remote methanation site. Industry in BE emits a steady
/// 1 kt/h of flue gas that is either vented or scrubbed by PCCC and shipped
/// to the hub; the hub can also run DAC. The hub needs `hub_demand` kt/h.
/// Electricity, hydrogen and ship fuel are bought at fixed prices, and
/// captured CO2 the hub does not take is stored away at 20 €/t.
pub struct CaptureToy {
    pub steps: usize,
    pub hub_demand: f64,
    /// Multiplier on the CO2 carrier's capex and fuel, a stand-in for
    /// shipping distance.
    pub distance: f64,
}

impl Default for CaptureToy {
    fn default() -> Self {
        CaptureToy {
            steps: 24,
            hub_demand: 0.5,
            distance: 1.0,
        }
    }
}

impl CaptureToy {
    pub const FLUE: f64 = 1.0;

    pub fn build(&self, policy: EmissionPolicy) -> EnergySystem {
        use hubopt::catalog::preset;
        let steps = self.steps;
        let mut sys = system(
            steps,
            1.0,
            steps as f64 / 8760.0,
            &[
                ("co2", Unit::Mass),
                ("electricity", Unit::Energy),
                ("hydrogen", Unit::Mass),
                ("ch4", Unit::Mass),
                ("water", Unit::Water),
            ],
        );
        let mut industry = ConversionTech::new("industry", "BE", "flue", "co2", Direction::Out);
        industry.preinstalled = Self::FLUE;
        industry.max_potential = Self::FLUE;
        industry.must_run = 1.0;
        let mut vent = ConversionTech::new("vent", "BE", "flue", "co2", Direction::In);
        vent.ports.get_mut("flue").unwrap().atmosphere = AtmosphereRole::Releases;
        let mut storage = ConversionTech::new("storage", "BE", "co2", "co2", Direction::In);
        storage.vom = Profile::Constant(0.02);
        let mut carrier = preset("co2_carrier").unwrap().instantiate("carrier", "HUB");
        if let Node::Conversion(c) = &mut carrier {
            c.capex *= self.distance;
            c.ports.get_mut("fuel").unwrap().factor *= self.distance;
        }
        sys.nodes.extend([
            Node::Conversion(industry),
            Node::Conversion(vent),
            Node::Conversion(storage),
            preset("pccc").unwrap().instantiate("pccc", "BE"),
            Node::Conversion(generator("power_be", "BE", "electricity", 0.05)),
            Node::Conversion(generator("fuel_be", "BE", "ch4", 1.0)),
            carrier,
            preset("dac").unwrap().instantiate("dac", "HUB"),
            Node::Conversion(generator("power_hub", "HUB", "electricity", 0.03)),
            Node::Conversion(generator("h2_hub", "HUB", "hydrogen", 3.0)),
        ]);
        let he = |id: &str, c: &str, p: &[(&str, &str)], q: &[(&str, &str)]| hyperedge(id, c, p, q, vec![0.0; steps], EnsPolicy::Forbidden);
        sys.hyperedges.extend([
            he("flue_be", "co2", &[("industry", "flue")], &[("pccc", "co2_flue"), ("vent", "flue")]),
            he("co2_be", "co2", &[("pccc", "co2_captured")], &[("carrier", "co2_in"), ("storage", "co2")]),
            he("elec_be", "electricity", &[("power_be", "out")], &[("pccc", "electricity")]),
            he("ship_fuel_be", "ch4", &[("fuel_be", "out")], &[("carrier", "fuel")]),
            hyperedge(
                "co2_hub",
                "co2",
                &[("carrier", "co2_out"), ("dac", "co2")],
                &[],
                vec![self.hub_demand; steps],
                EnsPolicy::Forbidden,
            ),
            he("elec_hub", "electricity", &[("power_hub", "out")], &[("dac", "electricity")]),
            he("hydrogen_hub", "hydrogen", &[("h2_hub", "out")], &[("dac", "hydrogen")]),
        ]);
        sys.emission = policy;
        sys
    }
}
