//! Random well-formed systems over a single commodity, plus the closed-form
//! row and column counts they must compile to.

use hubopt::model::{
    CapacityBlock, Category, ConversionTech, Direction, EnergySystem, EnsPolicy, Hyperedge, Node, Port, PortRef,
    Profile, StorageTech, Unit,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::fixtures::system;

pub struct Expected {
    pub rows: usize,
    pub cols: usize,
}

fn conversion(rng: &mut ChaCha8Rng, id: &str, steps: usize, exp: &mut Expected) -> ConversionTech {
    let dir = if rng.gen_bool(0.5) { Direction::Out } else { Direction::In };
    let mut c = ConversionTech::new(id, "BE", "p0", "c", dir);
    c.category = Some(Category::Conversion);
    let ports = rng.gen_range(1..=4);
    for k in 1..ports {
        let factor = (rng.gen_range(0.0..3.0_f64) * 8.0).round() / 8.0;
        let dir = if rng.gen_bool(0.5) { Direction::Out } else { Direction::In };
        let delay = if rng.gen_bool(0.3) { rng.gen_range(0..=steps + 1) } else { 0 };
        let port = Port {
            commodity: "c".into(),
            direction: dir,
            factor,
            delay,
            atmosphere: Default::default(),
        };
        exp.rows += steps.saturating_sub(delay);
        c.ports.insert(format!("p{k}"), port);
    }
    exp.cols += 1 + ports * steps;
    exp.rows += steps;
    if rng.gen_bool(0.5) {
        c.capacity_factor = Some((0..steps).map(|_| rng.gen_range(0.0..=1.0)).collect());
    }
    if rng.gen_bool(0.5) {
        c.max_potential = rng.gen_range(1.0..10.0);
        exp.rows += 1;
    }
    // Must-run and ramps act on a port with positive factor.
    let op = c
        .ports
        .iter()
        .filter(|(_, p)| p.factor > 0.0)
        .map(|(n, _)| n.clone())
        .next_back()
        .expect("reference port qualifies");
    c.operating_port = Some(op);
    if rng.gen_bool(0.4) {
        c.must_run = rng.gen_range(0.05..0.5);
        exp.rows += steps;
    }
    if rng.gen_bool(0.4) {
        c.ramp_up = Some(rng.gen_range(0.0..=1.0));
        exp.rows += steps - 1;
    }
    if rng.gen_bool(0.4) {
        c.ramp_down = Some(rng.gen_range(0.0..=1.0));
        exp.rows += steps - 1;
    }
    c.capex = rng.gen_range(0.0..5.0);
    c.lifetime = rng.gen_range(1..40) as f64;
    c.fom = rng.gen_range(0.0..0.5);
    c.vom = Profile::Constant(rng.gen_range(0.0..0.2));
    c
}

fn storage(rng: &mut ChaCha8Rng, id: &str, steps: usize, exp: &mut Expected) -> StorageTech {
    let mut s = StorageTech::new(id, "BE", "c");
    s.category = Some(Category::Flexibility);
    s.self_discharge = rng.gen_range(0.0..0.1);
    s.charge_eff = rng.gen_range(0.5..=1.0);
    s.discharge_eff = rng.gen_range(0.5..=1.0);
    s.discharge_ratio = rng.gen_range(0.5..2.0);
    let aux = rng.gen_range(0..=2);
    for k in 0..aux {
        s.aux.insert(format!("aux{k}"), rng.gen_range(0.0..0.3));
    }
    exp.cols += 2 + (3 + aux) * steps;
    exp.rows += (steps - 1) + aux * steps + 1 + steps + steps + steps;
    if rng.gen_bool(0.5) {
        s.min_soc = rng.gen_range(0.05..0.5);
        exp.rows += steps;
    }
    let block = |rng: &mut ChaCha8Rng, exp: &mut Expected| {
        let mut b = CapacityBlock {
            capex: rng.gen_range(0.0..3.0),
            lifetime: rng.gen_range(1..30) as f64,
            ..Default::default()
        };
        if rng.gen_bool(0.5) {
            b.max = rng.gen_range(1.0..10.0);
            exp.rows += 1;
        }
        b
    };
    s.stock = block(rng, exp);
    s.flow = block(rng, exp);
    s
}

/// A random system and the row/column counts it must produce. All
/// hyperedges carry a costly ENS slack, so the LP is always feasible and,
/// with nonnegative costs, bounded.
pub fn random_system(seed: u64) -> (EnergySystem, Expected) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let steps = rng.gen_range(2..=6);
    let mut sys = system(steps, rng.gen_range(0.5..2.0), rng.gen_range(0.1..2.0), &[("c", Unit::Energy), ("aux0", Unit::Energy), ("aux1", Unit::Energy)]);
    let mut exp = Expected { rows: 0, cols: 0 };
    let nodes = rng.gen_range(1..=4);
    for k in 0..nodes {
        let node = if rng.gen_bool(0.7) {
            Node::Conversion(conversion(&mut rng, &format!("n{k}"), steps, &mut exp))
        } else {
            Node::Storage(storage(&mut rng, &format!("s{k}"), steps, &mut exp))
        };
        sys.nodes.push(node);
    }
    let mut outs = Vec::new();
    let mut ins = Vec::new();
    for node in &sys.nodes {
        for p in node.ports().into_iter().filter(|p| p.commodity == "c") {
            let r = PortRef::new(node.id(), p.name);
            match p.direction {
                Direction::Out => outs.push(r),
                Direction::In => ins.push(r),
            }
        }
    }
    let edges = rng.gen_range(1..=3);
    for k in 0..edges {
        let pick = |rng: &mut ChaCha8Rng, from: &[PortRef]| -> Vec<PortRef> {
            from.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect()
        };
        let producers = pick(&mut rng, &outs);
        let consumers = pick(&mut rng, &ins);
        sys.hyperedges.push(Hyperedge {
            id: format!("h{k}"),
            cluster: None,
            commodity: "c".into(),
            producers,
            consumers,
            demand: (0..steps).map(|_| rng.gen_range(0.0..3.0)).collect(),
            ens: EnsPolicy::Penalized {
                price: rng.gen_range(5.0..20.0),
            },
        });
        exp.rows += steps;
        exp.cols += steps;
    }
    (sys, exp)
}
