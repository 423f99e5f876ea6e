mod common;

use std::collections::BTreeSet;

use common::enumerate::random_lp;
use common::fixtures::AbatementToy;
use common::random_system::random_system;
use hubopt::analysis::{capacities, co2_shadow_price, cost_breakdown};
use hubopt::lp::compile;
use hubopt::model::{force_hub, validate_system, EmissionPolicy, EnergySystem, EnsPolicy, Node, Profile};
use hubopt::runner::{synth_series, SynthKind};
use hubopt::solver::{solve, verify_kkt, SolveOptions, Status};
use proptest::prelude::*;

const CLUSTERS: [&str; 4] = ["BE", "DZ", "GL", "NO"];

fn set_cluster(node: &mut Node, cluster: &str) {
    match node {
        Node::Conversion(c) => c.cluster = cluster.into(),
        Node::Storage(s) => s.cluster = cluster.into(),
    }
}

/// A random system whose nodes and hyperedges are spread over four clusters.
fn clustered(seed: u64, picks: &[usize]) -> EnergySystem {
    let (mut sys, _) = random_system(seed);
    for (k, node) in sys.nodes.iter_mut().enumerate() {
        set_cluster(node, CLUSTERS[picks[k % picks.len()]]);
    }
    for (k, he) in sys.hyperedges.iter_mut().enumerate() {
        he.cluster = Some(CLUSTERS[picks[(k + 1) % picks.len()]].into());
    }
    sys
}

fn scale_profile(p: &mut Profile, a: f64) {
    match p {
        Profile::Constant(v) => *v *= a,
        Profile::Series(s) => s.iter_mut().for_each(|v| *v *= a),
    }
}

/// Multiplies every cost coefficient of the system by `a`.
fn scale_costs(sys: &mut EnergySystem, a: f64) {
    for node in &mut sys.nodes {
        match node {
            Node::Conversion(c) => {
                c.capex *= a;
                c.fom *= a;
                scale_profile(&mut c.vom, a);
            }
            Node::Storage(s) => {
                for b in [&mut s.stock, &mut s.flow] {
                    b.capex *= a;
                    b.fom *= a;
                    scale_profile(&mut b.vom, a);
                }
            }
        }
    }
    for he in &mut sys.hyperedges {
        if let EnsPolicy::Penalized { price } = &mut he.ens {
            *price *= a;
        }
    }
    if let EmissionPolicy::Price { meur_per_kt } = &mut sys.emission {
        *meur_per_kt *= a;
    }
}

fn toy(dirty_vom: f64, clean_vom: f64, factor: f64) -> AbatementToy {
    AbatementToy {
        vom: (dirty_vom, dirty_vom + clean_vom),
        factor,
        ..AbatementToy::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn validation_is_pure(seed in 0u64..5000, drop_node in any::<bool>()) {
        let (mut sys, _) = random_system(seed);
        if drop_node {
            sys.nodes.remove(0);
        }
        let before = sys.clone();
        let a = validate_system(&sys);
        let b = validate_system(&sys);
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(&sys, &before);
    }

    #[test]
    fn force_hub_keeps_exactly_the_hub_and_the_demand_centre(
        seed in 0u64..5000,
        picks in prop::collection::vec(0usize..4, 1..6),
        forced in 0usize..4,
    ) {
        let sys = clustered(seed, &picks);
        let forced = CLUSTERS[forced];
        match force_hub(&sys, forced) {
            Err(_) => prop_assert!(!sys.clusters().contains(forced)),
            Ok(out) => {
                let keep = |c: &str| c == forced || c == sys.demand_cluster;
                let ids = |s: &EnergySystem| s.nodes.iter().map(|n| n.id().to_string()).collect::<BTreeSet<_>>();
                let expected: BTreeSet<String> =
                    sys.nodes.iter().filter(|n| keep(n.cluster())).map(|n| n.id().to_string()).collect();
                prop_assert_eq!(ids(&out), expected);
                let alive = ids(&out);
                for he in &out.hyperedges {
                    prop_assert!(he.cluster.as_deref().is_none_or(keep));
                    for r in he.producers.iter().chain(&he.consumers) {
                        prop_assert!(alive.contains(&r.node));
                    }
                }
                prop_assert!(validate_system(&out).is_empty(), "{}", validate_system(&out));
            }
        }
    }

    #[test]
    fn optimal_solves_satisfy_kkt_and_repeat_bitwise(seed in 0u64..100_000) {
        let lp = random_lp(seed);
        let opts = SolveOptions::default();
        let a = solve(&lp, &opts).unwrap();
        let b = solve(&lp, &opts).unwrap();
        prop_assert_eq!(&a, &b);
        if a.is_optimal() {
            let kkt = verify_kkt(&lp, &a);
            prop_assert!(kkt.passes(1e-6), "{:?}", kkt);
        }
    }

    #[test]
    fn compiled_counts_match_closed_form(seed in 1000u64..1_000_000) {
        let (sys, exp) = random_system(seed);
        let (lp, vm) = compile(&sys).unwrap();
        prop_assert_eq!(lp.num_rows(), exp.rows);
        prop_assert_eq!(lp.num_cols(), exp.cols);
        prop_assert_eq!(vm.len(), lp.num_cols());
    }

    #[test]
    fn scaling_costs_scales_objective_and_keeps_capacities(
        dirty in 0.005f64..0.05,
        premium in 0.01f64..0.1,
        factor in 0.1f64..1.0,
        share in 0.1f64..0.9,
        alpha in 0.01f64..100.0,
    ) {
        let t = toy(dirty, premium, factor);
        let policy = EmissionPolicy::Cap { kt_per_year: share * t.baseline_emissions() / t.years };
        let base = t.build(policy);
        let mut scaled = base.clone();
        scale_costs(&mut scaled, alpha);
        let run = |sys: &EnergySystem| {
            let (lp, vm) = compile(sys).unwrap();
            let sol = solve(&lp, &SolveOptions::default()).unwrap();
            assert!(sol.is_optimal());
            let caps: Vec<f64> = capacities(sys, &vm, &sol).into_iter().map(|c| c.capacity).collect();
            (sol.objective, caps)
        };
        let (obj, caps) = run(&base);
        let (obj_a, caps_a) = run(&scaled);
        prop_assert!((obj_a - alpha * obj).abs() <= 1e-9 * (alpha * obj).abs().max(1.0), "{} vs {}", obj_a, alpha * obj);
        for (x, y) in caps.iter().zip(&caps_a) {
            prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0), "{:?} vs {:?}", caps, caps_a);
        }
    }

    #[test]
    fn cap_price_is_positive_exactly_when_binding(share in 0.05f64..3.0) {
        prop_assume!((share - 1.0).abs() > 1e-3);
        let t = AbatementToy::default();
        let sys = t.build(EmissionPolicy::Cap { kt_per_year: share * t.baseline_emissions() / t.years });
        let (lp, vm) = compile(&sys).unwrap();
        let sol = solve(&lp, &SolveOptions::default()).unwrap();
        prop_assert_eq!(sol.status, Status::Optimal);
        let price = co2_shadow_price(&sys, &vm, &sol).unwrap();
        if share < 1.0 {
            prop_assert!(price > 0.0);
        } else {
            prop_assert_eq!(price, 0.0);
        }
    }

    #[test]
    fn breakdown_reconciles_with_objective(
        price in 0.0f64..0.5,
        dirty in 0.005f64..0.05,
        premium in 0.01f64..0.1,
    ) {
        let sys = toy(dirty, premium, 0.4).build(EmissionPolicy::Price { meur_per_kt: price });
        let (lp, vm) = compile(&sys).unwrap();
        let sol = solve(&lp, &SolveOptions::default()).unwrap();
        let b = cost_breakdown(&sys, &vm, &sol).unwrap();
        let want = sol.objective - b.ens_penalty - b.co2_fees;
        prop_assert!((b.node_total() - want).abs() <= 1e-6 * want.abs().max(1.0));
    }

    #[test]
    fn random_systems_reconcile(seed in 0u64..5000) {
        let (sys, _) = random_system(seed);
        let (lp, vm) = compile(&sys).unwrap();
        let sol = solve(&lp, &SolveOptions::default()).unwrap();
        prop_assert!(sol.is_optimal());
        prop_assert!(verify_kkt(&lp, &sol).passes(1e-6));
        let b = cost_breakdown(&sys, &vm, &sol).unwrap();
        // random nodes carry no atmosphere tags, so fees are zero
        prop_assert_eq!(b.co2_fees, 0.0);
        let want = sol.objective - b.ens_penalty;
        prop_assert!((b.node_total() - want).abs() <= 1e-6 * want.abs().max(1.0));
    }

    #[test]
    fn synthetic_series_are_reproducible_and_in_range(seed in any::<u64>(), steps in 2usize..600, k in 0usize..7) {
        let kind = SynthKind::ALL[k];
        let a = synth_series(kind, steps, seed);
        prop_assert_eq!(a.to_csv(), synth_series(kind, steps, seed).to_csv());
        let v = &a.columns[0];
        prop_assert_eq!(v.len(), steps);
        if kind.is_capacity_factor() {
            prop_assert!(v.iter().all(|x| (0.0..=1.0).contains(x)));
        } else {
            prop_assert!(v.iter().all(|&x| x >= 0.0 && x.is_finite()));
        }
    }
}
