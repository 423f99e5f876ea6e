use thiserror::Error;

use super::objective::{assemble_objective, AnnuityError};
use super::policy::emit_co2_policy;
use super::problem::{LpBuilder, LpError, LpProblem, RowSense};
use super::varmap::{Role, VariableMap};
use crate::model::{validate_system, ConversionTech, EnergySystem, EnsPolicy, Node, StorageTech, ValidationReport};

#[derive(Debug, Error)]
pub enum CompileError {
    #[error("system failed validation:\n{0}")]
    Invalid(ValidationReport),
    #[error("emission cap set but no port is tagged as atmospheric release or capture")]
    NoAtmospherePorts,
    #[error(transparent)]
    Annuity(#[from] AnnuityError),
    #[error(transparent)]
    Lp(#[from] LpError),
}

const INF: f64 = f64::INFINITY;

struct Ctx<'a> {
    b: LpBuilder,
    vm: VariableMap,
    sys: &'a EnergySystem,
}

impl Ctx<'_> {
    fn scalar(&mut self, entity: &str, role: Role) -> usize {
        let name = format!("{entity}.{}", role.label());
        let col = self.vm.add_scalar(entity, role);
        let got = self.b.add_col(name, 0.0, 0.0, INF);
        debug_assert_eq!(col, got);
        col
    }

    fn series(&mut self, entity: &str, role: Role) -> usize {
        let base = self.vm.add_series(entity, role.clone());
        let label = role.label();
        for t in 0..self.sys.time.steps {
            let got = self.b.add_col(format!("{entity}.{label}.{t}"), 0.0, 0.0, INF);
            debug_assert_eq!(base + t, got);
        }
        base
    }

    fn flow(&self, node: &str, port: &str, t: usize) -> usize {
        self.vm.flow(node, port, t).expect("flow registered")
    }

    fn conversion(&mut self, c: &ConversionTech) {
        let steps = self.sys.time.steps;
        let id = c.id.as_str();
        let k = self.scalar(id, Role::Capacity);
        for name in c.ports.keys() {
            self.series(id, Role::Flow(name.clone()));
        }

        for (name, port) in &c.ports {
            if *name == c.reference {
                continue;
            }
            // q_i at t + τ is tied to the reference flow at t; shifts past
            // the horizon are dropped.
            for t in 0..steps.saturating_sub(port.delay) {
                let q_i = self.flow(id, name, t + port.delay);
                let q_r = self.flow(id, &c.reference, t);
                self.b.add_row(
                    format!("{id}.conv_{name}.{t}"),
                    RowSense::Eq,
                    0.0,
                    &[(q_i, 1.0), (q_r, -port.factor)],
                );
            }
        }

        let lower = c.preinstalled;
        for t in 0..steps {
            let pi = c.capacity_factor.as_ref().map_or(1.0, |cf| cf[t]);
            let q = self.flow(id, &c.reference, t);
            self.b
                .add_row(format!("{id}.sizing.{t}"), RowSense::Le, pi * lower, &[(q, 1.0), (k, -pi)]);
        }
        if c.max_potential.is_finite() {
            self.b
                .add_row(format!("{id}.potential"), RowSense::Le, c.max_potential - lower, &[(k, 1.0)]);
        }

        // Must-run and ramping act on the operating port, rescaled to
        // reference units.
        let op = c.operating_port();
        let scale = 1.0 / c.ports[op].factor;
        if c.must_run > 0.0 {
            let mu = c.must_run;
            for t in 0..steps {
                let q = self.flow(id, op, t);
                self.b.add_row(
                    format!("{id}.mustrun.{t}"),
                    RowSense::Le,
                    -mu * lower,
                    &[(k, mu), (q, -scale)],
                );
            }
        }
        for (rate, tag, sign) in [(c.ramp_up, "rampup", 1.0), (c.ramp_down, "rampdown", -1.0)] {
            let Some(rate) = rate else { continue };
            for t in 1..steps {
                let now = self.flow(id, op, t);
                let prev = self.flow(id, op, t - 1);
                self.b.add_row(
                    format!("{id}.{tag}.{t}"),
                    RowSense::Le,
                    rate * lower,
                    &[(now, sign * scale), (prev, -sign * scale), (k, -rate)],
                );
            }
        }
    }

    fn storage(&mut self, s: &StorageTech) {
        let steps = self.sys.time.steps;
        let id = s.id.as_str();
        let cap_e = self.scalar(id, Role::StockCapacity);
        let cap_k = self.scalar(id, Role::FlowCapacity);
        let e = self.series(id, Role::Stock);
        let qc = self.series(id, Role::Flow(StorageTech::CHARGE.into()));
        let qd = self.series(id, Role::Flow(StorageTech::DISCHARGE.into()));
        let aux: Vec<(String, usize, f64)> = s
            .aux
            .iter()
            .map(|(c, &phi)| (c.clone(), self.series(id, Role::Flow(c.clone())), phi))
            .collect();

        for t in 0..steps - 1 {
            self.b.add_row(
                format!("{id}.dynamics.{t}"),
                RowSense::Eq,
                0.0,
                &[
                    (e + t + 1, 1.0),
                    (e + t, -(1.0 - s.self_discharge)),
                    (qc + t, -s.charge_eff),
                    (qd + t, 1.0 / s.discharge_eff),
                ],
            );
        }
        for (c, base, phi) in &aux {
            for t in 0..steps {
                self.b.add_row(
                    format!("{id}.aux_{c}.{t}"),
                    RowSense::Eq,
                    0.0,
                    &[(base + t, 1.0), (qc + t, -phi)],
                );
            }
        }
        self.b.add_row(
            format!("{id}.cyclic"),
            RowSense::Eq,
            0.0,
            &[(e, 1.0), (e + steps - 1, -1.0)],
        );

        let stock_lower = s.stock.preinstalled;
        for t in 0..steps {
            self.b.add_row(
                format!("{id}.stock_sizing.{t}"),
                RowSense::Le,
                stock_lower,
                &[(e + t, 1.0), (cap_e, -1.0)],
            );
        }
        if s.stock.max.is_finite() {
            self.b.add_row(
                format!("{id}.stock_potential"),
                RowSense::Le,
                s.stock.max - stock_lower,
                &[(cap_e, 1.0)],
            );
        }
        if s.min_soc > 0.0 {
            for t in 0..steps {
                self.b.add_row(
                    format!("{id}.min_soc.{t}"),
                    RowSense::Le,
                    -s.min_soc * stock_lower,
                    &[(cap_e, s.min_soc), (e + t, -1.0)],
                );
            }
        }

        let flow_lower = s.flow.preinstalled;
        for t in 0..steps {
            self.b.add_row(
                format!("{id}.charge_sizing.{t}"),
                RowSense::Le,
                flow_lower,
                &[(qc + t, 1.0), (cap_k, -1.0)],
            );
        }
        let rho = s.discharge_ratio;
        for t in 0..steps {
            self.b.add_row(
                format!("{id}.discharge_sizing.{t}"),
                RowSense::Le,
                rho * flow_lower,
                &[(qd + t, 1.0), (cap_k, -rho)],
            );
        }
        if s.flow.max.is_finite() {
            self.b.add_row(
                format!("{id}.flow_potential"),
                RowSense::Le,
                s.flow.max - flow_lower,
                &[(cap_k, 1.0)],
            );
        }
    }

    fn hyperedges(&mut self) {
        let sys = self.sys;
        for he in &sys.hyperedges {
            if matches!(he.ens, EnsPolicy::Penalized { .. }) {
                self.series(&he.id, Role::Ens);
            }
        }
        for he in &sys.hyperedges {
            let first = self.b.num_rows();
            self.vm.set_balance_row(&he.id, first);
            for t in 0..sys.time.steps {
                let mut coeffs: Vec<(usize, f64)> = Vec::new();
                for r in &he.producers {
                    coeffs.push((self.flow(&r.node, &r.port, t), 1.0));
                }
                for r in &he.consumers {
                    coeffs.push((self.flow(&r.node, &r.port, t), -1.0));
                }
                if let Some(s) = self.vm.ens(&he.id, t) {
                    coeffs.push((s, 1.0));
                }
                self.b
                    .add_row(format!("{}.balance.{t}", he.id), RowSense::Eq, he.demand[t], &coeffs);
            }
        }
    }
}

/// Emits every node and hyperedge constraint with a zero objective.
///
/// Column and row names follow `<entity>.<role>[.<t>]`, e.g.
/// `pccc_be.flow_electricity.12`, `battery.cap_stock`, `grid.balance.0`.
pub fn compile_structure(system: &EnergySystem) -> Result<(LpProblem, VariableMap), CompileError> {
    let report = validate_system(system);
    if !report.is_empty() {
        return Err(CompileError::Invalid(report));
    }
    let mut ctx = Ctx {
        b: LpBuilder::new("hubopt"),
        vm: VariableMap::new(system.time.steps),
        sys: system,
    };
    for node in &system.nodes {
        match node {
            Node::Conversion(c) => ctx.conversion(c),
            Node::Storage(s) => ctx.storage(s),
        }
    }
    ctx.hyperedges();
    Ok((ctx.b.build()?, ctx.vm))
}

/// Full LP: constraints, cost objective and the emission policy.
pub fn compile(system: &EnergySystem) -> Result<(LpProblem, VariableMap), CompileError> {
    let (lp, mut vm) = compile_structure(system)?;
    let lp = lp.with_objective(assemble_objective(system, &vm)?)?;
    let lp = emit_co2_policy(system, &lp, &mut vm)?;
    Ok((lp, vm))
}
