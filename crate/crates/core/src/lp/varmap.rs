use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

/// What an LP column stands for within its entity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    /// Installed capacity `K` of a conversion node.
    Capacity,
    /// Stock capacity `E` of a storage node.
    StockCapacity,
    /// Charge-flow capacity `K` of a storage node.
    FlowCapacity,
    /// Flow through the named port.
    Flow(String),
    /// State of charge `e_t` of a storage node.
    Stock,
    /// Energy-not-served slack of a hyperedge.
    Ens,
}

impl Role {
    /// Role segment of the column name.
    pub fn label(&self) -> String {
        match self {
            Role::Capacity => "cap".into(),
            Role::StockCapacity => "cap_stock".into(),
            Role::FlowCapacity => "cap_flow".into(),
            Role::Flow(port) => format!("flow_{port}"),
            Role::Stock => "stock".into(),
            Role::Ens => "ens".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct VarKey {
    /// Node or hyperedge id.
    pub entity: String,
    pub role: Role,
    pub t: Option<usize>,
}

impl fmt::Display for VarKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.entity, self.role.label())?;
        if let Some(t) = self.t {
            write!(f, ".{t}")?;
        }
        Ok(())
    }
}

/// Bijection between LP columns and model variables, plus the rows that
/// analysis reads duals from.
#[derive(Clone, Debug, Default)]
pub struct VariableMap {
    steps: usize,
    keys: Vec<VarKey>,
    index: HashMap<VarKey, usize>,
    scalars: HashMap<String, HashMap<Role, usize>>,
    series: HashMap<String, HashMap<Role, usize>>,
    balance_rows: HashMap<String, usize>,
    co2_cap_row: Option<usize>,
}

impl VariableMap {
    pub(crate) fn new(steps: usize) -> Self {
        VariableMap {
            steps,
            ..Default::default()
        }
    }

    fn push(&mut self, key: VarKey) -> usize {
        let col = self.keys.len();
        let fresh = self.index.insert(key.clone(), col).is_none();
        assert!(fresh, "variable {key} registered twice");
        self.keys.push(key);
        col
    }

    /// Registers a scalar column and returns its index.
    pub(crate) fn add_scalar(&mut self, entity: &str, role: Role) -> usize {
        let col = self.push(VarKey {
            entity: entity.to_string(),
            role: role.clone(),
            t: None,
        });
        self.scalars.entry(entity.to_string()).or_default().insert(role, col);
        col
    }

    /// Registers `T` consecutive columns and returns the first index.
    pub(crate) fn add_series(&mut self, entity: &str, role: Role) -> usize {
        let base = self.keys.len();
        for t in 0..self.steps {
            self.push(VarKey {
                entity: entity.to_string(),
                role: role.clone(),
                t: Some(t),
            });
        }
        self.series.entry(entity.to_string()).or_default().insert(role, base);
        base
    }

    pub(crate) fn set_balance_row(&mut self, hyperedge: &str, first_row: usize) {
        self.balance_rows.insert(hyperedge.to_string(), first_row);
    }

    pub(crate) fn set_co2_cap_row(&mut self, row: usize) {
        self.co2_cap_row = Some(row);
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn key(&self, col: usize) -> &VarKey {
        &self.keys[col]
    }

    pub fn keys(&self) -> &[VarKey] {
        &self.keys
    }

    pub fn column(&self, key: &VarKey) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn scalar(&self, entity: &str, role: &Role) -> Option<usize> {
        self.scalars.get(entity)?.get(role).copied()
    }

    /// Column of `role` at step `t`.
    pub fn at(&self, entity: &str, role: &Role, t: usize) -> Option<usize> {
        if t >= self.steps {
            return None;
        }
        Some(self.series.get(entity)?.get(role)? + t)
    }

    pub fn capacity(&self, node: &str) -> Option<usize> {
        self.scalar(node, &Role::Capacity)
            .or_else(|| self.scalar(node, &Role::FlowCapacity))
    }

    pub fn flow(&self, node: &str, port: &str, t: usize) -> Option<usize> {
        self.at(node, &Role::Flow(port.to_string()), t)
    }

    pub fn ens(&self, hyperedge: &str, t: usize) -> Option<usize> {
        self.at(hyperedge, &Role::Ens, t)
    }

    pub fn balance_row(&self, hyperedge: &str, t: usize) -> Option<usize> {
        if t >= self.steps {
            return None;
        }
        self.balance_rows.get(hyperedge).map(|r| r + t)
    }

    pub fn co2_cap_row(&self) -> Option<usize> {
        self.co2_cap_row
    }
}
