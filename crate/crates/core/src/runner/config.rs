//! Declarative study configuration in TOML.
//!
//! ```toml
//! series = ["series.csv"]          # paths relative to this file
//!
//! [horizon]
//! steps = 168
//! step_hours = 1.0                 # default 1
//! years = 0.0192                   # default steps * step_hours / 8760
//! wacc = 0.07                      # default 0.07
//! demand_cluster = "BE"
//!
//! [[commodity]]
//! id = "electricity"
//! unit = "energy"                  # energy | mass | water
//!
//! [[node]]                         # from the catalog, with overrides
//! id = "solar_dz"
//! preset = "solar"
//! cluster = "DZ"
//! capacity_factor = "solar_dz"     # series name, or an inline array
//!
//! [[node]]                         # inline definition
//! id = "vent"
//! kind = "conversion"              # conversion | storage
//! cluster = "BE"
//! reference = "flue"
//! ports.flue = { commodity = "co2", direction = "in", atmosphere = "releases" }
//!
//! [[hyperedge]]
//! id = "elec_be"
//! commodity = "electricity"
//! producers = ["solar_be.electricity"]
//! consumers = ["pccc.electricity"]
//! demand = "elec_demand"           # series name, constant, or array
//! demand_scale = 1.0               # optional multiplier
//! ens = "forbidden"                # or a price in M€ per commodity unit
//!
//! [methane]                        # optional cost-of-methane tags
//! delivery = "gas_grid.ch4"
//! power_nodes = ["ccgt"]
//! co2_export_nodes = ["co2_export"]
//!
//! [[scenario]]
//! name = "cap_ens"
//! co2_cap = 0.0                    # kt/yr; exclusive with co2_price (M€/kt)
//! ens = 3.0                        # all demand hyperedges; or "forbidden",
//!                                  # or a table keyed by hyperedge id
//! force_hub = "GL"                 # optional
//! wacc = 0.07                      # optional override
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use toml::{Spanned, Table, Value};

use super::series::{SeriesError, SeriesRole, SeriesStore};
use crate::catalog::{self, Source};
use crate::model::{
    force_hub, Commodity, ConversionTech, Direction, EmissionPolicy, EnergySystem, EnsPolicy, Hyperedge,
    MethaneAccounting, Node, PortRef, StorageTech, TimeGrid, DEFAULT_CH4_HHV_MWH_PER_T, DEFAULT_WACC,
};

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("{file}: {message}")]
    Io { file: String, message: String },
    #[error("{file}, line {line}: {message}")]
    At { file: String, line: usize, message: String },
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Horizon {
    pub steps: usize,
    #[serde(default = "one")]
    pub step_hours: f64,
    pub years: Option<f64>,
    #[serde(default = "default_wacc")]
    pub wacc: f64,
    pub demand_cluster: String,
}

fn one() -> f64 {
    1.0
}

fn default_wacc() -> f64 {
    DEFAULT_WACC
}

fn default_hhv() -> f64 {
    DEFAULT_CH4_HHV_MWH_PER_T
}

impl Horizon {
    pub fn years(&self) -> f64 {
        self.years.unwrap_or(self.steps as f64 * self.step_hours / 8760.0)
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
enum EnsSpec {
    Price(f64),
    Keyword(String),
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
enum DemandSpec {
    Constant(f64),
    Series(String),
    Values(Vec<f64>),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct HyperedgeConfig {
    id: String,
    cluster: Option<String>,
    commodity: String,
    #[serde(default)]
    producers: Vec<String>,
    #[serde(default)]
    consumers: Vec<String>,
    demand: Option<DemandSpec>,
    demand_scale: Option<f64>,
    ens: Option<EnsSpec>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MethaneConfig {
    delivery: String,
    #[serde(default)]
    power_nodes: Vec<String>,
    #[serde(default)]
    co2_export_nodes: Vec<String>,
    #[serde(default = "default_hhv")]
    hhv_mwh_per_t: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
enum ScenarioEnsSpec {
    Global(EnsSpec),
    PerHyperedge(BTreeMap<String, EnsSpec>),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioConfig {
    name: String,
    co2_cap: Option<f64>,
    co2_price: Option<f64>,
    ens: Option<ScenarioEnsSpec>,
    force_hub: Option<String>,
    wacc: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    horizon: Horizon,
    #[serde(default)]
    series: Vec<String>,
    #[serde(default)]
    commodity: Vec<Commodity>,
    #[serde(default)]
    node: Vec<Spanned<Table>>,
    #[serde(default)]
    hyperedge: Vec<Spanned<HyperedgeConfig>>,
    methane: Option<Spanned<MethaneConfig>>,
    #[serde(default)]
    scenario: Vec<Spanned<ScenarioConfig>>,
}

/// Unserved-energy treatment a scenario imposes.
#[derive(Clone, Debug, PartialEq)]
pub enum EnsOverride {
    /// Applied to every hyperedge with nonzero demand.
    All(EnsPolicy),
    PerHyperedge(BTreeMap<String, EnsPolicy>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub emission: EmissionPolicy,
    /// `None` keeps each hyperedge's own policy.
    pub ens: Option<EnsOverride>,
    pub force_hub: Option<String>,
    pub wacc: Option<f64>,
    pub line: usize,
}

#[derive(Clone, Debug)]
struct Located<T> {
    line: usize,
    value: T,
}

/// Line of each top-level key of the `[[node]]` block whose header is on
/// line `header` (1-based). Keys set through dotted names or `[node.key]`
/// subtables count, wherever the subtable appears before the next node.
fn key_lines(text: &str, header: usize) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    let mut inside = true;
    for (k, raw) in text.lines().enumerate().skip(header) {
        let l = raw.trim();
        let key = if let Some(sub) = l.strip_prefix("[node.") {
            inside = true;
            sub
        } else if l == "[[node]]" {
            break;
        } else if l.starts_with('[') {
            inside = false;
            continue;
        } else {
            l
        };
        let name: String = key
            .chars()
            .take_while(|c| c.is_ascii_alphanumeric() || *c == '_' || *c == '-')
            .collect();
        if inside && !name.is_empty() {
            out.entry(name).or_insert(k + 1);
        }
    }
    out
}

/// A parsed but not yet instantiated configuration.
#[derive(Clone, Debug)]
pub struct Config {
    /// Name used in error messages, normally the file path.
    pub source: String,
    pub horizon: Horizon,
    pub series_files: Vec<PathBuf>,
    pub commodities: Vec<Commodity>,
    pub scenarios: Vec<Scenario>,
    nodes: Vec<(Located<Table>, BTreeMap<String, usize>)>,
    hyperedges: Vec<Located<HyperedgeConfig>>,
    methane: Option<Located<MethaneConfig>>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn ens_policy(spec: &EnsSpec) -> Result<EnsPolicy, String> {
    match spec {
        EnsSpec::Price(p) if p.is_finite() && *p >= 0.0 => Ok(EnsPolicy::Penalized { price: *p }),
        EnsSpec::Price(p) => Err(format!("unserved-energy price must be finite and nonnegative, got {p}")),
        EnsSpec::Keyword(k) if k == "forbidden" => Ok(EnsPolicy::Forbidden),
        EnsSpec::Keyword(k) => Err(format!("expected `forbidden` or a price, got `{k}`")),
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let source = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            file: source.clone(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, &source, base)
    }

    /// Parses `text`; relative series paths resolve against `base_dir`.
    pub fn parse(text: &str, source: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let at = |line: usize, message: String| ConfigError::At {
            file: source.to_string(),
            line,
            message,
        };
        let raw: RawConfig = toml::from_str(text).map_err(|e| {
            let line = e.span().map_or(1, |s| line_of(text, s.start));
            at(line, e.message().trim().to_string())
        })?;
        let mut scenarios = Vec::new();
        for s in &raw.scenario {
            let line = line_of(text, s.span().start);
            let cfg = s.get_ref();
            let emission = match (cfg.co2_cap, cfg.co2_price) {
                (Some(_), Some(_)) => {
                    return Err(at(line, format!("scenario `{}` sets both co2_cap and co2_price", cfg.name)));
                }
                (Some(k), None) => EmissionPolicy::Cap { kt_per_year: k },
                (None, Some(p)) => EmissionPolicy::Price { meur_per_kt: p },
                (None, None) => EmissionPolicy::None,
            };
            let ens = match &cfg.ens {
                None => None,
                Some(ScenarioEnsSpec::Global(spec)) => Some(EnsOverride::All(ens_policy(spec).map_err(|m| at(line, m))?)),
                Some(ScenarioEnsSpec::PerHyperedge(map)) => {
                    let mut out = BTreeMap::new();
                    for (he, spec) in map {
                        out.insert(he.clone(), ens_policy(spec).map_err(|m| at(line, format!("`{he}`: {m}")))?);
                    }
                    Some(EnsOverride::PerHyperedge(out))
                }
            };
            if scenarios.iter().any(|o: &Scenario| o.name == cfg.name) {
                return Err(at(line, format!("duplicate scenario name `{}`", cfg.name)));
            }
            scenarios.push(Scenario {
                name: cfg.name.clone(),
                emission,
                ens,
                force_hub: cfg.force_hub.clone(),
                wacc: cfg.wacc,
                line,
            });
        }
        if scenarios.is_empty() {
            scenarios.push(Scenario {
                name: "base".into(),
                emission: EmissionPolicy::None,
                ens: None,
                force_hub: None,
                wacc: None,
                line: 1,
            });
        }
        let locate = |span: std::ops::Range<usize>| line_of(text, span.start);
        Ok(Config {
            source: source.to_string(),
            horizon: raw.horizon,
            series_files: raw.series.iter().map(|s| base_dir.join(s)).collect(),
            commodities: raw.commodity,
            scenarios,
            nodes: raw
                .node
                .into_iter()
                .map(|n| {
                    let line = locate(n.span());
                    let located = Located {
                        line,
                        value: n.into_inner(),
                    };
                    (located, key_lines(text, line))
                })
                .collect(),
            hyperedges: raw
                .hyperedge
                .into_iter()
                .map(|h| Located {
                    line: locate(h.span()),
                    value: h.into_inner(),
                })
                .collect(),
            methane: raw.methane.map(|m| Located {
                line: locate(m.span()),
                value: m.into_inner(),
            }),
        })
    }

    fn at(&self, line: usize, message: String) -> ConfigError {
        ConfigError::At {
            file: self.source.clone(),
            line,
            message,
        }
    }

    pub fn load_series(&self) -> Result<SeriesStore, ConfigError> {
        Ok(SeriesStore::load(&self.series_files, self.horizon.steps)?)
    }

    /// Builds the system shared by all scenarios, with no emission policy.
    pub fn build(&self, series: &SeriesStore) -> Result<EnergySystem, ConfigError> {
        let h = &self.horizon;
        let mut sys = EnergySystem::new(TimeGrid::new(h.steps, h.step_hours, h.years()), h.demand_cluster.clone());
        sys.wacc = h.wacc;
        sys.commodities = self.commodities.clone();
        for (n, keys) in &self.nodes {
            sys.nodes.push(self.build_node(n, keys, series)?);
        }
        for he in &self.hyperedges {
            sys.hyperedges.push(self.build_hyperedge(he, series)?);
        }
        if let Some(m) = &self.methane {
            let delivery = m.value.delivery.parse::<PortRef>().map_err(|e| self.at(m.line, e))?;
            sys.methane = Some(MethaneAccounting {
                delivery,
                power_nodes: m.value.power_nodes.clone(),
                co2_export_nodes: m.value.co2_export_nodes.clone(),
                hhv_mwh_per_t: m.value.hhv_mwh_per_t,
            });
        }
        Ok(sys)
    }

    fn build_hyperedge(&self, he: &Located<HyperedgeConfig>, series: &SeriesStore) -> Result<Hyperedge, ConfigError> {
        let (line, cfg) = (he.line, &he.value);
        let err = |m: String| self.at(line, format!("hyperedge `{}`: {m}", cfg.id));
        let refs = |list: &[String]| -> Result<Vec<PortRef>, ConfigError> {
            list.iter().map(|s| s.parse::<PortRef>().map_err(err)).collect()
        };
        let steps = self.horizon.steps;
        let mut demand = match &cfg.demand {
            None => vec![0.0; steps],
            Some(DemandSpec::Constant(c)) => vec![*c; steps],
            Some(DemandSpec::Series(name)) => series.bind(name, SeriesRole::Demand)?,
            Some(DemandSpec::Values(v)) if v.len() == steps => v.clone(),
            Some(DemandSpec::Values(v)) => return Err(err(format!("demand has {} values but the horizon has {steps} steps", v.len()))),
        };
        if let Some(scale) = cfg.demand_scale {
            demand.iter_mut().for_each(|d| *d *= scale);
        }
        let ens = match &cfg.ens {
            None => EnsPolicy::Forbidden,
            Some(spec) => ens_policy(spec).map_err(err)?,
        };
        Ok(Hyperedge {
            id: cfg.id.clone(),
            cluster: cfg.cluster.clone(),
            commodity: cfg.commodity.clone(),
            producers: refs(&cfg.producers)?,
            consumers: refs(&cfg.consumers)?,
            demand,
            ens,
        })
    }

    fn build_node(&self, spec: &Located<Table>, keys: &BTreeMap<String, usize>, series: &SeriesStore) -> Result<Node, ConfigError> {
        let line = spec.line;
        let key_line = |key: &str| keys.get(key).copied().unwrap_or(line);
        let mut table = spec.value.clone();
        let mut take_str = |key: &str| -> Result<Option<String>, ConfigError> {
            match table.remove(key) {
                None => Ok(None),
                Some(Value::String(s)) => Ok(Some(s)),
                Some(other) => Err(self.at(key_line(key), format!("`{key}` must be a string, got {}", other.type_str()))),
            }
        };
        let id = take_str("id")?.ok_or_else(|| self.at(line, "node without `id`".into()))?;
        let err = |m: String| self.at(line, format!("node `{id}`: {m}"));
        let cluster = take_str("cluster")?.ok_or_else(|| err("missing `cluster`".into()))?;
        let preset = take_str("preset")?;
        let kind = take_str("kind")?;

        let base = match (&preset, kind.as_deref()) {
            (Some(_), Some(_)) => return Err(err("`preset` and `kind` are exclusive".into())),
            (Some(name), None) => catalog::preset(name).map_err(|e| err(e.to_string()))?.instantiate(&id, &cluster),
            (None, Some("conversion")) => {
                let reference = match table.get("reference") {
                    Some(Value::String(r)) => r.clone(),
                    _ => return Err(err("inline conversion needs a `reference` port name".into())),
                };
                Node::Conversion(ConversionTech::new(&id, &cluster, reference, "", Direction::Out))
            }
            (None, Some("storage")) => {
                let commodity = match table.get("commodity") {
                    Some(Value::String(c)) => c.clone(),
                    _ => return Err(err("inline storage needs a `commodity`".into())),
                };
                Node::Storage(StorageTech::new(&id, &cluster, commodity))
            }
            (None, Some(other)) => return Err(err(format!("unknown kind `{other}`; expected conversion or storage"))),
            (None, None) => return Err(err("needs either `preset` or `kind`".into())),
        };

        let allowed = field_names(&base);
        for key in table.keys() {
            if !allowed.contains(key.as_str()) {
                return Err(self.at(key_line(key), format!("node `{id}`: unknown field `{key}`")));
            }
        }
        for (key, role) in [("capacity_factor", SeriesRole::CapacityFactor), ("vom", SeriesRole::Cost)] {
            if let Some(Value::String(name)) = table.get(key) {
                let values = series.bind(name, role)?;
                table.insert(key.into(), Value::Array(values.into_iter().map(Value::Float).collect()));
            }
        }
        let mut merged = Value::try_from(&base).map_err(|e| err(e.to_string()))?;
        merge(&mut merged, Value::Table(table));
        merged.try_into::<Node>().map_err(|e| err(e.message().trim().to_string()))
    }
}

/// Recursively overlays `over` onto `base`; tables merge, anything else
/// replaces.
fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Table(b), Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Top-level keys a node table may set.
fn field_names(node: &Node) -> BTreeSet<String> {
    let mut sample = node.clone();
    if let Node::Conversion(c) = &mut sample {
        c.category.get_or_insert(crate::model::Category::Conversion);
        c.capacity_factor.get_or_insert_with(Vec::new);
        c.ramp_up.get_or_insert(0.0);
        c.ramp_down.get_or_insert(0.0);
        c.operating_port.get_or_insert_with(String::new);
    }
    if let Node::Storage(s) = &mut sample {
        s.category.get_or_insert(crate::model::Category::Flexibility);
    }
    match Value::try_from(&sample) {
        Ok(Value::Table(t)) => t.keys().filter(|k| *k != "kind" && *k != "id" && *k != "cluster").cloned().collect(),
        _ => BTreeSet::new(),
    }
}

impl Scenario {
    /// The scenario's system: `base` with this scenario's emission policy,
    /// unserved-energy treatment, cost of capital and hub restriction.
    pub fn apply(&self, base: &EnergySystem, source: &str) -> Result<EnergySystem, ConfigError> {
        let at = |m: String| ConfigError::At {
            file: source.to_string(),
            line: self.line,
            message: format!("scenario `{}`: {m}", self.name),
        };
        let mut sys = base.clone();
        sys.emission = self.emission;
        if let Some(w) = self.wacc {
            sys.wacc = w;
        }
        match &self.ens {
            None => {}
            Some(EnsOverride::All(policy)) => {
                for he in &mut sys.hyperedges {
                    if he.demand.iter().any(|&d| d != 0.0) {
                        he.ens = *policy;
                    }
                }
            }
            Some(EnsOverride::PerHyperedge(map)) => {
                for (id, policy) in map {
                    let he = sys
                        .hyperedges
                        .iter_mut()
                        .find(|h| &h.id == id)
                        .ok_or_else(|| at(format!("unknown hyperedge `{id}`")))?;
                    he.ens = *policy;
                }
            }
        }
        if let Some(cluster) = &self.force_hub {
            sys = force_hub(&sys, cluster).map_err(|e| at(e.to_string()))?;
        }
        Ok(sys)
    }

    /// Short description of the unserved-energy setting for tables.
    pub fn ens_label(&self, base: &EnergySystem) -> String {
        let describe = |p: &EnsPolicy| match p {
            EnsPolicy::Forbidden => "no".to_string(),
            EnsPolicy::Penalized { price } => format!("{price}"),
        };
        match &self.ens {
            Some(EnsOverride::All(p)) => describe(p),
            Some(EnsOverride::PerHyperedge(m)) => m.iter().map(|(k, p)| format!("{k}:{}", describe(p))).collect::<Vec<_>>().join(" "),
            None => {
                let set: BTreeSet<String> =
                    base.hyperedges.iter().filter(|h| h.demand.iter().any(|&d| d != 0.0)).map(|h| describe(&h.ens)).collect();
                set.into_iter().collect::<Vec<_>>().join("/")
            }
        }
    }
}

#[derive(Serialize)]
struct NodeFile<'a> {
    node: Vec<&'a Node>,
}

/// A catalog preset written out as an inline `[[node]]` block, preceded by
/// the source of each value as comments.
pub fn preset_toml(name: &str, id: &str, cluster: &str) -> Result<String, catalog::CatalogError> {
    let preset = catalog::preset(name)?;
    let node = preset.instantiate(id, cluster);
    let mut out = format!("# {}: {}\n", preset.name, preset.summary);
    for (path, source) in &preset.sources {
        let line = match source {
            Source::Published(n) => format!("published, {n}"),
            Source::Derived(n) => format!("derived, {n}"),
            Source::Antecedent(n) => format!("placeholder, {n}"),
            Source::Neutral => "structural default".to_string(),
        };
        out.push_str(&format!("# {path}: {line}\n"));
    }
    out.push_str(&toml::to_string(&NodeFile { node: vec![&node] }).expect("nodes serialize to TOML"));
    Ok(out)
}
