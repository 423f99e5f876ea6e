use std::collections::BTreeSet;

use thiserror::Error;

use super::{EnergySystem, PortRef};

#[derive(Debug, Error, PartialEq)]
pub enum HubError {
    #[error("unknown cluster `{0}`")]
    UnknownCluster(String),
}

/// Keeps only the demand centre and `cluster`, dropping the nodes and
/// hyperedges of every other cluster. Port references to dropped nodes are
/// removed from the surviving hyperedges, as are the methane accounting tags
/// that point at them.
pub fn force_hub(system: &EnergySystem, cluster: &str) -> Result<EnergySystem, HubError> {
    if !system.clusters().contains(cluster) {
        return Err(HubError::UnknownCluster(cluster.to_string()));
    }
    let keep = |c: &str| c == cluster || c == system.demand_cluster;

    let mut out = system.clone();
    out.nodes.retain(|n| keep(n.cluster()));
    let alive: BTreeSet<String> = out.nodes.iter().map(|n| n.id().to_string()).collect();
    let live = |r: &PortRef| alive.contains(&r.node);

    out.hyperedges.retain(|h| h.cluster.as_deref().is_none_or(keep));
    for he in &mut out.hyperedges {
        he.producers.retain(live);
        he.consumers.retain(live);
    }
    if let Some(m) = &mut out.methane {
        m.power_nodes.retain(|n| alive.contains(n));
        m.co2_export_nodes.retain(|n| alive.contains(n));
    }
    Ok(out)
}
