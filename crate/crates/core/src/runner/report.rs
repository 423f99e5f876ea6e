//! Report files for one run.
//!
//! ```text
//! <out>/summary.csv            one row per scenario
//! <out>/summary.txt            the same as aligned tables
//! <out>/<scenario>/report.json full ScenarioReport
//! <out>/<scenario>/capacities.csv
//! <out>/<scenario>/costs.csv   group,key,meur
//! <out>/<scenario>/ens_prices.csv  t,<hyperedge>... in €/MWh, when priced
//! ```

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::analysis::ScenarioReport;
use crate::model::{Category, EmissionPolicy};
use crate::solver::Status;

/// What the summary needs to know about one scenario.
pub struct SummaryRow<'a> {
    pub name: &'a str,
    pub emission: EmissionPolicy,
    pub ens: String,
    /// `Err` holds the message of a scenario that failed before solving.
    pub report: Result<&'a ScenarioReport, String>,
}

fn status_label(s: Status) -> &'static str {
    match s {
        Status::Optimal => "optimal",
        Status::Infeasible => "infeasible",
        Status::Unbounded => "unbounded",
        Status::IterLimit => "iteration_limit",
    }
}

fn csv_string(rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

pub fn report_json(report: &ScenarioReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
    s.push('\n');
    s
}

pub fn capacities_csv(report: &ScenarioReport) -> String {
    let mut rows = vec![["node", "cluster", "category", "capacity", "stock"].map(String::from).to_vec()];
    for c in &report.capacities {
        rows.push(vec![
            c.node.clone(),
            c.cluster.clone(),
            c.category.map_or(String::new(), |k| k.label().to_string()),
            c.capacity.to_string(),
            opt(c.stock),
        ]);
    }
    csv_string(&rows)
}

pub fn costs_csv(report: &ScenarioReport) -> String {
    let mut rows = vec![["group", "key", "meur"].map(String::from).to_vec()];
    if let Some(c) = &report.costs {
        for (group, map) in [("cluster", &c.by_cluster), ("category", &c.by_category), ("node", &c.by_node)] {
            for (k, v) in map {
                rows.push(vec![group.into(), k.clone(), v.to_string()]);
            }
        }
        rows.push(vec!["penalty".into(), "ens".into(), c.ens_penalty.to_string()]);
        rows.push(vec!["penalty".into(), "co2_fees".into(), c.co2_fees.to_string()]);
        rows.push(vec!["total".into(), "objective".into(), c.total.to_string()]);
    }
    csv_string(&rows)
}

pub fn ens_prices_csv(report: &ScenarioReport) -> Option<String> {
    if report.ens_prices.is_empty() {
        return None;
    }
    let mut header = vec!["t".to_string()];
    header.extend(report.ens_prices.iter().map(|p| p.hyperedge.clone()));
    let mut rows = vec![header];
    for t in 0..report.ens_prices[0].series.len() {
        let mut row = vec![t.to_string()];
        row.extend(report.ens_prices.iter().map(|p| p.series[t].to_string()));
        rows.push(row);
    }
    Some(csv_string(&rows))
}

fn max_ens_price(r: &ScenarioReport) -> Option<f64> {
    r.ens_prices.iter().map(|p| p.max).reduce(f64::max)
}

fn policy_cells(e: EmissionPolicy) -> (String, String) {
    match e {
        EmissionPolicy::None => ("-".into(), "-".into()),
        EmissionPolicy::Cap { kt_per_year } => (kt_per_year.to_string(), "-".into()),
        EmissionPolicy::Price { meur_per_kt } => ("-".into(), meur_per_kt.to_string()),
    }
}

/// Column order for capacities: nodes in first-seen order across scenarios.
fn node_columns(rows: &[SummaryRow]) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for r in rows {
        if let Ok(rep) = r.report {
            for c in &rep.capacities {
                if seen.insert(c.node.clone()) {
                    out.push(c.node.clone());
                }
            }
        }
    }
    out
}

fn cluster_columns(rows: &[SummaryRow]) -> Vec<String> {
    let mut set = BTreeSet::new();
    for r in rows {
        if let Ok(ScenarioReport { costs: Some(c), .. }) = r.report {
            set.extend(c.by_cluster.keys().cloned());
        }
    }
    set.into_iter().collect()
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let nodes = node_columns(rows);
    let clusters = cluster_columns(rows);
    let mut header: Vec<String> = [
        "scenario",
        "status",
        "co2_cap_kt_per_year",
        "co2_price_meur_per_kt",
        "ens",
        "objective_meur",
        "co2_shadow_price_eur_per_t",
        "max_ens_price_eur_per_mwh",
        "methane_cost_eur_per_mwh",
        "net_co2_kt_per_year",
    ]
    .map(String::from)
    .to_vec();
    header.extend(clusters.iter().map(|c| format!("cost_{c}_meur")));
    header.extend(Category::ALL.iter().map(|c| format!("cost_{}_meur", c.label().to_lowercase().replace(' ', "_"))));
    header.extend(nodes.iter().map(|n| format!("cap_{n}")));
    let mut out = vec![header];
    for r in rows {
        let (cap, price) = policy_cells(r.emission);
        let mut row = vec![r.name.to_string()];
        match r.report {
            Err(_) => {
                row.extend(["error".to_string(), cap, price, r.ens.clone()]);
            }
            Ok(rep) => {
                row.extend([status_label(rep.status).to_string(), cap, price, r.ens.clone()]);
                if rep.status == Status::Optimal {
                    row.push(rep.objective.to_string());
                    row.push(opt(rep.co2_shadow_price));
                    row.push(opt(max_ens_price(rep)));
                    row.push(opt(rep.methane_cost));
                    row.push(rep.net_co2_balance.to_string());
                    let costs = rep.costs.as_ref();
                    for c in &clusters {
                        row.push(opt(costs.and_then(|k| k.by_cluster.get(c).copied())));
                    }
                    for c in Category::ALL {
                        row.push(opt(costs.and_then(|k| k.by_category.get(c.label()).copied())));
                    }
                    for n in &nodes {
                        row.push(opt(rep.capacities.iter().find(|c| &c.node == n).map(|c| c.capacity)));
                    }
                }
            }
        }
        let width = out[0].len();
        row.resize(width, String::new());
        out.push(row);
    }
    csv_string(&out)
}

fn table(out: &mut String, title: &str, rows: &[Vec<String>]) {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    let _ = writeln!(out, "{title}");
    for (i, r) in rows.iter().enumerate() {
        let cells: Vec<String> = r
            .iter()
            .enumerate()
            .map(|(c, s)| if c == 0 { format!("{s:<w$}", w = widths[c]) } else { format!("{s:>w$}", w = widths[c]) })
            .collect();
        let _ = writeln!(out, "{}", cells.join("  ").trim_end());
        if i == 0 {
            let total = widths.iter().sum::<usize>() + 2 * widths.len().saturating_sub(1);
            let _ = writeln!(out, "{}", "-".repeat(total));
        }
    }
    out.push('\n');
}

fn fixed(v: Option<f64>, digits: usize) -> String {
    v.map_or("-".into(), |x| format!("{x:.digits$}"))
}

/// Aligned text tables: scenario parameters and indicators, installed
/// capacities, and costs by cluster and by category.
pub fn summary_text(rows: &[SummaryRow]) -> String {
    let mut out = String::new();
    let mut main = vec![[
        "scenario",
        "status",
        "cap (kt/yr)",
        "price (M€/kt)",
        "ENS (M€/GWh)",
        "objective (M€)",
        "CO2 (€/t)",
        "max ENS (€/MWh)",
        "CH4 (€/MWh)",
        "net CO2 (kt/yr)",
    ]
    .map(String::from)
    .to_vec()];
    for r in rows {
        let (cap, price) = policy_cells(r.emission);
        let mut row = vec![r.name.to_string()];
        match &r.report {
            Err(e) => {
                row.extend(["error".to_string(), cap, price, r.ens.clone(), e.lines().next().unwrap_or("").to_string()]);
            }
            Ok(rep) => {
                let ok = rep.status == Status::Optimal;
                row.extend([status_label(rep.status).to_string(), cap, price, r.ens.clone()]);
                row.push(if ok { format!("{:.2}", rep.objective) } else { "-".into() });
                row.push(fixed(rep.co2_shadow_price, 2));
                row.push(fixed(max_ens_price(rep), 2));
                row.push(fixed(rep.methane_cost, 2));
                row.push(if ok { format!("{:.1}", rep.net_co2_balance) } else { "-".into() });
            }
        }
        main.push(row);
    }
    table(&mut out, "Scenarios", &main);

    let nodes = node_columns(rows);
    let solved: Vec<(&str, &ScenarioReport)> = rows
        .iter()
        .filter_map(|r| r.report.as_ref().ok().filter(|rep| rep.status == Status::Optimal).map(|rep| (r.name, *rep)))
        .collect();
    if !solved.is_empty() {
        let mut caps = vec![std::iter::once("node".to_string()).chain(solved.iter().map(|(n, _)| n.to_string())).collect::<Vec<_>>()];
        for node in &nodes {
            let mut row = vec![node.clone()];
            for (_, rep) in &solved {
                row.push(fixed(rep.capacities.iter().find(|c| &c.node == node).map(|c| c.capacity), 3));
            }
            caps.push(row);
        }
        table(&mut out, "Installed capacity (reference-port units)", &caps);

        let mut costs = vec![caps[0].clone()];
        costs[0][0] = "cost (M€)".into();
        for cluster in cluster_columns(rows) {
            let mut row = vec![cluster.clone()];
            for (_, rep) in &solved {
                row.push(fixed(rep.costs.as_ref().and_then(|c| c.by_cluster.get(&cluster).copied()), 2));
            }
            costs.push(row);
        }
        for cat in Category::ALL {
            let mut row = vec![cat.label().to_string()];
            for (_, rep) in &solved {
                row.push(fixed(rep.costs.as_ref().and_then(|c| c.by_category.get(cat.label()).copied()), 2));
            }
            costs.push(row);
        }
        for (label, pick) in [("ENS penalty", 0), ("CO2 fees", 1)] {
            let mut row = vec![label.to_string()];
            for (_, rep) in &solved {
                let c = rep.costs.as_ref().map(|c| if pick == 0 { c.ens_penalty } else { c.co2_fees });
                row.push(fixed(c, 2));
            }
            costs.push(row);
        }
        table(&mut out, "Costs", &costs);
    }
    out
}
