//! CSV and JSON renderings of the analyses.
//!
//! | metric       | columns                                                        |
//! |--------------|----------------------------------------------------------------|
//! | `entropy`    | `library,entropy`                                              |
//! | `flow`       | `library,flow`                                                 |
//! | `summary`    | `one_to_one_share,unidirectional_share`                        |
//! | `trend`      | `bucket,migration_commits` or `bucket,pmt,migration_commits`   |
//! | `domains`    | `domain,migrations`                                            |
//! | `rationales` | `project,commit_id,timestamp,pmt,source,target,keywords,message` |
//!
//! Real numbers have four decimals. Entropy and flow rows are sorted by
//! value, highest first, then by library name.

use std::collections::BTreeMap;
use std::io::Write;
use std::str::FromStr;

use serde::Serialize;

use crate::analytics::{
    entropy, flow, rationale_candidates, summary_stats, trend, Bucket, Keywords, MigrationGraph,
};
use crate::dataset::{iso8601, MigrationRecord};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Entropy,
    Flow,
    Trend,
    Domains,
    Summary,
    Rationales,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::Entropy,
        Metric::Flow,
        Metric::Trend,
        Metric::Domains,
        Metric::Summary,
        Metric::Rationales,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Entropy => "entropy",
            Metric::Flow => "flow",
            Metric::Trend => "trend",
            Metric::Domains => "domains",
            Metric::Summary => "summary",
            Metric::Rationales => "rationales",
        }
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Metric::ALL
            .into_iter()
            .find(|m| m.as_str() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| format!("unknown metric {s:?}"))
    }
}

fn fixed4(x: f64) -> String {
    format!("{x:.4}")
}

fn sorted_desc(mut rows: Vec<(String, f64)>) -> Vec<(String, f64)> {
    rows.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    rows
}

/// Entropy of every source library.
pub fn entropy_rows(graph: &MigrationGraph) -> Vec<(String, f64)> {
    sorted_desc(
        graph
            .sources()
            .map(|l| {
                (
                    l.to_string(),
                    entropy(graph, l).expect("sources have outgoing edges"),
                )
            })
            .collect(),
    )
}

/// Flow of every library in the graph.
pub fn flow_rows(graph: &MigrationGraph) -> Vec<(String, f64)> {
    sorted_desc(
        graph
            .nodes()
            .into_iter()
            .map(|l| {
                (
                    l.to_string(),
                    flow(graph, l).expect("graph nodes have edges"),
                )
            })
            .collect(),
    )
}

fn write_metric_rows<W: Write>(out: W, column: &str, rows: &[(String, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["library", column])?;
    for (lib, v) in rows {
        w.write_record([lib.as_str(), &fixed4(*v)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_entropy<W: Write>(graph: &MigrationGraph, out: W) -> Result<()> {
    write_metric_rows(out, "entropy", &entropy_rows(graph))
}

pub fn write_flow<W: Write>(graph: &MigrationGraph, out: W) -> Result<()> {
    write_metric_rows(out, "flow", &flow_rows(graph))
}

/// Header only for an empty graph.
pub fn write_summary<W: Write>(graph: &MigrationGraph, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["one_to_one_share", "unidirectional_share"])?;
    if let Some(s) = summary_stats(graph) {
        w.write_record([fixed4(s.one_to_one_share), fixed4(s.unidirectional_share)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trend<W: Write>(
    records: &[MigrationRecord],
    bucket: Bucket,
    by_pmt: bool,
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if by_pmt {
        w.write_record(["bucket", "pmt", "migration_commits"])?;
    } else {
        w.write_record(["bucket", "migration_commits"])?;
    }
    for p in trend(records, bucket, by_pmt) {
        let count = p.migration_commits.to_string();
        match p.pmt {
            Some(pmt) => w.write_record([p.bucket.as_str(), pmt.as_str(), &count])?,
            None => w.write_record([p.bucket.as_str(), &count])?,
        }
    }
    w.flush()?;
    Ok(())
}

/// Rows sorted by count, highest first, then by domain.
pub fn write_domains<W: Write>(distribution: &BTreeMap<String, usize>, out: W) -> Result<()> {
    let mut rows: Vec<(&String, &usize)> = distribution.iter().collect();
    rows.sort_by(|a, b| b.1.cmp(a.1).then_with(|| a.0.cmp(b.0)));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["domain", "migrations"])?;
    for (domain, n) in rows {
        w.write_record([domain.as_str(), &n.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Matched keywords are joined with `;`.
pub fn write_rationales<W: Write>(
    records: &[MigrationRecord],
    keywords: &Keywords,
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "project",
        "commit_id",
        "timestamp",
        "pmt",
        "source",
        "target",
        "keywords",
        "message",
    ])?;
    for (r, found) in rationale_candidates(records, keywords) {
        w.write_record([
            r.project.as_str(),
            &r.commit_id,
            &iso8601(r.timestamp),
            r.pmt.as_str(),
            &r.source,
            &r.target,
            &found.join(";"),
            &r.message,
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SankeyNode {
    pub id: usize,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SankeyLink {
    pub source_index: usize,
    pub target_index: usize,
    pub value: u64,
}

/// Node-link data for a Sankey diagram of the migration graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SankeyExport {
    pub nodes: Vec<SankeyNode>,
    pub links: Vec<SankeyLink>,
}

impl SankeyExport {
    /// Nodes in lexicographic order, links by (source, target) index.
    pub fn from_graph(graph: &MigrationGraph) -> Self {
        let nodes: Vec<SankeyNode> = graph
            .nodes()
            .into_iter()
            .enumerate()
            .map(|(id, name)| SankeyNode {
                id,
                name: name.to_string(),
            })
            .collect();
        let index: BTreeMap<&str, usize> = nodes.iter().map(|n| (n.name.as_str(), n.id)).collect();
        let mut links: Vec<SankeyLink> = graph
            .edges()
            .map(|(s, t, w)| SankeyLink {
                source_index: index[s],
                target_index: index[t],
                value: w,
            })
            .collect();
        links.sort_by_key(|l| (l.source_index, l.target_index));
        SankeyExport { nodes, links }
    }

    /// Pretty JSON ending in a newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("sankey export serializes");
        s.push('\n');
        s
    }
}
