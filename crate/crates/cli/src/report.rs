//! CSV and text outputs.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use grefine_core::corpus::DatasetSummary;
use grefine_core::pipeline::{ComparisonRow, MeanFitness};
use grefine_core::{ClassLabel, FeatureHistogram, FitnessValue, GenerationStats, Graph};

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))
}

fn finish(mut w: csv::Writer<fs::File>, path: &Path) -> Result<()> {
    w.flush().with_context(|| format!("writing {}", path.display()))
}

pub fn write_history(path: &Path, history: &[GenerationStats]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["generation", "best_total", "mmd_d", "mmd_c", "mmd_s", "edge_penalty"])?;
    for h in history {
        w.write_record([
            h.generation.to_string(),
            h.best.total.to_string(),
            h.best.mmd_d.to_string(),
            h.best.mmd_c.to_string(),
            h.best.mmd_s.to_string(),
            h.best.edge_penalty.to_string(),
        ])?;
    }
    finish(w, path)
}

const SUMMARY_HEADER: [&str; 17] = [
    "class",
    "graphs",
    "real_nodes",
    "seed_nodes",
    "real_edges",
    "seed_edges",
    "refined_edges",
    "seed_mmd_d",
    "refined_mmd_d",
    "seed_mmd_c",
    "refined_mmd_c",
    "seed_mmd_s",
    "refined_mmd_s",
    "seed_edge_penalty",
    "refined_edge_penalty",
    "seed_total",
    "refined_total",
];

pub fn write_summary(path: &Path, rows: &[ComparisonRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(SUMMARY_HEADER)?;
    for r in rows {
        let (s, f) = (&r.seed, &r.refined);
        w.write_record([
            r.class.to_string(),
            r.graphs.to_string(),
            r.real_nodes.to_string(),
            r.seed_nodes.to_string(),
            r.real_edges.to_string(),
            s.avg_edges.to_string(),
            f.avg_edges.to_string(),
            s.mmd_d.to_string(),
            f.mmd_d.to_string(),
            s.mmd_c.to_string(),
            f.mmd_c.to_string(),
            s.mmd_s.to_string(),
            f.mmd_s.to_string(),
            s.edge_penalty.to_string(),
            f.edge_penalty.to_string(),
            s.total.to_string(),
            f.total.to_string(),
        ])?;
    }
    finish(w, path)
}

/// Human-readable before/after table.
pub fn format_comparison(rows: &[ComparisonRow]) -> String {
    let mut out = format!(
        "{:>5} {:>6} {:>13} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}\n",
        "class",
        "graphs",
        "nodes(r->s)",
        "E seed",
        "E ref",
        "deg s",
        "deg r",
        "clu s",
        "clu r",
        "spec s",
        "spec r",
        "F s",
        "F r"
    );
    for r in rows {
        out.push_str(&format!(
            "{:>5} {:>6} {:>13} {:>8.1} {:>8.1} {:>8.3} {:>8.3} {:>8.3} {:>8.3} {:>8.3} {:>8.3} {:>8.3} {:>8.3}\n",
            r.class,
            r.graphs,
            format!("{:.1}->{:.1}", r.real_nodes, r.seed_nodes),
            r.seed.avg_edges,
            r.refined.avg_edges,
            r.seed.mmd_d,
            r.refined.mmd_d,
            r.seed.mmd_c,
            r.refined.mmd_c,
            r.seed.mmd_s,
            r.refined.mmd_s,
            r.seed.total,
            r.refined.total,
        ));
    }
    out
}

pub fn write_evaluation(path: &Path, graphs: &[Graph], scores: &[(ClassLabel, FitnessValue)]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "index",
        "class",
        "nodes",
        "edges",
        "mmd_d",
        "mmd_c",
        "mmd_s",
        "edge_penalty",
        "total",
    ])?;
    for (i, (g, (c, f))) in graphs.iter().zip(scores).enumerate() {
        w.write_record([
            i.to_string(),
            c.to_string(),
            g.node_count().to_string(),
            g.edge_count().to_string(),
            f.mmd_d.to_string(),
            f.mmd_c.to_string(),
            f.mmd_s.to_string(),
            f.edge_penalty.to_string(),
            f.total.to_string(),
        ])?;
    }
    finish(w, path)
}

pub fn evaluation_summary_rows(summary: &[(ClassLabel, usize, f64, MeanFitness)]) -> Vec<[String; 9]> {
    summary
        .iter()
        .map(|(c, n, nodes, m)| {
            [
                c.to_string(),
                n.to_string(),
                nodes.to_string(),
                m.avg_edges.to_string(),
                m.mmd_d.to_string(),
                m.mmd_c.to_string(),
                m.mmd_s.to_string(),
                m.edge_penalty.to_string(),
                m.total.to_string(),
            ]
        })
        .collect()
}

pub const EVALUATION_SUMMARY_HEADER: [&str; 9] = [
    "class",
    "graphs",
    "avg_nodes",
    "avg_edges",
    "mmd_d",
    "mmd_c",
    "mmd_s",
    "edge_penalty",
    "total",
];

pub fn write_evaluation_summary(path: &Path, summary: &[(ClassLabel, usize, f64, MeanFitness)]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(EVALUATION_SUMMARY_HEADER)?;
    for row in evaluation_summary_rows(summary) {
        w.write_record(row)?;
    }
    finish(w, path)
}

/// `bin_lo, bin_hi, mass` rows.
pub fn write_histogram(path: &Path, hist: &FeatureHistogram) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["bin_lo", "bin_hi", "mass"])?;
    for (lo, hi, mass) in hist.rows() {
        w.write_record([lo.to_string(), hi.to_string(), mass.to_string()])?;
    }
    finish(w, path)
}

pub fn format_stats(summary: &DatasetSummary) -> String {
    let mut out = String::from("dataset,class,graphs,classes,avg_nodes,avg_edges\n");
    out.push_str(&format!(
        "{},all,{},{},{:.2},{:.2}\n",
        summary.name, summary.overall.graphs, summary.classes, summary.overall.avg_nodes, summary.overall.avg_edges
    ));
    for c in &summary.per_class {
        out.push_str(&format!(
            "{},{},{},1,{:.2},{:.2}\n",
            summary.name,
            c.class.map_or_else(|| "none".to_string(), |c| c.to_string()),
            c.graphs,
            c.avg_nodes,
            c.avg_edges
        ));
    }
    out
}
