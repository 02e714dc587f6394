use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use super::{DetectionReport, Mode};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    Text,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "text" => Ok(ReportFormat::Text),
            other => Err(Error::usage(format!("unknown report format {other:?}"))),
        }
    }
}

/// Renders a report. Output depends only on the report value.
pub fn render_report(report: &DetectionReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).map_err(|e| Error::Serialize(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
        ReportFormat::Csv => render_csv(report),
        ReportFormat::Text => Ok(render_text(report)),
    }
}

pub fn emit_report(report: &DetectionReport, format: ReportFormat, out_path: &Path) -> Result<()> {
    let body = render_report(report, format)?;
    std::fs::write(out_path, body).map_err(|source| Error::Write {
        path: out_path.to_path_buf(),
        source,
    })
}

fn render_csv(report: &DetectionReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Serialize(e.to_string());
    w.write_record(["doc_a", "doc_b", "overlap", "containment_pct", "jaccard_pct"])
        .map_err(csv_err)?;
    for r in &report.per_pair {
        w.write_record([
            r.doc_a.clone(),
            r.doc_b.clone(),
            r.overlap.to_string(),
            format!("{:.2}", r.containment_pct()),
            format!("{:.2}", r.jaccard_pct()),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Serialize(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Serialize(e.to_string()))
}

fn render_text(report: &DetectionReport) -> String {
    let mut out = String::new();
    let n = report.documents.len();
    let pct_of_possible = if report.comparisons_possible == 0 {
        0.0
    } else {
        100.0 * report.comparisons_made as f64 / report.comparisons_possible as f64
    };

    // writeln! into a String cannot fail.
    let _ = writeln!(out, "Corpus: {} ({n} documents)", report.corpus_name);
    let _ = write!(out, "Mode: {}", report.mode);
    if let Some(km) = &report.config.kmeans {
        let _ = write!(out, " (k = {}, seed = {})", km.k, km.seed);
    }
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "Comparisons: {} of {} possible ({:.2}%)",
        report.comparisons_made, report.comparisons_possible, pct_of_possible
    );
    let t = &report.timings;
    let _ = writeln!(
        out,
        "Timings (ms): preprocess {:.3}, cluster {:.3}, pairwise {:.3}, total {:.3}",
        t.preprocess_ms, t.cluster_ms, t.pairwise_ms, t.total_ms
    );
    for w in &report.warnings {
        let _ = writeln!(out, "warning: {w}");
    }

    let id_width = report
        .documents
        .iter()
        .map(|d| d.chars().count())
        .max()
        .unwrap_or(0)
        .max("document".len());

    let _ = writeln!(out, "\nMaximum similarity per document");
    let _ = writeln!(out, "{:<id_width$}  {:<id_width$}  containment %", "document", "best match");
    for (doc, best) in &report.per_doc_max {
        match best {
            Some(b) => {
                let _ = writeln!(out, "{doc:<id_width$}  {:<id_width$}  {:>13.2}", b.partner, b.containment_pct);
            }
            None => {
                let _ = writeln!(out, "{doc:<id_width$}  {:<id_width$}  {:>13}", "none", "-");
            }
        }
    }

    if report.mode == Mode::Clustered {
        let _ = writeln!(out, "\nCluster table");
        let _ = writeln!(out, "cluster  members");
        for row in &report.cluster_table {
            let _ = writeln!(out, "{:<7}  {}", row.cluster, row.members.join(", "));
        }
    }

    let threshold = report.config.threshold_pct;
    let flagged: Vec<_> = report
        .per_pair
        .iter()
        .filter(|r| r.containment_pct() >= threshold)
        .collect();
    let _ = writeln!(out, "\nPairs at or above {threshold:.2}% containment: {}", flagged.len());
    for r in flagged {
        let _ = writeln!(
            out,
            "{:<id_width$}  {:<id_width$}  {:>7.2}  (jaccard {:.2})",
            r.doc_a,
            r.doc_b,
            r.containment_pct(),
            r.jaccard_pct()
        );
    }
    out
}
