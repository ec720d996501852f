//! Evaluation report output: JSON, a console table, and per-pair CSV.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use safebox_core::dataset::Split;
use safebox_core::evaluation::{EvalReport, Quadrant};

use crate::{to_pretty, write_text, Error};

#[derive(Serialize)]
struct Summary {
    n_images: usize,
    n_labels: usize,
    n_matched: usize,
    n_missed: usize,
    n_safe_raw: usize,
    n_safe_post: usize,
    safe_rate_raw: f64,
    safe_rate_post: f64,
    mean_iou_raw: Option<f64>,
    mean_iou_post: Option<f64>,
    empty: bool,
}

impl From<&EvalReport> for Summary {
    fn from(r: &EvalReport) -> Self {
        Self {
            n_images: r.n_images,
            n_labels: r.n_labels,
            n_matched: r.n_matched,
            n_missed: r.n_missed,
            n_safe_raw: r.n_safe_raw,
            n_safe_post: r.n_safe_post,
            safe_rate_raw: r.safe_rate_raw,
            safe_rate_post: r.safe_rate_post,
            mean_iou_raw: r.mean_iou_raw,
            mean_iou_post: r.mean_iou_post,
            empty: r.empty,
        }
    }
}

#[derive(Serialize)]
struct Divergence<'a> {
    image_id: &'a str,
    label_index: usize,
    iou: f64,
    safe: bool,
}

#[derive(Serialize)]
struct Row<'a> {
    image_id: &'a str,
    label_index: usize,
    prediction_index: usize,
    iou_raw: f64,
    iou_post: f64,
    safe_raw: bool,
    safe_post: bool,
    rw_needed: f64,
    rh_needed: f64,
}

#[derive(Serialize)]
struct ReportDoc<'a> {
    rw: f64,
    rh: f64,
    eps: f64,
    #[serde(flatten)]
    overall: Summary,
    by_split: BTreeMap<&'static str, Summary>,
    divergence_cases: Vec<Divergence<'a>>,
    pairs: Vec<Row<'a>>,
}

fn rows(report: &EvalReport) -> Vec<Row<'_>> {
    report
        .rows
        .iter()
        .map(|r| Row {
            image_id: &r.image_id,
            label_index: r.label_index,
            prediction_index: r.prediction_index,
            iou_raw: r.iou_raw,
            iou_post: r.iou_post,
            safe_raw: r.safe_raw,
            safe_post: r.safe_post,
            rw_needed: r.needed.rw(),
            rh_needed: r.needed.rh(),
        })
        .collect()
}

pub fn report_to_json(report: &EvalReport, by_split: &BTreeMap<Split, EvalReport>) -> String {
    let doc = ReportDoc {
        rw: report.ratios.rw(),
        rh: report.ratios.rh(),
        eps: report.eps,
        overall: report.into(),
        by_split: by_split.iter().map(|(s, r)| (s.as_str(), r.into())).collect(),
        divergence_cases: report
            .divergence_cases
            .iter()
            .map(|d| Divergence {
                image_id: &d.image_id,
                label_index: d.label_index,
                iou: d.iou,
                safe: d.safe,
            })
            .collect(),
        pairs: rows(report),
    };
    to_pretty(&doc)
}

pub fn save_report(path: &Path, report: &EvalReport, by_split: &BTreeMap<Split, EvalReport>) -> Result<(), Error> {
    write_text(path, &report_to_json(report, by_split))
}

/// Per-pair rows as CSV with a header line.
pub fn rows_to_csv(report: &EvalReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows(report) {
        w.serialize(row).expect("writing CSV to memory cannot fail");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV of UTF-8 fields is UTF-8")
}

pub fn save_csv(path: &Path, report: &EvalReport) -> Result<(), Error> {
    write_text(path, &rows_to_csv(report))
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{v:.4}"))
}

/// Human-readable summary, one line per split plus the total.
pub fn render_table(report: &EvalReport, by_split: &BTreeMap<Split, EvalReport>) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{:<9} {:>6} {:>6} {:>7} {:>6} {:>9} {:>9} {:>8} {:>8}",
        "split", "images", "labels", "matched", "missed", "safe_raw", "safe_post", "iou_raw", "iou_post"
    )
    .unwrap();
    let mut line = |name: &str, r: &EvalReport| {
        writeln!(
            out,
            "{:<9} {:>6} {:>6} {:>7} {:>6} {:>9.4} {:>9.4} {:>8} {:>8}{}",
            name,
            r.n_images,
            r.n_labels,
            r.n_matched,
            r.n_missed,
            r.safe_rate_raw,
            r.safe_rate_post,
            opt(r.mean_iou_raw),
            opt(r.mean_iou_post),
            if r.empty { "  (empty)" } else { "" }
        )
        .unwrap();
    };
    for (s, r) in by_split {
        line(s.as_str(), r);
    }
    line("all", report);
    writeln!(
        out,
        "ratios rw={} rh={}  eps={}  divergence cases (IoU >= 0.5 disagrees with safety): {}",
        report.ratios.rw(),
        report.ratios.rh(),
        report.eps,
        report.divergence_cases.len()
    )
    .unwrap();
    out
}

/// The four IoU-versus-safety panels as a table.
pub fn render_quadrants(quadrants: &[Quadrant]) -> String {
    let mut out = String::new();
    writeln!(out, "{:<4} {:<38} {:<22} {:<22} {:>7} {:>5}", "case", "description", "prediction", "label", "iou", "safe").unwrap();
    for q in quadrants {
        writeln!(
            out,
            "{:<4} {:<38} {:<22} {:<22} {:>7.4} {:>5}",
            q.name,
            q.description,
            q.prediction.to_string(),
            q.label.to_string(),
            q.iou,
            q.safe
        )
        .unwrap();
    }
    if let (Some(b), Some(c)) = (quadrants.get(1), quadrants.get(2)) {
        if b.iou > c.iou && !b.safe && c.safe {
            writeln!(
                out,
                "case {} has the higher IoU ({:.4} > {:.4}) but is unsafe; case {} is safe",
                b.name, b.iou, c.iou, c.name
            )
            .unwrap();
        }
    }
    out
}
