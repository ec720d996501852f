//! Safety-aware metrics next to the conventional IoU view.
//!
//! A matched label counts as *safe* when its prediction covers it (or its
//! ground-truth box, when the dataset supplies one). Missed labels are counted
//! separately and never enter the safe rate.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::dataset::{match_record, ImageRecord, Split};
use crate::geometry::{cover, enlarge, iou, min_enlargement_ratio, BBox, EnlargementRatios};

/// IoU at or above this counts as a "good" detection in the conventional view.
pub const IOU_GOOD_THRESHOLD: f64 = 0.5;

/// One matched (prediction, label) pair, before and after enlargement.
#[derive(Debug, Clone, PartialEq)]
pub struct PairRow {
    pub image_id: String,
    pub label_index: usize,
    pub prediction_index: usize,
    pub iou_raw: f64,
    pub iou_post: f64,
    pub safe_raw: bool,
    pub safe_post: bool,
    /// Ratios the raw prediction would need to cover its safety target.
    pub needed: EnlargementRatios,
}

/// A pair where the conventional IoU verdict and the safety verdict disagree.
#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceCase {
    pub image_id: String,
    pub label_index: usize,
    pub iou: f64,
    pub safe: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub n_images: usize,
    pub n_labels: usize,
    pub n_matched: usize,
    pub n_missed: usize,
    pub n_safe_raw: usize,
    pub n_safe_post: usize,
    /// Fractions of matched labels; both are 1.0 when `empty` is set.
    pub safe_rate_raw: f64,
    pub safe_rate_post: f64,
    /// `None` when nothing was matched.
    pub mean_iou_raw: Option<f64>,
    pub mean_iou_post: Option<f64>,
    /// No matched labels, so the rates are vacuously 1.0.
    pub empty: bool,
    pub ratios: EnlargementRatios,
    pub eps: f64,
    pub divergence_cases: Vec<DivergenceCase>,
    pub rows: Vec<PairRow>,
}

/// Evaluates every record. `ratios = None` means no post-processing, so the
/// post columns repeat the raw ones.
pub fn evaluate(records: &[ImageRecord], ratios: Option<EnlargementRatios>, eps: f64) -> EvalReport {
    let ratios = ratios.unwrap_or(EnlargementRatios::IDENTITY);
    let mut rows = Vec::new();
    let mut n_labels = 0;
    let mut n_missed = 0;

    for r in records {
        n_labels += r.labels.len();
        let m = match_record(r);
        n_missed += m.unmatched_labels.len();
        let targets = r.safety_targets();
        for p in &m.pairs {
            let pred = &r.predictions[p.prediction].bbox;
            let label = &r.labels[p.label];
            let target = &targets[p.label];
            let post = enlarge(pred, ratios);
            rows.push(PairRow {
                image_id: r.id.clone(),
                label_index: p.label,
                prediction_index: p.prediction,
                iou_raw: p.iou,
                iou_post: iou(&post, label),
                safe_raw: cover(pred, target, eps),
                safe_post: cover(&post, target, eps),
                needed: min_enlargement_ratio(pred, target),
            });
        }
    }

    let n_matched = rows.len();
    let n_safe_raw = rows.iter().filter(|r| r.safe_raw).count();
    let n_safe_post = rows.iter().filter(|r| r.safe_post).count();
    let empty = n_matched == 0;
    let rate = |k: usize| if empty { 1.0 } else { k as f64 / n_matched as f64 };
    let mean = |f: fn(&PairRow) -> f64| {
        (!empty).then(|| rows.iter().map(f).sum::<f64>() / n_matched as f64)
    };

    let divergence_cases = rows
        .iter()
        .filter(|r| (r.iou_raw >= IOU_GOOD_THRESHOLD) != r.safe_raw)
        .map(|r| DivergenceCase {
            image_id: r.image_id.clone(),
            label_index: r.label_index,
            iou: r.iou_raw,
            safe: r.safe_raw,
        })
        .collect();

    EvalReport {
        n_images: records.len(),
        n_labels,
        n_matched,
        n_missed,
        n_safe_raw,
        n_safe_post,
        safe_rate_raw: rate(n_safe_raw),
        safe_rate_post: rate(n_safe_post),
        mean_iou_raw: mean(|r| r.iou_raw),
        mean_iou_post: mean(|r| r.iou_post),
        empty,
        ratios,
        eps,
        divergence_cases,
        rows,
    }
}

/// [`evaluate`] run separately on each split present in `records`.
pub fn evaluate_by_split(
    records: &[ImageRecord],
    ratios: Option<EnlargementRatios>,
    eps: f64,
) -> BTreeMap<Split, EvalReport> {
    let mut by_split: BTreeMap<Split, Vec<ImageRecord>> = BTreeMap::new();
    for r in records {
        by_split.entry(r.split).or_default().push(r.clone());
    }
    by_split
        .into_iter()
        .map(|(s, rs)| (s, evaluate(&rs, ratios, eps)))
        .collect()
}

/// One panel of the IoU-versus-safety illustration.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadrant {
    pub name: &'static str,
    pub description: &'static str,
    pub prediction: BBox,
    pub label: BBox,
    pub iou: f64,
    pub safe: bool,
}

/// Four fixed prediction/label pairs showing that IoU ranks detections
/// differently from the cover predicate: (b) scores a higher IoU than (c)
/// yet leaves part of the object uncovered.
pub fn divergence_quadrants() -> [Quadrant; 4] {
    let label = BBox::new(2.0, 2.0, 6.0, 6.0).unwrap();
    let make = |name, description, pred: [f64; 4]| {
        let prediction = BBox::from_array(pred).unwrap();
        Quadrant {
            name,
            description,
            prediction,
            label,
            iou: iou(&prediction, &label),
            safe: cover(&prediction, &label, 0.0),
        }
    };
    [
        make("a", "disjoint prediction", [8.0, 8.0, 10.0, 10.0]),
        make("b", "tight but clipped prediction", [2.0, 2.0, 6.0, 5.5]),
        make("c", "loose prediction enclosing the label", [0.0, 0.0, 8.0, 8.0]),
        make("d", "exact prediction", [2.0, 2.0, 6.0, 6.0]),
    ]
}
