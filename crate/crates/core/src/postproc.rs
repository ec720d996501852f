//! Detection post-processing: NMS followed by the learned conservative
//! enlargement, and the offline procedure that learns the enlargement.

use alloc::string::String;
use alloc::vec::Vec;

use crate::dataset::{match_record, Detection, ImageRecord, Split};
use crate::geometry::{enlarge, iou, min_enlargement_ratio, EnlargementRatios};

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum PostprocError {
    #[error("iou_threshold must lie in (0, 1], got {0}")]
    IouThreshold(f64),
    #[error("score_threshold must lie in [0, 1], got {0}")]
    ScoreThreshold(f64),
    #[error("safety margin must be finite and >= 1, got {0}")]
    Margin(f64),
    #[error("quantile must lie in (0, 1], got {0}")]
    Quantile(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NmsConfig {
    iou_threshold: f64,
    score_threshold: f64,
}

impl NmsConfig {
    pub fn new(iou_threshold: f64, score_threshold: f64) -> Result<Self, PostprocError> {
        if !(iou_threshold > 0.0 && iou_threshold <= 1.0) {
            return Err(PostprocError::IouThreshold(iou_threshold));
        }
        if !(0.0..=1.0).contains(&score_threshold) {
            return Err(PostprocError::ScoreThreshold(score_threshold));
        }
        Ok(Self {
            iou_threshold,
            score_threshold,
        })
    }

    pub fn iou_threshold(&self) -> f64 {
        self.iou_threshold
    }

    pub fn score_threshold(&self) -> f64 {
        self.score_threshold
    }
}

impl Default for NmsConfig {
    fn default() -> Self {
        Self {
            iou_threshold: 0.5,
            score_threshold: 0.0,
        }
    }
}

/// Greedy non-maximum suppression. Kept detections come out in descending
/// score order (stable on ties).
pub fn nms(dets: &[Detection], cfg: &NmsConfig) -> Vec<Detection> {
    let mut order: Vec<&Detection> = dets
        .iter()
        .filter(|d| d.score() >= cfg.score_threshold)
        .collect();
    order.sort_by(|a, b| b.score().total_cmp(&a.score()));

    let mut kept: Vec<Detection> = Vec::new();
    for d in order {
        if kept
            .iter()
            .all(|k| iou(&k.bbox, &d.bbox) < cfg.iou_threshold)
        {
            kept.push(*d);
        }
    }
    kept
}

/// Knobs for [`learn_ratios`]. The defaults reproduce the exact-max rule,
/// which is what makes in-sample coverage hold by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnOptions {
    /// Multiplies the aggregated ratios. Must be `>= 1`.
    pub margin: f64,
    /// Aggregate with this nearest-rank quantile instead of the maximum.
    pub quantile: Option<f64>,
}

impl Default for LearnOptions {
    fn default() -> Self {
        Self {
            margin: 1.0,
            quantile: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnedPostprocessor {
    pub ratios: EnlargementRatios,
    pub dataset: String,
    pub margin: f64,
    pub quantile: Option<f64>,
    /// One entry per matched training pair, in record order.
    pub per_pair_ratios: Vec<EnlargementRatios>,
}

impl LearnedPostprocessor {
    pub fn from_ratios(ratios: EnlargementRatios) -> Self {
        Self {
            ratios,
            dataset: String::new(),
            margin: 1.0,
            quantile: None,
            per_pair_ratios: Vec::new(),
        }
    }

    pub fn pairs(&self) -> usize {
        self.per_pair_ratios.len()
    }

    /// Set when nothing was learned and the ratios fell back to identity.
    pub fn is_empty_warning(&self) -> bool {
        self.per_pair_ratios.is_empty()
    }

    /// Replaces every box by its enlargement; scores and order are kept.
    pub fn apply(&self, dets: &[Detection]) -> Vec<Detection> {
        apply(self.ratios, dets)
    }
}

pub fn apply(ratios: EnlargementRatios, dets: &[Detection]) -> Vec<Detection> {
    dets.iter()
        .map(|d| d.with_bbox(enlarge(&d.bbox, ratios)))
        .collect()
}

/// Learns the enlargement from the training split: for every matched
/// (prediction, label) pair, measure the minimal covering ratio, then take
/// the componentwise maximum over all pairs.
pub fn learn_ratios(
    records: &[ImageRecord],
    dataset: &str,
    opts: LearnOptions,
) -> Result<LearnedPostprocessor, PostprocError> {
    if !opts.margin.is_finite() || opts.margin < 1.0 {
        return Err(PostprocError::Margin(opts.margin));
    }
    if let Some(q) = opts.quantile {
        if !(q > 0.0 && q <= 1.0) {
            return Err(PostprocError::Quantile(q));
        }
    }

    let mut per_pair = Vec::new();
    for r in records.iter().filter(|r| r.split == Split::Training) {
        for p in match_record(r).pairs {
            per_pair.push(min_enlargement_ratio(
                &r.predictions[p.prediction].bbox,
                &r.labels[p.label],
            ));
        }
    }

    let (rw, rh) = match opts.quantile {
        None => per_pair
            .iter()
            .fold((1.0f64, 1.0f64), |(w, h), r| (w.max(r.rw()), h.max(r.rh()))),
        Some(q) => (
            nearest_rank(per_pair.iter().map(|r| r.rw()).collect(), q),
            nearest_rank(per_pair.iter().map(|r| r.rh()).collect(), q),
        ),
    };
    // cannot fail: both components are >= 1 and margin >= 1
    let ratios = EnlargementRatios::new(rw * opts.margin, rh * opts.margin)
        .map_err(|_| PostprocError::Margin(opts.margin))?;

    Ok(LearnedPostprocessor {
        ratios,
        dataset: dataset.into(),
        margin: opts.margin,
        quantile: opts.quantile,
        per_pair_ratios: per_pair,
    })
}

fn nearest_rank(mut values: Vec<f64>, q: f64) -> f64 {
    if values.is_empty() {
        return 1.0;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    // ceil(q * n) without std's float intrinsics.
    let x = q * n as f64;
    let floor = x as usize;
    let rank = if (floor as f64) < x { floor + 1 } else { floor }.clamp(1, n);
    values[rank - 1].max(1.0)
}
