//! Image records and prediction/label association.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::geometry::{iou, BBox};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DatasetError {
    #[error("image {id}: {field}: {reason}")]
    InvalidField {
        id: String,
        field: String,
        reason: String,
    },
    #[error("duplicate image id {0:?}")]
    DuplicateId(String),
}

/// A predicted box with its confidence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub bbox: BBox,
    score: f64,
}

impl Detection {
    /// Returns `None` when the score lies outside `[0, 1]`.
    pub fn new(bbox: BBox, score: f64) -> Option<Self> {
        (0.0..=1.0).contains(&score).then_some(Self { bbox, score })
    }

    #[inline]
    pub fn score(&self) -> f64 {
        self.score
    }

    /// Same score, different box.
    pub fn with_bbox(&self, bbox: BBox) -> Self {
        Self { bbox, score: self.score }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Split {
    Training,
    Odd,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Training => "training",
            Split::Odd => "odd",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageRecord {
    pub id: String,
    pub width: u32,
    pub height: u32,
    pub split: Split,
    pub labels: Vec<BBox>,
    /// True object extents, when known (synthetic data).
    pub ground_truth: Option<Vec<BBox>>,
    pub predictions: Vec<Detection>,
}

impl ImageRecord {
    /// Boxes that "safe" is judged against: ground truth when present,
    /// otherwise the labels.
    pub fn safety_targets(&self) -> &[BBox] {
        match &self.ground_truth {
            Some(gt) => gt,
            None => &self.labels,
        }
    }
}

/// Checks dataset-level invariants (currently id uniqueness and positive
/// image size).
pub fn validate(records: &[ImageRecord]) -> Result<(), DatasetError> {
    let mut seen = BTreeSet::new();
    for r in records {
        if r.width == 0 || r.height == 0 {
            return Err(DatasetError::InvalidField {
                id: r.id.clone(),
                field: "width/height".into(),
                reason: "image size must be positive".into(),
            });
        }
        if let Some(gt) = &r.ground_truth {
            if gt.len() != r.labels.len() {
                return Err(DatasetError::InvalidField {
                    id: r.id.clone(),
                    field: "ground_truth".into(),
                    reason: "must have one entry per label".into(),
                });
            }
        }
        if !seen.insert(r.id.as_str()) {
            return Err(DatasetError::DuplicateId(r.id.clone()));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchPair {
    pub prediction: usize,
    pub label: usize,
    pub iou: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MatchResult {
    /// In formation order, so IoU is non-increasing.
    pub pairs: Vec<MatchPair>,
    pub unmatched_labels: Vec<usize>,
    pub unmatched_predictions: Vec<usize>,
}

/// Greedy one-to-one association by descending IoU. Only overlapping pairs
/// (IoU > 0) are formed; ties go to the lowest prediction, then label index.
pub fn match_boxes(predictions: &[BBox], labels: &[BBox]) -> MatchResult {
    let mut candidates = Vec::new();
    for (p, pb) in predictions.iter().enumerate() {
        for (l, lb) in labels.iter().enumerate() {
            let v = iou(pb, lb);
            if v > 0.0 {
                candidates.push(MatchPair {
                    prediction: p,
                    label: l,
                    iou: v,
                });
            }
        }
    }
    candidates.sort_by(|a, b| {
        b.iou
            .total_cmp(&a.iou)
            .then(a.prediction.cmp(&b.prediction))
            .then(a.label.cmp(&b.label))
    });

    let mut pred_used = alloc::vec![false; predictions.len()];
    let mut label_used = alloc::vec![false; labels.len()];
    let mut pairs = Vec::new();
    for c in candidates {
        if !pred_used[c.prediction] && !label_used[c.label] {
            pred_used[c.prediction] = true;
            label_used[c.label] = true;
            pairs.push(c);
        }
    }
    MatchResult {
        pairs,
        unmatched_labels: (0..labels.len()).filter(|&i| !label_used[i]).collect(),
        unmatched_predictions: (0..predictions.len()).filter(|&i| !pred_used[i]).collect(),
    }
}

/// [`match_boxes`] over a record's predictions and labels.
pub fn match_record(record: &ImageRecord) -> MatchResult {
    let preds: Vec<BBox> = record.predictions.iter().map(|d| d.bbox).collect();
    match_boxes(&preds, &record.labels)
}
