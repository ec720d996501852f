//! Dataset JSON:
//!
//! ```json
//! {"images": [{"id": "img-1", "width": 640, "height": 480, "split": "training",
//!   "labels": [{"bbox": [xmin, ymin, xmax, ymax]}],
//!   "ground_truth": [{"bbox": [...]}],
//!   "predictions": [{"bbox": [...], "score": 0.9}]}]}
//! ```
//!
//! `ground_truth` is optional and, when present, parallels `labels`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use safebox_core::dataset::{validate, Detection, ImageRecord, Split};
use safebox_core::BBox;

use crate::{read_text, to_pretty, write_text, Error, FormatError};

#[derive(Serialize, Deserialize)]
struct DatasetDoc {
    images: Vec<ImageDoc>,
}

#[derive(Serialize, Deserialize)]
struct ImageDoc {
    id: String,
    width: u32,
    height: u32,
    split: SplitDoc,
    #[serde(default)]
    labels: Vec<BoxDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ground_truth: Option<Vec<BoxDoc>>,
    #[serde(default)]
    predictions: Vec<PredictionDoc>,
}

#[derive(Serialize, Deserialize, Clone, Copy)]
#[serde(rename_all = "lowercase")]
enum SplitDoc {
    Training,
    Odd,
}

#[derive(Serialize, Deserialize)]
struct BoxDoc {
    bbox: [f64; 4],
}

#[derive(Serialize, Deserialize)]
struct PredictionDoc {
    bbox: [f64; 4],
    score: f64,
}

fn boxes(id: &str, field: &str, docs: &[BoxDoc]) -> Result<Vec<BBox>, FormatError> {
    docs.iter()
        .enumerate()
        .map(|(i, d)| {
            BBox::from_array(d.bbox).map_err(|e| FormatError::schema(format!("image {id:?}: {field}[{i}]: {e}")))
        })
        .collect()
}

fn record(doc: ImageDoc) -> Result<ImageRecord, FormatError> {
    let id = doc.id;
    let labels = boxes(&id, "labels", &doc.labels)?;
    let ground_truth = doc
        .ground_truth
        .as_deref()
        .map(|gt| boxes(&id, "ground_truth", gt))
        .transpose()?;
    let mut predictions = Vec::with_capacity(doc.predictions.len());
    for (i, p) in doc.predictions.iter().enumerate() {
        let bbox = BBox::from_array(p.bbox)
            .map_err(|e| FormatError::schema(format!("image {id:?}: predictions[{i}]: {e}")))?;
        let det = Detection::new(bbox, p.score).ok_or_else(|| {
            FormatError::schema(format!(
                "image {id:?}: predictions[{i}]: score {} is outside [0, 1]",
                p.score
            ))
        })?;
        predictions.push(det);
    }
    Ok(ImageRecord {
        split: match doc.split {
            SplitDoc::Training => Split::Training,
            SplitDoc::Odd => Split::Odd,
        },
        id,
        width: doc.width,
        height: doc.height,
        labels,
        ground_truth,
        predictions,
    })
}

/// Parses and validates a dataset document.
pub fn parse_dataset(text: &str) -> Result<Vec<ImageRecord>, FormatError> {
    let doc: DatasetDoc = serde_json::from_str(text)?;
    let records = doc.images.into_iter().map(record).collect::<Result<Vec<_>, _>>()?;
    validate(&records).map_err(|e| FormatError::schema(e.to_string()))?;
    Ok(records)
}

pub fn load_dataset(path: &Path) -> Result<Vec<ImageRecord>, Error> {
    parse_dataset(&read_text(path)?).map_err(|e| Error::format(path, e))
}

/// Canonical form: pretty-printed, fields in schema order, shortest
/// round-tripping decimals.
pub fn dataset_to_json(records: &[ImageRecord]) -> String {
    let boxes = |bs: &[BBox]| bs.iter().map(|b| BoxDoc { bbox: b.to_array() }).collect();
    let doc = DatasetDoc {
        images: records
            .iter()
            .map(|r| ImageDoc {
                id: r.id.clone(),
                width: r.width,
                height: r.height,
                split: match r.split {
                    Split::Training => SplitDoc::Training,
                    Split::Odd => SplitDoc::Odd,
                },
                labels: boxes(&r.labels),
                ground_truth: r.ground_truth.as_deref().map(boxes),
                predictions: r
                    .predictions
                    .iter()
                    .map(|d| PredictionDoc {
                        bbox: d.bbox.to_array(),
                        score: d.score(),
                    })
                    .collect(),
            })
            .collect(),
    };
    to_pretty(&doc)
}

pub fn save_dataset(path: &Path, records: &[ImageRecord]) -> Result<(), Error> {
    write_text(path, &dataset_to_json(records))
}

#[cfg(test)]
mod tests {
    use super::*;

    const THREE: &str = r#"{"images": [
        {"id": "a", "width": 10, "height": 10, "split": "training",
         "labels": [{"bbox": [1, 1, 2, 2]}], "predictions": [{"bbox": [1, 1, 2, 2], "score": 0.5}]},
        {"id": "b", "width": 10, "height": 10, "split": "odd", "labels": [], "predictions": []},
        {"id": "c", "width": 10, "height": 10, "split": "training",
         "labels": [{"bbox": [0, 0, 3, 4]}], "ground_truth": [{"bbox": [1, 1, 2, 2]}], "predictions": []}
    ]}"#;

    #[test]
    fn loads_three_records() {
        let rs = parse_dataset(THREE).unwrap();
        assert_eq!(rs.len(), 3);
        assert_eq!(rs[1].split, Split::Odd);
        assert!(rs[2].ground_truth.is_some());
    }

    #[test]
    fn degenerate_box_names_the_image() {
        let text = r#"{"images": [{"id": "cam7-0042", "width": 10, "height": 10, "split": "odd",
            "labels": [{"bbox": [5, 5, 5, 9]}], "predictions": []}]}"#;
        let err = parse_dataset(text).unwrap_err().to_string();
        assert!(err.contains("cam7-0042"), "{err}");
    }

    #[test]
    fn empty_image_list() {
        assert!(parse_dataset(r#"{"images": []}"#).unwrap().is_empty());
    }

    #[test]
    fn bad_score_and_ground_truth_length() {
        let text = r#"{"images": [{"id": "x", "width": 1, "height": 1, "split": "odd",
            "predictions": [{"bbox": [0, 0, 1, 1], "score": 1.5}]}]}"#;
        assert!(parse_dataset(text).unwrap_err().to_string().contains("score"));
        let text = r#"{"images": [{"id": "x", "width": 1, "height": 1, "split": "odd",
            "labels": [{"bbox": [0, 0, 1, 1]}], "ground_truth": []}]}"#;
        assert!(parse_dataset(text).unwrap_err().to_string().contains("ground_truth"));
    }

    #[test]
    fn canonical_form_is_a_fixed_point() {
        let once = dataset_to_json(&parse_dataset(THREE).unwrap());
        let twice = dataset_to_json(&parse_dataset(&once).unwrap());
        assert_eq!(once, twice);
    }
}
