//! Learned ratios file: `{"rw", "rh", "pairs", "dataset", "margin"}`, plus
//! `"quantile"` when a quantile aggregation was requested.

use std::path::Path;

use serde::{Deserialize, Serialize};

use safebox_core::postproc::LearnedPostprocessor;
use safebox_core::EnlargementRatios;

use crate::{read_text, to_pretty, write_text, Error, FormatError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatiosFile {
    pub rw: f64,
    pub rh: f64,
    #[serde(default)]
    pub pairs: usize,
    #[serde(default)]
    pub dataset: String,
    #[serde(default = "one")]
    pub margin: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantile: Option<f64>,
}

fn one() -> f64 {
    1.0
}

impl RatiosFile {
    pub fn ratios(&self) -> Result<EnlargementRatios, FormatError> {
        EnlargementRatios::new(self.rw, self.rh).map_err(|e| FormatError::schema(e.to_string()))
    }
}

impl From<&LearnedPostprocessor> for RatiosFile {
    fn from(p: &LearnedPostprocessor) -> Self {
        Self {
            rw: p.ratios.rw(),
            rh: p.ratios.rh(),
            pairs: p.pairs(),
            dataset: p.dataset.clone(),
            margin: p.margin,
            quantile: p.quantile,
        }
    }
}

pub fn parse_ratios(text: &str) -> Result<RatiosFile, FormatError> {
    let file: RatiosFile = serde_json::from_str(text)?;
    file.ratios()?;
    Ok(file)
}

pub fn load_ratios(path: &Path) -> Result<RatiosFile, Error> {
    parse_ratios(&read_text(path)?).map_err(|e| Error::format(path, e))
}

pub fn save_ratios(path: &Path, file: &RatiosFile) -> Result<(), Error> {
    write_text(path, &to_pretty(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_gets_defaults() {
        let f = parse_ratios(r#"{"rw": 1.9, "rh": 1.2}"#).unwrap();
        assert_eq!((f.pairs, f.margin, f.quantile), (0, 1.0, None));
        assert_eq!(f.ratios().unwrap(), EnlargementRatios::new(1.9, 1.2).unwrap());
    }

    #[test]
    fn shrinking_ratios_rejected() {
        assert!(parse_ratios(r#"{"rw": 0.5, "rh": 1.2}"#).is_err());
    }

    #[test]
    fn round_trip() {
        let f = RatiosFile {
            rw: 1.9,
            rh: 1.2,
            pairs: 3,
            dataset: "three_pairs".into(),
            margin: 1.0,
            quantile: None,
        };
        let text = to_pretty(&f);
        assert!(!text.contains("quantile"));
        assert_eq!(parse_ratios(&text).unwrap(), f);
    }
}
