//! File formats and command-line plumbing around [`safebox_core`].
//!
//! Everything here is IO: JSON datasets, learned ratios, evaluation reports,
//! axiom sets, proof scripts and assurance cases. The algorithms live in the
//! core crate.

pub mod case;
pub mod dataset;
pub mod ratios;
pub mod report;
pub mod theory;

mod error;

pub use error::{Error, FormatError};
pub use safebox_core;

use std::path::Path;

pub(crate) fn read_text(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Pretty JSON with a trailing newline, the form every output file uses.
pub(crate) fn to_pretty(value: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("in-memory JSON serialization cannot fail");
    s.push('\n');
    s
}
