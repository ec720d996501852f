//! Safety-aware object detection post-processing and assurance checking.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the command line
//! and anything else touching the filesystem live in the `safebox` crate.
//!
//! * [`geometry`]: boxes, IoU, the `cover` safety predicate, enlargement.
//! * [`dataset`]: image records and prediction/label matching.
//! * [`postproc`]: NMS and the learned conservative enlargement.
//! * [`evaluation`]: safe-rate metrics and the IoU/safety divergence fixtures.
//! * [`logic`]: formula language, proof-script checker, bounded deriver.
//! * [`assurance`]: Dempster-Shafer combination and the soundness gate.
#![no_std]

extern crate alloc;

pub mod assurance;
pub mod dataset;
pub mod evaluation;
pub mod geometry;
pub mod logic;
pub mod postproc;

pub use geometry::{BBox, EnlargementRatios, GeometryError};
