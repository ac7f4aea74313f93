//! Post-OCR error correction from intra-document glyph redundancy.
//!
//! Given line images plus the character detections (bounding box + predicted
//! symbol) of some base OCR engine, this crate standardizes every character
//! crop, clusters the crops with a Gaussian mixture model refined by
//! registration and normality testing, relabels each cluster by
//! super-majority vote, and scores the result with CER-based metrics.
//!
//! The stages are exposed as independent modules so they can be run, cached
//! and tested separately; [`pipeline`] wires them together end to end.

pub mod cluster;
pub mod correct;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod model;
pub mod pipeline;
pub mod radiometry;
pub mod raster;
pub mod refine;
pub mod rng;
pub mod standardize;
pub mod synth;

pub use error::{Error, Result};
pub use model::{Detection, LineRecord, PipelineConfig, SubCollection};
