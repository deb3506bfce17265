//! Health Index construction and fuzzy-similarity remaining-useful-life
//! prognostics for ultrafiltration membrane sensor logs.
//!
//! The pipeline runs ingest → cycle features → run segmentation and RUL
//! labels → fuzzy signatures → exemplar retrieval and Takagi-Sugeno
//! aggregation → evaluation. [`simulate`] generates synthetic logs that
//! exercise every stage.

pub mod artifact;
pub mod config;
pub mod error;
pub mod eval;
pub mod features;
pub mod fuzzy;
pub mod ingest;
pub mod pipeline;
pub mod prognosis;
pub mod segmentation;
pub mod simulate;

pub use config::PipelineConfig;
pub use error::{Error, ErrorKind, Result};
