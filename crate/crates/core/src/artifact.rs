//! The runs-and-cycles artifact handed from `ingest` to later stages.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::pipeline::{PipelineDiagnostics, ProcessedSeries};
use crate::segmentation::Run;

pub const CYCLES_FORMAT: &str = "uf-prognost-cycles";
pub const CYCLES_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CyclesArtifact {
    pub format: String,
    pub version: u32,
    pub config_digest: String,
    /// Effective configuration the runs were produced with.
    pub config: PipelineConfig,
    pub source_id: String,
    pub diagnostics: PipelineDiagnostics,
    pub runs: Vec<Run>,
}

impl CyclesArtifact {
    pub fn new(processed: ProcessedSeries, config: &PipelineConfig) -> Self {
        Self {
            format: CYCLES_FORMAT.into(),
            version: CYCLES_VERSION,
            config_digest: config.digest(),
            config: config.clone(),
            source_id: processed.source_id,
            diagnostics: processed.diagnostics,
            runs: processed.runs,
        }
    }

    pub fn to_json(&self) -> Result<Vec<u8>> {
        let mut out = serde_json::to_vec_pretty(self)?;
        out.push(b'\n');
        Ok(out)
    }

    /// Parse and check format, version and that the embedded config still
    /// hashes to the recorded digest.
    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let a: Self = serde_json::from_slice(bytes)?;
        if a.format != CYCLES_FORMAT {
            return Err(Error::Format(format!("not a cycles artifact (format {:?})", a.format)));
        }
        if a.version != CYCLES_VERSION {
            return Err(Error::Format(format!(
                "cycles artifact version {} unsupported (expected {CYCLES_VERSION})",
                a.version
            )));
        }
        let found = a.config.digest();
        if found != a.config_digest {
            return Err(Error::DigestMismatch {
                expected: a.config_digest.clone(),
                found,
            });
        }
        Ok(a)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn empty() -> CyclesArtifact {
        let processed = ProcessedSeries {
            source_id: "s".into(),
            runs: Vec::new(),
            diagnostics: PipelineDiagnostics::default(),
        };
        CyclesArtifact::new(processed, &PipelineConfig::default())
    }

    #[test]
    fn round_trip() {
        let a = empty();
        assert_eq!(CyclesArtifact::from_json(&a.to_json().unwrap()).unwrap(), a);
    }

    #[test]
    fn tampered_config_detected() {
        let mut a = empty();
        a.config.prognosis.top_k = 3;
        let err = CyclesArtifact::from_json(&a.to_json().unwrap()).unwrap_err();
        assert!(matches!(err, Error::DigestMismatch { .. }));
    }

    #[test]
    fn wrong_format_rejected() {
        let mut a = empty();
        a.format = "other".into();
        assert!(matches!(
            CyclesArtifact::from_json(&a.to_json().unwrap()),
            Err(Error::Format(_))
        ));
    }
}
