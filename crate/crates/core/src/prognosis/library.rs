use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fuzzy::{encode_into, FuzzyPartition, FuzzySignature, SIGNATURE_LEN, WINDOW_LENGTH};
use crate::segmentation::Run;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BuildMetadata {
    pub source_runs: Vec<usize>,
    /// RFC 3339 time the library was built.
    pub build_timestamp: String,
    pub config_digest: String,
    pub default_k: usize,
}

/// Immutable store of `(signature, RUL)` exemplars from failed runs.
///
/// Signatures are held as one row-major matrix, `SIGNATURE_LEN` wide.
#[derive(Debug, Clone, PartialEq)]
pub struct ExemplarLibrary {
    values: Vec<f64>,
    ruls: Vec<u32>,
    provenance: Vec<(usize, usize)>,
    pub hi_partition: FuzzyPartition,
    pub dhi_partition: FuzzyPartition,
    pub metadata: BuildMetadata,
}

impl ExemplarLibrary {
    /// Assemble a library from its columns. `provenance` holds
    /// `(run_id, cycle)` per exemplar, where `cycle` is the position of the
    /// window's newest cycle within its run.
    pub fn from_parts(
        values: Vec<f64>,
        ruls: Vec<u32>,
        provenance: Vec<(usize, usize)>,
        hi_partition: FuzzyPartition,
        dhi_partition: FuzzyPartition,
        metadata: BuildMetadata,
    ) -> Result<Self> {
        let n = ruls.len();
        if values.len() != n * SIGNATURE_LEN || provenance.len() != n {
            return Err(Error::Format(format!(
                "library columns disagree: {} values, {} RULs, {} provenance rows",
                values.len(),
                n,
                provenance.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Format(format!("library value {v} outside [0, 1]")));
        }
        hi_partition.validate()?;
        dhi_partition.validate()?;
        Ok(Self {
            values,
            ruls,
            provenance,
            hi_partition,
            dhi_partition,
            metadata,
        })
    }

    pub fn len(&self) -> usize {
        self.ruls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ruls.is_empty()
    }

    pub fn dims(&self) -> usize {
        SIGNATURE_LEN
    }

    pub fn window_length(&self) -> usize {
        WINDOW_LENGTH
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * SIGNATURE_LEN..(i + 1) * SIGNATURE_LEN]
    }

    pub fn rul(&self, i: usize) -> u32 {
        self.ruls[i]
    }

    pub fn provenance(&self, i: usize) -> (usize, usize) {
        self.provenance[i]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn ruls(&self) -> &[u32] {
        &self.ruls
    }

    pub fn provenance_rows(&self) -> &[(usize, usize)] {
        &self.provenance
    }

    pub fn signature(&self, i: usize) -> FuzzySignature {
        let (run, cycle) = self.provenance[i];
        FuzzySignature::from_values(self.row(i).to_vec())
            .expect("library rows are validated on construction")
            .with_provenance(run, cycle)
            .with_rul(self.ruls[i])
    }

    /// Refuse use under a configuration other than the one the library was
    /// built with.
    pub fn check_digest(&self, expected: &str) -> Result<()> {
        if self.metadata.config_digest != expected {
            return Err(Error::DigestMismatch {
                expected: expected.to_string(),
                found: self.metadata.config_digest.clone(),
            });
        }
        Ok(())
    }
}

/// `(hi, dhi)` pairs for the window ending at position `t` of a run, or
/// `None` when fewer than `WINDOW_LENGTH` cycles of history exist.
pub fn run_window(run: &Run, t: usize) -> Option<Vec<(f64, f64)>> {
    if t + 1 < WINDOW_LENGTH || t >= run.len() {
        return None;
    }
    Some(
        run.cycles[t + 1 - WINDOW_LENGTH..=t]
            .iter()
            .map(|c| (c.hi, c.dhi))
            .collect(),
    )
}

/// Signature of the window ending at position `t` of `run`.
pub fn run_signature(
    run: &Run,
    t: usize,
    hi_partition: &FuzzyPartition,
    dhi_partition: &FuzzyPartition,
) -> Option<FuzzySignature> {
    let window = run_window(run, t)?;
    let mut values = Vec::with_capacity(SIGNATURE_LEN);
    encode_into(&window, hi_partition, dhi_partition, &mut values).ok()?;
    let sig = FuzzySignature::from_values(values).ok()?;
    let sig = sig.with_provenance(run.run_id, t);
    Some(match run.rul_labels.as_ref() {
        Some(labels) => sig.with_rul(labels[t]),
        None => sig,
    })
}

/// Build the exemplar library from every window of every failed run.
/// Runs that never reached failure contribute nothing.
pub fn build_library(
    training_runs: &[Run],
    hi_partition: FuzzyPartition,
    dhi_partition: FuzzyPartition,
    mut metadata: BuildMetadata,
) -> Result<ExemplarLibrary> {
    let mut values = Vec::new();
    let mut ruls = Vec::new();
    let mut provenance = Vec::new();
    let mut sources = Vec::new();
    for run in training_runs.iter().filter(|r| r.reached_failure) {
        let labels = run.rul_labels.as_ref().ok_or_else(|| {
            Error::Invariant(format!("failed run {} has no RUL labels", run.run_id))
        })?;
        let mut contributed = false;
        for t in WINDOW_LENGTH - 1..run.len() {
            let window = run_window(run, t).expect("t is within the run with full history");
            encode_into(&window, &hi_partition, &dhi_partition, &mut values)?;
            ruls.push(labels[t]);
            provenance.push((run.run_id, t));
            contributed = true;
        }
        if contributed {
            sources.push(run.run_id);
        }
    }
    if ruls.is_empty() {
        return Err(Error::EmptyLibrary);
    }
    metadata.source_runs = sources;
    ExemplarLibrary::from_parts(values, ruls, provenance, hi_partition, dhi_partition, metadata)
}
