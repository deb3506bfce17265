//! Gaussian fuzzy partitions and fixed-layout fuzzy signatures.
//!
//! A signature encodes a window of `WINDOW_LENGTH` cycles, oldest first.
//! Each cycle contributes six degrees in this order:
//! `HI-Low, HI-Medium, HI-High, dHI-Low, dHI-Medium, dHI-High`.
//! Similarity is position-wise, so this layout is part of the library file
//! contract.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const WINDOW_LENGTH: usize = 20;
pub const TERMS: usize = 3;
pub const FEATURES: usize = 2;
pub const DEGREES_PER_CYCLE: usize = FEATURES * TERMS;
pub const SIGNATURE_LEN: usize = WINDOW_LENGTH * DEGREES_PER_CYCLE;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Feature {
    #[serde(rename = "HI")]
    Hi,
    #[serde(rename = "dHI")]
    DHi,
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Feature::Hi => "HI",
            Feature::DHi => "dHI",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Label {
    Low,
    Medium,
    High,
}

impl Label {
    pub const ALL: [Label; TERMS] = [Label::Low, Label::Medium, Label::High];
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Low => "Low",
            Label::Medium => "Medium",
            Label::High => "High",
        })
    }
}

/// Three equally spaced Gaussian terms over one feature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FuzzyPartition {
    pub feature: Feature,
    /// Low, Medium, High centers.
    pub centers: [f64; TERMS],
    pub sigma: f64,
}

impl FuzzyPartition {
    /// Centers at `lo`, the midpoint and `hi`; bandwidth is half of the
    /// half-range, `0.5 * (hi - lo) / 2`.
    pub fn uniform(feature: Feature, lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Precondition(format!(
                "partition range must satisfy lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self {
            feature,
            centers: [lo, (lo + hi) / 2.0, hi],
            sigma: 0.5 * (hi - lo) / 2.0,
        })
    }

    /// Raw Gaussian degrees for (Low, Medium, High). Not renormalized.
    #[inline]
    pub fn membership(&self, x: f64) -> [f64; TERMS] {
        let two_var = 2.0 * self.sigma * self.sigma;
        self.centers.map(|c| (-(x - c) * (x - c) / two_var).exp())
    }

    /// Check the partition is one [`FuzzyPartition::uniform`] could build.
    pub fn validate(&self) -> Result<()> {
        let [lo, mid, hi] = self.centers;
        let ok = lo < mid && mid < hi && self.sigma > 0.0 && self.sigma.is_finite();
        if !ok {
            return Err(Error::Format(format!("invalid fuzzy partition {self:?}")));
        }
        Ok(())
    }
}

pub fn make_uniform_partition(feature: Feature, lo: f64, hi: f64) -> Result<FuzzyPartition> {
    FuzzyPartition::uniform(feature, lo, hi)
}

#[inline]
pub fn membership(x: f64, partition: &FuzzyPartition) -> [f64; TERMS] {
    partition.membership(x)
}

/// Where a signature position sits in the window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotRef {
    /// 0 is the oldest cycle in the window.
    pub cycle_offset: usize,
    pub feature: Feature,
    pub label: Label,
}

impl SlotRef {
    pub fn decode(position: usize) -> Self {
        debug_assert!(position < SIGNATURE_LEN);
        let feature = match (position % DEGREES_PER_CYCLE) / TERMS {
            0 => Feature::Hi,
            _ => Feature::DHi,
        };
        Self {
            cycle_offset: position / DEGREES_PER_CYCLE,
            feature,
            label: Label::ALL[position % TERMS],
        }
    }

    pub fn encode(&self) -> usize {
        let f = match self.feature {
            Feature::Hi => 0,
            Feature::DHi => 1,
        };
        let l = Label::ALL.iter().position(|&l| l == self.label).unwrap_or(0);
        self.cycle_offset * DEGREES_PER_CYCLE + f * TERMS + l
    }

    /// Cycles back from the newest cycle in the window (0 for the newest).
    pub fn lag(&self) -> usize {
        WINDOW_LENGTH - 1 - self.cycle_offset
    }
}

/// A window's membership vector plus provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzySignature {
    values: Vec<f64>,
    pub run_id: Option<usize>,
    pub cycle_index: Option<usize>,
    pub rul: Option<u32>,
}

impl FuzzySignature {
    /// Wrap a raw vector. Length must be [`SIGNATURE_LEN`] and values finite
    /// and within [0, 1].
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.len() != SIGNATURE_LEN {
            return Err(Error::Precondition(format!(
                "signature must have {SIGNATURE_LEN} values, got {}",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Precondition(format!(
                "signature value {v} outside [0, 1]"
            )));
        }
        Ok(Self {
            values,
            run_id: None,
            cycle_index: None,
            rul: None,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn with_provenance(mut self, run_id: usize, cycle_index: usize) -> Self {
        self.run_id = Some(run_id);
        self.cycle_index = Some(cycle_index);
        self
    }

    pub fn with_rul(mut self, rul: u32) -> Self {
        self.rul = Some(rul);
        self
    }

    /// Per-cycle `(HI triple, dHI triple)` in window order.
    pub fn triples(&self) -> Vec<([f64; TERMS], [f64; TERMS])> {
        self.values
            .chunks_exact(DEGREES_PER_CYCLE)
            .map(|c| ([c[0], c[1], c[2]], [c[3], c[4], c[5]]))
            .collect()
    }
}

/// Encode a window of `(hi, dhi)` pairs, oldest first, into `out`.
pub fn encode_into(
    window: &[(f64, f64)],
    hi_partition: &FuzzyPartition,
    dhi_partition: &FuzzyPartition,
    out: &mut Vec<f64>,
) -> Result<()> {
    if window.len() != WINDOW_LENGTH {
        return Err(Error::Precondition(format!(
            "window must have {WINDOW_LENGTH} cycles, got {}",
            window.len()
        )));
    }
    out.reserve(SIGNATURE_LEN);
    for &(hi, dhi) in window {
        out.extend_from_slice(&hi_partition.membership(hi));
        out.extend_from_slice(&dhi_partition.membership(dhi));
    }
    Ok(())
}

pub fn encode_signature(
    window: &[(f64, f64)],
    hi_partition: &FuzzyPartition,
    dhi_partition: &FuzzyPartition,
) -> Result<FuzzySignature> {
    let mut values = Vec::with_capacity(SIGNATURE_LEN);
    encode_into(window, hi_partition, dhi_partition, &mut values)?;
    FuzzySignature::from_values(values)
}
