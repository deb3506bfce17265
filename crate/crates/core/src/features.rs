//! Hydraulic features per cycle and the composite Health Index.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::SensorRecord;

/// Default denominator guard for resistance and similarity ratios.
pub const DEFAULT_EPSILON: f64 = 1e-9;

/// Lower clamp on the viscosity correction factor.
pub const MIN_VISCOSITY_FACTOR: f64 = 0.1;

/// Transmembrane pressure. May be negative around backwash transients; the
/// caller decides whether to flag it.
#[inline]
pub fn compute_tmp(feed_pressure: f64, filtrate_pressure: f64) -> f64 {
    feed_pressure - filtrate_pressure
}

/// Linear viscosity correction relative to 20 °C, clamped below at
/// [`MIN_VISCOSITY_FACTOR`] so the resistance denominator stays positive.
#[inline]
pub fn viscosity_correction(temperature: f64) -> f64 {
    (1.0 - 0.02 * (temperature - 20.0)).max(MIN_VISCOSITY_FACTOR)
}

/// Dimensionless relative membrane resistance, `tmp / (flux * mu_rel + eps)`.
#[inline]
pub fn compute_resistance(tmp: f64, flux: f64, temperature: f64, eps: f64) -> f64 {
    tmp / (flux * viscosity_correction(temperature) + eps)
}

/// Within-cycle TMP swing, `max - min`.
pub fn compute_recovery(tmp_within_cycle: &[f64]) -> Result<f64> {
    let (&first, rest) = tmp_within_cycle
        .split_first()
        .ok_or_else(|| Error::Precondition("recovery of an empty TMP series".into()))?;
    let (lo, hi) = rest
        .iter()
        .fold((first, first), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    Ok(hi - lo)
}

/// Aggregated features of one filtration-backwash cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleFeatures {
    pub cycle_index: usize,
    pub start_time: f64,
    pub end_time: f64,
    /// Cycle-mean TMP, psi.
    pub tmp: f64,
    /// Cycle-mean filtrate flow, GPM.
    pub flux: f64,
    pub resistance: f64,
    /// Within-cycle TMP max minus min, psi.
    pub recovery: f64,
    pub temperature: f64,
    pub n_samples: usize,
    /// Records in the cycle whose TMP was negative.
    pub negative_tmp_samples: usize,
}

/// Collapse a cycle's records into [`CycleFeatures`]. TMP, flux and
/// temperature are arithmetic means; resistance is computed from those
/// means; recovery uses the per-record TMP extremes.
pub fn aggregate_cycle(
    records: &[SensorRecord],
    cycle_index: usize,
    eps: f64,
) -> Result<CycleFeatures> {
    let (first, last) = match (records.first(), records.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => {
            return Err(Error::Precondition(format!(
                "cycle {cycle_index} has no records"
            )))
        }
    };
    let tmps: Vec<f64> = records
        .iter()
        .map(|r| compute_tmp(r.feed_pressure, r.filtrate_pressure))
        .collect();
    let n = records.len() as f64;
    let tmp = tmps.iter().sum::<f64>() / n;
    let flux = records.iter().map(|r| r.filtrate_flow).sum::<f64>() / n;
    let temperature = records.iter().map(|r| r.temperature).sum::<f64>() / n;
    Ok(CycleFeatures {
        cycle_index,
        start_time: first.timestamp,
        end_time: last.timestamp,
        tmp,
        flux,
        resistance: compute_resistance(tmp, flux, temperature, eps),
        recovery: compute_recovery(&tmps)?,
        temperature,
        n_samples: records.len(),
        negative_tmp_samples: tmps.iter().filter(|&&t| t < 0.0).count(),
    })
}

/// Health Index weights. Must be non-negative and sum to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HealthWeights {
    pub resistance: f64,
    pub tmp: f64,
    pub flux: f64,
    pub recovery: f64,
}

impl Default for HealthWeights {
    fn default() -> Self {
        Self {
            resistance: 0.30,
            tmp: 0.25,
            flux: 0.30,
            recovery: 0.15,
        }
    }
}

impl HealthWeights {
    pub fn new(resistance: f64, tmp: f64, flux: f64, recovery: f64) -> Result<Self> {
        let w = Self {
            resistance,
            tmp,
            flux,
            recovery,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.resistance, self.tmp, self.flux, self.recovery];
        if all.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Config(format!("health weights must be >= 0: {all:?}")));
        }
        let sum: f64 = all.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!("health weights sum to {sum}, not 1")));
        }
        Ok(())
    }

    pub fn sum(&self) -> f64 {
        self.resistance + self.tmp + self.flux + self.recovery
    }

    /// `HI = w_r (1 - R*) + w_tmp (1 - TMP*) + w_j J* + w_rec Rec*`.
    #[inline]
    pub fn health_index(&self, r_star: f64, tmp_star: f64, j_star: f64, rec_star: f64) -> f64 {
        self.resistance * (1.0 - r_star)
            + self.tmp * (1.0 - tmp_star)
            + self.flux * j_star
            + self.recovery * rec_star
    }
}

/// Per-run normalized view of one cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedCycle {
    pub cycle_index: usize,
    pub start_time: f64,
    pub end_time: f64,
    pub r_star: f64,
    pub tmp_star: f64,
    pub j_star: f64,
    pub rec_star: f64,
    pub hi: f64,
    /// `hi[t] - hi[t-1]`; zero for the first cycle of a run.
    pub dhi: f64,
}

/// Min-max scale `values` into [0, 1]. A constant series maps every entry
/// to `constant_fill`.
pub fn min_max(values: &[f64], constant_fill: f64) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    if !(span > 0.0) {
        return vec![constant_fill; values.len()];
    }
    values
        .iter()
        .map(|&v| ((v - lo) / span).clamp(0.0, 1.0))
        .collect()
}

/// Normalize one run's cycles and compute HI and dHI. Constant features map
/// to 0.
pub fn normalize_run(cycles: &[CycleFeatures], weights: &HealthWeights) -> Vec<NormalizedCycle> {
    normalize_run_with(cycles, weights, 0.0)
}

pub fn normalize_run_with(
    cycles: &[CycleFeatures],
    weights: &HealthWeights,
    constant_fill: f64,
) -> Vec<NormalizedCycle> {
    let column = |f: fn(&CycleFeatures) -> f64| -> Vec<f64> {
        min_max(&cycles.iter().map(f).collect::<Vec<_>>(), constant_fill)
    };
    let r = column(|c| c.resistance);
    let tmp = column(|c| c.tmp);
    let j = column(|c| c.flux);
    let rec = column(|c| c.recovery);

    let mut prev_hi = None;
    cycles
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let hi = weights.health_index(r[i], tmp[i], j[i], rec[i]).clamp(0.0, 1.0);
            let dhi = prev_hi.map_or(0.0, |p| hi - p);
            prev_hi = Some(hi);
            NormalizedCycle {
                cycle_index: c.cycle_index,
                start_time: c.start_time,
                end_time: c.end_time,
                r_star: r[i],
                tmp_star: tmp[i],
                j_star: j[i],
                rec_star: rec[i],
                hi,
                dhi,
            }
        })
        .collect()
}
