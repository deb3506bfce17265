//! Zero-order Takagi-Sugeno aggregation over retrieved exemplars.

use serde::{Deserialize, Serialize};

use super::library::ExemplarLibrary;
use super::rules::{mine_rule, MinedRule};
use super::similarity::{retrieve_top_k, Match};
use crate::error::{Error, Result};
use crate::features::DEFAULT_EPSILON;
use crate::fuzzy::FuzzySignature;

pub const DEFAULT_TOP_K: usize = 10;
pub const DEFAULT_INTERVAL_LEVEL: f64 = 0.8;

/// Similarity-weighted mean of the matches' RULs, and whether the
/// unweighted fallback was used because every similarity was zero.
pub fn tsk_aggregate(matches: &[Match]) -> Result<(f64, bool)> {
    if matches.is_empty() {
        return Err(Error::Precondition("TSK aggregation needs at least one match".into()));
    }
    let total: f64 = matches.iter().map(|m| m.similarity).sum();
    let (estimate, fallback) = if total > 0.0 {
        let weighted: f64 = matches.iter().map(|m| m.similarity * f64::from(m.rul)).sum();
        (weighted / total, false)
    } else {
        log::warn!("all {} match similarities are zero; using unweighted mean", matches.len());
        let sum: f64 = matches.iter().map(|m| f64::from(m.rul)).sum();
        (sum / matches.len() as f64, true)
    };
    // Rounding can push a convex combination a few ulps outside its hull.
    let lo = matches.iter().map(|m| m.rul).min().map_or(0.0, f64::from);
    let hi = matches.iter().map(|m| m.rul).max().map_or(0.0, f64::from);
    Ok((estimate.clamp(lo, hi), fallback))
}

pub fn predict_rul(matches: &[Match]) -> Result<f64> {
    tsk_aggregate(matches).map(|(rul, _)| rul)
}

/// Interval endpoints and the central probability they cover.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Similarity-weighted quantile of the matches' RULs.
///
/// Matches are sorted by RUL (then exemplar index). Each carries its
/// normalized weight and is placed at the midpoint of its cumulative-weight
/// step; the quantile is linearly interpolated between those points and
/// clamped to the extreme RULs outside them. Zero-weight matches are
/// ignored unless every weight is zero, in which case weights are equal.
pub fn weighted_quantile(matches: &[Match], q: f64) -> Result<f64> {
    if matches.is_empty() {
        return Err(Error::Precondition("quantile of an empty match set".into()));
    }
    let mut items: Vec<(u32, usize, f64)> = matches
        .iter()
        .map(|m| (m.rul, m.exemplar, m.similarity.max(0.0)))
        .collect();
    if items.iter().all(|i| i.2 == 0.0) {
        items.iter_mut().for_each(|i| i.2 = 1.0);
    }
    items.retain(|i| i.2 > 0.0);
    items.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
    let total: f64 = items.iter().map(|i| i.2).sum();

    let mut cumulative = 0.0;
    let points: Vec<(f64, f64)> = items
        .iter()
        .map(|&(rul, _, w)| {
            let w = w / total;
            let p = cumulative + 0.5 * w;
            cumulative += w;
            (p, f64::from(rul))
        })
        .collect();

    let (first, last) = (points[0], points[points.len() - 1]);
    if q <= first.0 {
        return Ok(first.1);
    }
    if q >= last.0 {
        return Ok(last.1);
    }
    let j = points.partition_point(|&(p, _)| p <= q);
    let (p0, r0) = points[j - 1];
    let (p1, r1) = points[j];
    if p1 <= p0 {
        return Ok(r1);
    }
    Ok(r0 + (q - p0) / (p1 - p0) * (r1 - r0))
}

/// Central interval at `level` from weighted quantiles at
/// `(1 - level) / 2` and `1 - (1 - level) / 2`.
pub fn prediction_interval(matches: &[Match], level: f64) -> Result<Interval> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Precondition(format!("interval level {level} not in (0, 1)")));
    }
    let tail = (1.0 - level) / 2.0;
    Ok(Interval {
        lo: weighted_quantile(matches, tail)?,
        hi: weighted_quantile(matches, 1.0 - tail)?,
        level,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictParams {
    pub k: usize,
    pub level: f64,
    pub eps: f64,
    /// Skip exemplars from the query's own run.
    pub exclude_same_run: bool,
}

impl Default for PredictParams {
    fn default() -> Self {
        Self {
            k: DEFAULT_TOP_K,
            level: DEFAULT_INTERVAL_LEVEL,
            eps: DEFAULT_EPSILON,
            exclude_same_run: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryRef {
    pub run_id: Option<usize>,
    pub cycle: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub query: QueryRef,
    pub rul_estimate: f64,
    pub interval: Interval,
    pub matches: Vec<Match>,
    pub rules: Vec<MinedRule>,
    /// Set when every similarity was zero and the unweighted mean was used.
    pub unweighted_fallback: bool,
}

/// Retrieve, aggregate and explain one query.
pub fn predict(
    query: &FuzzySignature,
    library: &ExemplarLibrary,
    params: &PredictParams,
) -> Result<Prediction> {
    let exclude = if params.exclude_same_run { query.run_id } else { None };
    let matches = retrieve_top_k(query.values(), library, params.k, exclude, params.eps)?;
    let (rul_estimate, unweighted_fallback) = tsk_aggregate(&matches)?;
    let interval = prediction_interval(&matches, params.level)?;
    let rules = matches.iter().map(|m| mine_rule(m, library)).collect::<Result<_>>()?;
    Ok(Prediction {
        query: QueryRef {
            run_id: query.run_id,
            cycle: query.cycle_index,
        },
        rul_estimate,
        interval,
        matches,
        rules,
        unweighted_fallback,
    })
}
