//! Backwash detection, cycle cutting, run grouping and RUL labeling.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::features::{aggregate_cycle, normalize_run_with, CycleFeatures, HealthWeights, NormalizedCycle};
use crate::ingest::SensorSeries;

pub const DEFAULT_BACKWASH_THRESHOLD_GPM: f64 = 15.0;
pub const DEFAULT_HI_JUMP: f64 = 0.5;
pub const DEFAULT_MAX_GAP_HOURS: f64 = 24.0;
pub const DEFAULT_FAILURE_HI: f64 = 0.01;
pub const DEFAULT_MIN_CYCLE_SAMPLES: usize = 3;

/// A maximal contiguous stretch of records with backwash flow at or above
/// the detection threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackwashEvent {
    pub onset_time: f64,
    pub peak_flow: f64,
    /// Half-open record index range into the series.
    pub record_span: Range<usize>,
}

pub fn detect_backwash_events(series: &SensorSeries, threshold: f64) -> Vec<BackwashEvent> {
    let mut events = Vec::new();
    let mut open: Option<BackwashEvent> = None;
    for (i, r) in series.records.iter().enumerate() {
        if r.backwash_flow >= threshold {
            match open.as_mut() {
                Some(ev) => {
                    ev.record_span.end = i + 1;
                    ev.peak_flow = ev.peak_flow.max(r.backwash_flow);
                }
                None => {
                    open = Some(BackwashEvent {
                        onset_time: r.timestamp,
                        peak_flow: r.backwash_flow,
                        record_span: i..i + 1,
                    })
                }
            }
        } else if let Some(ev) = open.take() {
            events.push(ev);
        }
    }
    events.extend(open);
    events
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleSpans {
    /// Half-open record ranges, one per retained cycle.
    pub spans: Vec<Range<usize>>,
    pub warning: Option<String>,
    /// Whether the partial cycle before the first backwash was kept.
    pub leading_kept: bool,
}

/// Cut the series into cycles running from just after one backwash to the
/// end of the next. The stretch up to and including the first backwash is a
/// leading partial cycle, kept when it has at least `min_cycle_samples`
/// records. Records after the last backwash are an incomplete cycle and are
/// dropped.
pub fn segment_cycles(
    series: &SensorSeries,
    events: &[BackwashEvent],
    min_cycle_samples: usize,
) -> CycleSpans {
    if events.len() < 2 {
        let warning = format!(
            "{}: {} backwash event(s) detected; at least 2 are needed to delimit a cycle",
            series.source_id,
            events.len()
        );
        log::warn!("{warning}");
        return CycleSpans {
            spans: Vec::new(),
            warning: Some(warning),
            leading_kept: false,
        };
    }
    let mut spans = Vec::with_capacity(events.len());
    let leading = 0..events[0].record_span.end;
    let leading_kept = leading.len() >= min_cycle_samples;
    if leading_kept {
        spans.push(leading);
    }
    spans.extend(
        events
            .windows(2)
            .map(|w| w[0].record_span.end..w[1].record_span.end),
    );
    CycleSpans {
        spans,
        warning: None,
        leading_kept,
    }
}

pub fn cycle_features(
    series: &SensorSeries,
    spans: &[Range<usize>],
    eps: f64,
) -> Result<Vec<CycleFeatures>> {
    spans
        .iter()
        .enumerate()
        .map(|(i, span)| aggregate_cycle(&series.records[span.clone()], i, eps))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartReason {
    SeriesStart,
    HiJump,
    TimeGap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndReason {
    Failure,
    NextRecovery,
    SeriesEnd,
}

/// One degradation lifecycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Run {
    pub run_id: usize,
    /// Raw aggregated features, parallel to `cycles`.
    pub features: Vec<CycleFeatures>,
    /// Features normalized within this run.
    pub cycles: Vec<NormalizedCycle>,
    pub start_reason: StartReason,
    pub end_reason: EndReason,
    pub reached_failure: bool,
    /// Remaining cycles until failure, one per cycle. `None` for runs that
    /// never reach the failure threshold.
    pub rul_labels: Option<Vec<u32>>,
}

impl Run {
    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }

    pub fn start_time(&self) -> f64 {
        self.cycles.first().map_or(f64::NAN, |c| c.start_time)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSplitParams {
    pub hi_jump: f64,
    pub max_gap_hours: f64,
    /// Starred value assigned to a feature that is constant over a run.
    pub constant_fill: f64,
}

impl Default for RunSplitParams {
    fn default() -> Self {
        Self {
            hi_jump: DEFAULT_HI_JUMP,
            max_gap_hours: DEFAULT_MAX_GAP_HOURS,
            constant_fill: 0.0,
        }
    }
}

/// Group time-ordered cycles into runs.
///
/// Split detection needs an HI before runs exist, so it uses an HI
/// normalized over the whole series. A run starts where that HI rises by
/// more than `hi_jump` or where the idle time between cycles exceeds
/// `max_gap_hours`. Each run is then renormalized on its own.
pub fn group_runs(
    cycles: &[CycleFeatures],
    weights: &HealthWeights,
    params: &RunSplitParams,
) -> Vec<Run> {
    if cycles.is_empty() {
        return Vec::new();
    }
    let global = normalize_run_with(cycles, weights, params.constant_fill);
    let max_gap_s = params.max_gap_hours * 3600.0;

    let mut starts = vec![(0usize, StartReason::SeriesStart)];
    for t in 1..cycles.len() {
        let reason = if global[t].hi - global[t - 1].hi > params.hi_jump {
            Some(StartReason::HiJump)
        } else if cycles[t].start_time - cycles[t - 1].end_time > max_gap_s {
            Some(StartReason::TimeGap)
        } else {
            None
        };
        if let Some(reason) = reason {
            starts.push((t, reason));
        }
    }

    let n_runs = starts.len();
    starts
        .iter()
        .enumerate()
        .map(|(run_id, &(begin, start_reason))| {
            let end = starts.get(run_id + 1).map_or(cycles.len(), |s| s.0);
            let features = cycles[begin..end].to_vec();
            let normalized = normalize_run_with(&features, weights, params.constant_fill);
            Run {
                run_id,
                features,
                cycles: normalized,
                start_reason,
                end_reason: if run_id + 1 < n_runs {
                    EndReason::NextRecovery
                } else {
                    EndReason::SeriesEnd
                },
                reached_failure: false,
                rul_labels: None,
            }
        })
        .collect()
}

/// Label a run with remaining cycles to its first cycle at or below
/// `failure_hi`, truncating everything after that cycle. Runs that never
/// cross keep their cycles and get no labels.
pub fn label_rul(mut run: Run, failure_hi: f64) -> Run {
    match run.cycles.iter().position(|c| c.hi <= failure_hi) {
        Some(failure) => {
            run.cycles.truncate(failure + 1);
            run.features.truncate(failure + 1);
            run.rul_labels = Some((0..=failure as u32).rev().collect());
            run.reached_failure = true;
            run.end_reason = EndReason::Failure;
        }
        None => {
            run.reached_failure = false;
            run.rul_labels = None;
        }
    }
    run
}
