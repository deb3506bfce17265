//! Raw series to labeled runs: validation, features, segmentation, labels.

use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::error::Result;
use crate::ingest::{diagnose, validate_series, SensorSeries};
use crate::segmentation::{
    cycle_features, detect_backwash_events, group_runs, label_rul, segment_cycles, Run,
};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PipelineDiagnostics {
    pub dropped_rows: usize,
    pub n_records: usize,
    pub sampling_hint_s: f64,
    pub negative_pressure_records: usize,
    pub negative_flow_records: usize,
    pub negative_tmp_samples: usize,
    pub backwash_events: usize,
    pub cycles: usize,
    pub leading_partial_kept: bool,
    pub runs: usize,
    pub failed_runs: usize,
    /// Cycles removed because they followed a run's failure cycle.
    pub truncated_post_failure_cycles: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessedSeries {
    pub source_id: String,
    pub runs: Vec<Run>,
    pub diagnostics: PipelineDiagnostics,
}

/// Run every stage up to labeled runs. `dropped_rows` is carried from the
/// parser into the diagnostics.
pub fn process_series(
    series: SensorSeries,
    dropped_rows: usize,
    config: &PipelineConfig,
) -> Result<ProcessedSeries> {
    let series = validate_series(series);
    let raw = diagnose(&series);
    let events = detect_backwash_events(&series, config.thresholds.backwash_gpm);
    let spans = segment_cycles(&series, &events, config.thresholds.min_cycle_samples);
    let cycles = cycle_features(&series, &spans.spans, config.health.epsilon)?;
    let grouped = group_runs(&cycles, &config.health.weights, &config.split_params());

    let mut truncated = 0;
    let runs: Vec<Run> = grouped
        .into_iter()
        .map(|run| {
            let before = run.len();
            let labeled = label_rul(run, config.thresholds.failure_hi);
            truncated += before - labeled.len();
            labeled
        })
        .collect();

    let diagnostics = PipelineDiagnostics {
        dropped_rows,
        n_records: series.len(),
        sampling_hint_s: series.sampling_hint,
        negative_pressure_records: raw.negative_pressures,
        negative_flow_records: raw.negative_flows,
        negative_tmp_samples: cycles.iter().map(|c| c.negative_tmp_samples).sum(),
        backwash_events: events.len(),
        cycles: cycles.len(),
        leading_partial_kept: spans.leading_kept,
        runs: runs.len(),
        failed_runs: runs.iter().filter(|r| r.reached_failure).count(),
        truncated_post_failure_cycles: truncated,
        warnings: spans.warning.into_iter().collect(),
    };
    Ok(ProcessedSeries {
        source_id: series.source_id,
        runs,
        diagnostics,
    })
}
