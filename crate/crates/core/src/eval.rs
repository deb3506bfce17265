//! Chronological run split, error metrics and horizon-stratified reports.

use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::fuzzy::WINDOW_LENGTH;
use crate::pipeline::{process_series, PipelineDiagnostics, ProcessedSeries};
use crate::ingest::SensorSeries;
use crate::prognosis::{build_library, predict, run_signature, BuildMetadata};
use crate::segmentation::Run;

/// Number of training runs out of `n`: `round(fraction * n)` with halves
/// going to training, kept within `[1, n - 1]`.
pub fn train_count(n: usize, fraction: f64) -> Result<usize> {
    if n < 2 {
        return Err(Error::Precondition(format!("split needs at least 2 runs, got {n}")));
    }
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Precondition(format!("train fraction {fraction} not in (0, 1)")));
    }
    // The nudge keeps products like 0.8 * 5 = 3.9999999999999996 on the
    // intended side of the rounding.
    let k = (fraction * n as f64 + 1e-9).round() as usize;
    Ok(k.clamp(1, n - 1))
}

/// Order runs by start time and cut them into `(train, test)`.
pub fn chronological_split(runs: &[Run], fraction: f64) -> Result<(Vec<Run>, Vec<Run>)> {
    let k = train_count(runs.len(), fraction)?;
    let mut ordered = runs.to_vec();
    ordered.sort_by(|a, b| a.start_time().total_cmp(&b.start_time()));
    let test = ordered.split_off(k);
    Ok((ordered, test))
}

/// One scored test cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub run_id: usize,
    pub cycle: usize,
    pub actual: u32,
    pub predicted: f64,
    pub lo: f64,
    pub hi: f64,
}

impl QueryRecord {
    pub fn covered(&self) -> bool {
        self.lo <= f64::from(self.actual) && f64::from(self.actual) <= self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub n: usize,
    pub mae: f64,
    pub rmse: f64,
    /// Percent of records whose interval contains the actual RUL.
    pub coverage: f64,
}

pub fn compute_metrics(records: &[QueryRecord]) -> Result<Metrics> {
    if records.is_empty() {
        return Err(Error::Precondition("metrics of an empty record set".into()));
    }
    let n = records.len() as f64;
    let (abs, sq, hit) = records.iter().fold((0.0, 0.0, 0usize), |(a, s, h), r| {
        let e = f64::from(r.actual) - r.predicted;
        (a + e.abs(), s + e * e, h + usize::from(r.covered()))
    });
    Ok(Metrics {
        n: records.len(),
        mae: abs / n,
        rmse: (sq / n).sqrt(),
        coverage: 100.0 * hit as f64 / n,
    })
}

/// Inclusive RUL bin; `hi = None` is open-ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HorizonBin {
    pub lo: u32,
    pub hi: Option<u32>,
}

impl HorizonBin {
    pub fn contains(&self, rul: u32) -> bool {
        rul >= self.lo && self.hi.is_none_or(|h| rul <= h)
    }

    pub fn label(&self) -> String {
        match self.hi {
            Some(h) => format!("{}-{h}", self.lo),
            None => format!("{}+", self.lo),
        }
    }
}

pub const HORIZON_BINS: [HorizonBin; 4] = [
    HorizonBin { lo: 0, hi: Some(5) },
    HorizonBin { lo: 6, hi: Some(15) },
    HorizonBin { lo: 16, hi: Some(30) },
    HorizonBin { lo: 31, hi: None },
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stratum {
    pub bin: HorizonBin,
    pub label: String,
    pub n: usize,
    /// `None` for an empty bin.
    pub metrics: Option<Metrics>,
}

pub fn stratify(records: &[QueryRecord]) -> Vec<Stratum> {
    HORIZON_BINS
        .iter()
        .map(|bin| {
            let members: Vec<QueryRecord> =
                records.iter().filter(|r| bin.contains(r.actual)).cloned().collect();
            Stratum {
                bin: *bin,
                label: bin.label(),
                n: members.len(),
                metrics: compute_metrics(&members).ok(),
            }
        })
        .collect()
}

/// How the test cycles were accounted for. `scored + excluded_short_history
/// + unlabeled == total_test_cycles`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleCounts {
    pub total_test_cycles: usize,
    pub scored: usize,
    /// Labeled cycles with fewer than a full window of history.
    pub excluded_short_history: usize,
    /// Cycles of test runs that never reached failure.
    pub unlabeled: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    /// Mean RUL over the training exemplars, predicted for every query.
    pub train_mean_rul: f64,
    pub mae: f64,
    pub rmse: f64,
    /// `1 - model_mae / baseline_mae`.
    pub model_improvement: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRow {
    pub label: String,
    pub n: usize,
    pub mae: f64,
    pub rmse: f64,
    pub coverage: f64,
}

/// Published figures for the original plant dataset, printed next to
/// measured values for manual comparison. Never asserted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceValues {
    pub overall: ReferenceRow,
    pub strata: Vec<ReferenceRow>,
}

impl ReferenceValues {
    #[allow(clippy::approx_constant)]
    pub fn published() -> Self {
        let row = |label: &str, n, mae, rmse, coverage| ReferenceRow { label: label.into(), n, mae, rmse, coverage };
        Self {
            overall: row("overall", 2668, 4.08, 6.28, 68.6),
            strata: vec![
                row("0-5", 371, 6.11, 7.54, 33.4),
                row("6-15", 611, 3.67, 4.77, 64.8),
                row("16-30", 528, 7.22, 8.71, 55.5),
                row("31+", 239, 9.28, 10.70, 48.1),
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config_digest: String,
    pub config: PipelineConfig,
    pub source_id: String,
    pub diagnostics: Option<PipelineDiagnostics>,
    pub n_runs: usize,
    pub train_runs: usize,
    pub test_runs: usize,
    pub train_failed_runs: usize,
    pub library_size: usize,
    pub interval_level: f64,
    pub same_run_exclusion: bool,
    pub counts: CycleCounts,
    pub overall: Metrics,
    pub strata: Vec<Stratum>,
    pub baseline: Baseline,
    pub reference: Option<ReferenceValues>,
    pub records: Vec<QueryRecord>,
}

/// Split, build the library on the training runs, predict every labeled
/// test cycle with a full window and score the predictions.
pub fn evaluate_runs(
    source_id: &str,
    runs: &[Run],
    config: &PipelineConfig,
) -> Result<EvalReport> {
    config.validate()?;
    let (train, test) = chronological_split(runs, config.evaluation.train_fraction)?;
    let hi_p = config.hi_partition()?;
    let dhi_p = config.dhi_partition()?;
    let metadata = BuildMetadata {
        source_runs: Vec::new(),
        build_timestamp: String::new(),
        config_digest: config.digest(),
        default_k: config.prognosis.top_k,
    };
    let library = build_library(&train, hi_p, dhi_p, metadata)?;

    let mut counts = CycleCounts::default();
    let mut queries = Vec::new();
    for run in &test {
        counts.total_test_cycles += run.len();
        if !run.reached_failure {
            counts.unlabeled += run.len();
            continue;
        }
        let short = run.len().min(WINDOW_LENGTH - 1);
        counts.excluded_short_history += short;
        queries.extend((short..run.len()).map(|t| (run, t)));
    }
    counts.scored = queries.len();
    if queries.is_empty() {
        return Err(Error::EmptyInput(
            "no test cycle has both an RUL label and a full window of history".into(),
        ));
    }

    let params = config.predict_params();
    let records = queries
        .par_iter()
        .map(|&(run, t)| {
            let sig = run_signature(run, t, &hi_p, &dhi_p).ok_or_else(|| {
                Error::Invariant(format!("no signature for run {} cycle {t}", run.run_id))
            })?;
            let actual = sig
                .rul
                .ok_or_else(|| Error::Invariant(format!("run {} cycle {t} unlabeled", run.run_id)))?;
            let p = predict(&sig, &library, &params)?;
            Ok(QueryRecord {
                run_id: run.run_id,
                cycle: t,
                actual,
                predicted: p.rul_estimate,
                lo: p.interval.lo,
                hi: p.interval.hi,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let overall = compute_metrics(&records)?;
    let mean_rul =
        library.ruls().iter().map(|&r| f64::from(r)).sum::<f64>() / library.len() as f64;
    let baseline_records: Vec<QueryRecord> = records
        .iter()
        .map(|r| QueryRecord { predicted: mean_rul, lo: mean_rul, hi: mean_rul, ..r.clone() })
        .collect();
    let b = compute_metrics(&baseline_records)?;
    let model_improvement = if b.mae > 0.0 { 1.0 - overall.mae / b.mae } else { 0.0 };

    Ok(EvalReport {
        config_digest: config.digest(),
        config: config.clone(),
        source_id: source_id.to_string(),
        diagnostics: None,
        n_runs: runs.len(),
        train_runs: train.len(),
        test_runs: test.len(),
        train_failed_runs: train.iter().filter(|r| r.reached_failure).count(),
        library_size: library.len(),
        interval_level: params.level,
        same_run_exclusion: params.exclude_same_run,
        counts,
        overall,
        strata: stratify(&records),
        baseline: Baseline {
            train_mean_rul: mean_rul,
            mae: b.mae,
            rmse: b.rmse,
            model_improvement,
        },
        reference: None,
        records,
    })
}

pub fn evaluate_processed(processed: &ProcessedSeries, config: &PipelineConfig) -> Result<EvalReport> {
    let mut report = evaluate_runs(&processed.source_id, &processed.runs, config)?;
    report.diagnostics = Some(processed.diagnostics.clone());
    Ok(report)
}

pub fn evaluate_series(
    series: SensorSeries,
    dropped_rows: usize,
    config: &PipelineConfig,
) -> Result<EvalReport> {
    let processed = process_series(series, dropped_rows, config)?;
    evaluate_processed(&processed, config)
}

fn metric_cells(m: Option<&Metrics>) -> (String, String, String) {
    match m {
        Some(m) => (
            format!("{:.2}", m.mae),
            format!("{:.2}", m.rmse),
            format!("{:.1}", m.coverage),
        ),
        None => ("-".into(), "-".into(), "-".into()),
    }
}

impl EvalReport {
    pub fn to_json(&self) -> Result<Vec<u8>> {
        let mut out = serde_json::to_vec_pretty(self)?;
        out.push(b'\n');
        Ok(out)
    }

    /// Stratified table, one row per horizon bin plus the overall row.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "Stratified predictive performance by RUL horizon");
        let _ = writeln!(
            out,
            "source {} | config {} | {} runs ({} train, {} test) | library {} exemplars",
            self.source_id,
            &self.config_digest[..12.min(self.config_digest.len())],
            self.n_runs,
            self.train_runs,
            self.test_runs,
            self.library_size
        );
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{:<12} {:>10} {:>12} {:>13} {:>12}",
            "RUL horizon", "Cycles (n)", "MAE (cycles)", "RMSE (cycles)", "Coverage (%)"
        );
        for s in &self.strata {
            let (mae, rmse, cov) = metric_cells(s.metrics.as_ref());
            let _ = writeln!(out, "{:<12} {:>10} {:>12} {:>13} {:>12}", s.label, s.n, mae, rmse, cov);
        }
        let (mae, rmse, cov) = metric_cells(Some(&self.overall));
        let _ = writeln!(out, "{:<12} {:>10} {:>12} {:>13} {:>12}", "Overall", self.overall.n, mae, rmse, cov);
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "Coverage at the {:.0}% interval level. Same-run exemplars {}.",
            self.interval_level * 100.0,
            if self.same_run_exclusion { "excluded" } else { "allowed" }
        );
        let c = &self.counts;
        let _ = writeln!(
            out,
            "Test cycles: {} total, {} scored, {} short history, {} unlabeled.",
            c.total_test_cycles, c.scored, c.excluded_short_history, c.unlabeled
        );
        let _ = writeln!(
            out,
            "Train-mean baseline (RUL {:.2}): MAE {:.2}, RMSE {:.2}; model MAE is {:.1}% lower.",
            self.baseline.train_mean_rul,
            self.baseline.mae,
            self.baseline.rmse,
            100.0 * self.baseline.model_improvement
        );
        if let Some(r) = &self.reference {
            let _ = writeln!(out);
            let _ = writeln!(out, "Published reference values (not asserted):");
            let _ = writeln!(
                out,
                "{:<12} {:>10} {:>12} {:>13} {:>12}",
                "RUL horizon", "Cycles (n)", "MAE (cycles)", "RMSE (cycles)", "Coverage (%)"
            );
            for row in r.strata.iter().chain(std::iter::once(&r.overall)) {
                let _ = writeln!(
                    out,
                    "{:<12} {:>10} {:>12.2} {:>13.2} {:>12.1}",
                    row.label, row.n, row.mae, row.rmse, row.coverage
                );
            }
        }
        out
    }

    /// Per-query records as CSV, for external plotting.
    pub fn write_records_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["run_id", "cycle", "actual", "predicted", "lo", "hi", "covered"])?;
        for r in &self.records {
            w.write_record([
                r.run_id.to_string(),
                r.cycle.to_string(),
                r.actual.to_string(),
                r.predicted.to_string(),
                r.lo.to_string(),
                r.hi.to_string(),
                u8::from(r.covered()).to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<records csv>", e))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rec(actual: u32, predicted: f64) -> QueryRecord {
        QueryRecord { run_id: 0, cycle: 0, actual, predicted, lo: predicted, hi: predicted }
    }

    #[test]
    fn split_counts() {
        assert_eq!(train_count(10, 0.8).unwrap(), 8);
        assert_eq!(train_count(373, 0.8).unwrap(), 298);
        assert_eq!(373 - train_count(373, 0.8).unwrap(), 75);
        assert_eq!(train_count(2, 0.8).unwrap(), 1);
        assert_eq!(train_count(5, 0.8).unwrap(), 4);
        assert_eq!(train_count(5, 0.5).unwrap(), 3);
        assert!(train_count(1, 0.8).is_err());
        assert!(train_count(10, 1.0).is_err());
    }

    #[test]
    fn metrics_direct() {
        let m = compute_metrics(&[rec(10, 10.0), rec(20, 22.0)]).unwrap();
        assert_eq!(m.mae, 1.0);
        assert!((m.rmse - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(m.coverage, 50.0);
        let exact = compute_metrics(&[rec(3, 3.0), rec(9, 9.0)]).unwrap();
        assert_eq!((exact.mae, exact.rmse, exact.coverage), (0.0, 0.0, 100.0));
        assert!(compute_metrics(&[]).is_err());
    }

    #[test]
    fn metrics_match_recomputation() {
        let records: Vec<QueryRecord> = (0..100u32)
            .map(|i| QueryRecord {
                run_id: 0,
                cycle: i as usize,
                actual: i % 37,
                predicted: (i as f64 * 0.731).sin() * 20.0 + 15.0,
                lo: 5.0 + (i % 7) as f64,
                hi: 20.0 + (i % 11) as f64,
            })
            .collect();
        let m = compute_metrics(&records).unwrap();
        let mut abs = Vec::new();
        let mut sq = Vec::new();
        let mut hits = 0.0;
        for r in &records {
            let e = r.actual as f64 - r.predicted;
            abs.push(e.abs());
            sq.push(e * e);
            if r.lo <= r.actual as f64 && r.actual as f64 <= r.hi {
                hits += 1.0;
            }
        }
        assert!((m.mae - abs.iter().sum::<f64>() / 100.0).abs() < 1e-12);
        assert!((m.rmse - (sq.iter().sum::<f64>() / 100.0).sqrt()).abs() < 1e-12);
        assert!((m.coverage - hits).abs() < 1e-12);
    }

    #[test]
    fn bin_edges() {
        let records: Vec<QueryRecord> = [0, 5, 6, 15, 16, 30, 31].iter().map(|&a| rec(a, 0.0)).collect();
        let sizes: Vec<usize> = stratify(&records).iter().map(|s| s.n).collect();
        assert_eq!(sizes, vec![2, 2, 2, 1]);
        let single: Vec<QueryRecord> = (0..4).map(|_| rec(7, 7.0)).collect();
        let strata = stratify(&single);
        assert_eq!(strata.iter().map(|s| s.n).collect::<Vec<_>>(), vec![0, 4, 0, 0]);
        assert!(strata[0].metrics.is_none());
        assert_eq!(strata[3].label, "31+");
    }

    proptest! {
        #[test]
        fn report_invariants(raw in prop::collection::vec((0u32..80, 0.0f64..80.0, 0.0f64..10.0), 1..200)) {
            let records: Vec<QueryRecord> = raw
                .iter()
                .enumerate()
                .map(|(i, &(a, p, w))| QueryRecord { run_id: 0, cycle: i, actual: a, predicted: p, lo: p - w, hi: p + w })
                .collect();
            let m = compute_metrics(&records).unwrap();
            prop_assert!(m.rmse >= m.mae - 1e-12);
            let strata = stratify(&records);
            prop_assert_eq!(strata.iter().map(|s| s.n).sum::<usize>(), records.len());
            let weighted: f64 = strata
                .iter()
                .filter_map(|s| s.metrics.map(|x| x.mae * s.n as f64))
                .sum::<f64>() / records.len() as f64;
            prop_assert!((weighted - m.mae).abs() < 1e-12 * m.mae.max(1.0));
            let mut reversed = records.clone();
            reversed.reverse();
            prop_assert_eq!(compute_metrics(&reversed).unwrap().coverage, m.coverage);
        }
    }
}
