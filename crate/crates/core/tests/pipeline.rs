use proptest::prelude::*;
use uf_prognost::artifact::CyclesArtifact;
use uf_prognost::eval::evaluate_processed;
use uf_prognost::ingest::{parse_sensor_csv, write_sensor_csv, ColumnMapping};
use uf_prognost::pipeline::process_series;
use uf_prognost::simulate::{generate, generate_scenario, standard_fixture, standard_scenario, ScenarioConfig};
use uf_prognost::PipelineConfig;

fn small() -> ScenarioConfig {
    ScenarioConfig { n_runs: 6, cycles_per_run: [25, 40], seed: 99, ..ScenarioConfig::default() }
}

#[test]
fn csv_round_trip_preserves_runs() {
    let config = PipelineConfig::default();
    let series = generate_scenario(&small()).unwrap();
    let direct = process_series(series.clone(), 0, &config).unwrap();

    let mut buf = Vec::new();
    write_sensor_csv(&series, &ColumnMapping::default(), &mut buf).unwrap();
    let parsed = parse_sensor_csv(buf.as_slice(), &ColumnMapping::default(), &series.source_id).unwrap();
    assert_eq!(parsed.dropped_rows, 0);
    let via_csv = process_series(parsed.series, 0, &config).unwrap();
    assert_eq!(direct.runs, via_csv.runs);
}

#[test]
fn standard_fixture_has_fifty_runs() {
    let processed = process_series(standard_fixture(), 0, &PipelineConfig::default()).unwrap();
    assert_eq!(processed.runs.len(), 50);
    assert!(processed.runs.iter().all(|r| r.reached_failure));
}

#[test]
fn fixture_seed_sensitivity() {
    let a = standard_fixture();
    let other = ScenarioConfig { seed: standard_scenario().seed + 1, ..standard_scenario() };
    let (b, truth) = generate(&other).unwrap();
    assert_ne!(a, b);
    let runs = process_series(b, 0, &PipelineConfig::default()).unwrap().runs.len();
    assert_eq!(runs, truth.run_lengths.len());
}

#[test]
fn runs_partition_cycles_in_order() {
    let processed = process_series(generate_scenario(&small()).unwrap(), 0, &PipelineConfig::default()).unwrap();
    let indices: Vec<usize> = processed
        .runs
        .iter()
        .flat_map(|r| r.cycles.iter().map(|c| c.cycle_index))
        .collect();
    assert!(indices.windows(2).all(|w| w[0] < w[1]));
    for run in &processed.runs {
        if let Some(labels) = &run.rul_labels {
            for (t, &l) in labels.iter().enumerate() {
                assert_eq!(l as usize, run.len() - 1 - t);
            }
        }
    }
}

#[test]
fn evaluation_accounting_and_determinism() {
    let config = PipelineConfig::default();
    let processed = process_series(generate_scenario(&small()).unwrap(), 0, &config).unwrap();
    let a = evaluate_processed(&processed, &config).unwrap();
    let b = evaluate_processed(&processed, &config).unwrap();
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    let c = a.counts;
    assert_eq!(c.scored + c.excluded_short_history + c.unlabeled, c.total_test_cycles);
    assert_eq!(a.strata.iter().map(|s| s.n).sum::<usize>(), a.overall.n);
    assert_eq!((a.train_runs, a.test_runs), (5, 1));
    assert_eq!(a.config_digest, config.digest());
}

#[test]
fn artifact_round_trip_through_disk() {
    let config = PipelineConfig::default();
    let processed = process_series(generate_scenario(&small()).unwrap(), 0, &config).unwrap();
    let artifact = CyclesArtifact::new(processed, &config);
    let dir = std::env::temp_dir().join(format!("uf-prognost-artifact-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("cycles.json");
    artifact.write(&path).unwrap();
    assert_eq!(CyclesArtifact::read(&path).unwrap(), artifact);
    std::fs::remove_dir_all(&dir).unwrap();
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn parse_keeps_finite_rows(rows in prop::collection::vec((0.0f64..1e6, -50.0f64..50.0, 0.0f64..100.0), 1..40)) {
        let mut text = String::from("timestamp,feed_pressure,filtrate_pressure,filtrate_flow,temperature,backwash_flow\n");
        for (i, (t, p, q)) in rows.iter().enumerate() {
            text.push_str(&format!("{},{p},{},{q},20,0\n", t + i as f64 * 1e6, p / 2.0));
        }
        text.push_str("1e12,nan,1,1,20,0\n");
        let parsed = parse_sensor_csv(text.as_bytes(), &ColumnMapping::default(), "p").unwrap();
        prop_assert_eq!(parsed.series.records.len(), rows.len());
        prop_assert_eq!(parsed.dropped_rows, 1);
    }

    #[test]
    fn generator_is_pure(seed in 0u64..1000) {
        let cfg = ScenarioConfig { n_runs: 2, cycles_per_run: [20, 24], seed, ..ScenarioConfig::default() };
        prop_assert_eq!(generate_scenario(&cfg).unwrap(), generate_scenario(&cfg).unwrap());
    }
}
