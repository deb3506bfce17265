use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use uf_prognost::artifact::CyclesArtifact;
use uf_prognost::eval::{evaluate_processed, chronological_split, ReferenceValues};
use uf_prognost::fuzzy::WINDOW_LENGTH;
use uf_prognost::ingest::{parse_sensor_csv, write_sensor_csv, ColumnMapping};
use uf_prognost::pipeline::process_series;
use uf_prognost::prognosis::{
    build_library, explain, export_text, predict as predict_one, read_library_file, render_rule,
    run_signature, write_library_file, BuildMetadata, ExemplarLibrary, Prediction,
};
use uf_prognost::segmentation::Run;
use uf_prognost::simulate::{generate_scenario, standard_fixture, standard_scenario, ScenarioConfig};
use uf_prognost::{Error, PipelineConfig, Result};

use crate::{BuildArgs, EvaluateArgs, IngestArgs, PredictArgs, SimulateArgs};

fn is_stdio(path: &Path) -> bool {
    path.as_os_str() == "-"
}

fn load_config(path: Option<&PathBuf>) -> Result<PipelineConfig> {
    match path {
        Some(p) => PipelineConfig::load(p),
        None => Ok(PipelineConfig::default()),
    }
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if is_stdio(path) {
        io::stdout().write_all(bytes).map_err(|e| Error::io("<stdout>", e))
    } else {
        std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }
}

fn read_csv(path: &Path, mapping: &ColumnMapping) -> Result<(uf_prognost::ingest::SensorSeries, usize)> {
    let parsed = if is_stdio(path) {
        let mut buf = Vec::new();
        io::stdin().read_to_end(&mut buf).map_err(|e| Error::io("<stdin>", e))?;
        parse_sensor_csv(buf.as_slice(), mapping, "stdin")
    } else {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        parse_sensor_csv(BufReader::new(file), mapping, &path.display().to_string())
    };
    let parsed = parsed.map_err(|e| match e {
        Error::Csv(e) => Error::Format(format!("{}: {e}", path.display())),
        other => other,
    })?;
    if parsed.dropped_rows > 0 {
        log::warn!("{}: dropped {} unparseable rows", path.display(), parsed.dropped_rows);
    }
    Ok((parsed.series, parsed.dropped_rows))
}

pub fn ingest(args: &IngestArgs) -> Result<()> {
    let config = load_config(args.config.as_ref())?;
    let (series, dropped) = read_csv(&args.input, &config.columns)?;
    let processed = process_series(series, dropped, &config)?;
    for w in &processed.diagnostics.warnings {
        log::warn!("{w}");
    }
    if processed.runs.is_empty() {
        return Err(Error::EmptyInput(format!(
            "{}: no complete cycles found",
            args.input.display()
        )));
    }
    let d = &processed.diagnostics;
    eprintln!(
        "{} records, {} cycles, {} runs ({} reached failure)",
        d.n_records, d.cycles, d.runs, d.failed_runs
    );
    CyclesArtifact::new(processed, &config).write(&args.out)
}

fn check_config_flag(artifact: &CyclesArtifact, config: Option<&PathBuf>) -> Result<()> {
    if let Some(path) = config {
        let given = PipelineConfig::load(path)?.digest();
        if given != artifact.config_digest {
            return Err(Error::DigestMismatch {
                expected: given,
                found: artifact.config_digest.clone(),
            });
        }
    }
    Ok(())
}

fn training_runs(artifact: &CyclesArtifact) -> Result<Vec<Run>> {
    Ok(chronological_split(&artifact.runs, artifact.config.evaluation.train_fraction)?.0)
}

pub fn build(args: &BuildArgs) -> Result<()> {
    let artifact = CyclesArtifact::read(&args.cycles)?;
    check_config_flag(&artifact, args.config.as_ref())?;
    let config = &artifact.config;
    let runs = if args.all_runs { artifact.runs.clone() } else { training_runs(&artifact)? };
    let metadata = BuildMetadata {
        source_runs: Vec::new(),
        build_timestamp: chrono_now(),
        config_digest: artifact.config_digest.clone(),
        default_k: config.prognosis.top_k,
    };
    let library = build_library(&runs, config.hi_partition()?, config.dhi_partition()?, metadata)?;
    write_library_file(&library, &args.out)?;
    if let Some(path) = &args.export_text {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        export_text(&library, BufWriter::new(file))?;
    }
    eprintln!(
        "library: {} exemplars from {} runs",
        library.len(),
        library.metadata.source_runs.len()
    );
    Ok(())
}

fn chrono_now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

#[derive(Serialize)]
struct PredictionDoc<'a> {
    config_digest: &'a str,
    actual_rul: Option<u32>,
    rendered_rules: Vec<String>,
    #[serde(flatten)]
    prediction: Prediction,
}

fn queries<'a>(args: &PredictArgs, artifact: &'a CyclesArtifact) -> Result<Vec<(&'a Run, usize)>> {
    if let (Some(run_id), Some(cycle)) = (args.run, args.cycle) {
        let run = artifact
            .runs
            .iter()
            .find(|r| r.run_id == run_id)
            .ok_or_else(|| Error::Precondition(format!("no run {run_id} in {}", args.cycles.display())))?;
        if cycle >= run.len() {
            return Err(Error::Precondition(format!(
                "run {run_id} has {} cycles, asked for cycle {cycle}",
                run.len()
            )));
        }
        if cycle + 1 < WINDOW_LENGTH {
            eprintln!(
                "skipping run {run_id} cycle {cycle}: needs {WINDOW_LENGTH} cycles of history, has {}",
                cycle + 1
            );
            return Ok(Vec::new());
        }
        return Ok(vec![(run, cycle)]);
    }
    let (_, test) = chronological_split(&artifact.runs, artifact.config.evaluation.train_fraction)?;
    let ids: Vec<usize> = test.iter().map(|r| r.run_id).collect();
    let mut out = Vec::new();
    for run in artifact.runs.iter().filter(|r| ids.contains(&r.run_id)) {
        let skipped = run.len().min(WINDOW_LENGTH - 1);
        if skipped > 0 {
            eprintln!("skipping {skipped} cycles of run {} without full history", run.run_id);
        }
        out.extend((skipped..run.len()).map(|t| (run, t)));
    }
    Ok(out)
}

fn check_library(library: &ExemplarLibrary, artifact: &CyclesArtifact) -> Result<()> {
    library.check_digest(&artifact.config_digest)
}

pub fn predict(args: &PredictArgs) -> Result<()> {
    let artifact = CyclesArtifact::read(&args.cycles)?;
    check_config_flag(&artifact, args.config.as_ref())?;
    let library = read_library_file(&args.library)?;
    check_library(&library, &artifact)?;
    let config = &artifact.config;
    let (hi_p, dhi_p) = (library.hi_partition, library.dhi_partition);
    let params = config.predict_params();

    let predictions = queries(args, &artifact)?
        .par_iter()
        .map(|&(run, t)| {
            let sig = run_signature(run, t, &hi_p, &dhi_p).ok_or_else(|| {
                Error::Invariant(format!("no signature for run {} cycle {t}", run.run_id))
            })?;
            let actual = sig.rul;
            predict_one(&sig, &library, &params).map(|p| (actual, p))
        })
        .collect::<Result<Vec<_>>>()?;

    if args.explain {
        let mut text = String::new();
        for (actual, p) in &predictions {
            text.push_str(&explain(p));
            if let Some(a) = actual {
                text.push_str(&format!("Actual RUL = {a} cycles\n"));
            }
            text.push('\n');
        }
        io::stdout().write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e))?;
    }
    if !args.explain || args.out.is_some() {
        let docs: Vec<PredictionDoc> = predictions
            .into_iter()
            .map(|(actual_rul, prediction)| PredictionDoc {
                config_digest: &artifact.config_digest,
                actual_rul,
                rendered_rules: prediction.rules.iter().map(render_rule).collect(),
                prediction,
            })
            .collect();
        let mut bytes = serde_json::to_vec_pretty(&docs)?;
        bytes.push(b'\n');
        write_bytes(args.out.as_deref().unwrap_or(Path::new("-")), &bytes)?;
    }
    Ok(())
}

pub fn evaluate(args: &EvaluateArgs) -> Result<()> {
    let mut config = load_config(args.config.as_ref())?;
    if args.allow_same_run {
        config.prognosis.allow_same_run = true;
    }
    if let Some(k) = args.top_k {
        config.prognosis.top_k = k;
    }
    if let Some(f) = args.train_fraction {
        config.evaluation.train_fraction = f;
    }
    config.validate()?;

    let (series, dropped) = match &args.input {
        Some(path) => read_csv(path, &config.columns)?,
        None => (standard_fixture(), 0),
    };
    let processed = process_series(series, dropped, &config)?;
    let mut report = evaluate_processed(&processed, &config)?;
    if args.input.is_some() {
        report.reference = Some(ReferenceValues::published());
    }

    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let table = report.render_table();
    write_bytes(&args.out.join("report.json"), &report.to_json()?)?;
    write_bytes(&args.out.join("report.txt"), table.as_bytes())?;
    let records_path = args.out.join("records.csv");
    let file = File::create(&records_path).map_err(|e| Error::io(&records_path, e))?;
    report.write_records_csv(BufWriter::new(file))?;
    print!("{table}");
    Ok(())
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let mut scenario = if args.scenario == "standard" {
        standard_scenario()
    } else {
        let path = Path::new(&args.scenario);
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ScenarioConfig::from_toml_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
    };
    let config = load_config(args.config.as_ref())?;
    if let Some(seed) = args.seed.or(config.seed) {
        scenario.seed = seed;
    }
    let series = generate_scenario(&scenario).map_err(|e| Error::Config(e.to_string()))?;
    let mut buf = Vec::new();
    write_sensor_csv(&series, &config.columns, &mut buf)?;
    write_bytes(&args.out, &buf)
}
