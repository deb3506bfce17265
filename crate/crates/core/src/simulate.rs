//! Synthetic ultrafiltration logs with controllable fouling.
//!
//! Each simulated run is a lifecycle of `N` cycles. With progress
//! `u = c / (N - 1)` the run's fouling state is `g(u) = (u + u^p) / 2`,
//! with a per-run exponent `p` in [1.5, 2.5]; the final cycle is a failure
//! cycle with `g = 1 + FAILURE_SURGE`. Per cycle:
//!
//! * cycle-mean TMP = `tmp_baseline + carry + irreversible_fraction * rate * (N - 1) * g`
//! * within-cycle TMP is a sawtooth of height `(1 - irreversible_fraction) * rate *
//!   REVERSIBLE_GAIN * (1 - 0.8 g)` that the backwash resets, so recovery
//!   shrinks as fouling turns irreversible (and collapses on the failure cycle)
//! * flux = `flux_baseline - carry_flux - flux_decline_rate * (N - 1) * g`
//!
//! Between runs the membrane is either chemically cleaned (`cleaning_every >
//! 0`; a short pause, with a residue of irreversible fouling that grows as
//! cleaning efficacy decays) or shut down and restarted fresh after a long
//! idle gap. Noise is additive on pressures and temperature and
//! multiplicative on flows.
//!
//! The random stream is ChaCha8 seeded from `seed`, drawn in a fixed order,
//! so output is a pure function of the scenario.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{validate_series, SensorRecord, SensorSeries};
use crate::segmentation::DEFAULT_BACKWASH_THRESHOLD_GPM;

/// Extra fouling on the failure cycle, as a fraction of the run's total.
pub const FAILURE_SURGE: f64 = 0.15;
/// Reversible TMP build-up per cycle, in units of the fouling rate.
pub const REVERSIBLE_GAIN: f64 = 20.0;
/// Recovery left on the failure cycle, relative to the normal sawtooth.
pub const FAILURE_RECOVERY: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n_runs: usize,
    /// Inclusive range of cycles per run when runs end in shutdown.
    pub cycles_per_run: [usize; 2],
    /// Inclusive range of records per cycle, backwash records included.
    pub samples_per_cycle: [usize; 2],
    pub tmp_baseline: f64,
    /// psi per cycle.
    pub tmp_fouling_rate: f64,
    pub irreversible_fraction: f64,
    pub flux_baseline: f64,
    /// GPM per cycle.
    pub flux_decline_rate: f64,
    pub backwash_spike_flow: f64,
    /// Cycles between chemical cleanings; 0 means runs end in shutdowns.
    pub cleaning_every: usize,
    pub cleaning_efficacy_decay: f64,
    /// Relative noise level.
    pub noise_std: f64,
    pub seed: u64,
    pub sample_interval_s: f64,
    pub backwash_samples: usize,
    pub filtrate_pressure: f64,
    pub temperature: f64,
    pub shutdown_gap_hours: f64,
    pub cleaning_gap_hours: f64,
    pub start_epoch_s: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_runs: 10,
            cycles_per_run: [30, 90],
            samples_per_cycle: [24, 40],
            tmp_baseline: 8.0,
            tmp_fouling_rate: 0.25,
            irreversible_fraction: 0.3,
            flux_baseline: 60.0,
            flux_decline_rate: 0.15,
            backwash_spike_flow: 40.0,
            cleaning_every: 0,
            cleaning_efficacy_decay: 0.1,
            noise_std: 0.002,
            seed: 1,
            sample_interval_s: 4.0,
            backwash_samples: 2,
            filtrate_pressure: 5.0,
            temperature: 20.0,
            shutdown_gap_hours: 36.0,
            cleaning_gap_hours: 2.0,
            start_epoch_s: 1_600_000_000.0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Precondition(format!("scenario: {msg}")));
        if self.n_runs == 0 {
            return bad("n_runs must be >= 1".into());
        }
        let [c0, c1] = self.cycles_per_run;
        if c0 < 2 || c0 > c1 {
            return bad(format!("cycles_per_run {:?} must be 2 <= lo <= hi", self.cycles_per_run));
        }
        if self.cleaning_every == 1 {
            return bad("cleaning_every must be 0 or >= 2".into());
        }
        let [s0, s1] = self.samples_per_cycle;
        if s0 < self.backwash_samples + 2 || s0 > s1 {
            return bad(format!(
                "samples_per_cycle {:?} must leave >= 2 filtration samples",
                self.samples_per_cycle
            ));
        }
        if self.backwash_samples == 0 {
            return bad("backwash_samples must be >= 1".into());
        }
        let finite = [
            self.tmp_baseline,
            self.tmp_fouling_rate,
            self.flux_baseline,
            self.flux_decline_rate,
            self.sample_interval_s,
            self.filtrate_pressure,
            self.temperature,
            self.shutdown_gap_hours,
            self.cleaning_gap_hours,
            self.start_epoch_s,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return bad("all rates and levels must be finite".into());
        }
        if self.tmp_fouling_rate <= 0.0 || self.flux_decline_rate < 0.0 || self.flux_baseline <= 0.0 {
            return bad("fouling rate and flux baseline must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.irreversible_fraction)
            || !(0.0..=1.0).contains(&self.cleaning_efficacy_decay)
        {
            return bad("irreversible_fraction and cleaning_efficacy_decay must be in [0, 1]".into());
        }
        if !self.backwash_spike_flow.is_finite() || self.backwash_spike_flow <= DEFAULT_BACKWASH_THRESHOLD_GPM {
            return bad(format!(
                "backwash_spike_flow {} must exceed the {DEFAULT_BACKWASH_THRESHOLD_GPM} GPM detection threshold",
                self.backwash_spike_flow
            ));
        }
        if !(self.noise_std >= 0.0 && self.noise_std < 0.1) {
            return bad(format!("noise_std {} must be in [0, 0.1)", self.noise_std));
        }
        if self.sample_interval_s <= 0.0 {
            return bad("sample_interval_s must be positive".into());
        }
        if self.shutdown_gap_hours <= 24.0 && self.cleaning_every == 0 && self.n_runs > 1 {
            log::warn!("shutdown gap of {} h will not split runs at the default 24 h threshold", self.shutdown_gap_hours);
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parameters of the canonical acceptance scenario.
pub fn standard_scenario() -> ScenarioConfig {
    ScenarioConfig {
        n_runs: 50,
        cycles_per_run: [30, 90],
        irreversible_fraction: 0.3,
        seed: 20_240_422,
        ..ScenarioConfig::default()
    }
}

/// Generator-side ground truth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioTruth {
    /// Cycles generated per run, in order.
    pub run_lengths: Vec<usize>,
}

struct Noise {
    dist: Option<Normal<f64>>,
}

impl Noise {
    fn new(std: f64) -> Self {
        Self {
            dist: (std > 0.0).then(|| Normal::new(0.0, std).expect("std is finite and positive")),
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        self.dist.as_ref().map_or(0.0, |d| d.sample(rng))
    }
}

fn fouling_state(c: usize, n: usize, exponent: f64) -> f64 {
    if c + 1 == n {
        return 1.0 + FAILURE_SURGE;
    }
    let u = c as f64 / (n - 1) as f64;
    0.5 * (u + u.powf(exponent))
}

pub fn generate(config: &ScenarioConfig) -> Result<(SensorSeries, ScenarioTruth)> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let noise = Noise::new(config.noise_std);
    let p_scale = config.filtrate_pressure + config.tmp_baseline;

    let mut records = Vec::new();
    let mut run_lengths = Vec::with_capacity(config.n_runs);
    let mut t = config.start_epoch_s;
    let (mut carry_tmp, mut carry_flux) = (0.0, 0.0);

    for run in 0..config.n_runs {
        let n = if config.cleaning_every > 0 {
            config.cleaning_every
        } else {
            rng.random_range(config.cycles_per_run[0]..=config.cycles_per_run[1])
        };
        let exponent = rng.random_range(1.5..=2.5);
        let severity = rng.random_range(0.85..=1.15);
        run_lengths.push(n);

        let tmp_span = config.irreversible_fraction * config.tmp_fouling_rate * severity * (n - 1) as f64;
        let flux_span = config.flux_decline_rate * severity * (n - 1) as f64;
        let sawtooth = (1.0 - config.irreversible_fraction) * config.tmp_fouling_rate * REVERSIBLE_GAIN;

        for c in 0..n {
            let g = fouling_state(c, n, exponent);
            let tmp_mean = config.tmp_baseline + carry_tmp + tmp_span * g;
            let rise = if c + 1 == n {
                sawtooth * (1.0 - 0.8) * FAILURE_RECOVERY
            } else {
                sawtooth * (1.0 - 0.8 * g)
            };
            let flux = (config.flux_baseline - carry_flux - flux_span * g).max(0.1 * config.flux_baseline);

            let total = rng.random_range(config.samples_per_cycle[0]..=config.samples_per_cycle[1]);
            let n_filter = total - config.backwash_samples;
            for s in 0..total {
                let backwash = s >= n_filter;
                let tmp = if backwash {
                    tmp_mean
                } else {
                    tmp_mean - 0.5 * rise + rise * s as f64 / (n_filter - 1) as f64
                };
                let filtrate_p = config.filtrate_pressure + noise.draw(&mut rng) * p_scale;
                let feed_p = config.filtrate_pressure + tmp + noise.draw(&mut rng) * p_scale;
                let flow = flux * (1.0 + noise.draw(&mut rng));
                let temperature = config.temperature + noise.draw(&mut rng) * config.temperature;
                let backwash_flow = if backwash {
                    config.backwash_spike_flow * (1.0 + noise.draw(&mut rng))
                } else {
                    0.0
                };
                records.push(SensorRecord {
                    timestamp: t,
                    feed_pressure: feed_p,
                    filtrate_pressure: filtrate_p,
                    filtrate_flow: flow,
                    temperature,
                    backwash_flow,
                    extras: Default::default(),
                });
                t += config.sample_interval_s;
            }
        }

        if config.cleaning_every > 0 {
            let efficacy = (1.0 - config.cleaning_efficacy_decay).powi(run as i32);
            carry_tmp += (1.0 - efficacy) * tmp_span;
            carry_flux += (1.0 - efficacy) * flux_span;
            t += config.cleaning_gap_hours * 3600.0;
        } else {
            carry_tmp = 0.0;
            carry_flux = 0.0;
            t += config.shutdown_gap_hours * 3600.0;
        }
    }

    let series = validate_series(SensorSeries {
        records,
        source_id: format!("synthetic-seed-{}", config.seed),
        sampling_hint: 0.0,
    });
    Ok((series, ScenarioTruth { run_lengths }))
}

pub fn generate_scenario(config: &ScenarioConfig) -> Result<SensorSeries> {
    generate(config).map(|(series, _)| series)
}

pub fn standard_fixture() -> SensorSeries {
    generate_scenario(&standard_scenario()).expect("standard scenario is valid")
}
