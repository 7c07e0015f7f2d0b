//! Monte Carlo driver: one AO solve per (point, mode, realization).

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::ao::alternating_optimize;
use crate::channel::{sample_channels, ChannelSet};
use crate::error::{Error, Result};
use crate::harness::config::{LinkMode, ScenarioConfig};
use crate::harness::placement::sample_user_positions;
use crate::rng::{splitmix64, RealizationSeed};

/// Fraction of failed realizations above which a run is reported as failed.
pub const MAX_FAILURE_FRACTION: f64 = 0.01;

pub fn version_string() -> String {
    match option_env!("RISBC_GIT_DESCRIBE") {
        Some(git) => format!("{} ({git})", env!("CARGO_PKG_VERSION")),
        None => env!("CARGO_PKG_VERSION").to_string(),
    }
}

/// One row of the per-realization CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub realization: u64,
    pub seed: u64,
    #[serde(rename = "K")]
    pub users: usize,
    #[serde(rename = "Nt")]
    pub n_t: usize,
    pub mode: LinkMode,
    pub sum_rate_bits: f64,
    pub outer_iters: usize,
    /// Mean bisection steps per covariance solve.
    #[serde(rename = "L")]
    pub bisection_steps: f64,
    /// Mean inner cycles per bisection step.
    #[serde(rename = "I")]
    pub inner_cycles: f64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureRecord {
    pub realization: u64,
    pub seed: u64,
    #[serde(rename = "K")]
    pub users: usize,
    #[serde(rename = "Nt")]
    pub n_t: usize,
    pub mode: LinkMode,
    pub error: String,
}

/// Aggregate over the realizations of one `(K, N_t, mode)` point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointSummary {
    #[serde(rename = "K")]
    pub users: usize,
    #[serde(rename = "Nt")]
    pub n_t: usize,
    pub mode: LinkMode,
    pub count: usize,
    pub failures: usize,
    pub mean_sum_rate_bits: f64,
    pub std_error: f64,
    pub mean_outer_iters: f64,
    #[serde(rename = "mean_L")]
    pub mean_bisection_steps: f64,
    #[serde(rename = "mean_I")]
    pub mean_inner_cycles: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub version: String,
    pub status: &'static str,
    pub total_runs: usize,
    pub failed_runs: usize,
    pub failure_fraction: f64,
    pub points: Vec<PointSummary>,
    pub failures: Vec<FailureRecord>,
    pub config: ScenarioConfig,
}

#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub records: Vec<RunRecord>,
    pub summary: RunSummary,
}

impl ScenarioOutcome {
    pub fn failed(&self) -> bool {
        self.summary.status != "ok"
    }

    pub fn point(&self, users: usize, n_t: usize, mode: LinkMode) -> Option<&PointSummary> {
        self.summary.points.iter().find(|p| p.users == users && p.n_t == n_t && p.mode == mode)
    }

    pub fn records_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        if self.records.is_empty() {
            w.write_record([
                "realization", "seed", "K", "Nt", "mode", "sum_rate_bits", "outer_iters", "L", "I", "wall_ms",
            ])
            .map_err(csv_error)?;
        }
        for r in &self.records {
            w.serialize(r).map_err(csv_error)?;
        }
        w.into_inner().map_err(|e| Error::Io(e.to_string()))
    }

    pub fn summary_json(&self) -> String {
        serde_json::to_string_pretty(&self.summary).expect("summary serializes") + "\n"
    }

    /// Writes `records.csv` and `summary.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        fs::create_dir_all(dir)?;
        let records = dir.join("records.csv");
        let summary = dir.join("summary.json");
        fs::write(&records, self.records_csv()?)?;
        fs::write(&summary, self.summary_json())?;
        Ok((records, summary))
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn mode_channels(channels: ChannelSet<f64>, mode: LinkMode) -> ChannelSet<f64> {
    match mode {
        LinkMode::Direct => channels.without_ris_link(),
        LinkMode::Ris => channels.without_direct_link(),
        LinkMode::Both => channels,
    }
}

fn realization_seed(config: &ScenarioConfig, mode: LinkMode, r: u64) -> RealizationSeed {
    let master = if config.matched_placements {
        config.seed
    } else {
        config.seed ^ splitmix64(mode.salt())
    };
    RealizationSeed::new(master, r)
}

fn draw(config: &ScenarioConfig, users: usize, n_t: usize, seed: RealizationSeed) -> Result<ChannelSet<f64>> {
    let geometry = config.geometry.to_geometry(n_t);
    let placements = sample_user_positions(&config.placement, users, config.rx_antennas, seed)?;
    sample_channels(&geometry, &placements, seed)
}

fn solve_one(
    config: &ScenarioConfig,
    channels: ChannelSet<f64>,
    mode: LinkMode,
    seed: RealizationSeed,
    users: usize,
    n_t: usize,
    started: Instant,
) -> std::result::Result<RunRecord, FailureRecord> {
    let power = config.geometry.power;
    let options = config.ao.options(users, n_t, power);
    let channels = mode_channels(channels, mode);
    match alternating_optimize(&channels, power, &options) {
        Ok(report) => Ok(RunRecord {
            realization: seed.realization,
            seed: seed.id(),
            users,
            n_t,
            mode,
            sum_rate_bits: report.sum_rate(),
            outer_iters: report.outer_iterations,
            bisection_steps: report.mean_bisection_steps(),
            inner_cycles: report.mean_inner_cycles(),
            wall_ms: if config.output.record_timing { started.elapsed().as_secs_f64() * 1e3 } else { 0.0 },
        }),
        Err(e) => Err(failure(seed, users, n_t, mode, e)),
    }
}

fn failure(seed: RealizationSeed, users: usize, n_t: usize, mode: LinkMode, e: Error) -> FailureRecord {
    FailureRecord { realization: seed.realization, seed: seed.id(), users, n_t, mode, error: e.to_string() }
}

type Outcome = std::result::Result<RunRecord, FailureRecord>;
type PointRuns = (Vec<RunRecord>, Vec<FailureRecord>);

/// Solves every mode of one realization at one `(K, N_t)` point.
fn run_unit(config: &ScenarioConfig, users: usize, n_t: usize, r: u64) -> Vec<(LinkMode, Outcome)> {
    let mut out = Vec::with_capacity(config.modes.len());
    if config.matched_placements {
        let started = Instant::now();
        let seed = realization_seed(config, LinkMode::Both, r);
        match draw(config, users, n_t, seed) {
            Ok(channels) => {
                for &mode in &config.modes {
                    let t = if out.is_empty() { started } else { Instant::now() };
                    out.push((mode, solve_one(config, channels.clone(), mode, seed, users, n_t, t)));
                }
            }
            Err(e) => {
                for &mode in &config.modes {
                    out.push((mode, Err(failure(seed, users, n_t, mode, e.clone()))));
                }
            }
        }
    } else {
        for &mode in &config.modes {
            let started = Instant::now();
            let seed = realization_seed(config, mode, r);
            let outcome = match draw(config, users, n_t, seed) {
                Ok(channels) => solve_one(config, channels, mode, seed, users, n_t, started),
                Err(e) => Err(failure(seed, users, n_t, mode, e)),
            };
            out.push((mode, outcome));
        }
    }
    out
}

fn summarize(users: usize, n_t: usize, mode: LinkMode, rows: &[&RunRecord], failures: usize) -> PointSummary {
    let n = rows.len();
    let avg = |f: &dyn Fn(&RunRecord) -> f64| {
        if n == 0 {
            f64::NAN
        } else {
            rows.iter().map(|r| f(r)).sum::<f64>() / n as f64
        }
    };
    let mean = avg(&|r| r.sum_rate_bits);
    let std_error = if n > 1 {
        let var = rows.iter().map(|r| (r.sum_rate_bits - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    } else {
        0.0
    };
    PointSummary {
        users,
        n_t,
        mode,
        count: n,
        failures,
        mean_sum_rate_bits: mean,
        std_error,
        mean_outer_iters: avg(&|r| r.outer_iters as f64),
        mean_bisection_steps: avg(&|r| r.bisection_steps),
        mean_inner_cycles: avg(&|r| r.inner_cycles),
    }
}

/// Runs every `(K, N_t, mode)` point of `config` over all realizations.
///
/// Individual solver failures are recorded, not propagated; the run is
/// marked failed when more than [`MAX_FAILURE_FRACTION`] of solves fail.
/// Output is independent of the worker count.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioOutcome> {
    config.validate()?;
    let mut units = Vec::new();
    for &users in &config.users {
        for &n_t in &config.tx_antennas {
            for r in 0..config.realizations as u64 {
                units.push((users, n_t, r));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let results: Vec<Vec<(LinkMode, Outcome)>> =
        pool.install(|| units.par_iter().map(|&(k, n, r)| run_unit(config, k, n, r)).collect());

    let mut grouped: BTreeMap<(usize, usize, usize), PointRuns> = BTreeMap::new();
    let user_pos = |k: usize| config.users.iter().position(|&u| u == k).unwrap_or(0);
    let nt_pos = |n: usize| config.tx_antennas.iter().position(|&t| t == n).unwrap_or(0);
    for (&(k, n, _), unit) in units.iter().zip(results) {
        for (mi, (_, outcome)) in unit.into_iter().enumerate() {
            let slot = grouped.entry((user_pos(k), nt_pos(n), mi)).or_default();
            match outcome {
                Ok(rec) => slot.0.push(rec),
                Err(f) => slot.1.push(f),
            }
        }
    }

    let mut records = Vec::new();
    let mut failures = Vec::new();
    let mut points = Vec::new();
    for ((ki, ni, mi), (recs, fails)) in grouped {
        let (k, n, mode) = (config.users[ki], config.tx_antennas[ni], config.modes[mi]);
        let refs: Vec<&RunRecord> = recs.iter().collect();
        points.push(summarize(k, n, mode, &refs, fails.len()));
        records.extend(recs);
        failures.extend(fails);
    }
    let total = records.len() + failures.len();
    let fraction = failures.len() as f64 / total.max(1) as f64;
    let summary = RunSummary {
        version: version_string(),
        status: if fraction > MAX_FAILURE_FRACTION { "failed" } else { "ok" },
        total_runs: total,
        failed_runs: failures.len(),
        failure_fraction: fraction,
        points,
        failures,
        config: config.clone(),
    };
    Ok(ScenarioOutcome { records, summary })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ScenarioConfig {
        let mut cfg = ScenarioConfig::default();
        cfg.realizations = 3;
        cfg.users = vec![2];
        cfg.tx_antennas = vec![2];
        cfg.geometry.ris_rows = 3;
        cfg.geometry.ris_cols = 4;
        cfg
    }

    #[test]
    fn records_and_points() {
        let out = run_scenario(&small()).unwrap();
        assert!(!out.failed());
        assert_eq!(out.records.len(), 9);
        assert_eq!(out.summary.points.len(), 3);
        for p in &out.summary.points {
            assert_eq!(p.count, 3);
            assert!(p.mean_sum_rate_bits > 0.0);
        }
        let both = out.point(2, 2, LinkMode::Both).unwrap().mean_sum_rate_bits;
        let direct = out.point(2, 2, LinkMode::Direct).unwrap().mean_sum_rate_bits;
        assert!(both > direct);
        let csv = String::from_utf8(out.records_csv().unwrap()).unwrap();
        assert!(csv.starts_with("realization,seed,K,Nt,mode,sum_rate_bits,outer_iters,L,I,wall_ms\n"));
        assert_eq!(csv.lines().count(), 10);
    }

    #[test]
    fn direct_mode_runs_a_single_solve() {
        let out = run_scenario(&small()).unwrap();
        for r in out.records.iter().filter(|r| r.mode == LinkMode::Direct) {
            assert_eq!(r.outer_iters, 1);
        }
    }

    #[test]
    fn unmatched_placements_differ_per_mode() {
        let mut cfg = small();
        cfg.matched_placements = false;
        cfg.modes = vec![LinkMode::Both, LinkMode::Both];
        let out = run_scenario(&cfg).unwrap();
        assert_eq!(out.records.len(), 6);
        let mut cfg2 = small();
        cfg2.modes = vec![LinkMode::Both];
        let matched = run_scenario(&cfg2).unwrap();
        assert_ne!(matched.records[0].seed, out.records[0].seed);
    }
}
