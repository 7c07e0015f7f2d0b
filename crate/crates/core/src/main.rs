use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use risbc::covariance::{dual_bisection, BisectionOptions};
use risbc::harness::config::OUT_DIR_ENV;
use risbc::harness::{run_scenario, sample_user_positions, LinkMode, ScenarioConfig};
use risbc::instance::InstanceFile;
use risbc::rng::RealizationSeed;
use risbc::{alternating_optimize, channel::compose_all, check, sample_channels};

#[derive(Parser)]
#[command(name = "risbc", version, about = "Sum-rate maximization for RIS-aided MIMO broadcast channels")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML scenario file; unspecified keys keep their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    realizations: Option<usize>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Restrict to one link mode; repeat for several.
    #[arg(long, global = true, value_name = "direct|ris|both")]
    mode: Vec<LinkMode>,
    /// Output directory.
    #[arg(long, global = true, env = OUT_DIR_ENV)]
    out: Option<PathBuf>,
    /// Set any config key, e.g. `geometry.noise_db=-100` or `users=[2,4]`.
    #[arg(long = "override", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by the config.
    Run,
    /// Sweep K in {2,4,6} and N_t in {2,4,8,16} over all link modes.
    SweepNt,
    /// Sweep K in 1..=8 at N_t = 8 over all link modes.
    SweepK,
    /// Run the property and oracle checks on small random instances.
    Check {
        #[arg(long, default_value_t = 20)]
        instances: usize,
    },
    /// Solve random scenario instances and write them as instance files for
    /// external checking.
    ExportInstances {
        #[arg(long, default_value_t = 50)]
        count: usize,
        #[arg(long, default_value_t = 4)]
        users: usize,
        #[arg(long, default_value_t = 8)]
        tx_antennas: usize,
        #[arg(long, default_value_t = 4)]
        ris_rows: usize,
        #[arg(long, default_value_t = 8)]
        ris_cols: usize,
    },
}

fn build_config(common: &Common, preset: Option<fn(&mut ScenarioConfig)>) -> risbc::Result<ScenarioConfig> {
    let mut cfg = match &common.config {
        Some(path) => ScenarioConfig::load(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(p) = preset {
        p(&mut cfg);
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(r) = common.realizations {
        cfg.realizations = r;
    }
    if let Some(w) = common.workers {
        cfg.workers = w;
    }
    if !common.mode.is_empty() {
        cfg.modes = common.mode.clone();
    }
    if let Some(o) = &common.out {
        cfg.output.dir = o.clone();
    }
    for o in &common.overrides {
        cfg.apply_override(o)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cfg: &ScenarioConfig) -> risbc::Result<bool> {
    let outcome = run_scenario(cfg)?;
    let (records, summary) = outcome.write(&cfg.output.dir)?;
    println!("{:>3} {:>4} {:>7} {:>10} {:>8} {:>6} {:>5} {:>6} {:>6}", "K", "Nt", "mode", "mean", "stderr", "n", "fail", "L", "I");
    for p in &outcome.summary.points {
        println!(
            "{:>3} {:>4} {:>7} {:>10.4} {:>8.4} {:>6} {:>5} {:>6.2} {:>6.2}",
            p.users, p.n_t, p.mode, p.mean_sum_rate_bits, p.std_error, p.count, p.failures,
            p.mean_bisection_steps, p.mean_inner_cycles
        );
    }
    println!("records: {}\nsummary: {}", records.display(), summary.display());
    if outcome.failed() {
        eprintln!(
            "run failed: {} of {} solves failed",
            outcome.summary.failed_runs, outcome.summary.total_runs
        );
    }
    Ok(!outcome.failed())
}

fn export(cfg: &ScenarioConfig, count: usize, users: usize, n_t: usize, rows: usize, cols: usize) -> risbc::Result<()> {
    let mut geometry = cfg.geometry.to_geometry(n_t);
    geometry.ris_rows = rows;
    geometry.ris_cols = cols;
    std::fs::create_dir_all(&cfg.output.dir)?;
    let power = geometry.power;
    let options = cfg.ao.options(users, n_t, power);
    for i in 0..count {
        let seed = RealizationSeed::new(cfg.seed, i as u64);
        let placements = sample_user_positions(&cfg.placement, users, cfg.rx_antennas, seed)?;
        let channels = sample_channels::<f64>(&geometry, &placements, seed)?;
        let ao = alternating_optimize(&channels, power, &options)?;
        let h = compose_all(&channels, &ao.phases);
        let fixed = dual_bisection(&h, power, &BisectionOptions { epsilon: options.epsilon, ..Default::default() })?;
        let mut file = InstanceFile::from_solution(&channels, &ao.phases, Some(&fixed.covs), power)?;
        file.scalars.insert("sum_rate_bits".into(), fixed.sum_rate_bits);
        file.scalars.insert("mu".into(), fixed.mu);
        file.scalars.insert("ao_sum_rate_bits".into(), ao.sum_rate());
        let path = cfg.output.dir.join(format!("instance_{i:04}.txt"));
        file.write(&path)?;
    }
    println!("wrote {count} instances to {}", cfg.output.dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run => build_config(&cli.common, None).and_then(|c| run(&c)),
        Command::SweepNt => build_config(&cli.common, Some(|c| {
            let s = ScenarioConfig::sweep_nt();
            c.users = s.users;
            c.tx_antennas = s.tx_antennas;
        }))
        .and_then(|c| run(&c)),
        Command::SweepK => build_config(&cli.common, Some(|c| {
            let s = ScenarioConfig::sweep_k();
            c.users = s.users;
            c.tx_antennas = s.tx_antennas;
        }))
        .and_then(|c| run(&c)),
        Command::Check { instances } => {
            let seed = cli.common.seed.unwrap_or(1);
            check::run_checks(instances, seed).map(|results| {
                for r in &results {
                    println!("{} {:<20} {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
                }
                results.iter().all(|r| r.passed)
            })
        }
        Command::ExportInstances { count, users, tx_antennas, ris_rows, ris_cols } => build_config(&cli.common, None)
            .and_then(|c| export(&c, count, users, tx_antennas, ris_rows, ris_cols))
            .map(|()| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
