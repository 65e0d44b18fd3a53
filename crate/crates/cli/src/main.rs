use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use chrono::{SecondsFormat, Utc};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use uhbf_core::harness::{depth_sweep, power_sweep, SweepOutcome};
use uhbf_core::precoding::depth_guideline;
use uhbf_core::verify;
use uhbf_core::ExperimentConfig;

#[derive(Parser, Debug)]
#[command(
    name = "uhbf",
    version,
    about = "Hybrid beamforming experiments with programmable unitary RF networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Experiment config (JSON). A run manifest is accepted too and replays its config.
    #[arg(long, conflicts_with = "paper_scale")]
    config: Option<PathBuf>,
    /// Overrides both the channel and optimizer seeds.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for the CSV and manifest.json.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Caps worker threads.
    #[arg(long, env = "UHBF_THREADS")]
    threads: Option<usize>,
    /// Start from the N=512, r=S=16 profile instead of the desk profile.
    #[arg(long)]
    paper_scale: bool,
    /// Overrides the Monte-Carlo trial count.
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sum-rate versus network depth at a fixed injected power.
    DepthSweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated depths, e.g. 4,8,12,16.
        #[arg(long, value_delimiter = ',')]
        depths: Option<Vec<usize>>,
        /// Injected power in dBm.
        #[arg(long, allow_hyphen_values = true)]
        p_t_dbm: Option<f64>,
    },
    /// Sum-rate versus injected power at a fixed depth.
    PowerSweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        depth: Option<usize>,
        /// Comma-separated powers in dBm, e.g. -20,-10,0.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        p_t_dbm: Option<Vec<f64>>,
    },
    /// Runs the invariant suites.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Prints the depth guideline ceil(2S(N-r)/(N-1)).
    Guideline {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        s: usize,
    },
}

#[derive(Serialize, Deserialize, Debug)]
struct RunManifest {
    command: String,
    version: String,
    seed: u64,
    config: ExperimentConfig,
    started_at: String,
    finished_at: String,
    outputs: Vec<PathBuf>,
}

fn load_config(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let value: serde_json::Value =
                serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            let body = match value.get("config") {
                Some(inner) if value.get("outputs").is_some() => inner.clone(),
                _ => value,
            };
            serde_json::from_value(body).with_context(|| format!("invalid config in {}", path.display()))?
        }
        None if common.paper_scale => ExperimentConfig::paper_scale(),
        None => ExperimentConfig::desk(),
    };
    if let Some(seed) = common.seed {
        cfg = cfg.with_seed(seed);
    }
    if let Some(trials) = common.trials {
        cfg.scenario.n_trials = trials;
    }
    Ok(cfg)
}

fn configure_threads(threads: Option<usize>) -> Result<()> {
    if let Some(n) = threads {
        if n == 0 {
            bail!("--threads must be positive");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the worker pool")?;
    }
    Ok(())
}

/// Writes via a sibling temporary file and a rename.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

fn run_sweep<F>(name: &str, common: &Common, cfg: ExperimentConfig, sweep: F) -> Result<()>
where
    F: FnOnce(&ExperimentConfig) -> uhbf_core::Result<SweepOutcome>,
{
    cfg.validate().context("invalid configuration")?;
    configure_threads(common.threads)?;
    let out_dir = common
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("results").join(name));
    fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;

    let started_at = now();
    let outcome = sweep(&cfg)?;
    if outcome.table.has_non_finite() {
        bail!("sweep produced non-finite results");
    }
    let csv_path = out_dir.join(format!("{}.csv", name.replace('-', "_")));
    write_atomic(&csv_path, outcome.table.to_csv().as_bytes())?;

    let manifest = RunManifest {
        command: name.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.scenario.rng_seed,
        config: cfg,
        started_at,
        finished_at: now(),
        outputs: vec![csv_path.clone()],
    };
    let manifest_path = out_dir.join("manifest.json");
    write_atomic(&manifest_path, serde_json::to_string_pretty(&manifest)?.as_bytes())?;

    for row in &outcome.table.rows {
        println!(
            "{:>6} {:<14} {:>9.4} +- {:.4}  eta {:.4}",
            row.axis,
            row.arch.label(),
            row.mean_sum_rate,
            row.std_err,
            row.eta_rf_mean
        );
    }
    if outcome.total_resamples() > 0 {
        eprintln!("{} degenerate channel draws were resampled", outcome.total_resamples());
    }
    println!("wrote {} and {}", csv_path.display(), manifest_path.display());
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::DepthSweep {
            common,
            depths,
            p_t_dbm,
        } => {
            let mut cfg = load_config(&common)?;
            if let Some(d) = depths {
                cfg.depth_sweep.depths = d;
            }
            if let Some(p) = p_t_dbm {
                cfg.depth_sweep.p_t_dbm = p;
            }
            run_sweep("depth-sweep", &common, cfg, |c| {
                depth_sweep(c, &c.depth_sweep.depths, c.depth_sweep.p_t_dbm)
            })?;
        }
        Command::PowerSweep { common, depth, p_t_dbm } => {
            let mut cfg = load_config(&common)?;
            if let Some(d) = depth {
                cfg.power_sweep.depth = d;
            }
            if let Some(p) = p_t_dbm {
                cfg.power_sweep.p_t_dbm = p;
            }
            run_sweep("power-sweep", &common, cfg, |c| {
                power_sweep(c, c.power_sweep.depth, &c.power_sweep.p_t_dbm)
            })?;
        }
        Command::Verify { seed } => {
            let checks = verify::run_all(seed);
            for c in &checks {
                println!(
                    "{}  {:<32} worst {:.2e} (tol {:.0e})",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.worst,
                    c.tolerance
                );
            }
            return Ok(checks.iter().all(|c| c.passed));
        }
        Command::Guideline { n, r, s } => {
            println!("{}", depth_guideline(n, r, s)?);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
