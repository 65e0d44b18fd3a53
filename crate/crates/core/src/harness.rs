//! Per-trial evaluation (program, precode, SINR, sum-rate), Monte-Carlo
//! aggregation, and the depth and power sweeps.
//!
//! Trials run in parallel; each is a pure function of `(config, trial_index)`
//! and results are reduced in trial order, so output does not depend on
//! scheduling.

use std::fmt;
use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;

use crate::baselines::{build_baseline, digital_for_analog, BaselineKind};
use crate::channel::sample_scene_attempt;
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::linalg::{check_rows, ComplexMatrix};
use crate::network::{NetworkSpec, Processor};
use crate::precoding::{dbm_to_watts, fully_digital_mmse, target_subspace};
use crate::programming::{program_continuous, OptimizerOptions};
use crate::quantization::program_quantized;
use crate::rng::{splitmix64, trial_seed};

/// Channel draws per trial before giving up on a degenerate geometry.
pub const MAX_DRAW_ATTEMPTS: usize = 10;

pub const CSV_HEADER: &str = "axis,arch,mean_sum_rate,std_err,n_trials,eta_rf_mean";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Arch {
    FullyDigital,
    Continuous,
    Quantized(u32),
    Fc1,
    Fc2,
    Butler,
}

impl Arch {
    pub fn label(&self) -> String {
        match self {
            Arch::FullyDigital => "fd".into(),
            Arch::Continuous => "proposed_cont".into(),
            Arch::Quantized(b) => format!("proposed_q{b}"),
            Arch::Fc1 => "fc1".into(),
            Arch::Fc2 => "fc2".into(),
            Arch::Butler => "butler".into(),
        }
    }

    pub fn parse(label: &str) -> Option<Self> {
        Some(match label {
            "fd" => Arch::FullyDigital,
            "proposed_cont" => Arch::Continuous,
            "fc1" => Arch::Fc1,
            "fc2" => Arch::Fc2,
            "butler" => Arch::Butler,
            other => Arch::Quantized(other.strip_prefix("proposed_q")?.parse().ok()?),
        })
    }

    /// Output order: FD, continuous, quantized in config order, FC1, FC2, Butler.
    pub fn all(bits: &[u32]) -> Vec<Arch> {
        let mut v = vec![Arch::FullyDigital, Arch::Continuous];
        v.extend(bits.iter().map(|&b| Arch::Quantized(b)));
        v.extend([Arch::Fc1, Arch::Fc2, Arch::Butler]);
        v
    }
}

impl fmt::Display for Arch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// `SINR_s = |h_s^H f_s|^2 / (sum_{j != s} |h_s^H f_j|^2 + sigma^2)` with
/// users as the columns of `h`.
pub fn sinr_per_user(h: &ComplexMatrix, f: &ComplexMatrix, noise_w: f64) -> Result<Vec<f64>> {
    check_rows("sinr_per_user", f, h.nrows())?;
    if f.ncols() != h.ncols() {
        return Err(Error::DimensionMismatch {
            op: "sinr_per_user",
            expected: format!("{} streams", h.ncols()),
            got: format!("{}x{}", f.nrows(), f.ncols()),
        });
    }
    let g = h.adjoint() * f;
    Ok((0..h.ncols())
        .map(|s| {
            let row = g.row(s);
            let signal = row[s].norm_sqr();
            let total: f64 = row.iter().map(|z| z.norm_sqr()).sum();
            signal / ((total - signal).max(0.0) + noise_w)
        })
        .collect())
}

pub fn sum_rate(sinrs: &[f64]) -> f64 {
    sinrs.iter().map(|s| (1.0 + s).log2()).sum()
}

/// One architecture at one axis point of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct ArchOutcome {
    pub arch: Arch,
    pub sum_rate: f64,
    pub efficiency: f64,
    pub injected_power_w: f64,
    /// Subspace score of the programmed network (proposed variants only).
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxisOutcome {
    pub axis: f64,
    pub archs: Vec<ArchOutcome>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub trial_index: u64,
    /// Degenerate draws replaced before this trial's channel was accepted.
    pub degenerate_resamples: usize,
    pub wall_time_s: f64,
    pub points: Vec<AxisOutcome>,
}

impl TrialResult {
    pub fn outcome(&self, point: usize, arch: Arch) -> Option<&ArchOutcome> {
        self.points.get(point)?.archs.iter().find(|a| a.arch == arch)
    }
}

/// Accepted channel of one trial with its target subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialChannel {
    pub h: ComplexMatrix,
    pub f_tar: ComplexMatrix,
    pub resamples: usize,
}

/// Draws the channel of `trial_index`, redrawing degenerate geometries from
/// derived seeds.
pub fn draw_trial_channel(cfg: &ExperimentConfig, trial_index: u64) -> Result<TrialChannel> {
    for attempt in 0..MAX_DRAW_ATTEMPTS {
        let scene = sample_scene_attempt(&cfg.scenario, trial_index, attempt as u64);
        match target_subspace(&scene.h) {
            Ok(f_tar) => {
                return Ok(TrialChannel {
                    h: scene.h,
                    f_tar,
                    resamples: attempt,
                })
            }
            Err(Error::DegenerateChannel { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::ResampleExhausted {
        trial: trial_index,
        attempts: MAX_DRAW_ATTEMPTS,
    })
}

/// An analog stage ready for digital recomputation at any power.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalogStage {
    pub arch: Arch,
    pub analog: ComplexMatrix,
    pub score: Option<f64>,
}

/// Optimizer options for `(trial, depth)`: restarts of different trials
/// and depths start from unrelated seeds.
pub fn trial_optimizer(opts: &OptimizerOptions, trial_index: u64, depth: usize) -> OptimizerOptions {
    OptimizerOptions {
        rng_seed: trial_seed(opts.rng_seed, trial_index) ^ splitmix64(depth as u64 ^ 0xD1B5_4A32_D192_ED03),
        ..*opts
    }
}

/// Continuous and quantized programming of a depth-`depth` network.
pub fn program_proposed(
    cfg: &ExperimentConfig,
    f_tar: &ComplexMatrix,
    depth: usize,
    trial_index: u64,
) -> Result<Vec<AnalogStage>> {
    let spec = NetworkSpec::new(cfg.scenario.n_antennas, cfg.n_chains, depth)?;
    let processor = Processor::new(spec)?;
    let opts = trial_optimizer(&cfg.optimizer, trial_index, depth);
    let pool = program_continuous(&processor, f_tar, &opts)?;
    let best = pool.best();
    let mut stages = vec![AnalogStage {
        arch: Arch::Continuous,
        analog: processor.analog_beamformer(&best.phases)?,
        score: Some(best.score),
    }];
    for qspec in cfg.quantization.specs()? {
        let q = program_quantized(&processor, &pool, f_tar, &qspec)?;
        stages.push(AnalogStage {
            arch: Arch::Quantized(qspec.bits),
            analog: processor.analog_beamformer(&q.phases)?,
            score: Some(q.score),
        });
    }
    Ok(stages)
}

/// FC1, FC2 and Butler analog stages (Butler with `n_chains` beams).
pub fn baseline_stages(cfg: &ExperimentConfig, f_tar: &ComplexMatrix) -> Result<Vec<AnalogStage>> {
    [
        (BaselineKind::Fc1, Arch::Fc1),
        (BaselineKind::Fc2, Arch::Fc2),
        (BaselineKind::Butler, Arch::Butler),
    ]
    .into_iter()
    .map(|(kind, arch)| {
        Ok(AnalogStage {
            arch,
            analog: build_baseline(kind, f_tar, cfg.n_chains)?.analog,
            score: None,
        })
    })
    .collect()
}

/// Digital stages and metrics of FD and every analog stage at one power.
pub fn evaluate_point(
    h: &ComplexMatrix,
    stages: &[AnalogStage],
    noise_w: f64,
    p_t_dbm: f64,
) -> Result<Vec<ArchOutcome>> {
    let power_w = dbm_to_watts(p_t_dbm);
    let fd = fully_digital_mmse(h, noise_w, power_w)?;
    let mut out = Vec::with_capacity(stages.len() + 1);
    out.push(ArchOutcome {
        arch: Arch::FullyDigital,
        sum_rate: sum_rate(&sinr_per_user(h, &fd, noise_w)?),
        efficiency: 1.0,
        injected_power_w: crate::linalg::frobenius_sq(&fd),
        score: None,
    });
    for stage in stages {
        let (pair, efficiency) = digital_for_analog(&stage.analog, h, noise_w, power_w)?;
        out.push(ArchOutcome {
            arch: stage.arch,
            sum_rate: sum_rate(&sinr_per_user(h, &pair.composite(), noise_w)?),
            efficiency,
            injected_power_w: pair.injected_power_w,
            score: stage.score,
        });
    }
    Ok(out)
}

/// Orders stages as [`Arch::all`] with FD omitted.
fn ordered(mut stages: Vec<AnalogStage>, bits: &[u32]) -> Vec<AnalogStage> {
    let order = Arch::all(bits);
    stages.sort_by_key(|s| order.iter().position(|a| *a == s.arch));
    stages
}

/// One channel draw evaluated at a single depth and power.
pub fn run_trial(cfg: &ExperimentConfig, depth: usize, p_t_dbm: f64, trial_index: u64) -> Result<TrialResult> {
    let start = Instant::now();
    let ch = draw_trial_channel(cfg, trial_index)?;
    let mut stages = program_proposed(cfg, &ch.f_tar, depth, trial_index)?;
    stages.extend(baseline_stages(cfg, &ch.f_tar)?);
    let stages = ordered(stages, &cfg.quantization.bits);
    let archs = evaluate_point(&ch.h, &stages, cfg.scenario.noise_w, p_t_dbm)?;
    Ok(TrialResult {
        trial_index,
        degenerate_resamples: ch.resamples,
        wall_time_s: start.elapsed().as_secs_f64(),
        points: vec![AxisOutcome {
            axis: depth as f64,
            archs,
        }],
    })
}

fn depth_trial(cfg: &ExperimentConfig, depths: &[usize], p_t_dbm: f64, trial_index: u64) -> Result<TrialResult> {
    let start = Instant::now();
    let ch = draw_trial_channel(cfg, trial_index)?;
    let baselines = baseline_stages(cfg, &ch.f_tar)?;
    let base_outcomes = evaluate_point(&ch.h, &baselines, cfg.scenario.noise_w, p_t_dbm)?;
    let points = depths
        .par_iter()
        .map(|&depth| {
            let proposed = program_proposed(cfg, &ch.f_tar, depth, trial_index)?;
            let mut archs = evaluate_point(&ch.h, &proposed, cfg.scenario.noise_w, p_t_dbm)?;
            // FD is shared: keep the depth-independent evaluation
            archs[0] = base_outcomes[0].clone();
            archs.extend(base_outcomes[1..].iter().cloned());
            Ok(AxisOutcome {
                axis: depth as f64,
                archs,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TrialResult {
        trial_index,
        degenerate_resamples: ch.resamples,
        wall_time_s: start.elapsed().as_secs_f64(),
        points,
    })
}

fn power_trial(cfg: &ExperimentConfig, depth: usize, powers_dbm: &[f64], trial_index: u64) -> Result<TrialResult> {
    let start = Instant::now();
    let ch = draw_trial_channel(cfg, trial_index)?;
    let mut stages = program_proposed(cfg, &ch.f_tar, depth, trial_index)?;
    stages.extend(baseline_stages(cfg, &ch.f_tar)?);
    let points = powers_dbm
        .iter()
        .map(|&p| {
            Ok(AxisOutcome {
                axis: p,
                archs: evaluate_point(&ch.h, &stages, cfg.scenario.noise_w, p)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TrialResult {
        trial_index,
        degenerate_resamples: ch.resamples,
        wall_time_s: start.elapsed().as_secs_f64(),
        points,
    })
}

/// Mean, sample standard error and mean efficiency per architecture per
/// axis point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis: f64,
    pub arch: Arch,
    pub mean_sum_rate: f64,
    pub std_err: f64,
    pub n_trials: usize,
    pub eta_rf_mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub axis: Vec<f64>,
    pub archs: Vec<Arch>,
    /// Axis-major, architectures in [`Arch::all`] order.
    pub rows: Vec<SweepRow>,
}

/// Sample mean and standard error `std / sqrt(n)` (zero for `n < 2`).
pub fn mean_and_se(samples: &[f64]) -> (f64, f64) {
    let n = samples.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

impl SweepTable {
    pub fn from_trials(axis: &[f64], archs: &[Arch], trials: &[TrialResult]) -> Result<Self> {
        let mut rows = Vec::with_capacity(axis.len() * archs.len());
        for (p, &x) in axis.iter().enumerate() {
            for &arch in archs {
                let picked = trials
                    .iter()
                    .map(|t| t.outcome(p, arch))
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| Error::InvalidConfig(format!("missing {arch} at axis point {x}")))?;
                let rates: Vec<f64> = picked.iter().map(|o| o.sum_rate).collect();
                let etas: Vec<f64> = picked.iter().map(|o| o.efficiency).collect();
                let (mean, se) = mean_and_se(&rates);
                rows.push(SweepRow {
                    axis: x,
                    arch,
                    mean_sum_rate: mean,
                    std_err: se,
                    n_trials: rates.len(),
                    eta_rf_mean: mean_and_se(&etas).0,
                });
            }
        }
        Ok(Self {
            axis: axis.to_vec(),
            archs: archs.to_vec(),
            rows,
        })
    }

    pub fn row(&self, point: usize, arch: Arch) -> Option<&SweepRow> {
        let a = self.archs.iter().position(|x| *x == arch)?;
        self.rows.get(point * self.archs.len() + a)
    }

    pub fn has_non_finite(&self) -> bool {
        self.rows
            .iter()
            .any(|r| !(r.mean_sum_rate.is_finite() && r.std_err.is_finite() && r.eta_rf_mean.is_finite()))
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{:.16e},{:.16e},{},{:.16e}",
                r.axis, r.arch, r.mean_sum_rate, r.std_err, r.n_trials, r.eta_rf_mean
            )?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV is ASCII")
    }
}

/// A sweep's aggregate table together with the per-trial results it was
/// reduced from.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub table: SweepTable,
    pub trials: Vec<TrialResult>,
}

impl SweepOutcome {
    /// Trial-paired difference `a - b` at one axis point: mean and SE.
    pub fn paired_difference(&self, point: usize, a: Arch, b: Arch) -> Option<(f64, f64)> {
        let diffs = self
            .trials
            .iter()
            .map(|t| Some(t.outcome(point, a)?.sum_rate - t.outcome(point, b)?.sum_rate))
            .collect::<Option<Vec<_>>>()?;
        Some(mean_and_se(&diffs))
    }

    pub fn total_resamples(&self) -> usize {
        self.trials.iter().map(|t| t.degenerate_resamples).sum()
    }
}

fn run_trials<F>(cfg: &ExperimentConfig, f: F) -> Result<Vec<TrialResult>>
where
    F: Fn(u64) -> Result<TrialResult> + Sync + Send,
{
    (0..cfg.scenario.n_trials as u64).into_par_iter().map(f).collect()
}

/// Sum-rate versus depth at fixed power. Every depth is programmed from
/// scratch on the same channel draws; FD and the baselines are evaluated
/// once per trial.
pub fn depth_sweep(cfg: &ExperimentConfig, depths: &[usize], p_t_dbm: f64) -> Result<SweepOutcome> {
    cfg.validate()?;
    if depths.is_empty() {
        return Err(Error::InvalidConfig("depth list is empty".into()));
    }
    let trials = run_trials(cfg, |t| depth_trial(cfg, depths, p_t_dbm, t))?;
    let axis: Vec<f64> = depths.iter().map(|&d| d as f64).collect();
    let table = SweepTable::from_trials(&axis, &Arch::all(&cfg.quantization.bits), &trials)?;
    Ok(SweepOutcome { table, trials })
}

/// Sum-rate versus injected power at fixed depth. Analog programming runs
/// once per trial; only the digital stages change with power.
pub fn power_sweep(cfg: &ExperimentConfig, depth: usize, powers_dbm: &[f64]) -> Result<SweepOutcome> {
    cfg.validate()?;
    if powers_dbm.is_empty() {
        return Err(Error::InvalidConfig("power list is empty".into()));
    }
    let trials = run_trials(cfg, |t| power_trial(cfg, depth, powers_dbm, t))?;
    let table = SweepTable::from_trials(powers_dbm, &Arch::all(&cfg.quantization.bits), &trials)?;
    Ok(SweepOutcome { table, trials })
}
