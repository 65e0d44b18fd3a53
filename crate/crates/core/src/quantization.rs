//! q-bit wrapping quantization and greedy discrete refinement.
//!
//! Refinement visits layers in ascending order and entries in ascending
//! index order, trying `{phi + step, phi - step}` against the current value.
//! Each layer visit starts from freshly computed partials: the suffix factor
//! `C_k = F_tar^H W D_M ... D_{k+1} W` (layers after `k` are untouched so far
//! in the sweep) and the prefix `B_k`, which is advanced as layers are
//! finalized. Every trial move is then scored with a rank-1 update.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_rows, cis, frobenius_sq, ComplexMatrix};
use crate::network::{apply_phase_layer, PhaseConfig, Processor};
use crate::programming::{best_index, subspace_score, ProgrammingResult, RestartPool};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantizationSpec {
    pub bits: u32,
    pub sweeps: usize,
}

impl QuantizationSpec {
    pub fn new(bits: u32, sweeps: usize) -> Result<Self> {
        if bits == 0 || bits > 30 {
            return Err(Error::InvalidConfig(format!(
                "quantizer bits must be in 1..=30, got {bits}"
            )));
        }
        Ok(Self { bits, sweeps })
    }

    /// Twelve sweeps per refinement.
    pub fn with_default_sweeps(bits: u32) -> Result<Self> {
        Self::new(bits, 12)
    }

    pub fn levels(&self) -> u32 {
        1 << self.bits
    }

    pub fn step(&self) -> f64 {
        TAU / self.levels() as f64
    }
}

fn grid_value(index: u32, bits: u32) -> f64 {
    index as f64 * (TAU / (1u64 << bits) as f64)
}

/// Nearest grid index under the circular metric; exact midpoints go to the
/// lower index.
fn nearest_index(phi: f64, bits: u32) -> u32 {
    let levels = 1u64 << bits;
    let x = phi / (TAU / levels as f64);
    let lower = x.floor();
    let idx = if x - lower > 0.5 { lower + 1.0 } else { lower };
    (idx as i64).rem_euclid(levels as i64) as u32
}

/// Elementwise wrapping quantization to `{0, step, ..., (2^q - 1) step}`.
/// Gauge entries that are zero stay zero.
pub fn quantize_phases(phases: &PhaseConfig, bits: u32) -> PhaseConfig {
    let data = phases
        .as_slice()
        .iter()
        .map(|&p| grid_value(nearest_index(p, bits), bits))
        .collect();
    PhaseConfig::new(phases.depth(), phases.n(), data).expect("grid values are finite")
}

/// Grid indices of an on-grid configuration.
fn grid_indices(phases: &PhaseConfig, bits: u32) -> Result<Vec<u32>> {
    let step = TAU / (1u64 << bits) as f64;
    phases
        .as_slice()
        .iter()
        .map(|&p| {
            let idx = nearest_index(p, bits);
            let back = grid_value(idx, bits);
            let dist = (p - back).rem_euclid(TAU);
            if dist.min(TAU - dist) <= 1e-9 * step.max(1.0) {
                Ok(idx)
            } else {
                Err(Error::OffGrid { bits })
            }
        })
        .collect()
}

/// Precomputed factors for incremental scoring of one layer.
#[derive(Debug, Clone)]
pub struct LayerPartials {
    layer: usize,
    /// `C_k`, `S x N`.
    suffix: ComplexMatrix,
    /// `B_k`, `N x r`.
    prefix: ComplexMatrix,
    /// `T = C_k D_k B_k`, `S x r`.
    total: ComplexMatrix,
    phases: Vec<f64>,
    score: f64,
}

impl LayerPartials {
    fn build(layer: usize, suffix: ComplexMatrix, prefix: ComplexMatrix, phases: &[f64]) -> Self {
        let mut db = prefix.clone();
        apply_phase_layer(&mut db, phases, false);
        let total = &suffix * db;
        let score = frobenius_sq(&total);
        Self {
            layer,
            suffix,
            prefix,
            total,
            phases: phases.to_vec(),
            score,
        }
    }

    pub fn layer(&self) -> usize {
        self.layer
    }

    /// Score with the layer at its current phases.
    pub fn score(&self) -> f64 {
        self.score
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    fn check_entry(&self, entry: usize) -> Result<()> {
        if entry >= self.phases.len() || self.suffix.ncols() != self.phases.len() {
            return Err(Error::StalePartials(format!(
                "entry {entry} outside layer of {} phases",
                self.phases.len()
            )));
        }
        Ok(())
    }

    /// Commits `entry <- new_phase` and returns the new score.
    pub fn accept(&mut self, entry: usize, new_phase: f64) -> Result<f64> {
        self.check_entry(entry)?;
        let coeff = cis(new_phase) - cis(self.phases[entry]);
        rank_one_update(&mut self.total, &self.suffix, &self.prefix, entry, coeff);
        self.phases[entry] = new_phase;
        self.score = frobenius_sq(&self.total);
        Ok(self.score)
    }
}

fn rank_one_update(
    total: &mut ComplexMatrix,
    suffix: &ComplexMatrix,
    prefix: &ComplexMatrix,
    entry: usize,
    coeff: Complex64,
) {
    for c in 0..total.ncols() {
        let b = prefix[(entry, c)] * coeff;
        for s in 0..total.nrows() {
            total[(s, c)] += suffix[(s, entry)] * b;
        }
    }
}

/// `|T + (e^{j new} - e^{j old}) c_n b_n^T|_F^2` in `O(S r)`.
pub fn delta_score(partials: &LayerPartials, entry: usize, new_phase: f64) -> Result<f64> {
    partials.check_entry(entry)?;
    let coeff = cis(new_phase) - cis(partials.phases[entry]);
    let mut acc = 0.0;
    for c in 0..partials.total.ncols() {
        let b = partials.prefix[(entry, c)] * coeff;
        for s in 0..partials.total.nrows() {
            acc += (partials.total[(s, c)] + partials.suffix[(s, entry)] * b).norm_sqr();
        }
    }
    Ok(acc)
}

/// Suffix factors `C_k^H` for every layer, from the current phases.
fn suffix_stack(processor: &Processor, phases: &PhaseConfig, f_tar: &ComplexMatrix) -> Vec<ComplexMatrix> {
    let depth = phases.depth();
    let mut out = vec![ComplexMatrix::zeros(0, 0); depth];
    let mut v = f_tar.clone();
    for k in (0..depth).rev() {
        processor.mixer().apply_adjoint(&mut v);
        out[k] = v.clone();
        apply_phase_layer(&mut v, phases.layer(k), true);
    }
    out
}

/// Partials for `layer` computed from scratch.
pub fn layer_partials(
    processor: &Processor,
    phases: &PhaseConfig,
    f_tar: &ComplexMatrix,
    layer: usize,
) -> Result<LayerPartials> {
    processor.check_phases(phases)?;
    check_rows("layer_partials", f_tar, processor.spec().n_antennas)?;
    if layer >= phases.depth() {
        return Err(Error::InvalidDimension(format!(
            "layer {layer} out of range for depth {}",
            phases.depth()
        )));
    }
    let suffix = suffix_stack(processor, phases, f_tar).swap_remove(layer).adjoint();
    let mut prefix = processor.first_stage().clone();
    for k in 0..layer {
        apply_phase_layer(&mut prefix, phases.layer(k), false);
        processor.mixer().apply(&mut prefix);
    }
    Ok(LayerPartials::build(layer, suffix, prefix, phases.layer(layer)))
}

/// Outcome of a greedy refinement.
#[derive(Debug, Clone, PartialEq)]
pub struct Refinement {
    pub phases: PhaseConfig,
    /// Score from a full recomputation after the last sweep.
    pub score: f64,
    pub initial_score: f64,
    /// Full-recompute score at the end of each sweep.
    pub sweep_scores: Vec<f64>,
    /// Incrementally tracked score after every accepted move, in order.
    pub accepted_scores: Vec<f64>,
    /// Largest relative gap between the incrementally tracked score and the
    /// full recomputation observed at any resynchronization point.
    pub max_resync_drift: f64,
}

/// Greedy coordinate refinement on the q-bit grid.
pub fn refine_greedy(
    processor: &Processor,
    phases: &PhaseConfig,
    f_tar: &ComplexMatrix,
    qspec: &QuantizationSpec,
) -> Result<Refinement> {
    processor.check_phases(phases)?;
    check_rows("refine_greedy", f_tar, processor.spec().n_antennas)?;
    let bits = qspec.bits;
    let levels = qspec.levels();
    let mut indices = grid_indices(phases, bits)?;
    let depth = phases.depth();
    let n = phases.n();
    let mut current = {
        let mut p = PhaseConfig::new(depth, n, indices.iter().map(|&i| grid_value(i, bits)).collect())?;
        p.gauge_fix();
        p
    };
    for k in 0..depth {
        indices[k * n] = 0;
    }

    let relative = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-300);
    let initial_score = subspace_score(f_tar, &processor.analog_beamformer(&current)?)?;
    let mut tracked = initial_score;
    let mut sweep_scores = Vec::with_capacity(qspec.sweeps);
    let mut accepted_scores = Vec::new();
    let mut max_resync_drift = 0.0f64;

    for _ in 0..qspec.sweeps {
        let suffixes = suffix_stack(processor, &current, f_tar);
        let mut prefix = processor.first_stage().clone();
        for (k, suffix_h) in suffixes.into_iter().enumerate() {
            let mut partials = LayerPartials::build(k, suffix_h.adjoint(), prefix, current.layer(k));
            max_resync_drift = max_resync_drift.max(relative(tracked, partials.score));
            tracked = partials.score;
            for entry in 1..n {
                let idx = indices[k * n + entry];
                let up = (idx + 1) % levels;
                let down = (idx + levels - 1) % levels;
                let mut best = (idx, partials.score);
                for cand in [up, down] {
                    let s = delta_score(&partials, entry, grid_value(cand, bits))?;
                    if s > best.1 {
                        best = (cand, s);
                    }
                }
                if best.0 != idx {
                    tracked = partials.accept(entry, grid_value(best.0, bits))?;
                    accepted_scores.push(tracked);
                    indices[k * n + entry] = best.0;
                    current.set(k, entry, grid_value(best.0, bits));
                }
            }
            prefix = partials.prefix;
            apply_phase_layer(&mut prefix, current.layer(k), false);
            processor.mixer().apply(&mut prefix);
        }
        let full = subspace_score(f_tar, &processor.analog_beamformer(&current)?)?;
        max_resync_drift = max_resync_drift.max(relative(tracked, full));
        tracked = full;
        sweep_scores.push(full);
    }

    Ok(Refinement {
        phases: current,
        score: tracked,
        initial_score,
        sweep_scores,
        accepted_scores,
        max_resync_drift,
    })
}

/// Quantizes and refines every pool member; returns the best refined
/// candidate, chosen independently of the continuous winner.
pub fn program_quantized(
    processor: &Processor,
    pool: &RestartPool,
    f_tar: &ComplexMatrix,
    qspec: &QuantizationSpec,
) -> Result<ProgrammingResult> {
    program_quantized_candidates(processor, &pool.candidates, f_tar, qspec)
}

/// As [`program_quantized`] for an arbitrary candidate slice.
pub fn program_quantized_candidates(
    processor: &Processor,
    candidates: &[ProgrammingResult],
    f_tar: &ComplexMatrix,
    qspec: &QuantizationSpec,
) -> Result<ProgrammingResult> {
    if candidates.is_empty() {
        return Err(Error::EmptyPool);
    }
    let refined = candidates
        .par_iter()
        .map(|c| {
            let q = quantize_phases(&c.phases, qspec.bits);
            let r = refine_greedy(processor, &q, f_tar, qspec)?;
            Ok(ProgrammingResult {
                phases: r.phases,
                score: r.score,
                score_trace: r.sweep_scores,
                restart_index: c.restart_index,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let best = best_index(&refined).ok_or(Error::EmptyPool)?;
    Ok(refined.into_iter().nth(best).expect("index in range"))
}
