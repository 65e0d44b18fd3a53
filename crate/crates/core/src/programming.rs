//! Continuous phase programming: the reduced subspace objective, its adjoint
//! gradient, Adam on the phase torus, and the multi-restart driver.
//!
//! The optimizer descends `L(phi) = -|F_tar^H F_RF(phi)|_F^2`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_rows, check_shape, cis, frobenius_sq, ComplexMatrix};
use crate::network::{apply_phase_layer, PhaseConfig, Processor};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerOptions {
    pub learning_rate: f64,
    pub iterations: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub restarts: usize,
    pub rng_seed: u64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            learning_rate: 0.02,
            iterations: 500,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            restarts: 2,
            rng_seed: 0,
        }
    }
}

impl OptimizerOptions {
    pub fn validate(&self) -> Result<()> {
        let ok = self.learning_rate > 0.0
            && self.beta1 > 0.0
            && self.beta1 < 1.0
            && self.beta2 > 0.0
            && self.beta2 < 1.0
            && self.epsilon > 0.0
            && self.iterations > 0
            && self.restarts > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid optimizer options: {self:?}")))
        }
    }
}

/// One programmed candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgrammingResult {
    pub phases: PhaseConfig,
    /// `|F_tar^H F_RF(phases)|_F^2`.
    pub score: f64,
    /// Score at the start of every iteration (before that iteration's update).
    pub score_trace: Vec<f64>,
    pub restart_index: usize,
}

/// All continuous candidates of a multi-restart run. Quantized programming
/// draws from the whole pool, not just the winner.
#[derive(Debug, Clone, PartialEq)]
pub struct RestartPool {
    pub candidates: Vec<ProgrammingResult>,
    best: usize,
}

impl RestartPool {
    pub fn new(candidates: Vec<ProgrammingResult>) -> Result<Self> {
        let best = best_index(&candidates).ok_or(Error::EmptyPool)?;
        Ok(Self { candidates, best })
    }

    pub fn best(&self) -> &ProgrammingResult {
        &self.candidates[self.best]
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }
}

/// Index of the highest score; ties go to the lowest index.
pub(crate) fn best_index(candidates: &[ProgrammingResult]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, c) in candidates.iter().enumerate() {
        match best {
            Some(b) if candidates[b].score >= c.score => {}
            _ => best = Some(i),
        }
    }
    best
}

/// `|F_tar^H F_RF|_F^2`.
pub fn subspace_score(f_tar: &ComplexMatrix, f_rf: &ComplexMatrix) -> Result<f64> {
    check_rows("subspace_score", f_rf, f_tar.nrows())?;
    Ok(frobenius_sq(&(f_tar.adjoint() * f_rf)))
}

/// Intermediate products of the forward recursion.
#[derive(Debug, Clone)]
pub struct ForwardPass {
    /// `B_k = Z_{k-1}` for `k = 1..=M`.
    pub b_stack: Vec<ComplexMatrix>,
    pub f_rf: ComplexMatrix,
}

/// `Z_0 = W E_r`, `B_k = Z_{k-1}`, `Z_k = W D_k Z_{k-1}`, `F_RF = Z_M`.
pub fn forward_pass(processor: &Processor, phases: &PhaseConfig) -> Result<ForwardPass> {
    processor.check_phases(phases)?;
    let mut z = processor.first_stage().clone();
    let mut b_stack = Vec::with_capacity(phases.depth());
    for layer in phases.layers() {
        b_stack.push(z.clone());
        apply_phase_layer(&mut z, layer, false);
        processor.mixer().apply(&mut z);
    }
    Ok(ForwardPass { b_stack, f_rf: z })
}

/// Euclidean gradient of `L = -|F_tar^H F_RF|_F^2` with respect to `F_RF`
/// under `dL = Re tr(G^H dF_RF)`: `G = -2 F_tar (F_tar^H F_RF)`.
pub fn seed_gradient(f_tar: &ComplexMatrix, f_rf: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_rows("seed_gradient", f_rf, f_tar.nrows())?;
    let t = f_tar.adjoint() * f_rf;
    Ok(f_tar * t * num_complex::Complex64::new(-2.0, 0.0))
}

/// Adjoint recursion. Returns one gradient vector per layer; entry 0 of every
/// layer is forced to zero.
pub fn backward_pass(
    processor: &Processor,
    phases: &PhaseConfig,
    g: &ComplexMatrix,
    b_stack: &[ComplexMatrix],
) -> Result<Vec<Vec<f64>>> {
    processor.check_phases(phases)?;
    let spec = processor.spec();
    check_shape("backward_pass", g, spec.n_antennas, spec.n_chains)?;
    if b_stack.len() != spec.depth {
        return Err(Error::StalePartials(format!(
            "forward stack has {} layers, network has {}",
            b_stack.len(),
            spec.depth
        )));
    }
    for b in b_stack {
        if b.nrows() != spec.n_antennas || b.ncols() != spec.n_chains {
            return Err(Error::StalePartials(format!(
                "forward stack entry is {}x{}, expected {}x{}",
                b.nrows(),
                b.ncols(),
                spec.n_antennas,
                spec.n_chains
            )));
        }
    }

    let mut grads = vec![Vec::new(); spec.depth];
    let mut y = g.clone();
    for k in (0..spec.depth).rev() {
        // A_k = W^H Y_{k+1}
        processor.mixer().apply_adjoint(&mut y);
        let layer = phases.layer(k);
        let b = &b_stack[k];
        let mut grad = vec![0.0; spec.n_antennas];
        for (n, gn) in grad.iter_mut().enumerate().skip(1) {
            let mut acc = num_complex::Complex64::new(0.0, 0.0);
            for c in 0..spec.n_chains {
                acc += y[(n, c)] * b[(n, c)].conj();
            }
            *gn = (acc * cis(-layer[n])).im;
        }
        grads[k] = grad;
        // Y_k = D_k^H A_k
        apply_phase_layer(&mut y, layer, true);
    }
    Ok(grads)
}

/// Score and phase gradient of `L` at `phases`.
pub fn score_and_gradient(
    processor: &Processor,
    phases: &PhaseConfig,
    f_tar: &ComplexMatrix,
) -> Result<(f64, Vec<Vec<f64>>)> {
    let fwd = forward_pass(processor, phases)?;
    let score = subspace_score(f_tar, &fwd.f_rf)?;
    let g = seed_gradient(f_tar, &fwd.f_rf)?;
    let grads = backward_pass(processor, phases, &g, &fwd.b_stack)?;
    Ok((score, grads))
}

/// Adam moments. Momentum lives on the unwrapped tangent coordinates; only
/// the phases themselves are wrapped.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        Self {
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }

    pub fn steps(&self) -> i32 {
        self.t
    }
}

/// One bias-corrected Adam step on the phase torus, followed by wrapping and
/// gauge fixing.
pub fn adam_update(
    phases: &mut PhaseConfig,
    state: &mut AdamState,
    grads: &[Vec<f64>],
    opts: &OptimizerOptions,
) -> Result<()> {
    let n = phases.n();
    if state.m.len() != phases.as_slice().len() || grads.len() != phases.depth() || grads.iter().any(|g| g.len() != n) {
        return Err(Error::DimensionMismatch {
            op: "adam_update",
            expected: format!("{}x{}", phases.depth(), n),
            got: format!("{} gradient layers, state of {}", grads.len(), state.m.len()),
        });
    }
    state.t += 1;
    let bc1 = 1.0 - opts.beta1.powi(state.t);
    let bc2 = 1.0 - opts.beta2.powi(state.t);
    let mut delta = vec![0.0; state.m.len()];
    for (idx, g) in grads.iter().flatten().enumerate() {
        let m = &mut state.m[idx];
        let v = &mut state.v[idx];
        *m = opts.beta1 * *m + (1.0 - opts.beta1) * g;
        *v = opts.beta2 * *v + (1.0 - opts.beta2) * g * g;
        let m_hat = *m / bc1;
        let v_hat = *v / bc2;
        delta[idx] = -opts.learning_rate * m_hat / (v_hat.sqrt() + opts.epsilon);
    }
    phases.step(&delta);
    Ok(())
}

/// Runs one Adam descent from `init` for `opts.iterations` steps.
pub fn descend(
    processor: &Processor,
    f_tar: &ComplexMatrix,
    init: PhaseConfig,
    opts: &OptimizerOptions,
    restart_index: usize,
) -> Result<ProgrammingResult> {
    let mut phases = init;
    phases.gauge_fix();
    let mut state = AdamState::new(phases.as_slice().len());
    let mut trace = Vec::with_capacity(opts.iterations);
    for _ in 0..opts.iterations {
        let (score, grads) = score_and_gradient(processor, &phases, f_tar)?;
        trace.push(score);
        adam_update(&mut phases, &mut state, &grads, opts)?;
    }
    let score = subspace_score(f_tar, &processor.analog_beamformer(&phases)?)?;
    Ok(ProgrammingResult {
        phases,
        score,
        score_trace: trace,
        restart_index,
    })
}

/// Multi-restart continuous programming. Restart `i` initializes from
/// `opts.rng_seed + i`, so serial and parallel execution agree bit for bit.
pub fn program_continuous(
    processor: &Processor,
    f_tar: &ComplexMatrix,
    opts: &OptimizerOptions,
) -> Result<RestartPool> {
    opts.validate()?;
    let spec = processor.spec();
    check_rows("program_continuous", f_tar, spec.n_antennas)?;
    if f_tar.ncols() > spec.n_chains {
        return Err(Error::InvalidOrdering {
            n: spec.n_antennas,
            r: spec.n_chains,
            s: f_tar.ncols(),
        });
    }
    let candidates = (0..opts.restarts)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_from_seed(opts.rng_seed.wrapping_add(i as u64));
            let init = PhaseConfig::random(spec.depth, spec.n_antennas, &mut rng);
            descend(processor, f_tar, init, opts, i)
        })
        .collect::<Result<Vec<_>>>()?;
    RestartPool::new(candidates)
}
