//! The interlaced mixer-phase processor `X(phi) = W D_M W ... W D_1 W` and the
//! analog beamformer it induces on the first `r` input ports.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_rows, check_shape, cis, first_columns, frobenius_sq, ComplexMatrix};

/// Fixed mixing layer placed between the phase layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum MixerKind {
    /// Unitary DFT (Butler) transform, `W[k,l] = exp(-j 2 pi k l / n) / sqrt(n)`.
    #[default]
    UnitaryDft,
}

/// Static description of the analog processor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub n_antennas: usize,
    pub n_chains: usize,
    pub depth: usize,
    #[serde(default)]
    pub mixer: MixerKind,
}

impl NetworkSpec {
    pub fn new(n_antennas: usize, n_chains: usize, depth: usize) -> Result<Self> {
        let spec = Self {
            n_antennas,
            n_chains,
            depth,
            mixer: MixerKind::UnitaryDft,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_antennas == 0 {
            return Err(Error::InvalidDimension("N must be positive".into()));
        }
        if self.n_chains == 0 || self.n_chains > self.n_antennas {
            return Err(Error::InvalidDimension(format!(
                "need 1 <= r <= N (r={}, N={})",
                self.n_chains, self.n_antennas
            )));
        }
        Ok(())
    }
}

/// Wrap a phase into `[0, 2 pi)`.
#[inline]
pub fn wrap_phase(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    // rem_euclid rounds tiny negatives up to exactly 2 pi
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Programmable phases, `depth` layers of `n` entries each, in radians.
///
/// Entries are finite and wrapped into `[0, 2 pi)`. Every configuration
/// produced by the programming and quantization routines is additionally
/// gauge-fixed (entry 0 of every layer is 0); [`PhaseConfig::new`] accepts
/// arbitrary phases so that gauge behaviour itself can be exercised.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseConfig {
    depth: usize,
    n: usize,
    phases: Vec<f64>,
}

impl fmt::Debug for PhaseConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PhaseConfig")
            .field("depth", &self.depth)
            .field("n", &self.n)
            .finish_non_exhaustive()
    }
}

impl PhaseConfig {
    /// Builds a configuration from layer-major phases (`phases[k * n + i]`).
    pub fn new(depth: usize, n: usize, phases: Vec<f64>) -> Result<Self> {
        if phases.len() != depth * n {
            return Err(Error::DimensionMismatch {
                op: "PhaseConfig::new",
                expected: format!("{} phases", depth * n),
                got: format!("{}", phases.len()),
            });
        }
        let mut phases = phases;
        for (idx, p) in phases.iter_mut().enumerate() {
            if !p.is_finite() {
                return Err(Error::NonFinitePhase {
                    layer: idx / n.max(1),
                    entry: idx % n.max(1),
                    value: *p,
                });
            }
            *p = wrap_phase(*p);
        }
        Ok(Self { depth, n, phases })
    }

    pub fn from_layers(layers: &[Vec<f64>]) -> Result<Self> {
        let n = layers.first().map_or(0, Vec::len);
        if layers.iter().any(|l| l.len() != n) {
            return Err(Error::InvalidDimension("ragged phase layers".into()));
        }
        Self::new(layers.len(), n, layers.concat())
    }

    pub fn zeros(depth: usize, n: usize) -> Self {
        Self {
            depth,
            n,
            phases: vec![0.0; depth * n],
        }
    }

    /// I.i.d. uniform phases on `[0, 2 pi)`, drawn layer-major, then gauge-fixed.
    pub fn random<R: Rng + ?Sized>(depth: usize, n: usize, rng: &mut R) -> Self {
        let phases = (0..depth * n).map(|_| wrap_phase(TAU * rng.random::<f64>())).collect();
        let mut cfg = Self { depth, n, phases };
        cfg.gauge_fix();
        cfg
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn layer(&self, k: usize) -> &[f64] {
        &self.phases[k * self.n..(k + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.phases
    }

    pub fn get(&self, layer: usize, entry: usize) -> f64 {
        self.phases[layer * self.n + entry]
    }

    /// Sets one entry, wrapping into `[0, 2 pi)`.
    pub fn set(&mut self, layer: usize, entry: usize, value: f64) {
        self.phases[layer * self.n + entry] = wrap_phase(value);
    }

    pub fn layers(&self) -> impl Iterator<Item = &[f64]> {
        self.phases.chunks(self.n.max(1)).take(self.depth)
    }

    /// Zeroes entry 0 of every layer.
    pub fn gauge_fix(&mut self) {
        for k in 0..self.depth {
            self.phases[k * self.n] = 0.0;
        }
    }

    pub fn is_gauge_fixed(&self) -> bool {
        (0..self.depth).all(|k| self.phases[k * self.n] == 0.0)
    }

    /// Adds `delta[i]` to every phase, rewraps and re-applies the gauge.
    pub(crate) fn step(&mut self, delta: &[f64]) {
        for (p, d) in self.phases.iter_mut().zip(delta) {
            *p = wrap_phase(*p + d);
        }
        self.gauge_fix();
    }

    fn check(&self, spec: &NetworkSpec) -> Result<()> {
        if self.depth != spec.depth || self.n != spec.n_antennas {
            return Err(Error::DimensionMismatch {
                op: "phase configuration",
                expected: format!("{}x{}", spec.depth, spec.n_antennas),
                got: format!("{}x{}", self.depth, self.n),
            });
        }
        Ok(())
    }
}

/// Dense `n x n` unitary DFT matrix with negative exponent and `1/sqrt(n)`
/// normalization.
pub fn dft_mixer(n: usize) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::InvalidDimension("DFT size must be positive".into()));
    }
    let scale = 1.0 / (n as f64).sqrt();
    Ok(ComplexMatrix::from_fn(n, n, |k, l| {
        // reduce k*l mod n first so the angle stays small and exact
        let idx = ((k as u128 * l as u128) % n as u128) as f64;
        cis(-TAU * idx / n as f64) * scale
    }))
}

/// Fast application of the DFT mixer and its adjoint to every column of a
/// matrix.
#[derive(Clone)]
pub struct Mixer {
    n: usize,
    scale: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch_len: usize,
}

impl fmt::Debug for Mixer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Mixer").field("n", &self.n).finish()
    }
}

impl Mixer {
    pub fn new(n: usize, kind: MixerKind) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimension("mixer size must be positive".into()));
        }
        match kind {
            MixerKind::UnitaryDft => {
                let mut planner = FftPlanner::new();
                let forward = planner.plan_fft_forward(n);
                let inverse = planner.plan_fft_inverse(n);
                let scratch_len = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
                Ok(Self {
                    n,
                    scale: 1.0 / (n as f64).sqrt(),
                    forward,
                    inverse,
                    scratch_len,
                })
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `m <- W m`.
    pub fn apply(&self, m: &mut ComplexMatrix) {
        self.run(&self.forward, m);
    }

    /// `m <- W^H m`.
    pub fn apply_adjoint(&self, m: &mut ComplexMatrix) {
        self.run(&self.inverse, m);
    }

    fn run(&self, fft: &Arc<dyn Fft<f64>>, m: &mut ComplexMatrix) {
        debug_assert_eq!(m.nrows(), self.n);
        if m.ncols() == 0 {
            return;
        }
        // column-major storage: each column is one contiguous length-n chunk
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.scratch_len];
        fft.process_with_scratch(m.as_mut_slice(), &mut scratch);
        let scale = self.scale;
        m.iter_mut().for_each(|z| *z *= scale);
    }
}

/// Multiplies row `i` of `m` by `e^{j phases[i]}` (or its conjugate).
pub fn apply_phase_layer(m: &mut ComplexMatrix, phases: &[f64], conjugate: bool) {
    let sign = if conjugate { -1.0 } else { 1.0 };
    let factors: Vec<Complex64> = phases.iter().map(|&p| cis(sign * p)).collect();
    for mut col in m.column_iter_mut() {
        for (z, f) in col.iter_mut().zip(&factors) {
            *z *= f;
        }
    }
}

/// A [`NetworkSpec`] together with its planned mixer and the
/// phase-independent first stage `Z_0 = W E_r`.
#[derive(Debug, Clone)]
pub struct Processor {
    spec: NetworkSpec,
    mixer: Mixer,
    z0: ComplexMatrix,
}

impl Processor {
    pub fn new(spec: NetworkSpec) -> Result<Self> {
        spec.validate()?;
        let mixer = Mixer::new(spec.n_antennas, spec.mixer)?;
        let mut z0 = first_columns(spec.n_antennas, spec.n_chains);
        mixer.apply(&mut z0);
        Ok(Self { spec, mixer, z0 })
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn mixer(&self) -> &Mixer {
        &self.mixer
    }

    /// `W E_r`.
    pub fn first_stage(&self) -> &ComplexMatrix {
        &self.z0
    }

    /// Same processor at a different depth (shares nothing mutable).
    pub fn with_depth(&self, depth: usize) -> Self {
        let mut out = self.clone();
        out.spec.depth = depth;
        out
    }

    /// `X(phi) U_in`.
    pub fn apply(&self, phases: &PhaseConfig, u_in: &ComplexMatrix) -> Result<ComplexMatrix> {
        phases.check(&self.spec)?;
        check_rows("apply_processor", u_in, self.spec.n_antennas)?;
        let mut z = u_in.clone();
        self.mixer.apply(&mut z);
        for layer in phases.layers() {
            apply_phase_layer(&mut z, layer, false);
            self.mixer.apply(&mut z);
        }
        Ok(z)
    }

    /// `F_RF(phi) = X(phi) E_r`, an `N x r` semi-unitary matrix.
    pub fn analog_beamformer(&self, phases: &PhaseConfig) -> Result<ComplexMatrix> {
        phases.check(&self.spec)?;
        let mut z = self.z0.clone();
        for layer in phases.layers() {
            apply_phase_layer(&mut z, layer, false);
            self.mixer.apply(&mut z);
        }
        Ok(z)
    }

    pub(crate) fn check_phases(&self, phases: &PhaseConfig) -> Result<()> {
        phases.check(&self.spec)
    }
}

/// One-shot `X(phi) U_in`; plans the transform on every call.
pub fn apply_processor(spec: &NetworkSpec, phases: &PhaseConfig, u_in: &ComplexMatrix) -> Result<ComplexMatrix> {
    Processor::new(*spec)?.apply(phases, u_in)
}

/// One-shot `F_RF(phi)`.
pub fn analog_beamformer(spec: &NetworkSpec, phases: &PhaseConfig) -> Result<ComplexMatrix> {
    Processor::new(*spec)?.analog_beamformer(phases)
}

/// RF transfer efficiency `|F_RF F_BB|_F^2 / |F_BB|_F^2`.
pub fn rf_efficiency(f_rf: &ComplexMatrix, f_bb: &ComplexMatrix) -> Result<f64> {
    check_shape("rf_efficiency", f_bb, f_rf.ncols(), f_bb.ncols())?;
    let injected = frobenius_sq(f_bb);
    if injected <= 0.0 {
        return Err(Error::UndefinedEfficiency);
    }
    Ok(frobenius_sq(&(f_rf * f_bb)) / injected)
}
