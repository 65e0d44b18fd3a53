//! Comparator analog stages: passive fully-connected networks with one (FC1)
//! or two (FC2) phase shifters per link, and lossless DFT beam selection.
//! Each is paired with the shared MMSE digital stage at equal injected power.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cis, frobenius_sq, left_singular_sorted, ComplexMatrix};
use crate::network::dft_mixer;
use crate::precoding::{mmse_bb, PrecoderPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BaselineKind {
    Fc1,
    Fc2,
    Butler,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineResult {
    pub kind: BaselineKind,
    /// Physical transfer from RF chains to antenna ports.
    pub analog: ComplexMatrix,
    pub chains: usize,
    /// Selected DFT beams (Butler only), ascending.
    pub beam_set: Option<Vec<usize>>,
}

/// Splits `c` into two equal-amplitude phasors: `A e^{j t+} + A e^{j t-} = c`.
pub fn two_phase_decompose(c: Complex64, amplitude: f64) -> Result<(f64, f64)> {
    let mag = c.norm();
    let bound = 2.0 * amplitude;
    if !(amplitude > 0.0) || mag > bound * (1.0 + 1e-12) {
        return Err(Error::AmplitudeInfeasible { magnitude: mag, bound });
    }
    let spread = (mag / bound).min(1.0).acos();
    let center = c.arg();
    Ok((center + spread, center - spread))
}

/// Abstract FC1 factorization: unit-modulus `N x 2S` matrix and per-stream
/// amplitudes with `F_tar[:, s] = A_s (col 2s + col 2s+1)`.
pub fn fc1_abstract(f_tar: &ComplexMatrix) -> Result<(ComplexMatrix, Vec<f64>)> {
    let (n, s) = f_tar.shape();
    let mut abstract_rf = ComplexMatrix::zeros(n, 2 * s);
    let mut amplitudes = Vec::with_capacity(s);
    for col in 0..s {
        let peak = f_tar.column(col).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return Err(Error::ZeroTargetColumn(col));
        }
        let amp = peak / 2.0;
        for row in 0..n {
            let (plus, minus) = two_phase_decompose(f_tar[(row, col)], amp)?;
            abstract_rf[(row, 2 * col)] = cis(plus);
            abstract_rf[(row, 2 * col + 1)] = cis(minus);
        }
        amplitudes.push(amp);
    }
    Ok((abstract_rf, amplitudes))
}

/// Physical FC1 stage: the abstract factorization scaled by `1/sqrt(N 2S)`
/// for equal splitting and combining.
pub fn fc1_analog(f_tar: &ComplexMatrix) -> Result<BaselineResult> {
    let (n, s) = f_tar.shape();
    let (abstract_rf, _) = fc1_abstract(f_tar)?;
    let chains = 2 * s;
    let scale = 1.0 / ((n * chains) as f64).sqrt();
    Ok(BaselineResult {
        kind: BaselineKind::Fc1,
        analog: abstract_rf * Complex64::new(scale, 0.0),
        chains,
        beam_set: None,
    })
}

/// Largest columnwise-scaled passive FC2 stage `U D` with
/// `d_j = 1 / (sqrt(N r) max_i |U_ij|)`.
pub fn fc2_analog(f_tar: &ComplexMatrix) -> Result<BaselineResult> {
    let (n, r) = f_tar.shape();
    let (u, sigma) = left_singular_sorted(f_tar)?;
    if sigma.len() < r || !(sigma[r - 1] > 1e-12 * sigma[0]) {
        return Err(Error::RankDeficient);
    }
    let bound = 1.0 / ((n * r) as f64).sqrt();
    let mut analog = u.columns(0, r).into_owned();
    for mut col in analog.column_iter_mut() {
        let peak = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let d = bound / peak;
        col.iter_mut().for_each(|z| *z *= d);
    }
    Ok(BaselineResult {
        kind: BaselineKind::Fc2,
        analog,
        chains: r,
        beam_set: None,
    })
}

/// Per-beam captured energy `c_n = |F_tar^H u_n|^2` over the DFT columns.
pub fn beam_scores(f_tar: &ComplexMatrix) -> Result<Vec<f64>> {
    let u = dft_mixer(f_tar.nrows())?;
    let proj = f_tar.adjoint() * u;
    Ok(proj
        .column_iter()
        .map(|c| c.iter().map(|z| z.norm_sqr()).sum())
        .collect())
}

/// Top-`beams` DFT columns by captured energy; ties go to the lower index.
pub fn butler_select(f_tar: &ComplexMatrix, beams: usize) -> Result<BaselineResult> {
    let n = f_tar.nrows();
    if beams == 0 || beams > n {
        return Err(Error::InvalidDimension(format!(
            "need 1 <= r_BM <= N (r_BM={beams}, N={n})"
        )));
    }
    let scores = beam_scores(f_tar)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut chosen: Vec<usize> = order.into_iter().take(beams).collect();
    chosen.sort_unstable();
    let u = dft_mixer(n)?;
    let analog = ComplexMatrix::from_fn(n, beams, |i, j| u[(i, chosen[j])]);
    Ok(BaselineResult {
        kind: BaselineKind::Butler,
        analog,
        chains: beams,
        beam_set: Some(chosen),
    })
}

/// A baseline evaluated end to end at one injected power.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineEvaluation {
    pub baseline: BaselineResult,
    pub precoder: PrecoderPair,
    pub efficiency: f64,
}

pub fn build_baseline(kind: BaselineKind, f_tar: &ComplexMatrix, butler_beams: usize) -> Result<BaselineResult> {
    match kind {
        BaselineKind::Fc1 => fc1_analog(f_tar),
        BaselineKind::Fc2 => fc2_analog(f_tar),
        BaselineKind::Butler => butler_select(f_tar, butler_beams),
    }
}

/// MMSE digital stage over `H^H F_RF` for a fixed analog stage.
pub fn digital_for_analog(
    analog: &ComplexMatrix,
    h: &ComplexMatrix,
    noise_w: f64,
    power_w: f64,
) -> Result<(PrecoderPair, f64)> {
    let h_eff = h.adjoint() * analog;
    let digital = mmse_bb(&h_eff, noise_w, power_w, h.ncols())?;
    let pair = PrecoderPair::new(analog.clone(), digital)?;
    let efficiency = frobenius_sq(&pair.composite()) / pair.injected_power_w;
    Ok((pair, efficiency))
}

/// Builds the analog stage of `kind` from `f_tar` and evaluates it. Butler
/// uses as many beams as `f_tar` has columns.
pub fn evaluate_baseline(
    kind: BaselineKind,
    h: &ComplexMatrix,
    f_tar: &ComplexMatrix,
    noise_w: f64,
    power_w: f64,
) -> Result<BaselineEvaluation> {
    let baseline = build_baseline(kind, f_tar, f_tar.ncols())?;
    let (precoder, efficiency) = digital_for_analog(&baseline.analog, h, noise_w, power_w)?;
    Ok(BaselineEvaluation {
        baseline,
        precoder,
        efficiency,
    })
}
