//! Target extraction, digital beamformers and injected-power bookkeeping.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{check_rows, frobenius_sq, hpd_inverse, left_singular_sorted, semi_unitarity_error, ComplexMatrix};

/// Semi-unitarity tolerance for [`closed_form_bb`].
pub const SEMI_UNITARY_TOL: f64 = 1e-6;

/// Channels with `sigma_S / sigma_1` at or below this are degenerate.
pub const DEGENERACY_RATIO: f64 = 1e-14;

/// Analog and digital stages at a fixed injected power.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderPair {
    pub analog: ComplexMatrix,
    pub digital: ComplexMatrix,
    pub injected_power_w: f64,
}

impl PrecoderPair {
    pub fn new(analog: ComplexMatrix, digital: ComplexMatrix) -> Result<Self> {
        if analog.ncols() != digital.nrows() {
            return Err(Error::DimensionMismatch {
                op: "PrecoderPair::new",
                expected: format!("digital with {} rows", analog.ncols()),
                got: format!("{}x{}", digital.nrows(), digital.ncols()),
            });
        }
        let injected_power_w = frobenius_sq(&digital);
        Ok(Self {
            analog,
            digital,
            injected_power_w,
        })
    }

    /// `F = F_RF F_BB`.
    pub fn composite(&self) -> ComplexMatrix {
        &self.analog * &self.digital
    }

    /// `|F_RF F_BB|_F^2`.
    pub fn radiated_power_w(&self) -> f64 {
        frobenius_sq(&self.composite())
    }

    pub fn efficiency(&self) -> Result<f64> {
        crate::network::rf_efficiency(&self.analog, &self.digital)
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Orthonormal basis of the dominant `S`-dimensional left singular subspace
/// of `H` (`N x S`), columns ordered by descending singular value.
pub fn target_subspace(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let s = h.ncols();
    if s == 0 || h.nrows() < s {
        return Err(Error::InvalidDimension(format!(
            "channel must be tall with at least one column, got {}x{}",
            h.nrows(),
            s
        )));
    }
    let (u, sigma) = left_singular_sorted(h)?;
    let ratio = if sigma[0] > 0.0 { sigma[s - 1] / sigma[0] } else { 0.0 };
    if !(ratio > DEGENERACY_RATIO) {
        return Err(Error::DegenerateChannel { ratio });
    }
    Ok(u.columns(0, s).into_owned())
}

/// `F_BB* = F_RF^H F_tar`, the least-squares digital stage for a
/// semi-unitary analog stage.
pub fn closed_form_bb(f_rf: &ComplexMatrix, f_tar: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_rows("closed_form_bb", f_tar, f_rf.nrows())?;
    let deviation = semi_unitarity_error(f_rf);
    if deviation > SEMI_UNITARY_TOL {
        return Err(Error::NotSemiUnitary { deviation });
    }
    Ok(f_rf.adjoint() * f_tar)
}

/// `Pi = F_RF F_RF^H`.
pub fn projector(f_rf: &ComplexMatrix) -> ComplexMatrix {
    f_rf * f_rf.adjoint()
}

/// MMSE regularizer `S sigma^2 / P_T`.
pub fn mmse_alpha(streams: usize, noise_w: f64, power_w: f64) -> f64 {
    streams as f64 * noise_w / power_w
}

/// Unnormalized `H_eff^H (H_eff H_eff^H + alpha I)^{-1}`.
pub fn regularized_inverse(h_eff: &ComplexMatrix, alpha: f64) -> Result<ComplexMatrix> {
    let s = h_eff.nrows();
    let mut gram = h_eff * h_eff.adjoint();
    for i in 0..s {
        gram[(i, i)] += Complex64::new(alpha, 0.0);
    }
    Ok(h_eff.adjoint() * hpd_inverse(&gram)?)
}

/// Scales `m` by a real factor so that `|m|_F^2 = power_w`.
pub fn normalize_power(m: ComplexMatrix, power_w: f64) -> Result<ComplexMatrix> {
    let norm_sq = frobenius_sq(&m);
    if !(norm_sq > 0.0) || !norm_sq.is_finite() {
        return Err(Error::ZeroPrecoder);
    }
    let scale = (power_w / norm_sq).sqrt();
    Ok(m * Complex64::new(scale, 0.0))
}

/// MMSE digital stage over `H_eff` (`S x r`) with an explicit regularizer,
/// scaled to `|F_BB|_F^2 = power_w`.
pub fn mmse_bb_with_alpha(h_eff: &ComplexMatrix, alpha: f64, power_w: f64) -> Result<ComplexMatrix> {
    if !(alpha > 0.0) || !(power_w > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "MMSE needs alpha > 0 and P_T > 0 (alpha={alpha}, P_T={power_w})"
        )));
    }
    if frobenius_sq(h_eff) == 0.0 {
        return Err(Error::ZeroPrecoder);
    }
    normalize_power(regularized_inverse(h_eff, alpha)?, power_w)
}

/// MMSE digital stage with `alpha = S sigma^2 / P_T`.
pub fn mmse_bb(h_eff: &ComplexMatrix, noise_w: f64, power_w: f64, streams: usize) -> Result<ComplexMatrix> {
    if !(noise_w > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "noise power must be positive, got {noise_w}"
        )));
    }
    mmse_bb_with_alpha(h_eff, mmse_alpha(streams, noise_w, power_w), power_w)
}

/// Unconstrained MMSE precoder computed from `H` (`N x S`), `|F|_F^2 = P_T`.
pub fn fully_digital_mmse(h: &ComplexMatrix, noise_w: f64, power_w: f64) -> Result<ComplexMatrix> {
    mmse_bb(&h.adjoint(), noise_w, power_w, h.ncols())
}

pub fn fully_digital_mmse_with_alpha(h: &ComplexMatrix, alpha: f64, power_w: f64) -> Result<ComplexMatrix> {
    mmse_bb_with_alpha(&h.adjoint(), alpha, power_w)
}

/// Real dimension of the complex Grassmannian `Gr(r, N)`: `2 r (N - r)`.
pub fn grassmann_dim(n: usize, r: usize) -> usize {
    2 * r * n.saturating_sub(r)
}

/// Codimension of the set of `r`-subspaces containing a fixed
/// `S`-subspace: `2 S (N - r)`.
pub fn containment_codim(n: usize, r: usize, s: usize) -> usize {
    2 * s * n.saturating_sub(r)
}

/// Smallest depth with `M (N - 1) >= 2 S (N - r)`.
pub fn depth_guideline(n: usize, r: usize, s: usize) -> Result<usize> {
    if n < 2 || s > r || r > n {
        return Err(Error::InvalidOrdering { n, r, s });
    }
    Ok(containment_codim(n, r, s).div_ceil(n - 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rel_frobenius_error;
    use crate::network::{NetworkSpec, PhaseConfig, Processor};
    use crate::rng::rng_from_seed;
    use rand::Rng;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
        let mut rng = rng_from_seed(seed);
        ComplexMatrix::from_fn(rows, cols, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        })
    }

    fn semi_unitary(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
        random_matrix(rows, cols, seed).qr().q()
    }

    #[test]
    fn target_of_orthogonal_columns() {
        let mut h = ComplexMatrix::zeros(5, 3);
        h[(0, 0)] = Complex64::new(0.0, 1.0);
        h[(2, 1)] = Complex64::new(3.0, 0.0);
        h[(4, 2)] = Complex64::new(-2.0, 0.0);
        let u = target_subspace(&h).unwrap();
        // ordered by column norm: 3 (row 2), 2 (row 4), 1 (row 0)
        assert!((u[(2, 0)].norm() - 1.0).abs() < 1e-12);
        assert!((u[(4, 1)].norm() - 1.0).abs() < 1e-12);
        assert!((u[(0, 2)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn target_is_orthonormal_and_spans_channel() {
        let h = random_matrix(12, 4, 3);
        let u = target_subspace(&h).unwrap();
        assert!(semi_unitarity_error(&u) < 1e-12);
        let resid = &h - projector(&u) * &h;
        for k in 0..4 {
            let r = resid.column(k).norm();
            assert!(r <= 1e-10 * h.column(k).norm());
        }
    }

    #[test]
    fn rank_deficient_channel_is_degenerate() {
        let col = random_matrix(6, 1, 2);
        let h = ComplexMatrix::from_fn(6, 2, |i, _| col[(i, 0)]);
        assert!(matches!(target_subspace(&h), Err(Error::DegenerateChannel { .. })));
    }

    #[test]
    fn closed_form_exact_recovery_under_containment() {
        let spec = NetworkSpec::new(16, 4, 3).unwrap();
        let p = Processor::new(spec).unwrap();
        let f_rf = p
            .analog_beamformer(&PhaseConfig::random(3, 16, &mut rng_from_seed(1)))
            .unwrap();
        let q = semi_unitary(4, 2, 5);
        let f_tar = &f_rf * q;
        let bb = closed_form_bb(&f_rf, &f_tar).unwrap();
        assert!(frobenius_sq(&(&f_rf * &bb - &f_tar)).sqrt() <= 1e-11);
        assert!((frobenius_sq(&bb) - frobenius_sq(&f_tar)).abs() <= 1e-11);
    }

    #[test]
    fn closed_form_orthogonal_and_general_cases() {
        let e = crate::linalg::first_columns(6, 2);
        let mut orth = ComplexMatrix::zeros(6, 1);
        orth[(4, 0)] = Complex64::new(1.0, 0.0);
        assert_eq!(closed_form_bb(&e, &orth).unwrap(), ComplexMatrix::zeros(2, 1));

        let f_rf = semi_unitary(10, 3, 8);
        let f_tar = random_matrix(10, 2, 9);
        let bb = closed_form_bb(&f_rf, &f_tar).unwrap();
        let resid = &f_tar - &f_rf * bb;
        assert!(frobenius_sq(&(f_rf.adjoint() * resid)).sqrt() <= 1e-11);

        let scaled = f_rf * Complex64::new(0.5, 0.0);
        assert!(matches!(
            closed_form_bb(&scaled, &f_tar),
            Err(Error::NotSemiUnitary { .. })
        ));
    }

    #[test]
    fn projector_is_idempotent() {
        let p = projector(&semi_unitary(9, 3, 4));
        assert!(frobenius_sq(&(&p * &p - &p)).sqrt() <= 1e-10);
    }

    #[test]
    fn single_user_mmse_is_matched_filter() {
        let h = random_matrix(1, 5, 6);
        let bb = mmse_bb(&h, 1e-3, 2.0, 1).unwrap();
        assert!((frobenius_sq(&bb) - 2.0).abs() < 1e-12 * 2.0);
        let dir = normalize_power(h.adjoint(), 2.0).unwrap();
        // same direction up to a positive real scalar
        assert!(rel_frobenius_error(&bb, &dir) < 1e-12);
    }

    #[test]
    fn mmse_power_normalization() {
        let h = random_matrix(3, 7, 10);
        for p in [1e-5, 1e-3, 10.0] {
            let bb = mmse_bb(&h, 1e-4, p, 3).unwrap();
            assert!((frobenius_sq(&bb) - p).abs() <= 1e-12 * p);
        }
        assert_eq!(
            mmse_bb(&ComplexMatrix::zeros(2, 3), 1.0, 1.0, 2),
            Err(Error::ZeroPrecoder)
        );
    }

    #[test]
    fn hybrid_mmse_equals_fully_digital_under_containment() {
        let spec = NetworkSpec::new(32, 4, 4).unwrap();
        let p = Processor::new(spec).unwrap();
        let f_rf = p
            .analog_beamformer(&PhaseConfig::random(4, 32, &mut rng_from_seed(2)))
            .unwrap();
        let h = &f_rf * random_matrix(4, 3, 3);
        let (noise, power) = (1e-3, 0.5);
        let hybrid = &f_rf * mmse_bb(&(h.adjoint() * &f_rf), noise, power, 3).unwrap();
        let fd = fully_digital_mmse(&h, noise, power).unwrap();
        assert!(rel_frobenius_error(&hybrid, &fd) <= 1e-8);

        let hybrid = &f_rf * mmse_bb_with_alpha(&(h.adjoint() * &f_rf), 0.37, power).unwrap();
        let fd = fully_digital_mmse_with_alpha(&h, 0.37, power).unwrap();
        assert!(rel_frobenius_error(&hybrid, &fd) <= 1e-8);
    }

    #[test]
    fn fully_digital_reduces_to_identity_analog() {
        let h = random_matrix(6, 2, 12);
        let fd = fully_digital_mmse(&h, 1e-2, 1.0).unwrap();
        let eye = ComplexMatrix::identity(6, 6);
        let hyb = &eye * mmse_bb(&(h.adjoint() * &eye), 1e-2, 1.0, 2).unwrap();
        assert!(rel_frobenius_error(&hyb, &fd) < 1e-14);
        assert!((frobenius_sq(&fd) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn high_power_limit_is_zero_forcing() {
        let h = random_matrix(8, 3, 13);
        let s = h.singular_values();
        let smin = s.iter().copied().fold(f64::INFINITY, f64::min);
        let noise = 1.0;
        // alpha = S sigma^2 / P_T <= 1e-12 smin^2
        let power = 3.0 * noise / (1e-12 * smin * smin);
        let f = fully_digital_mmse(&h, noise, power).unwrap();
        let g = h.adjoint() * f;
        let diag = (0..3).map(|i| g[(i, i)].norm()).fold(f64::INFINITY, f64::min);
        let off = (0..3)
            .flat_map(|i| (0..3).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| g[(i, j)].norm())
            .fold(0.0, f64::max);
        assert!(off / diag <= 1e-3);
    }

    #[test]
    fn guideline_values() {
        assert_eq!(depth_guideline(512, 16, 16).unwrap(), 32);
        assert_eq!(depth_guideline(64, 4, 4).unwrap(), 8);
        assert_eq!(depth_guideline(10, 10, 3).unwrap(), 0);
        assert_eq!(depth_guideline(10, 4, 0).unwrap(), 0);
        assert!(depth_guideline(10, 3, 4).is_err());
        assert!(depth_guideline(1, 1, 1).is_err());
        assert_eq!(grassmann_dim(10, 3), 42);
        for n in 2..20 {
            for r in 1..=n {
                for s in 0..=r {
                    let m = depth_guideline(n, r, s).unwrap();
                    assert!(m * (n - 1) >= containment_codim(n, r, s));
                    assert!(m == 0 || (m - 1) * (n - 1) < containment_codim(n, r, s));
                }
            }
        }
    }

    #[test]
    fn dbm_conversion() {
        assert!((dbm_to_watts(0.0) - 1e-3).abs() < 1e-18);
        assert!((dbm_to_watts(30.0) - 1.0).abs() < 1e-15);
    }
}
