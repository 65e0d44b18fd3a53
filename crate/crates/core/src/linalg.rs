//! Dense complex matrix helpers shared across the crate.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>` (column-major). The only
//! structured operator in the crate is the DFT mixer in [`crate::network`].

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;

/// `e^{j phi}`.
#[inline]
pub fn cis(phi: f64) -> Complex64 {
    let (s, c) = phi.sin_cos();
    Complex64::new(c, s)
}

pub fn frobenius_sq(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// Relative Frobenius error `|a - b|_F / |b|_F` (absolute when `b` is zero).
pub fn rel_frobenius_error(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let diff = frobenius_sq(&(a - b)).sqrt();
    let base = frobenius_sq(b).sqrt();
    if base > 0.0 {
        diff / base
    } else {
        diff
    }
}

/// `|F^H F - I|_F` for a tall matrix `F`.
pub fn semi_unitarity_error(f: &ComplexMatrix) -> f64 {
    let gram = f.adjoint() * f;
    let eye = ComplexMatrix::identity(f.ncols(), f.ncols());
    frobenius_sq(&(gram - eye)).sqrt()
}

/// `E_r`: the first `r` canonical basis columns of `C^n`.
pub fn first_columns(n: usize, r: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, r, |i, j| {
        if i == j {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Inverse of a Hermitian positive-definite matrix via Cholesky.
pub fn hpd_inverse(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            op: "hpd_inverse",
            expected: "square".into(),
            got: format!("{}x{}", a.nrows(), a.ncols()),
        });
    }
    a.clone().cholesky().map(|c| c.inverse()).ok_or(Error::RankDeficient)
}

/// Thin SVD with singular values sorted in descending order.
///
/// Returns `(U, sigma)` with `U` of shape `rows x min(rows, cols)`.
pub fn left_singular_sorted(m: &ComplexMatrix) -> Result<(ComplexMatrix, Vec<f64>)> {
    let svd = m.clone().svd(true, false);
    let u = svd.u.ok_or(Error::RankDeficient)?;
    let sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]).then(a.cmp(&b)));
    let sorted_u = ComplexMatrix::from_fn(u.nrows(), order.len(), |i, j| u[(i, order[j])]);
    let sorted_sigma = order.iter().map(|&k| sigma[k]).collect();
    Ok((sorted_u, sorted_sigma))
}

/// Largest principal angle (radians) between `range(a)` and `range(b)`.
///
/// Both inputs are orthonormalized internally. The sine form
/// `asin ||(I - Qb Qb^H) Qa||_2` stays accurate for tiny angles, where the
/// cosine form loses half the digits. Requires `rank(a) <= rank(b)`.
pub fn max_principal_angle(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    let (qa, _) = left_singular_sorted(a)?;
    let (qb, _) = left_singular_sorted(b)?;
    let residual = &qa - &qb * (qb.adjoint() * &qa);
    let smax = residual.singular_values().iter().copied().fold(0.0, f64::max);
    Ok(smax.clamp(0.0, 1.0).asin())
}

pub(crate) fn check_rows(op: &'static str, m: &ComplexMatrix, rows: usize) -> Result<()> {
    if m.nrows() != rows {
        return Err(Error::DimensionMismatch {
            op,
            expected: format!("{rows} rows"),
            got: format!("{}x{}", m.nrows(), m.ncols()),
        });
    }
    Ok(())
}

pub(crate) fn check_shape(op: &'static str, m: &ComplexMatrix, rows: usize, cols: usize) -> Result<()> {
    if m.nrows() != rows || m.ncols() != cols {
        return Err(Error::DimensionMismatch {
            op,
            expected: format!("{rows}x{cols}"),
            got: format!("{}x{}", m.nrows(), m.ncols()),
        });
    }
    Ok(())
}
