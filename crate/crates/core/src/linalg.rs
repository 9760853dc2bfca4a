//! Dense complex matrix services backed by nalgebra.

use nalgebra::{linalg::SymmetricEigen, linalg::SVD, DMatrix};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<C64>;

/// Relative tolerance used to decide whether the Hermitian exponential path applies.
pub const HERMITIAN_EXP_TOL: f64 = 1e-10;

/// Default PSD tolerance, relative to `max(1, ‖M‖₂)`.
pub const PSD_TOL: f64 = 1e-9;

/// Largest absolute entry of `M − M†`.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// `(M + M†)/2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigenvalues in ascending order with the matching eigenvectors as columns.
///
/// The input is symmetrized first, so small Hermiticity defects are tolerated.
pub fn hermitian_eigen(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::Numeric(format!("non-square {}x{} matrix", n, m.ncols())));
    }
    if n == 0 {
        return Ok((Vec::new(), CMatrix::zeros(0, 0)));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NumericOverflow("non-finite matrix entry".into()));
    }
    let h = hermitian_part(m);
    let max_iter = 1000 * n.max(10);
    let eig = SymmetricEigen::try_new(h, f64::EPSILON, max_iter).ok_or_else(|| {
        Error::Numeric(format!(
            "Hermitian eigensolver did not converge within {max_iter} iterations (n = {n})"
        ))
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// Singular values in descending order.
pub fn singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(Vec::new());
    }
    let svd = SVD::try_new(m.clone(), false, false, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numeric("SVD did not converge".into()))?;
    Ok(svd.singular_values.iter().copied().collect())
}

/// Spectral norm ‖M‖₂.
pub fn spectral_norm(m: &CMatrix) -> Result<f64> {
    Ok(singular_values(m)?.first().copied().unwrap_or(0.0))
}

/// Number of singular values above `tol · max(1, σ_max)`.
pub fn rank(m: &CMatrix, tol: f64) -> Result<usize> {
    let sv = singular_values(m)?;
    let cut = tol * sv.first().copied().unwrap_or(0.0).max(1.0);
    Ok(sv.iter().filter(|&&s| s > cut).count())
}

/// Matrix exponential.
///
/// Hermitian inputs (within [`HERMITIAN_EXP_TOL`]) go through the eigendecomposition;
/// everything else uses nalgebra's Padé scaling-and-squaring.
pub fn mat_exp(m: &CMatrix) -> Result<CMatrix> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::Numeric(format!("non-square {}x{} matrix", n, m.ncols())));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NumericOverflow("non-finite input to exponential".into()));
    }
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let out = if hermitian_deviation(m) <= HERMITIAN_EXP_TOL * scale {
        let (vals, vecs) = hermitian_eigen(m)?;
        let mut scaled = vecs.clone();
        for (c, v) in vals.iter().enumerate() {
            let e = v.exp();
            scaled.column_mut(c).scale_mut(e);
        }
        scaled * vecs.adjoint()
    } else {
        m.exp()
    };
    if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NumericOverflow(
            "matrix exponential produced non-finite entries".into(),
        ));
    }
    Ok(out)
}

/// Outcome of a positive-semidefiniteness test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsdVerdict {
    pub hermitian_deviation: f64,
    pub min_eig: f64,
    pub scale: f64,
    pub psd: bool,
}

/// PSD test on `(M + M†)/2`: passes when `λ_min ≥ −tol · max(1, ‖M_h‖₂)`.
///
/// An empty matrix is PSD with `min_eig = +∞` reported as `0`.
pub fn psd_check(m: &CMatrix, tol: f64) -> Result<PsdVerdict> {
    if m.nrows() == 0 {
        return Ok(PsdVerdict {
            hermitian_deviation: 0.0,
            min_eig: 0.0,
            scale: 1.0,
            psd: true,
        });
    }
    let (vals, _) = hermitian_eigen(m)?;
    let norm = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let scale = norm.max(1.0);
    let min_eig = vals[0];
    Ok(PsdVerdict {
        hermitian_deviation: hermitian_deviation(m),
        min_eig,
        scale,
        psd: min_eig >= -tol * scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn eigen_of_diagonal_is_sorted() {
        let m = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(3.0), c(-2.0)]));
        let (vals, vecs) = hermitian_eigen(&m).unwrap();
        assert_eq!(vals, vec![-2.0, 3.0]);
        assert!((vecs[(1, 0)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn identity_is_psd_with_unit_min() {
        let v = psd_check(&CMatrix::identity(4, 4), PSD_TOL).unwrap();
        assert!(v.psd);
        assert!((v.min_eig - 1.0).abs() < 1e-14);
    }

    #[test]
    fn indefinite_diag_is_rejected() {
        let m = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0), c(-1.0)]));
        let v = psd_check(&m, PSD_TOL).unwrap();
        assert!(!v.psd);
        assert!((v.min_eig + 1.0).abs() < 1e-14);
    }

    #[test]
    fn exp_of_nilpotent_truncates() {
        let mut n = CMatrix::zeros(3, 3);
        n[(0, 2)] = C64::new(2.0, -1.0);
        let e = mat_exp(&n).unwrap();
        let expect = CMatrix::identity(3, 3) + &n;
        assert!((e - expect).norm() < 1e-14);
    }

    #[test]
    fn rank_of_outer_product_is_one() {
        let v = nalgebra::DVector::from_vec(vec![c(1.0), C64::new(0.0, 2.0), c(-1.0)]);
        let m = &v * v.adjoint();
        assert_eq!(rank(&m, 1e-12).unwrap(), 1);
        assert_eq!(rank(&CMatrix::identity(5, 5), 1e-12).unwrap(), 5);
    }
}
