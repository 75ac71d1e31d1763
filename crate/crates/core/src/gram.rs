//! Gram matrices of time-translation-invariant signals.
//!
//! A signal `f_0..f_n` defines the Hermitian Toeplitz matrix with `f_k` on
//! the k-th superdiagonal and `conj(f_k)` on the k-th subdiagonal. The signal
//! is a positive definite function on the sampled grid exactly when this
//! matrix is positive semidefinite.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::linalg::{self, HermitianDense};
use crate::signal::SampledSignal;

/// Relative PSD tolerance: a Gramian counts as PSD when its smallest
/// eigenvalue is at least `-PSD_TOL_REL * max(f_0, 1)`.
pub const PSD_TOL_REL: f64 = 1e-10;

/// Absolute PSD tolerance for a signal whose equal-time value is `f0`.
pub fn psd_tol(f0: f64) -> f64 {
    PSD_TOL_REL * f0.abs().max(1.0)
}

/// Hermitian Toeplitz matrix stored by its first row.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianToeplitz {
    first_row: Vec<Complex64>,
}

impl HermitianToeplitz {
    /// The diagonal entry must be real; its imaginary part is discarded.
    pub fn new(mut first_row: Vec<Complex64>) -> Result<Self> {
        if first_row.is_empty() {
            return invalid("Toeplitz matrix needs at least one entry");
        }
        if first_row.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return invalid("Toeplitz first row has non-finite entries");
        }
        first_row[0].im = 0.0;
        Ok(Self { first_row })
    }

    pub fn first_row(&self) -> &[Complex64] {
        &self.first_row
    }

    pub fn into_first_row(self) -> Vec<Complex64> {
        self.first_row
    }

    pub fn size(&self) -> usize {
        self.first_row.len()
    }

    pub fn f0(&self) -> f64 {
        self.first_row[0].re
    }

    /// Logical entry `(i, j)`: `f_{j-i}` on and above the diagonal, its
    /// conjugate below.
    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        if j >= i {
            self.first_row[j - i]
        } else {
            self.first_row[i - j].conj()
        }
    }

    pub fn to_dense(&self) -> HermitianDense {
        let n = self.size();
        HermitianDense::from_upper(&DMatrix::from_fn(n, n, |i, j| self.entry(i, j)))
    }

    pub fn to_signal(&self, dt: f64) -> Result<SampledSignal> {
        SampledSignal::new(dt, self.first_row.clone())
    }

    pub fn frobenius_norm(&self) -> f64 {
        toeplitz_frobenius_sq(&self.first_row).sqrt()
    }

    pub fn is_real(&self) -> bool {
        self.first_row.iter().all(|v| v.im == 0.0)
    }

    /// `sum_ij conj(x_i) T_ij x_j`, the quadratic form whose nonnegativity
    /// for every `x` is the definition of positive definiteness.
    pub fn quadratic_form(&self, x: &[Complex64]) -> Result<f64> {
        if x.len() != self.size() {
            return invalid(format!("vector length {} does not match size {}", x.len(), self.size()));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, xi) in x.iter().enumerate() {
            for (j, xj) in x.iter().enumerate() {
                acc += xi.conj() * self.entry(i, j) * xj;
            }
        }
        Ok(acc.re)
    }
}

/// `||T||_F^2` of the Hermitian Toeplitz matrix with the given first row.
pub(crate) fn toeplitz_frobenius_sq(row: &[Complex64]) -> f64 {
    let m = row.len();
    row.iter()
        .enumerate()
        .map(|(k, v)| if k == 0 { m as f64 * v.norm_sqr() } else { 2.0 * (m - k) as f64 * v.norm_sqr() })
        .sum()
}

/// Gram matrix of a sampled signal.
///
/// The imaginary part of `f_0` is dropped since a Hermitian diagonal is real;
/// every other sample lands unchanged in the first row.
pub fn build_gramian(s: &SampledSignal) -> HermitianToeplitz {
    let mut row = s.values().to_vec();
    row[0].im = 0.0;
    HermitianToeplitz { first_row: row }
}

/// Smallest eigenvalue of the dense realization.
pub fn min_eigenvalue(t: &HermitianToeplitz) -> Result<f64> {
    if t.size() == 1 {
        return Ok(t.f0());
    }
    Ok(linalg::eigenvalues(&t.to_dense())?[0])
}

/// Frobenius-nearest Hermitian Toeplitz matrix: each diagonal of the upper
/// triangle is replaced by its mean.
pub fn project_toeplitz(m: &HermitianDense) -> HermitianToeplitz {
    let n = m.size();
    let row = (0..n)
        .map(|k| {
            let sum: Complex64 = (0..n - k).map(|i| m.entry(i, i + k)).sum();
            sum / (n - k) as f64
        })
        .collect::<Vec<_>>();
    let mut row = row;
    row[0].im = 0.0;
    HermitianToeplitz { first_row: row }
}

/// Fixes the diagonal to `f0`, leaving the other entries unchanged.
pub fn enforce_norm(t: &HermitianToeplitz, f0: f64) -> Result<HermitianToeplitz> {
    if !(f0.is_finite() && f0 >= 0.0) {
        return invalid(format!("norm target must be finite and nonnegative, got {f0}"));
    }
    let mut row = t.first_row.clone();
    row[0] = Complex64::new(f0, 0.0);
    Ok(HermitianToeplitz { first_row: row })
}

/// Whether the Gramian is PSD within `tol`.
pub fn is_psd(t: &HermitianToeplitz, tol: f64) -> Result<bool> {
    Ok(min_eigenvalue(t)? >= -tol)
}

/// Pulls a nearly-PSD Toeplitz matrix into the PSD cone by shrinking its
/// off-diagonal entries toward zero, `T -> a T + (1 - a) f_0 I`.
///
/// The diagonal is untouched. Returns the matrix and the factor `a`
/// (1 when no shrink was needed). Fails when `f_0 <= 0` and the matrix is
/// not already PSD, because no shrink can help then.
pub fn shrink_to_psd(t: &HermitianToeplitz, tol: f64) -> Result<(HermitianToeplitz, f64)> {
    let lam = min_eigenvalue(t)?;
    if lam >= 0.0 {
        return Ok((t.clone(), 1.0));
    }
    let f0 = t.f0();
    if f0 <= 0.0 {
        return invalid("cannot shrink to PSD with a nonpositive diagonal");
    }
    // Aim slightly inside the cone so round-off in later eigensolves stays
    // above -tol.
    let margin = (0.01 * tol).min(0.5 * f0);
    let mut a = (f0 - margin) / (f0 - lam);
    let mut out = scaled_offdiag(t, a);
    for _ in 0..8 {
        if min_eigenvalue(&out)? >= 0.0 {
            break;
        }
        a *= 1.0 - 4.0 * f64::EPSILON * t.size() as f64;
        out = scaled_offdiag(t, a);
    }
    Ok((out, a))
}

fn scaled_offdiag(t: &HermitianToeplitz, a: f64) -> HermitianToeplitz {
    let mut row = t.first_row.clone();
    for v in row.iter_mut().skip(1) {
        *v *= a;
    }
    HermitianToeplitz { first_row: row }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn toep(row: &[Complex64]) -> HermitianToeplitz {
        HermitianToeplitz::new(row.to_vec()).unwrap()
    }

    #[test]
    fn gramian_layout() {
        let s = SampledSignal::new(1.0, vec![c(1.0, 0.0), c(0.0, 0.5)]).unwrap();
        let g = build_gramian(&s).to_dense();
        assert_eq!(g.entry(0, 0), c(1.0, 0.0));
        assert_eq!(g.entry(0, 1), c(0.0, 0.5));
        assert_eq!(g.entry(1, 0), c(0.0, -0.5));
        assert_eq!(g.entry(1, 1), c(1.0, 0.0));

        let one = build_gramian(&SampledSignal::from_real(1.0, &[1.0]).unwrap());
        assert_eq!(one.size(), 1);
        assert_eq!(one.to_dense().entry(0, 0), c(1.0, 0.0));
    }

    #[test]
    fn subdiagonals_are_conjugates() {
        let row = [c(2.0, 0.0), c(0.3, 0.4), c(-0.1, 0.2), c(0.05, -0.7)];
        let g = toep(&row).to_dense();
        for k in 0..4 {
            for i in 0..4 - k {
                assert_eq!(g.entry(i, i + k), row[k]);
                assert_eq!(g.entry(i + k, i), if k == 0 { row[0] } else { row[k].conj() });
            }
        }
    }

    #[test]
    fn constant_signal_spectrum() {
        let t = toep(&[c(1.0, 0.0); 3]);
        let e = linalg::eigenvalues(&t.to_dense()).unwrap();
        assert!(e[0].abs() < 1e-14 && e[1].abs() < 1e-14 && (e[2] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn min_eigenvalue_examples() {
        assert!(min_eigenvalue(&toep(&[c(1.0, 0.0), c(1.0, 0.0)])).unwrap().abs() < 1e-15);
        assert!((min_eigenvalue(&toep(&[c(1.0, 0.0), c(0.0, 0.0)])).unwrap() - 1.0).abs() < 1e-15);
        assert!((min_eigenvalue(&toep(&[c(1.0, 0.0), c(2.0, 0.0)])).unwrap() + 1.0).abs() < 1e-14);
    }

    #[test]
    fn toeplitz_projection_averages_diagonals() {
        let m = DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(2., 0.), c(2., 0.), c(3., 0.)]);
        let t = project_toeplitz(&HermitianDense::from_matrix(m).unwrap());
        assert_eq!(t.first_row(), &[c(2.0, 0.0), c(2.0, 0.0)]);
    }

    #[test]
    fn toeplitz_projection_fixed_point() {
        let t = toep(&[c(1.5, 0.0), c(0.2, -0.3), c(0.1, 0.1)]);
        let p = project_toeplitz(&t.to_dense());
        for (a, b) in p.first_row().iter().zip(t.first_row()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn norm_enforcement() {
        let t = toep(&[c(0.9, 0.0), c(0.5, 0.0)]);
        let u = enforce_norm(&t, 1.0).unwrap();
        assert_eq!(u.first_row(), &[c(1.0, 0.0), c(0.5, 0.0)]);
        assert_eq!(enforce_norm(&u, 1.0).unwrap(), u);
        assert!(enforce_norm(&t, -0.1).is_err());

        let d = enforce_norm(&toep(&[c(0.31, 0.0), c(0.1, 0.2)]), 0.289444).unwrap();
        assert_eq!(d.to_dense().entry(1, 1).re, 0.289444);
        assert_eq!(d.first_row()[1], c(0.1, 0.2));
    }

    #[test]
    fn shrink_certifies() {
        let t = toep(&[c(1.0, 0.0), c(0.9, 0.0), c(0.9, 0.0), c(-0.9, 0.0)]);
        assert!(min_eigenvalue(&t).unwrap() < 0.0);
        let (s, a) = shrink_to_psd(&t, psd_tol(1.0)).unwrap();
        assert!(a < 1.0 && a > 0.0);
        assert!(min_eigenvalue(&s).unwrap() >= 0.0);
        assert_eq!(s.f0(), 1.0);
        let (same, one) = shrink_to_psd(&s, psd_tol(1.0)).unwrap();
        assert_eq!(one, 1.0);
        assert_eq!(same, s);
    }

    #[test]
    fn frobenius_from_row() {
        let t = toep(&[c(1.0, 0.0), c(0.3, 0.4), c(-0.2, 0.0)]);
        assert!((t.frobenius_norm() - t.to_dense().frobenius_norm()).abs() < 1e-14);
    }
}
