//! Dense Hermitian matrices and their eigendecomposition.
//!
//! Everything in the crate that needs a spectrum goes through
//! [`eig_hermitian`] or [`eigenvalues`]. Real symmetric inputs take a real
//! code path so that projections of real matrices stay exactly real.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Relative tolerance used when validating Hermiticity of caller-supplied storage.
const HERMITIAN_CHECK_TOL: f64 = 1e-12;

/// Default eigensolver tolerance, relative to the Frobenius norm.
pub const EIG_TOL_REL: f64 = 1e-12;

/// Square complex matrix with `entry(i, j) == conj(entry(j, i))`.
///
/// The full matrix is stored, but every constructor mirrors one triangle so
/// the symmetry holds bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianDense {
    m: DMatrix<Complex64>,
}

impl HermitianDense {
    /// Validates that `m` is Hermitian up to round-off, then mirrors its
    /// upper triangle.
    pub fn from_matrix(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return invalid(format!("matrix is {}x{}, not square", m.nrows(), m.ncols()));
        }
        if m.nrows() == 0 {
            return invalid("matrix is empty");
        }
        if m.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return invalid("matrix has non-finite entries");
        }
        let scale = m.norm().max(f64::MIN_POSITIVE);
        let n = m.nrows();
        for i in 0..n {
            for j in i..n {
                if (m[(i, j)] - m[(j, i)].conj()).norm() > HERMITIAN_CHECK_TOL * scale {
                    return invalid(format!("matrix is not Hermitian at ({i}, {j})"));
                }
            }
        }
        Ok(Self::from_upper(&m))
    }

    /// Builds the Hermitian matrix whose upper triangle (diagonal included)
    /// is taken from `m`. Imaginary parts of the diagonal are dropped.
    pub fn from_upper(m: &DMatrix<Complex64>) -> Self {
        let n = m.nrows();
        let out = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(m[(i, i)].re, 0.0)
            } else if i < j {
                m[(i, j)]
            } else {
                m[(j, i)].conj()
            }
        });
        Self { m: out }
    }

    pub fn identity(n: usize) -> Self {
        Self { m: DMatrix::identity(n, n) }
    }

    pub fn from_real_diagonal(d: &[f64]) -> Self {
        let n = d.len();
        Self { m: DMatrix::from_fn(n, n, |i, j| if i == j { Complex64::new(d[i], 0.0) } else { Complex64::new(0.0, 0.0) }) }
    }

    pub fn size(&self) -> usize {
        self.m.nrows()
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.m[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.norm()
    }

    /// True when every entry has zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.m.iter().all(|z| z.im == 0.0)
    }

    fn real_part(&self) -> DMatrix<f64> {
        self.m.map(|z| z.re)
    }
}

/// Eigenvalues in ascending order with the matching orthonormal eigenvectors
/// stored as columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<Complex64>,
}

impl EigenDecomposition {
    /// `V diag(g(lambda)) V^dagger` for a spectral map `g`.
    pub fn reconstruct_with(&self, g: impl Fn(f64) -> f64) -> HermitianDense {
        let v = &self.eigenvectors;
        let n = v.nrows();
        let mut scaled = v.clone();
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            let w = g(lam);
            scaled.column_mut(k).scale_mut(w);
        }
        let m = &scaled * v.adjoint();
        debug_assert_eq!(m.nrows(), n);
        HermitianDense::from_upper(&m)
    }

    pub fn reconstruct(&self) -> HermitianDense {
        self.reconstruct_with(|x| x)
    }
}

/// Full eigendecomposition of a Hermitian matrix.
pub fn eig_hermitian(m: &HermitianDense) -> Result<EigenDecomposition> {
    let n = m.size();
    let (vals, vecs): (Vec<f64>, DMatrix<Complex64>) = if m.is_real() {
        let e = SymmetricEigen::try_new(m.real_part(), f64::EPSILON, 0)
            .ok_or_else(|| Error::Numeric("symmetric eigensolver did not converge".into()))?;
        (e.eigenvalues.iter().copied().collect(), e.eigenvectors.map(|x| Complex64::new(x, 0.0)))
    } else {
        let e = SymmetricEigen::try_new(m.as_matrix().clone(), f64::EPSILON, 0)
            .ok_or_else(|| Error::Numeric("Hermitian eigensolver did not converge".into()))?;
        (e.eigenvalues.iter().copied().collect(), e.eigenvectors)
    };
    if vals.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric("eigensolver produced non-finite eigenvalues".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let eigenvalues = order.iter().map(|&k| vals[k]).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |i, j| vecs[(i, order[j])]);
    Ok(EigenDecomposition { eigenvalues, eigenvectors })
}

/// Eigenvalues only, ascending.
pub fn eigenvalues(m: &HermitianDense) -> Result<Vec<f64>> {
    let mut vals: Vec<f64> = if m.is_real() {
        SymmetricEigen::try_new(m.real_part(), f64::EPSILON, 0)
            .ok_or_else(|| Error::Numeric("symmetric eigensolver did not converge".into()))?
            .eigenvalues
            .iter()
            .copied()
            .collect()
    } else {
        m.as_matrix().symmetric_eigenvalues().iter().copied().collect()
    };
    if vals.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric("eigensolver produced non-finite eigenvalues".into()));
    }
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// Frobenius-nearest positive semidefinite matrix: negative eigenvalues are
/// clipped to zero.
pub fn project_psd(m: &HermitianDense) -> Result<HermitianDense> {
    let e = eig_hermitian(m)?;
    if e.eigenvalues[0] >= 0.0 {
        return Ok(m.clone());
    }
    let real = m.is_real();
    let mut out = e.reconstruct_with(|x| x.max(0.0));
    if real {
        out.m.iter_mut().for_each(|z| z.im = 0.0);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_spectrum() {
        let e = eig_hermitian(&HermitianDense::identity(3)).unwrap();
        assert_eq!(e.eigenvalues.len(), 3);
        for l in e.eigenvalues {
            assert!(close(l, 1.0, 1e-14));
        }
    }

    #[test]
    fn pauli_x() {
        let m = DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]);
        let e = eigenvalues(&HermitianDense::from_matrix(m).unwrap()).unwrap();
        assert!(close(e[0], -1.0, 1e-14) && close(e[1], 1.0, 1e-14));
    }

    #[test]
    fn pauli_y_complex_path() {
        let m = DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]);
        let h = HermitianDense::from_matrix(m).unwrap();
        let e = eig_hermitian(&h).unwrap();
        assert!(close(e.eigenvalues[0], -1.0, 1e-14) && close(e.eigenvalues[1], 1.0, 1e-14));
        let back = e.reconstruct();
        assert!((back.as_matrix() - h.as_matrix()).norm() < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(1., 0.), c(2., 0.), c(1., 0.)]);
        assert!(matches!(HermitianDense::from_matrix(m), Err(Error::InvalidInput(_))));
        let m = DMatrix::from_row_slice(1, 2, &[c(1., 0.), c(1., 0.)]);
        assert!(HermitianDense::from_matrix(m).is_err());
    }

    #[test]
    fn psd_projection_clips() {
        let p = project_psd(&HermitianDense::from_real_diagonal(&[1.0, -1.0])).unwrap();
        assert!(close(p.entry(0, 0).re, 1.0, 1e-15));
        assert!(close(p.entry(1, 1).re, 0.0, 1e-15));
        assert_eq!(p.entry(0, 1), c(0.0, 0.0));
    }

    #[test]
    fn psd_projection_fixed_point() {
        let m = DMatrix::from_row_slice(2, 2, &[c(2., 0.), c(0.5, 0.5), c(0.5, -0.5), c(1., 0.)]);
        let h = HermitianDense::from_matrix(m).unwrap();
        let p = project_psd(&h).unwrap();
        assert!((p.as_matrix() - h.as_matrix()).norm() <= EIG_TOL_REL * h.frobenius_norm());
    }

    #[test]
    fn orthonormal_eigenvectors() {
        let n = 6;
        let m = DMatrix::from_fn(n, n, |i, j| c((i * j) as f64 * 0.1 + 1.0, (i as f64 - j as f64) * 0.3));
        let h = HermitianDense::from_upper(&m);
        let e = eig_hermitian(&h).unwrap();
        let v = &e.eigenvectors;
        let gram = v.adjoint() * v;
        assert!((gram - DMatrix::<Complex64>::identity(n, n)).norm() < 1e-12);
        assert!((e.reconstruct().as_matrix() - h.as_matrix()).norm() < 1e-12 * h.frobenius_norm());
        assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }
}
