use num_complex::Complex64;

use crate::error::{invalid, Result};

/// Complex samples `f_0..f_n` of a response function on the uniform grid
/// `t_j = j * dt`, `j >= 0`.
///
/// Negative times are implied by Hermitian symmetry, `f_{-j} = conj(f_j)`,
/// and never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    dt: f64,
    values: Vec<Complex64>,
}

impl SampledSignal {
    pub fn new(dt: f64, values: Vec<Complex64>) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return invalid(format!("time step must be positive and finite, got {dt}"));
        }
        if values.is_empty() {
            return invalid("signal must contain at least one sample");
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return invalid("signal contains non-finite samples");
        }
        Ok(Self { dt, values })
    }

    /// Builds a signal from real samples.
    pub fn from_real(dt: f64, values: &[f64]) -> Result<Self> {
        Self::new(dt, values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false; a signal holds at least one sample.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Real part of the equal-time value.
    pub fn f0(&self) -> f64 {
        self.values[0].re
    }

    pub fn time(&self, j: usize) -> f64 {
        j as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |j| j as f64 * self.dt)
    }

    /// True when every sample has an exactly zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    /// First `n` samples; `n` is clamped to `1..=len`.
    pub fn truncated(&self, n: usize) -> Self {
        let n = n.clamp(1, self.values.len());
        Self { dt: self.dt, values: self.values[..n].to_vec() }
    }

    /// Checks the necessary conditions of positive definiteness that do not
    /// need an eigensolve: `f_0` real and nonnegative, `|f_j| <= f_0`.
    pub fn satisfies_disk_bound(&self, tol: f64) -> bool {
        let f0 = self.values[0];
        if f0.im.abs() > tol || f0.re < -tol {
            return false;
        }
        self.values.iter().all(|v| v.norm() <= f0.re + tol)
    }

    /// Root-mean-square deviation from another signal of equal length.
    pub fn rmse(&self, other: &SampledSignal) -> Result<f64> {
        if other.len() != self.len() {
            return invalid(format!("length mismatch: {} vs {}", self.len(), other.len()));
        }
        let ss: f64 = self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        Ok((ss / self.len() as f64).sqrt())
    }

    /// Largest pointwise modulus of the difference to another signal.
    pub fn max_abs_diff(&self, other: &SampledSignal) -> Result<f64> {
        if other.len() != self.len() {
            return invalid(format!("length mismatch: {} vs {}", self.len(), other.len()));
        }
        Ok(self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}
