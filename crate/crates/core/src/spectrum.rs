//! Damped Fourier transform to real frequency and positivity checks.
//!
//! With negative times filled in by `f_{-j} = conj(f_j)`, the transform
//!
//! ```text
//! A(omega) = dt * sum_{|j| < N} f_j exp(i omega t_j) exp(-|t_j| / tau)
//!          = dt * (f_0 + 2 Re sum_{j >= 1} f_j exp(i omega t_j) exp(-t_j / tau))
//! ```
//!
//! is real, and nonnegative for a positive definite signal up to the
//! truncation of the sum. A pole `exp(-i omega_0 t)` peaks at `+omega_0`.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::signal::SampledSignal;

/// Default number of frequency points.
pub const DEFAULT_GRID_POINTS: usize = 2048;

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub omegas: Vec<f64>,
    /// `dt (f_0 + 2 sum_{j >= 1} f_j e^{i omega t_j} e^{-t_j/tau})`. The real
    /// part is `A(omega)`; the imaginary part is the dispersive partner of
    /// the one-sided transform.
    pub values: Vec<Complex64>,
    pub tau: f64,
    pub dt: f64,
}

impl Spectrum {
    pub fn real_part(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }
}

/// `n` equally spaced frequencies from `-pi/dt` to `pi/dt`, both included.
pub fn default_grid(dt: f64, n: usize) -> Result<Vec<f64>> {
    if !(dt.is_finite() && dt > 0.0) {
        return invalid(format!("time step must be positive, got {dt}"));
    }
    if n < 2 {
        return invalid("frequency grid needs at least two points");
    }
    let w = PI / dt;
    Ok((0..n).map(|i| -w + 2.0 * w * i as f64 / (n - 1) as f64).collect())
}

pub fn damped_ft(s: &SampledSignal, tau: f64, omegas: &[f64]) -> Result<Spectrum> {
    if !(tau.is_finite() && tau > 0.0) {
        return invalid(format!("damping time must be positive, got {tau}"));
    }
    if omegas.is_empty() {
        return invalid("frequency grid is empty");
    }
    if omegas.iter().any(|w| !w.is_finite()) || omegas.windows(2).any(|p| p[1] <= p[0]) {
        return invalid("frequency grid must be finite and strictly increasing");
    }
    let dt = s.dt();
    let f = s.values();
    let decay = (-dt / tau).exp();
    let values = omegas
        .iter()
        .map(|&w| {
            // Horner in q = e^{i w dt - dt/tau} over j = 1..N.
            let q = Complex64::from_polar(decay, w * dt);
            let mut acc = Complex64::new(0.0, 0.0);
            for v in f[1..].iter().rev() {
                acc = acc * q + v;
            }
            dt * (Complex64::new(f[0].re, 0.0) + 2.0 * acc * q)
        })
        .collect();
    Ok(Spectrum { omegas: omegas.to_vec(), values, tau, dt })
}

/// Largest possible magnitude of the omitted terms `|j| >= N` for a signal
/// bounded by `|f_j| <= f0`: `2 dt f0 e^{-N dt/tau} / (1 - e^{-dt/tau})`.
pub fn truncation_tail_bound(f0: f64, dt: f64, n_samples: usize, tau: f64) -> f64 {
    let q = (-dt / tau).exp();
    2.0 * dt * f0.abs() * q.powf(n_samples as f64) / (1.0 - q)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositivityReport {
    pub min_value: f64,
    pub argmin_omega: f64,
    /// Fraction of grid points with `A(omega) < -tol`.
    pub fraction_below: f64,
    pub tol: f64,
    pub pass: bool,
}

pub fn check_positivity(sp: &Spectrum, tol: f64) -> PositivityReport {
    let mut min_value = f64::INFINITY;
    let mut argmin_omega = f64::NAN;
    let mut below = 0usize;
    for (w, v) in sp.omegas.iter().zip(&sp.values) {
        if v.re < min_value {
            min_value = v.re;
            argmin_omega = *w;
        }
        if v.re < -tol {
            below += 1;
        }
    }
    let n = sp.values.len().max(1);
    PositivityReport {
        min_value,
        argmin_omega,
        fraction_below: below as f64 / n as f64,
        tol,
        pass: min_value >= -tol,
    }
}

/// Up to `k` highest local maxima of `A(omega)` as `(omega, value)`, highest
/// first. Each maximum is refined by a parabola through its neighbours.
pub fn dominant_peaks(sp: &Spectrum, k: usize) -> Vec<(f64, f64)> {
    let a = sp.real_part();
    let n = a.len();
    let mut peaks: Vec<(f64, f64)> = (1..n.saturating_sub(1))
        .filter(|&i| a[i] > a[i - 1] && a[i] >= a[i + 1])
        .map(|i| {
            let (y0, y1, y2) = (a[i - 1], a[i], a[i + 1]);
            let denom = y0 - 2.0 * y1 + y2;
            let shift = if denom < 0.0 { 0.5 * (y0 - y2) / denom } else { 0.0 };
            let h = 0.5 * (sp.omegas[i + 1] - sp.omegas[i - 1]);
            (sp.omegas[i] + shift * h, y1 - 0.25 * (y0 - y2) * shift)
        })
        .collect();
    peaks.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.total_cmp(&y.0)));
    peaks.truncate(k);
    peaks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_signal_geometric_sum() {
        let (dt, tau, n) = (0.1, 5.0, 200);
        let s = SampledSignal::from_real(dt, &vec![1.0; n]).unwrap();
        let grid = default_grid(dt, 257).unwrap();
        let sp = damped_ft(&s, tau, &grid).unwrap();
        for (w, v) in grid.iter().zip(&sp.values) {
            let q = Complex64::from_polar((-dt / tau).exp(), w * dt);
            let sum = q * (Complex64::new(1.0, 0.0) - q.powu(n as u32 - 1)) / (Complex64::new(1.0, 0.0) - q);
            let expected = dt * (1.0 + 2.0 * sum.re);
            assert!((v.re - expected).abs() < 1e-10 * expected.abs().max(1.0));
        }
        let peaks = dominant_peaks(&sp, 1);
        assert!(peaks[0].0.abs() < 1e-12);
    }

    #[test]
    fn pole_peaks_at_its_frequency() {
        let (dt, w0) = (0.1, 2.3);
        let s = SampledSignal::new(dt, (0..2000).map(|j| Complex64::from_polar(1.0, -w0 * j as f64 * dt)).collect()).unwrap();
        let sp = damped_ft(&s, 20.0, &default_grid(dt, 4096).unwrap()).unwrap();
        assert!((dominant_peaks(&sp, 1)[0].0 - w0).abs() < 2.0 * PI / dt / 4095.0);
    }

    #[test]
    fn positivity_report_counts() {
        let sp = Spectrum {
            omegas: vec![0.0, 1.0, 2.0, 3.0],
            values: [1.0, -0.5, -1e-12, 2.0].iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            tau: 1.0,
            dt: 1.0,
        };
        let r = check_positivity(&sp, 1e-10);
        assert!(!r.pass);
        assert_eq!(r.min_value, -0.5);
        assert_eq!(r.argmin_omega, 1.0);
        assert_eq!(r.fraction_below, 0.25);
        assert!(check_positivity(&sp, 0.6).pass);
    }

    #[test]
    fn rejects_bad_arguments() {
        let s = SampledSignal::from_real(0.1, &[1.0, 0.5]).unwrap();
        assert!(damped_ft(&s, 0.0, &[0.0, 1.0]).is_err());
        assert!(damped_ft(&s, 1.0, &[1.0, 0.0]).is_err());
        assert!(default_grid(0.1, 1).is_err());
    }

    #[test]
    fn tail_bound_decreases_with_length() {
        let a = truncation_tail_bound(1.0, 0.25, 100, 100.0);
        let b = truncation_tail_bound(1.0, 0.25, 8000, 100.0);
        assert!(b < a && b > 0.0);
    }
}
