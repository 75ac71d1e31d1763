//! Discrete spectral measures and the Carathéodory-Fejér factorization
//! `T = A P A^dagger` of a PSD Toeplitz Gramian.
//!
//! With `A_{ik} = exp(i omega_k t_i)` and `P = diag(p_k)`, the first row of
//! `T` is `f_j = sum_k p_k exp(-i omega_k t_j)`.

mod nnls;

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::gram::{self, psd_tol, HermitianToeplitz};
use crate::linalg;
use crate::signal::SampledSignal;

pub use nnls::nnls;

/// Default relative reconstruction tolerance.
pub const CF_TOL: f64 = 1e-8;
/// Default relative eigenvalue threshold for the numerical rank.
pub const SINGULAR_TOL: f64 = 1e-10;
/// Points in the MUSIC pseudospectrum scan.
pub const MUSIC_GRID: usize = 4096;

/// One oscillation `weight * exp(-i omega t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pole {
    pub omega: f64,
    pub weight: f64,
}

/// A discrete spectral measure on a sampling grid of step `dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleModel {
    poles: Vec<Pole>,
    dt: f64,
}

impl PoleModel {
    /// Validates, folds frequencies into `(-pi/dt, pi/dt]`, merges poles
    /// that coincide there, and sorts by frequency.
    pub fn new(poles: Vec<Pole>, dt: f64) -> Result<Self> {
        let folded = poles.into_iter().map(|p| Pole { omega: wrap_frequency(p.omega, dt), weight: p.weight }).collect();
        Self::new_unwrapped(folded, dt)
    }

    /// Like [`PoleModel::new`] without folding, for generators whose
    /// frequencies are meaningful beyond the Nyquist band.
    pub fn new_unwrapped(mut poles: Vec<Pole>, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return invalid(format!("time step must be positive, got {dt}"));
        }
        if poles.is_empty() {
            return invalid("pole model needs at least one pole");
        }
        for p in &poles {
            if !p.omega.is_finite() || !(p.weight.is_finite() && p.weight > 0.0) {
                return invalid(format!("pole ({}, {}) needs finite frequency and positive weight", p.omega, p.weight));
            }
        }
        poles.sort_by(|a, b| a.omega.total_cmp(&b.omega));
        let merge_tol = 1e-12 * PI / dt;
        let mut merged: Vec<Pole> = Vec::with_capacity(poles.len());
        for p in poles {
            match merged.last_mut() {
                Some(q) if (p.omega - q.omega).abs() <= merge_tol => {
                    let w = q.weight + p.weight;
                    q.omega = (q.omega * q.weight + p.omega * p.weight) / w;
                    q.weight = w;
                }
                _ => merged.push(p),
            }
        }
        Ok(Self { poles: merged, dt })
    }

    pub fn poles(&self) -> &[Pole] {
        &self.poles
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.poles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poles.is_empty()
    }

    /// `sum_k p_k`, which equals `f_0` of every reconstruction.
    pub fn total_weight(&self) -> f64 {
        self.poles.iter().map(|p| p.weight).sum()
    }

    /// Value at time `t`.
    pub fn value_at(&self, t: f64) -> Complex64 {
        self.poles.iter().map(|p| Complex64::from_polar(p.weight, -p.omega * t)).sum()
    }

    /// First row of the model's Toeplitz matrix with `n` entries.
    pub fn first_row(&self, n: usize) -> Vec<Complex64> {
        (0..n).map(|j| self.value_at(j as f64 * self.dt)).collect()
    }
}

/// Maps `omega` into `(-pi/dt, pi/dt]`.
pub fn wrap_frequency(omega: f64, dt: f64) -> f64 {
    let period = 2.0 * PI / dt;
    let mut w = omega - period * (omega / period).round();
    if w <= -PI / dt {
        w += period;
    } else if w > PI / dt {
        w -= period;
    }
    // Round-off around zero (and negative zero) reads as exactly zero.
    if w.abs() <= 1e-14 * PI / dt {
        0.0
    } else {
        w
    }
}

/// Samples of the model on `j = 0..n_total`.
pub fn extrapolate(model: &PoleModel, n_total: usize) -> Result<SampledSignal> {
    if n_total == 0 {
        return invalid("extrapolation needs at least one sample");
    }
    SampledSignal::new(model.dt, model.first_row(n_total))
}

/// Number of eigenvalues above `singular_tol * lambda_max`.
pub fn estimate_rank(t: &HermitianToeplitz, singular_tol: f64) -> Result<usize> {
    if !(singular_tol.is_finite() && singular_tol >= 0.0) {
        return invalid(format!("singular_tol must be nonnegative, got {singular_tol}"));
    }
    let vals = linalg::eigenvalues(&t.to_dense())?;
    if vals[0] < -psd_tol(t.f0()) {
        return invalid(format!("Gramian is not PSD (min eigenvalue {:.3e})", vals[0]));
    }
    let top = *vals.last().expect("nonempty");
    if top <= 0.0 {
        return Ok(0);
    }
    Ok(vals.iter().filter(|&&v| v > singular_tol * top).count())
}

/// Which frequency estimator produced a decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CfMethod {
    Pisarenko,
    Music,
}

/// Decomposition plus how it was obtained.
#[derive(Debug, Clone)]
pub struct CfDecomposition {
    pub model: PoleModel,
    pub method: CfMethod,
    /// `||T - A P A^dagger||_F / ||T||_F`.
    pub relative_residual: f64,
    /// Relative residual of every estimator that produced a model.
    pub candidates: Vec<(CfMethod, f64)>,
}

/// Rank-`r` Carathéodory-Fejér decomposition.
///
/// Frequencies come from two estimators and the one with the smaller
/// Toeplitz residual wins: the roots of the null vector of the leading
/// `(r + 1)` principal submatrix, and the `r` deepest minima of the MUSIC
/// pseudospectrum `||E_noise^dagger a(omega)||^2`. Weights are fitted by
/// nonnegative least squares in the Frobenius metric of `T`.
pub fn decompose_cf(t: &HermitianToeplitz, r: usize, dt: f64) -> Result<PoleModel> {
    Ok(decompose_cf_with_diagnostics(t, r, dt)?.model)
}

pub fn decompose_cf_with_diagnostics(t: &HermitianToeplitz, r: usize, dt: f64) -> Result<CfDecomposition> {
    let m = t.size();
    if r == 0 || r + 1 > m {
        return invalid(format!("rank {r} must be in 1..={} for a {m}x{m} Gramian", m.saturating_sub(1)));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return invalid(format!("time step must be positive, got {dt}"));
    }
    let norm = t.frobenius_norm();
    if norm == 0.0 {
        return invalid("cannot decompose the zero matrix");
    }

    let mut failures = Vec::new();
    let mut tried = Vec::new();
    let mut best: Option<CfDecomposition> = None;
    let candidates = [
        (CfMethod::Pisarenko, pisarenko_frequencies(t, r, dt)),
        (CfMethod::Music, music_frequencies(t, r, dt)),
    ];
    for (method, freqs) in candidates {
        let fitted = freqs.and_then(|f| fit_weights(t.first_row(), &f, dt));
        match fitted {
            Ok(model) => {
                let diff: Vec<Complex64> =
                    model.first_row(m).iter().zip(t.first_row()).map(|(a, b)| a - b).collect();
                let relative_residual = gram::toeplitz_frobenius_sq(&diff).sqrt() / norm;
                tried.push((method, relative_residual));
                if best.as_ref().is_none_or(|b| relative_residual < b.relative_residual) {
                    best = Some(CfDecomposition { model, method, relative_residual, candidates: Vec::new() });
                }
            }
            Err(e) => failures.push(format!("{method:?}: {e}")),
        }
    }
    let mut best =
        best.ok_or_else(|| Error::Numeric(format!("no frequency estimator succeeded ({})", failures.join("; "))))?;
    best.candidates = tried;
    if let Some((model, res)) = polish(t.first_row(), &best.model, best.relative_residual * norm) {
        best.model = model;
        best.relative_residual = res / norm;
    }
    Ok(best)
}

/// Angles of the roots of `sum_i u_i w^i`, where `u` spans the smallest
/// eigenvector of the leading `(r + 1)` block. A root `w = exp(-i omega dt)`
/// gives the frequency `omega`.
fn pisarenko_frequencies(t: &HermitianToeplitz, r: usize, dt: f64) -> Result<Vec<f64>> {
    let sub = HermitianToeplitz::new(t.first_row()[..=r].to_vec())?;
    let e = linalg::eig_hermitian(&sub.to_dense())?;
    let u: Vec<Complex64> = e.eigenvectors.column(0).iter().copied().collect();
    let roots = polynomial_roots(&u)?;
    Ok(roots.iter().map(|w| wrap_frequency(-w.arg() / dt, dt)).collect())
}

/// Roots of `c_0 + c_1 w + ... + c_d w^d` from the companion matrix,
/// polished by Newton steps.
pub(crate) fn polynomial_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut d = coeffs.len() - 1;
    while d > 0 && coeffs[d].norm() <= f64::EPSILON * coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max) {
        d -= 1;
    }
    if d == 0 {
        return Err(Error::Numeric("null-space polynomial is constant".into()));
    }
    let lead = coeffs[d];
    let mut comp = DMatrix::<Complex64>::zeros(d, d);
    for i in 1..d {
        comp[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..d {
        comp[(i, d - 1)] = -coeffs[i] / lead;
    }
    let schur = Schur::try_new(comp, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numeric(format!("companion Schur decomposition of degree {d} did not converge")))?;
    let mut roots: Vec<Complex64> = schur
        .eigenvalues()
        .ok_or_else(|| Error::Numeric("companion eigenvalues unavailable".into()))?
        .iter()
        .copied()
        .collect();
    let poly = &coeffs[..=d];
    for z in roots.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = horner_with_derivative(poly, *z);
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            let next = *z - step;
            if !(next.re.is_finite() && next.im.is_finite()) || horner_with_derivative(poly, next).0.norm() >= p.norm() {
                break;
            }
            *z = next;
        }
    }
    if roots.iter().any(|z| !(z.re.is_finite() && z.im.is_finite()) || z.norm() == 0.0) {
        return Err(Error::Numeric("polynomial rooting produced invalid roots".into()));
    }
    Ok(roots)
}

fn horner_with_derivative(c: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

/// `r` deepest local minima of the MUSIC denominator, refined by golden
/// section between neighbouring grid points.
fn music_frequencies(t: &HermitianToeplitz, r: usize, dt: f64) -> Result<Vec<f64>> {
    let m = t.size();
    let e = linalg::eig_hermitian(&t.to_dense())?;
    // Columns r..m of the descending order span the signal subspace; use
    // whichever subspace is smaller.
    let use_signal = r <= m - r;
    let cols: Vec<Vec<Complex64>> = if use_signal {
        (m - r..m).map(|k| e.eigenvectors.column(k).iter().copied().collect()).collect()
    } else {
        (0..m - r).map(|k| e.eigenvectors.column(k).iter().copied().collect()).collect()
    };
    let denom = |omega: f64| -> f64 {
        let z = Complex64::from_polar(1.0, omega * dt);
        let proj: f64 = cols
            .iter()
            .map(|v| {
                // conj(v) . a(omega) with a_i = z^i.
                let mut acc = Complex64::new(0.0, 0.0);
                for c in v.iter().rev() {
                    acc = acc * z + c.conj();
                }
                acc.norm_sqr()
            })
            .sum();
        if use_signal { m as f64 - proj } else { proj }
    };

    let step = 2.0 * PI / (dt * MUSIC_GRID as f64);
    let grid: Vec<f64> = (0..MUSIC_GRID).map(|i| -PI / dt + (i as f64 + 1.0) * step).collect();
    let vals: Vec<f64> = grid.iter().map(|&w| denom(w)).collect();
    let n = vals.len();
    let mut minima: Vec<usize> = (0..n)
        .filter(|&i| {
            let prev = vals[(i + n - 1) % n];
            let next = vals[(i + 1) % n];
            vals[i] <= prev && vals[i] < next
        })
        .collect();
    if minima.len() < r {
        return Err(Error::Numeric(format!("MUSIC scan found {} minima, need {r}", minima.len())));
    }
    minima.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(a.cmp(&b)));
    minima.truncate(r);
    Ok(minima
        .into_iter()
        .map(|i| wrap_frequency(golden_min(&denom, grid[i] - step, grid[i] + step), dt))
        .collect())
}

/// Minimizer of a unimodal function on `[a, b]`.
pub(crate) fn golden_min(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if (b - a).abs() <= 4.0 * f64::EPSILON * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 { x1 } else { x2 }
}

/// Weighted residual `sqrt(c_j) (model_j - row_j)` split into real and
/// imaginary halves, with `c_0 = m`, `c_j = 2 (m - j)`.
fn toeplitz_weights(m: usize) -> Vec<f64> {
    (0..m).map(|j| if j == 0 { (m as f64).sqrt() } else { (2.0 * (m - j) as f64).sqrt() }).collect()
}

/// Joint Gauss-Newton refinement of frequencies and weights on the
/// Frobenius residual. Returns the refined model and its absolute residual
/// when it improves on `start_residual`.
fn polish(row: &[Complex64], start: &PoleModel, start_residual: f64) -> Option<(PoleModel, f64)> {
    let m = row.len();
    let dt = start.dt;
    let sw = toeplitz_weights(m);
    let residual_of = |poles: &[Pole]| -> (DVector<f64>, f64) {
        let mut r = DVector::zeros(2 * m);
        for j in 0..m {
            let t = j as f64 * dt;
            let v: Complex64 = poles.iter().map(|p| Complex64::from_polar(p.weight, -p.omega * t)).sum::<Complex64>() - row[j];
            r[j] = v.re * sw[j];
            r[m + j] = v.im * sw[j];
        }
        let n = r.norm();
        (r, n)
    };
    let mut poles = start.poles.clone();
    let k = poles.len();
    if 2 * k > 2 * m {
        return None;
    }
    let (mut r, mut res) = residual_of(&poles);
    for _ in 0..30 {
        let jac = DMatrix::from_fn(2 * m, 2 * k, |i, c| {
            let j = i % m;
            let t = j as f64 * dt;
            let p = poles[c % k];
            let e = Complex64::from_polar(1.0, -p.omega * t);
            // d/d omega of w e^{-i omega t} is -i t w e^{-i omega t}.
            let d = if c < k { Complex64::new(0.0, -t * p.weight) * e } else { e };
            (if i < m { d.re } else { d.im }) * sw[j]
        });
        let svd = jac.svd(true, true);
        let eps = f64::EPSILON * svd.singular_values.max() * (2 * m) as f64;
        let Ok(step) = svd.solve(&(-&r), eps) else { break };
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<Pole> = (0..k)
                .map(|c| Pole { omega: poles[c].omega + lambda * step[c], weight: poles[c].weight + lambda * step[k + c] })
                .collect();
            if trial.iter().all(|p| p.weight > 0.0 && p.omega.is_finite()) {
                let (tr, tres) = residual_of(&trial);
                if tres < res {
                    poles = trial;
                    r = tr;
                    let gain = res - tres;
                    res = tres;
                    accepted = gain > 1e-3 * res;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if res < start_residual {
        PoleModel::new(poles, dt).ok().map(|m| (m, res))
    } else {
        None
    }
}

/// Nonnegative weights for fixed frequencies, minimizing the Frobenius
/// distance between the model's Toeplitz matrix and `row`'s.
fn fit_weights(row: &[Complex64], freqs: &[f64], dt: f64) -> Result<PoleModel> {
    let m = row.len();
    let k = freqs.len();
    let sqrt_w = toeplitz_weights(m);
    let a = DMatrix::from_fn(2 * m, k, |i, c| {
        let j = i % m;
        let phase = -freqs[c] * j as f64 * dt;
        let v = if i < m { phase.cos() } else { phase.sin() };
        v * sqrt_w[j]
    });
    let b = DVector::from_fn(2 * m, |i, _| {
        let j = i % m;
        (if i < m { row[j].re } else { row[j].im }) * sqrt_w[j]
    });
    let x = nnls(&a, &b);
    let poles: Vec<Pole> =
        freqs.iter().zip(x.iter()).filter(|(_, &w)| w > 0.0).map(|(&omega, &weight)| Pole { omega, weight }).collect();
    if poles.is_empty() {
        return Err(Error::Numeric("all fitted weights vanished".into()));
    }
    PoleModel::new(poles, dt)
}
