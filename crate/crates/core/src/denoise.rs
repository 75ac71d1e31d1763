//! Denoising by projection onto positive definite signals.
//!
//! Two strategies share one contract: the returned signal's Gramian is PSD
//! within [`psd_tol`], its `f_0` equals the norm target, and non-convergence
//! is reported rather than raised. Both finish with a certification step
//! that shrinks the off-diagonals just enough to clear round-off negatives
//! left by the iteration.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::gram::{self, build_gramian, psd_tol, HermitianToeplitz};
use crate::linalg;
use crate::signal::SampledSignal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DenoiseStrategy {
    #[default]
    Alternating,
    Penalty,
}

/// One-dimensional minimizer used per entry and axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineSearch {
    /// Root of the analytic slope, bracketed by expansion and refined by
    /// Illinois regula falsi.
    #[default]
    Slope,
    /// Derivative-free golden section within `+-bracket`.
    Golden,
}

/// Settings of the coordinate-wise penalty minimizer.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PenaltyOptions {
    /// Maximum number of sweeps over all entries.
    pub sweeps: usize,
    pub line_search: LineSearch,
    /// Iteration cap of each one-dimensional search.
    pub line_iters: usize,
    /// Half-width of the golden-section interval, and first trial step of
    /// the slope search. When absent, `max(2 sigma_est, 1e-3 f_0)` from a robust noise estimate.
    pub bracket: Option<f64>,
    /// Stop once the cost is at or below this. Default `1e-10 f_0^2`.
    pub cost_tol: Option<f64>,
}

impl Default for PenaltyOptions {
    fn default() -> Self {
        Self { sweeps: 30, line_search: LineSearch::Slope, line_iters: 40, bracket: None, cost_tol: None }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DenoiseOptions {
    pub max_iter: usize,
    /// Max-norm change of the first row that ends the alternating
    /// iteration. Default `1e-8 f_0`.
    pub conv_tol: Option<f64>,
    /// Exact equal-time value, when known.
    pub f0_known: Option<f64>,
    pub strategy: DenoiseStrategy,
    pub penalty: PenaltyOptions,
}

impl Default for DenoiseOptions {
    fn default() -> Self {
        Self { max_iter: 500, conv_tol: None, f0_known: None, strategy: DenoiseStrategy::Alternating, penalty: PenaltyOptions::default() }
    }
}

impl DenoiseOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return invalid("max_iter must be at least 1");
        }
        if let Some(t) = self.conv_tol {
            if !(t.is_finite() && t > 0.0) {
                return invalid(format!("conv_tol must be positive, got {t}"));
            }
        }
        if let Some(f0) = self.f0_known {
            if !(f0.is_finite() && f0 >= 0.0) {
                return invalid(format!("f0_known must be nonnegative, got {f0}"));
            }
        }
        let p = &self.penalty;
        if p.sweeps == 0 || p.line_iters == 0 {
            return invalid("penalty sweeps and line_iters must be at least 1");
        }
        if let Some(b) = p.bracket {
            if !(b.is_finite() && b > 0.0) {
                return invalid(format!("penalty bracket must be positive, got {b}"));
            }
        }
        if let Some(c) = p.cost_tol {
            if !(c.is_finite() && c >= 0.0) {
                return invalid(format!("penalty cost_tol must be nonnegative, got {c}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenoiseReport {
    pub strategy: DenoiseStrategy,
    /// Iterations (alternating) or sweeps (penalty) performed.
    pub iterations: usize,
    pub converged: bool,
    /// Per iteration: first-row max-norm change (alternating) or cost
    /// after the sweep (penalty).
    pub history: Vec<f64>,
    /// Min eigenvalue and cost of the iterate before certification.
    pub raw_min_eig: f64,
    pub raw_cost: f64,
    /// Off-diagonal shrink factor of the certification step, 1 when unused.
    pub shrink_factor: f64,
    pub final_min_eig: f64,
    pub final_cost: f64,
    /// True when no `f0_known` was given and the measured value was used.
    pub f0_estimated: bool,
}

/// `sum_i [lambda_i (sgn(lambda_i) - 1)]^2 = 4 sum_{lambda_i < 0} lambda_i^2`.
pub fn cost_negative_eigs(t: &HermitianToeplitz) -> Result<f64> {
    let vals = linalg::eigenvalues(&t.to_dense())?;
    Ok(4.0 * vals.iter().filter(|&&l| l < 0.0).map(|l| l * l).sum::<f64>())
}

/// Dispatches on `opts.strategy`.
pub fn denoise(s: &SampledSignal, opts: &DenoiseOptions) -> Result<(SampledSignal, DenoiseReport)> {
    match opts.strategy {
        DenoiseStrategy::Alternating => denoise_alternating(s, opts),
        DenoiseStrategy::Penalty => denoise_penalty(s, opts),
    }
}

fn norm_target(s: &SampledSignal, opts: &DenoiseOptions) -> Result<(f64, bool)> {
    match opts.f0_known {
        Some(f0) => Ok((f0, false)),
        None if s.f0() > 0.0 => Ok((s.f0(), true)),
        None => invalid(format!("measured f_0 = {} is not positive; pass f0_known", s.f0())),
    }
}

/// Iterates PSD clip, diagonal averaging, and norm enforcement until the
/// first row stops moving.
pub fn denoise_alternating(s: &SampledSignal, opts: &DenoiseOptions) -> Result<(SampledSignal, DenoiseReport)> {
    opts.validate()?;
    let (f0, estimated) = norm_target(s, opts)?;
    let conv_tol = opts.conv_tol.unwrap_or(1e-8 * f0.max(f64::MIN_POSITIVE));
    let mut t = gram::enforce_norm(&build_gramian(s), f0)?;
    let mut history = Vec::new();
    let mut converged = false;
    for it in 0..opts.max_iter {
        let p = linalg::project_psd(&t.to_dense())?;
        let mut next = gram::project_toeplitz(&p);
        let last = it + 1 == opts.max_iter;
        if !(estimated && last) {
            next = gram::enforce_norm(&next, f0)?;
        }
        let change = max_change(t.first_row(), next.first_row());
        history.push(change);
        t = next;
        if change <= conv_tol {
            converged = true;
            break;
        }
    }
    finish(s.dt(), t, DenoiseStrategy::Alternating, history, converged, estimated)
}

/// Cyclic coordinate descent on [`cost_negative_eigs`], one first-row entry
/// at a time, by a line search along the real then the imaginary axis.
pub fn denoise_penalty(s: &SampledSignal, opts: &DenoiseOptions) -> Result<(SampledSignal, DenoiseReport)> {
    opts.validate()?;
    let (f0, estimated) = norm_target(s, opts)?;
    let po = &opts.penalty;
    let cost_tol = po.cost_tol.unwrap_or(1e-10 * f0 * f0);
    let bracket = po.bracket.unwrap_or_else(|| (2.0 * noise_sigma(s)).max(1e-3 * f0));
    let real = s.is_real();

    let mut row = gram::enforce_norm(&build_gramian(s), f0)?.into_first_row();
    let axes: &[bool] = if real { &[true] } else { &[true, false] };
    let mut history = Vec::new();
    match po.line_search {
        LineSearch::Golden => {
            let mut cost = cost_of(&row)?;
            let mut converged = cost <= cost_tol;
            while !converged && history.len() < po.sweeps {
                for j in 1..row.len() {
                    for &along_re in axes {
                        cost = golden_line(&mut row, j, along_re, bracket, po.line_iters, cost)?;
                    }
                }
                history.push(cost);
                converged = cost <= cost_tol;
            }
        }
        LineSearch::Slope => {
            let mut here = Probe::at(&row)?;
            // Last accepted move per coordinate seeds the next trial step.
            let mut steps = vec![bracket; 2 * row.len()];
            while here.cost > cost_tol && history.len() < po.sweeps {
                for j in 1..row.len() {
                    for &along_re in axes {
                        let slot = 2 * j + usize::from(!along_re);
                        let (probe, moved) = slope_line(&mut row, j, along_re, steps[slot], po.line_iters, here)?;
                        here = probe;
                        steps[slot] = (2.0 * moved).clamp(1e-12 * f0.max(1e-300), bracket);
                    }
                }
                history.push(here.cost);
            }
        }
    }
    let converged = history.last().is_none_or(|&c| c <= cost_tol);
    let t = HermitianToeplitz::new(row)?;
    finish(s.dt(), t, DenoiseStrategy::Penalty, history, converged, estimated)
}

fn finish(
    dt: f64,
    t: HermitianToeplitz,
    strategy: DenoiseStrategy,
    history: Vec<f64>,
    converged: bool,
    f0_estimated: bool,
) -> Result<(SampledSignal, DenoiseReport)> {
    let raw_min_eig = gram::min_eigenvalue(&t)?;
    let raw_cost = cost_negative_eigs(&t)?;
    let tol = psd_tol(t.f0());
    let (t, shrink_factor) = if raw_min_eig >= 0.0 {
        (t, 1.0)
    } else if t.f0() > 0.0 {
        gram::shrink_to_psd(&t, tol)?
    } else {
        return Err(Error::Numeric("iterate has a nonpositive diagonal and is not PSD".into()));
    };
    let final_min_eig = gram::min_eigenvalue(&t)?;
    let final_cost = cost_negative_eigs(&t)?;
    let report = DenoiseReport {
        strategy,
        iterations: history.len(),
        converged,
        history,
        raw_min_eig,
        raw_cost,
        shrink_factor,
        final_min_eig,
        final_cost,
        f0_estimated,
    };
    Ok((t.to_signal(dt)?, report))
}

fn max_change(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn cost_of(row: &[Complex64]) -> Result<f64> {
    cost_negative_eigs(&HermitianToeplitz::new(row.to_vec())?)
}

/// Cost and eigenpairs at one point.
struct Probe {
    cost: f64,
    eig: linalg::EigenDecomposition,
}

impl Probe {
    fn at(row: &[Complex64]) -> Result<Self> {
        let eig = linalg::eig_hermitian(&HermitianToeplitz::new(row.to_vec())?.to_dense())?;
        let cost = 4.0 * eig.eigenvalues.iter().filter(|&&l| l < 0.0).map(|l| l * l).sum::<f64>();
        Ok(Self { cost, eig })
    }

    /// Derivative of the cost with respect to the real or imaginary part of
    /// `f_j`: `8 sum_{lambda < 0} lambda v^dagger (dG) v`, where `dG` has
    /// `1` (or `i`) on the j-th superdiagonal and its conjugate below.
    fn slope(&self, j: usize, along_re: bool) -> f64 {
        let v = &self.eig.eigenvectors;
        let n = v.nrows();
        let mut g = 0.0;
        for (k, &lam) in self.eig.eigenvalues.iter().enumerate() {
            if lam >= 0.0 {
                break;
            }
            let col = v.column(k);
            let s: Complex64 = (0..n - j).map(|i| col[i].conj() * col[i + j]).sum();
            let quad = if along_re { 2.0 * s.re } else { -2.0 * s.im };
            g += lam * quad;
        }
        8.0 * g
    }
}

/// Moves entry `j` along one axis to the minimum of the convex cost: the
/// first point past the start where the slope stops opposing the motion.
/// On a flat zero-cost stretch that is the zero-cost point nearest the
/// start. Returns the probe at the accepted point and the distance moved.
fn slope_line(
    row: &mut [Complex64],
    j: usize,
    along_re: bool,
    first_step: f64,
    iters: usize,
    here: Probe,
) -> Result<(Probe, f64)> {
    let g0 = here.slope(j, along_re);
    if g0 == 0.0 || here.cost == 0.0 {
        return Ok((here, 0.0));
    }
    let x0 = if along_re { row[j].re } else { row[j].im };
    let dir = -g0.signum();
    let set = |row: &mut [Complex64], u: f64| {
        let x = x0 + dir * u;
        if along_re {
            row[j].re = x;
        } else {
            row[j].im = x;
        }
    };
    // phi(u) = dir * slope(x0 + dir u) is nondecreasing with phi(0) < 0.
    let (mut lo, mut phi_lo) = (0.0, dir * g0);
    let mut lo_probe = here;
    let mut h = first_step;
    let (mut hi, mut phi_hi, mut hi_probe);
    let mut expansions = 0;
    loop {
        set(row, h);
        let p = Probe::at(row)?;
        let phi = dir * p.slope(j, along_re);
        if phi >= 0.0 || expansions >= 60 {
            hi = h;
            phi_hi = phi;
            hi_probe = p;
            break;
        }
        lo = h;
        phi_lo = phi;
        lo_probe = p;
        h *= 2.0;
        expansions += 1;
    }
    // Coordinate descent only needs each line minimum to a relative
    // precision; the next sweep corrects the rest.
    let floor = 1e-15 * x0.abs().max(first_step).max(1e-300);
    let mut side = 0i8;
    for _ in 0..iters {
        if hi - lo <= (1e-3 * hi).max(floor) || phi_hi < 0.0 {
            break;
        }
        let mut u = lo - phi_lo * (hi - lo) / (phi_hi - phi_lo);
        if !(u > lo && u < hi) {
            u = 0.5 * (lo + hi);
        }
        set(row, u);
        let p = Probe::at(row)?;
        let phi = dir * p.slope(j, along_re);
        if phi >= 0.0 {
            hi = u;
            phi_hi = phi;
            hi_probe = p;
            if side == 1 {
                phi_lo *= 0.5;
            }
            side = 1;
        } else {
            lo = u;
            phi_lo = phi;
            lo_probe = p;
            if side == -1 {
                phi_hi *= 0.5;
            }
            side = -1;
        }
    }
    let (u, probe) = if hi_probe.cost <= lo_probe.cost { (hi, hi_probe) } else { (lo, lo_probe) };
    set(row, u);
    Ok((probe, u))
}

/// Golden-section search of entry `j` along one axis within `+-bracket`.
/// The cost is convex along the line; when its minimum is a flat zero
/// stretch, the zero-cost point nearest the starting value is kept.
fn golden_line(
    row: &mut [Complex64],
    j: usize,
    along_re: bool,
    bracket: f64,
    iters: usize,
    current_cost: f64,
) -> Result<f64> {
    let x0 = if along_re { row[j].re } else { row[j].im };
    let eval = |x: f64, row: &mut [Complex64]| -> Result<f64> {
        if along_re {
            row[j].re = x;
        } else {
            row[j].im = x;
        }
        cost_of(row)
    };
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (x0 - bracket, x0 + bracket);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = eval(x1, row)?;
    let mut f2 = eval(x2, row)?;
    for _ in 0..iters {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = eval(x1, row)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = eval(x2, row)?;
        }
    }
    let (mut best_x, mut best_f) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    if best_f == 0.0 {
        // Walk back toward x0 along the zero set.
        let (mut lo, mut hi) = (best_x, x0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if eval(mid, row)? == 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        best_x = lo;
        best_f = 0.0;
    }
    if best_f < current_cost {
        eval(best_x, row)?;
        Ok(best_f)
    } else {
        eval(x0, row)?;
        Ok(current_cost)
    }
}

/// Robust noise level from second differences: for white noise of
/// standard deviation `sigma`, `f_{j+1} - 2 f_j + f_{j-1}` has standard
/// deviation `sqrt(6) sigma` per part, and `1.4826 MAD` estimates it.
pub fn noise_sigma(s: &SampledSignal) -> f64 {
    let v = s.values();
    if v.len() < 3 {
        return 0.0;
    }
    let mut d: Vec<f64> = Vec::with_capacity(2 * v.len());
    for w in v.windows(3) {
        let dd = w[2] - 2.0 * w[1] + w[0];
        d.push(dd.re);
        if !s.is_real() {
            d.push(dd.im);
        }
    }
    let med = median(&mut d.clone());
    let mut dev: Vec<f64> = d.iter().map(|x| (x - med).abs()).collect();
    1.4826 * median(&mut dev) / 6f64.sqrt()
}

fn median(x: &mut [f64]) -> f64 {
    x.sort_by(f64::total_cmp);
    let n = x.len();
    if n % 2 == 1 { x[n / 2] } else { 0.5 * (x[n / 2 - 1] + x[n / 2]) }
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
    fn cost_examples() {
        assert_eq!(cost_negative_eigs(&toep(&[c(1.0, 0.0), c(0.5, 0.0)])).unwrap(), 0.0);
        assert!((cost_negative_eigs(&toep(&[c(1.0, 0.0), c(2.0, 0.0)])).unwrap() - 4.0).abs() < 1e-12);
        assert!((cost_negative_eigs(&toep(&[c(0.0, 0.0), c(1.0, 0.0)])).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn psd_input_is_a_fixed_point() {
        let s = SampledSignal::new(0.1, vec![c(1.0, 0.0), c(0.5, 0.3), c(0.1, -0.2)]).unwrap();
        assert!(gram::min_eigenvalue(&build_gramian(&s)).unwrap() > 0.0);
        for strategy in [DenoiseStrategy::Alternating, DenoiseStrategy::Penalty] {
            let opts = DenoiseOptions { strategy, f0_known: Some(1.0), ..Default::default() };
            let (out, rep) = denoise(&s, &opts).unwrap();
            assert!(out.max_abs_diff(&s).unwrap() <= 1e-8, "{strategy:?}");
            assert!(rep.converged && rep.iterations <= 1);
            assert_eq!(rep.shrink_factor, 1.0);
        }
    }

    #[test]
    fn infeasible_pair_is_repaired() {
        let s = SampledSignal::from_real(1.0, &[1.0, 2.0]).unwrap();
        for strategy in [DenoiseStrategy::Alternating, DenoiseStrategy::Penalty] {
            let opts = DenoiseOptions { strategy, f0_known: Some(1.0), ..Default::default() };
            let (out, rep) = denoise(&s, &opts).unwrap();
            assert_eq!(out.f0(), 1.0);
            assert!(out.is_real());
            assert!(out.values()[1].re <= 1.0 + 1e-9, "{strategy:?} {:?}", out.values());
            assert!(rep.final_min_eig >= -psd_tol(1.0));
            assert_eq!(rep.history.len(), rep.iterations);
        }
    }

    #[test]
    fn missing_norm_uses_measured_value() {
        let s = SampledSignal::from_real(1.0, &[1.0, 1.5, 0.2]).unwrap();
        let (out, rep) = denoise_alternating(&s, &DenoiseOptions::default()).unwrap();
        assert!(rep.f0_estimated);
        assert!(rep.final_min_eig >= -psd_tol(out.f0()));
        let bad = SampledSignal::from_real(1.0, &[-0.1, 0.5]).unwrap();
        assert!(denoise_alternating(&bad, &DenoiseOptions::default()).is_err());
    }

    #[test]
    fn iteration_cap_is_flagged_not_raised() {
        let s = SampledSignal::from_real(1.0, &[1.0, 0.9, 0.9, -0.9]).unwrap();
        let opts = DenoiseOptions { max_iter: 1, conv_tol: Some(1e-300), f0_known: Some(1.0), ..Default::default() };
        let (_, rep) = denoise_alternating(&s, &opts).unwrap();
        assert!(!rep.converged);
        assert_eq!(rep.iterations, 1);
        assert!(rep.final_min_eig >= -psd_tol(1.0));
    }

    #[test]
    fn options_validation() {
        assert!(DenoiseOptions { max_iter: 0, ..Default::default() }.validate().is_err());
        assert!(DenoiseOptions { conv_tol: Some(0.0), ..Default::default() }.validate().is_err());
        assert!(DenoiseOptions { f0_known: Some(-1.0), ..Default::default() }.validate().is_err());
    }

    #[test]
    fn noise_estimate_ignores_smooth_signal() {
        let s = SampledSignal::from_real(0.1, &(0..50).map(|j| (0.1 * j as f64).cos()).collect::<Vec<_>>()).unwrap();
        assert!(noise_sigma(&s) < 1e-2);
    }
}
