//! Positive definite extension of a signal to later times.
//!
//! Appending `z = f_{n+1}` borders the Gramian by one row and column. With
//! the interior block `M` (the Gramian of `f_0..f_{n-1}`) diagonalized as
//! `W diag(mu) W^dagger`, the smallest eigenvalue `lambda < min(mu)` of the
//! bordered matrix solves
//!
//! ```text
//! rho(lambda) = |z - c(lambda)|,
//! rho(lambda) = f_0 - lambda - sum_k |A_k|^2 / (mu_k - lambda),
//! c(lambda)   = sum_k conj(A_k) B_k / (mu_k - lambda),
//! ```
//!
//! where `A = W^dagger a`, `B = W^dagger b`, and `a`, `b` are the first and
//! last columns of the border. The feasible set is therefore the disk
//! `|z - c(0)| <= rho(0)`, and the smallest eigenvalue is maximized at
//! `z = c(lambda*)` with `rho(lambda*) = 0`.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::gram::{build_gramian, psd_tol, HermitianToeplitz};
use crate::linalg;
use crate::poles::{self, SINGULAR_TOL};
use crate::signal::SampledSignal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtensionStrategy {
    /// Maximize the smallest eigenvalue of the enlarged Gramian.
    #[default]
    MaxMinEig,
    /// Centre of the feasible disk.
    Central,
    /// Fit a pole model to the whole input and sample it.
    PoleModel,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExtensionOptions {
    /// Number of samples to append.
    pub n_points: usize,
    pub strategy: ExtensionStrategy,
    /// Points per side of the coarse search grid over `|re|, |im| <= f_0`.
    pub grid: usize,
    /// Number of local refinements around the best point.
    pub refine_levels: usize,
    /// Spacing reduction per refinement.
    pub refine_factor: usize,
    /// Relative eigenvalue threshold for the rank used by `pole_model`.
    pub singular_tol: f64,
}

impl Default for ExtensionOptions {
    fn default() -> Self {
        Self {
            n_points: 0,
            strategy: ExtensionStrategy::MaxMinEig,
            grid: 41,
            refine_levels: 3,
            refine_factor: 5,
            singular_tol: SINGULAR_TOL,
        }
    }
}

impl ExtensionOptions {
    pub fn validate(&self) -> Result<()> {
        if self.grid < 3 || self.grid.is_multiple_of(2) {
            return invalid(format!("grid must be odd and >= 3, got {}", self.grid));
        }
        if self.refine_factor < 2 {
            return invalid(format!("refine_factor must be >= 2, got {}", self.refine_factor));
        }
        if !(self.singular_tol.is_finite() && self.singular_tol >= 0.0) {
            return invalid(format!("singular_tol must be nonnegative, got {}", self.singular_tol));
        }
        Ok(())
    }

    /// Spacing of the finest search grid for a signal with equal-time
    /// value `f0`.
    pub fn resolution(&self, f0: f64) -> f64 {
        2.0 * f0 / (self.grid - 1) as f64 / (self.refine_factor as f64).powi(self.refine_levels as i32)
    }
}

/// Outcome of one appended sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionRecord {
    pub value: Complex64,
    /// Area of the feasible disk; absent for model-based extension.
    pub area: Option<f64>,
    pub radius: Option<f64>,
    /// Smallest eigenvalue of the enlarged Gramian at the chosen value.
    pub min_eig: Option<f64>,
    /// Feasible radius below the finest grid spacing.
    pub unique: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExtensionReport {
    pub records: Vec<ExtensionRecord>,
}

/// Smallest eigenvalue of the bordered Gramian as a function of the new
/// entry.
#[derive(Debug, Clone)]
pub struct BorderedSpectrum {
    f0: f64,
    mu: Vec<f64>,
    /// `|A_k|^2` and `conj(A_k) B_k`.
    aa: Vec<f64>,
    ab: Vec<Complex64>,
    floor: f64,
    lower: f64,
    upper: f64,
}

impl BorderedSpectrum {
    pub fn new(row: &[Complex64]) -> Result<Self> {
        let n = row.len() - 1;
        let f0 = row[0].re;
        let scale = crate::gram::toeplitz_frobenius_sq(row).sqrt() + f0.abs();
        if n == 0 {
            return Ok(Self { f0, mu: vec![], aa: vec![], ab: vec![], floor: 0.0, lower: -2.0 * scale - 1.0, upper: f0 });
        }
        let m = HermitianToeplitz::new(row[..n].to_vec())?;
        let e = linalg::eig_hermitian(&m.to_dense())?;
        // Border columns: a_i = conj(f_{i+1}) and b_i = f_{n-i}, i = 0..n.
        let a: Vec<Complex64> = (0..n).map(|i| row[i + 1].conj()).collect();
        let b: Vec<Complex64> = (0..n).map(|i| row[n - i]).collect();
        let mut aa = Vec::with_capacity(n);
        let mut ab = Vec::with_capacity(n);
        for k in 0..n {
            let w = e.eigenvectors.column(k);
            let ak: Complex64 = (0..n).map(|i| w[i].conj() * a[i]).sum();
            let bk: Complex64 = (0..n).map(|i| w[i].conj() * b[i]).sum();
            aa.push(ak.norm_sqr());
            ab.push(ak.conj() * bk);
        }
        let mu = e.eigenvalues;
        let mu_scale = mu.iter().fold(f0.abs(), |acc, &x| acc.max(x.abs()));
        let floor = 1e-15 * mu_scale * n as f64;
        Ok(Self { f0, upper: mu[0], mu, aa, ab, floor, lower: -2.0 * scale - 1.0 })
    }

    pub fn f0(&self) -> f64 {
        self.f0
    }

    fn rho(&self, lam: f64) -> f64 {
        let s: f64 = self.mu.iter().zip(&self.aa).map(|(&m, &w)| w / (m - lam).max(self.floor)).sum();
        self.f0 - lam - s
    }

    fn centre_at(&self, lam: f64) -> Complex64 {
        self.mu.iter().zip(&self.ab).map(|(&m, &w)| w / (m - lam).max(self.floor)).sum()
    }

    /// Centre and radius of the feasible disk.
    pub fn feasible_disk(&self) -> (Complex64, f64) {
        let lam = 0f64.min(self.upper);
        (self.centre_at(lam), self.rho(lam))
    }

    /// Smallest eigenvalue of the Gramian extended by `z`.
    pub fn min_eig(&self, z: Complex64) -> f64 {
        let h = |lam: f64| self.rho(lam) - (z - self.centre_at(lam)).norm();
        let (mut lo, mut hi) = (self.lower, self.upper);
        if h(hi) >= 0.0 {
            return hi;
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if h(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// The value maximizing the smallest eigenvalue: `c(lambda*)` with
    /// `rho(lambda*) = 0`, or the limit at the interior spectrum edge.
    pub fn most_interior(&self) -> Complex64 {
        let (mut lo, mut hi) = (self.lower, self.upper);
        if self.rho(hi) >= 0.0 {
            return self.centre_at(hi);
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.rho(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        self.centre_at(lo)
    }
}

/// Next sample of `s` under `opts.strategy`.
pub fn extend_one(s: &SampledSignal, opts: &ExtensionOptions) -> Result<(Complex64, ExtensionRecord)> {
    opts.validate()?;
    if opts.strategy == ExtensionStrategy::PoleModel {
        let model = fit_model(s, opts)?;
        let value = model.value_at(s.len() as f64 * s.dt());
        return Ok((value, ExtensionRecord { value, area: None, radius: None, min_eig: None, unique: false }));
    }
    let mut row = s.values().to_vec();
    row[0].im = 0.0;
    next_value(&row, opts)
}

fn next_value(row: &[Complex64], opts: &ExtensionOptions) -> Result<(Complex64, ExtensionRecord)> {
    let f0 = row[0].re;
    if !(f0 > 0.0) {
        if f0 == 0.0 && row.iter().all(|v| v.norm() == 0.0) {
            let value = Complex64::new(0.0, 0.0);
            return Ok((value, ExtensionRecord { value, area: Some(0.0), radius: Some(0.0), min_eig: Some(0.0), unique: true }));
        }
        return Err(Error::Infeasible(format!("f_0 = {f0} admits no positive definite extension")));
    }
    let spec = BorderedSpectrum::new(row)?;
    let tol = psd_tol(f0);
    let (centre, radius) = spec.feasible_disk();
    let value = match opts.strategy {
        ExtensionStrategy::Central => centre,
        _ => grid_search(&spec, opts),
    };
    let min_eig = spec.min_eig(value);
    if min_eig < -tol || radius < -tol {
        return Err(Error::Infeasible(format!(
            "no PSD extension exists (best smallest eigenvalue {min_eig:.3e}); denoise the input first"
        )));
    }
    let radius = radius.max(0.0);
    let record = ExtensionRecord {
        value,
        area: Some(std::f64::consts::PI * radius * radius),
        radius: Some(radius),
        min_eig: Some(min_eig),
        unique: radius < opts.resolution(f0),
    };
    Ok((value, record))
}

/// Coarse grid over the square `|re|, |im| <= f_0`, then local grids around
/// the best point, then the analytic optimum if it is at least as good.
/// Ties go to the smaller real, then imaginary, part.
fn grid_search(spec: &BorderedSpectrum, opts: &ExtensionOptions) -> Complex64 {
    let f0 = spec.f0();
    let mut best = Complex64::new(0.0, 0.0);
    let mut best_val = f64::NEG_INFINITY;
    let consider = |z: Complex64, best: &mut Complex64, best_val: &mut f64| {
        let v = spec.min_eig(z);
        let better = v > *best_val
            || (v == *best_val && (z.re < best.re || (z.re == best.re && z.im < best.im)));
        if better {
            *best = z;
            *best_val = v;
        }
    };
    let half = (opts.grid / 2) as i64;
    let mut spacing = f0 / half as f64;
    let mut centre = Complex64::new(0.0, 0.0);
    for i in -half..=half {
        for k in -half..=half {
            consider(centre + Complex64::new(i as f64 * spacing, k as f64 * spacing), &mut best, &mut best_val);
        }
    }
    let fine = opts.refine_factor as i64;
    for _ in 0..opts.refine_levels {
        centre = best;
        spacing /= opts.refine_factor as f64;
        for i in -fine..=fine {
            for k in -fine..=fine {
                consider(centre + Complex64::new(i as f64 * spacing, k as f64 * spacing), &mut best, &mut best_val);
            }
        }
    }
    let polished = spec.most_interior();
    if spec.min_eig(polished) >= best_val {
        polished
    } else {
        best
    }
}

fn fit_model(s: &SampledSignal, opts: &ExtensionOptions) -> Result<poles::PoleModel> {
    let t = build_gramian(s);
    if t.size() < 2 {
        return invalid("pole-model extension needs at least two samples");
    }
    let r = poles::estimate_rank(&t, opts.singular_tol)?.clamp(1, t.size() - 1);
    poles::decompose_cf(&t, r, s.dt())
}

/// Appends `opts.n_points` samples one at a time.
///
/// Under `pole_model` the whole output, input span included, is sampled
/// from one fitted model so that it is positive definite by construction.
pub fn extend_many(s: &SampledSignal, opts: &ExtensionOptions) -> Result<(SampledSignal, ExtensionReport)> {
    opts.validate()?;
    if opts.n_points == 0 {
        return Ok((s.clone(), ExtensionReport::default()));
    }
    if opts.strategy == ExtensionStrategy::PoleModel {
        let model = fit_model(s, opts)?;
        let out = poles::extrapolate(&model, s.len() + opts.n_points)?;
        let records = out.values()[s.len()..]
            .iter()
            .map(|&value| ExtensionRecord { value, area: None, radius: None, min_eig: None, unique: false })
            .collect();
        return Ok((out, ExtensionReport { records }));
    }
    let mut row = s.values().to_vec();
    row[0].im = 0.0;
    let mut records = Vec::with_capacity(opts.n_points);
    for k in 0..opts.n_points {
        let (value, rec) = next_value(&row, opts).map_err(|e| match e {
            Error::Infeasible(m) => Error::Infeasible(format!("at appended point {k}: {m}")),
            other => other,
        })?;
        row.push(value);
        records.push(rec);
    }
    Ok((SampledSignal::new(s.dt(), row)?, ExtensionReport { records }))
}
