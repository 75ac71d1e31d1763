//! C ABI over `posdef`.
//!
//! Objects are opaque heap handles created by `posdef_*_new`-style calls and
//! released with the matching `*_free`. Every fallible call returns a
//! [`PosdefStatus`]; on failure the message is kept per thread and can be
//! copied out with [`posdef_last_error`]. Panics never cross the boundary.
//!
//! Optional `double` inputs use NaN for "not given".

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use num_complex::Complex64;
use posdef::config::RunConfig;
use posdef::denoise::{denoise, DenoiseOptions, DenoiseStrategy};
use posdef::extend::{extend_many, ExtensionOptions, ExtensionStrategy};
use posdef::gram::{build_gramian, min_eigenvalue};
use posdef::models::{add_noise, dimer_greens, ssh_greens};
use posdef::poles::{decompose_cf, estimate_rank, extrapolate, Pole, PoleModel};
use posdef::spectrum::{check_positivity, damped_ft, default_grid, truncation_tail_bound};
use posdef::{Error, SampledSignal};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PosdefStatus {
    Ok = 0,
    InvalidInput = 1,
    Infeasible = 2,
    Numeric = 3,
    Parse = 4,
    Io = 5,
    NullPointer = 6,
    Panic = 7,
}

impl From<&Error> for PosdefStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidInput(_) => Self::InvalidInput,
            Error::Infeasible(_) => Self::Infeasible,
            Error::Numeric(_) => Self::Numeric,
            Error::Parse(_) => Self::Parse,
            Error::Io(_) => Self::Io,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PosdefDenoiseStrategy {
    Alternating = 0,
    Penalty = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PosdefExtensionStrategy {
    MaxMinEig = 0,
    Central = 1,
    PoleModel = 2,
}

/// Sampled signal `f_j = f(j dt)`.
pub struct PosdefSignal {
    inner: SampledSignal,
}

/// Sum of undamped oscillations `sum_r p_r exp(-i omega_r t)`.
pub struct PosdefPoleModel {
    inner: PoleModel,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PosdefDenoiseOptions {
    pub strategy: PosdefDenoiseStrategy,
    pub max_iter: usize,
    /// NaN selects `1e-8 f0`.
    pub conv_tol: f64,
    /// NaN uses the measured `f0`.
    pub f0_known: f64,
    pub penalty_sweeps: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct PosdefDenoiseReport {
    pub iterations: usize,
    pub converged: bool,
    pub raw_min_eig: f64,
    pub final_min_eig: f64,
    pub final_cost: f64,
    pub shrink_factor: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct PosdefPositivity {
    pub min_value: f64,
    pub argmin_omega: f64,
    pub fraction_below: f64,
    pub tol: f64,
    pub pass: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

/// Runs `f`, mapping errors and panics to a status and recording the message.
fn guard(f: impl FnOnce() -> Result<(), (PosdefStatus, String)>) -> PosdefStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            PosdefStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            PosdefStatus::Panic
        }
    }
}

trait IntoFfi<T> {
    fn ffi(self) -> Result<T, (PosdefStatus, String)>;
}

impl<T> IntoFfi<T> for posdef::Result<T> {
    fn ffi(self) -> Result<T, (PosdefStatus, String)> {
        self.map_err(|e| (PosdefStatus::from(&e), e.to_string()))
    }
}

fn null(what: &str) -> (PosdefStatus, String) {
    (PosdefStatus::NullPointer, format!("{what} is null"))
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (PosdefStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<T>(p: *mut T, v: T, what: &str) -> Result<(), (PosdefStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(v);
    Ok(())
}

unsafe fn slice<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], (PosdefStatus, String)> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn string<'a>(p: *const c_char, what: &str) -> Result<&'a str, (PosdefStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|e| (PosdefStatus::InvalidInput, format!("{what} is not UTF-8: {e}")))
}

/// Hands `v` to the caller as a new heap handle.
unsafe fn put<T>(p: *mut *mut T, v: T, what: &str) -> Result<(), (PosdefStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(Box::into_raw(Box::new(v)));
    Ok(())
}

fn optional(x: f64) -> Option<f64> {
    (!x.is_nan()).then_some(x)
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len`). Returns the full message length in
/// bytes, excluding the terminator.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn posdef_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Builds a signal from `n` real and imaginary parts. `im` may be null for
/// a real signal.
///
/// # Safety
/// `re` (and `im` when non-null) must hold `n` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn posdef_signal_new(dt: f64, re: *const f64, im: *const f64, n: usize, out_signal: *mut *mut PosdefSignal) -> PosdefStatus {
    guard(|| {
        let re = slice(re, n, "re")?;
        let im = if im.is_null() { None } else { Some(slice(im, n, "im")?) };
        let values = (0..n).map(|j| Complex64::new(re[j], im.map_or(0.0, |v| v[j]))).collect();
        let s = SampledSignal::new(dt, values).ffi()?;
        put(out_signal, PosdefSignal { inner: s }, "out_signal")
    })
}

/// # Safety
/// `signal` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn posdef_signal_free(signal: *mut PosdefSignal) {
    if !signal.is_null() {
        drop(Box::from_raw(signal));
    }
}

/// Number of samples; 0 for a null handle.
///
/// # Safety
/// `signal` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn posdef_signal_len(signal: *const PosdefSignal) -> usize {
    signal.as_ref().map_or(0, |s| s.inner.len())
}

/// Time step; NaN for a null handle.
///
/// # Safety
/// `signal` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn posdef_signal_dt(signal: *const PosdefSignal) -> f64 {
    signal.as_ref().map_or(f64::NAN, |s| s.inner.dt())
}

/// Copies up to `n` samples into `re` and `im` (either may be null).
///
/// # Safety
/// Non-null `re` and `im` must be writable for `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn posdef_signal_values(signal: *const PosdefSignal, re: *mut f64, im: *mut f64, n: usize) -> PosdefStatus {
    guard(|| {
        let s = as_ref(signal, "signal")?;
        for (j, v) in s.inner.values().iter().take(n).enumerate() {
            if !re.is_null() {
                *re.add(j) = v.re;
            }
            if !im.is_null() {
                *im.add(j) = v.im;
            }
        }
        Ok(())
    })
}

/// Reads a `t,re,im` CSV file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out_signal` must be valid.
#[no_mangle]
pub unsafe extern "C" fn posdef_signal_read(path: *const c_char, out_signal: *mut *mut PosdefSignal) -> PosdefStatus {
    guard(|| {
        let s = posdef::io::read_signal(Path::new(string(path, "path")?)).ffi()?;
        put(out_signal, PosdefSignal { inner: s }, "out_signal")
    })
}

/// Writes a `t,re,im` CSV file.
///
/// # Safety
/// `signal` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn posdef_signal_write(signal: *const PosdefSignal, path: *const c_char) -> PosdefStatus {
    guard(|| {
        let s = as_ref(signal, "signal")?;
        posdef::io::write_output(Some(Path::new(string(path, "path")?)), &posdef::io::format_signal(&s.inner)).ffi()
    })
}

/// Samples a model signal described by run-configuration TOML text (the
/// `[model]`, `[dimer]`, `[ssh]` and `[noise]` sections and `seed`).
///
/// # Safety
/// `config_toml` must be a NUL-terminated string; `out_signal` must be valid.
#[no_mangle]
pub unsafe extern "C" fn posdef_generate(config_toml: *const c_char, out_signal: *mut *mut PosdefSignal) -> PosdefStatus {
    guard(|| {
        let text = string(config_toml, "config_toml")?;
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| (PosdefStatus::Parse, e.to_string()))?;
        let cfg: RunConfig = toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| (PosdefStatus::Parse, e.to_string()))?;
        let grid = cfg.model.grid().ffi()?;
        let clean = match cfg.model.kind {
            posdef::config::ModelKind::Dimer => dimer_greens(&cfg.dimer, &grid),
            posdef::config::ModelKind::Ssh => ssh_greens(&cfg.ssh, &grid),
        }
        .ffi()?;
        let s = add_noise(&clean, &cfg.effective_noise()).ffi()?;
        put(out_signal, PosdefSignal { inner: s }, "out_signal")
    })
}

/// Smallest eigenvalue of the signal's Gramian.
///
/// # Safety
/// `signal` must be a live handle; `out_value` must be valid.
#[no_mangle]
pub unsafe extern "C" fn posdef_min_eigenvalue(signal: *const PosdefSignal, out_value: *mut f64) -> PosdefStatus {
    guard(|| {
        let s = as_ref(signal, "signal")?;
        out(out_value, min_eigenvalue(&build_gramian(&s.inner)).ffi()?, "out_value")
    })
}

/// Library defaults for [`posdef_denoise`].
#[no_mangle]
pub extern "C" fn posdef_denoise_options_default() -> PosdefDenoiseOptions {
    let d = DenoiseOptions::default();
    PosdefDenoiseOptions {
        strategy: PosdefDenoiseStrategy::Alternating,
        max_iter: d.max_iter,
        conv_tol: f64::NAN,
        f0_known: f64::NAN,
        penalty_sweeps: d.penalty.sweeps,
    }
}

/// Projects a signal onto positive definite signals. Non-convergence is
/// reported through `out_report.converged`, not the status. `out_report`
/// may be null.
///
/// # Safety
/// `signal` and `options` must be valid; `out_signal` must be valid.
#[no_mangle]
pub unsafe extern "C" fn posdef_denoise(
    signal: *const PosdefSignal,
    options: *const PosdefDenoiseOptions,
    out_signal: *mut *mut PosdefSignal,
    out_report: *mut PosdefDenoiseReport,
) -> PosdefStatus {
    guard(|| {
        let s = as_ref(signal, "signal")?;
        let o = as_ref(options, "options")?;
        let mut opts = DenoiseOptions {
            strategy: match o.strategy {
                PosdefDenoiseStrategy::Alternating => DenoiseStrategy::Alternating,
                PosdefDenoiseStrategy::Penalty => DenoiseStrategy::Penalty,
            },
            max_iter: o.max_iter,
            conv_tol: optional(o.conv_tol),
            f0_known: optional(o.f0_known),
            ..DenoiseOptions::default()
        };
        opts.penalty.sweeps = o.penalty_sweeps;
        let (den, rep) = denoise(&s.inner, &opts).ffi()?;
        if !out_report.is_null() {
            out_report.write(PosdefDenoiseReport {
                iterations: rep.iterations,
                converged: rep.converged,
                raw_min_eig: rep.raw_min_eig,
                final_min_eig: rep.final_min_eig,
                final_cost: rep.final_cost,
                shrink_factor: rep.shrink_factor,
            });
        }
        put(out_signal, PosdefSignal { inner: den }, "out_signal")
    })
}

/// Appends `n_points` positive definite samples. `out_all_unique` (may be
/// null) tells whether every appended value was uniquely determined.
///
/// # Safety
/// `signal` must be a live handle; `out_signal` must be valid.
#[no_mangle]
pub unsafe extern "C" fn posdef_extend(
    signal: *const PosdefSignal,
    n_points: usize,
    strategy: PosdefExtensionStrategy,
    out_signal: *mut *mut PosdefSignal,
    out_all_unique: *mut bool,
) -> PosdefStatus {
    guard(|| {
        let s = as_ref(signal, "signal")?;
        let opts = ExtensionOptions {
            n_points,
            strategy: match strategy {
                PosdefExtensionStrategy::MaxMinEig => ExtensionStrategy::MaxMinEig,
                PosdefExtensionStrategy::Central => ExtensionStrategy::Central,
                PosdefExtensionStrategy::PoleModel => ExtensionStrategy::PoleModel,
            },
            ..ExtensionOptions::default()
        };
        let (ext, rep) = extend_many(&s.inner, &opts).ffi()?;
        if !out_all_unique.is_null() {
            *out_all_unique = rep.records.iter().all(|r| r.unique);
        }
        put(out_signal, PosdefSignal { inner: ext }, "out_signal")
    })
}

/// Fits a pole model; `rank = 0` estimates the rank from the Gramian.
///
/// # Safety
/// `signal` must be a live handle; `out_model` must be valid.
#[no_mangle]
pub unsafe extern "C" fn posdef_poles_fit(signal: *const PosdefSignal, rank: usize, out_model: *mut *mut PosdefPoleModel) -> PosdefStatus {
    guard(|| {
        let s = as_ref(signal, "signal")?;
        let t = build_gramian(&s.inner);
        let r = if rank == 0 {
            estimate_rank(&t, posdef::poles::SINGULAR_TOL).ffi()?.clamp(1, t.size().saturating_sub(1).max(1))
        } else {
            rank
        };
        let m = decompose_cf(&t, r, s.inner.dt()).ffi()?;
        put(out_model, PosdefPoleModel { inner: m }, "out_model")
    })
}

/// Builds a pole model from `n` frequencies and weights.
///
/// # Safety
/// `omega` and `weight` must hold `n` doubles; `out_model` must be valid.
#[no_mangle]
pub unsafe extern "C" fn posdef_poles_new(dt: f64, omega: *const f64, weight: *const f64, n: usize, out_model: *mut *mut PosdefPoleModel) -> PosdefStatus {
    guard(|| {
        let (w, p) = (slice(omega, n, "omega")?, slice(weight, n, "weight")?);
        let m = PoleModel::new(w.iter().zip(p).map(|(&omega, &weight)| Pole { omega, weight }).collect(), dt).ffi()?;
        put(out_model, PosdefPoleModel { inner: m }, "out_model")
    })
}

/// # Safety
/// `model` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn posdef_poles_free(model: *mut PosdefPoleModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of poles; 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn posdef_poles_len(model: *const PosdefPoleModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.len())
}

/// Pole `index` in ascending frequency order.
///
/// # Safety
/// `model` must be a live handle; outputs must be valid.
#[no_mangle]
pub unsafe extern "C" fn posdef_poles_get(model: *const PosdefPoleModel, index: usize, out_omega: *mut f64, out_weight: *mut f64) -> PosdefStatus {
    guard(|| {
        let m = as_ref(model, "model")?;
        let p = m.inner.poles().get(index).ok_or_else(|| (PosdefStatus::InvalidInput, format!("pole index {index} out of range")))?;
        out(out_omega, p.omega, "out_omega")?;
        out(out_weight, p.weight, "out_weight")
    })
}

/// Samples the model at `j = 0..n_total`.
///
/// # Safety
/// `model` must be a live handle; `out_signal` must be valid.
#[no_mangle]
pub unsafe extern "C" fn posdef_poles_extrapolate(model: *const PosdefPoleModel, n_total: usize, out_signal: *mut *mut PosdefSignal) -> PosdefStatus {
    guard(|| {
        let m = as_ref(model, "model")?;
        put(out_signal, PosdefSignal { inner: extrapolate(&m.inner, n_total).ffi()? }, "out_signal")
    })
}

/// Damped Fourier transform at `n` increasing frequencies. `out_im` may be
/// null.
///
/// # Safety
/// `omegas` must hold `n` doubles and non-null outputs room for `n`.
#[no_mangle]
pub unsafe extern "C" fn posdef_spectrum(signal: *const PosdefSignal, tau: f64, omegas: *const f64, n: usize, out_re: *mut f64, out_im: *mut f64) -> PosdefStatus {
    guard(|| {
        let s = as_ref(signal, "signal")?;
        let w = slice(omegas, n, "omegas")?;
        if out_re.is_null() {
            return Err(null("out_re"));
        }
        let sp = damped_ft(&s.inner, tau, w).ffi()?;
        for (j, v) in sp.values.iter().enumerate() {
            *out_re.add(j) = v.re;
            if !out_im.is_null() {
                *out_im.add(j) = v.im;
            }
        }
        Ok(())
    })
}

/// Positivity of the damped transform on `n_points` frequencies spanning
/// `[-pi/dt, pi/dt]`. `tol` NaN selects the truncation-tail bound.
///
/// # Safety
/// `signal` must be a live handle; `out_result` must be valid.
#[no_mangle]
pub unsafe extern "C" fn posdef_check_positivity(signal: *const PosdefSignal, tau: f64, n_points: usize, tol: f64, out_result: *mut PosdefPositivity) -> PosdefStatus {
    guard(|| {
        let s = as_ref(signal, "signal")?;
        let grid = default_grid(s.inner.dt(), n_points).ffi()?;
        let sp = damped_ft(&s.inner, tau, &grid).ffi()?;
        let tol = optional(tol).unwrap_or_else(|| truncation_tail_bound(s.inner.f0(), s.inner.dt(), s.inner.len(), tau));
        let r = check_positivity(&sp, tol);
        out(
            out_result,
            PosdefPositivity { min_value: r.min_value, argmin_omega: r.argmin_omega, fraction_below: r.fraction_below, tol: r.tol, pass: r.pass },
            "out_result",
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn last_error() -> String {
        let mut buf = vec![0 as c_char; 256];
        let n = unsafe { posdef_last_error(buf.as_mut_ptr(), buf.len()) };
        let s = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap().to_string();
        assert_eq!(s.len(), n.min(255));
        s
    }

    #[test]
    fn null_pointers_are_reported() {
        let status = unsafe { posdef_signal_new(0.1, ptr::null(), ptr::null(), 3, ptr::null_mut()) };
        assert_eq!(status, PosdefStatus::NullPointer);
        assert!(last_error().contains("re is null"));
        assert_eq!(unsafe { posdef_signal_len(ptr::null()) }, 0);
        unsafe { posdef_signal_free(ptr::null_mut()) };
    }

    #[test]
    fn errors_map_to_status_codes() {
        let re = [1.0, 2.0];
        let mut s = ptr::null_mut();
        assert_eq!(unsafe { posdef_signal_new(-1.0, re.as_ptr(), ptr::null(), 2, &mut s) }, PosdefStatus::InvalidInput);
        assert!(s.is_null());
        assert_eq!(unsafe { posdef_signal_new(0.1, re.as_ptr(), ptr::null(), 2, &mut s) }, PosdefStatus::Ok);
        assert!(last_error().is_empty());
        let mut e = ptr::null_mut();
        let status = unsafe { posdef_extend(s, 1, PosdefExtensionStrategy::MaxMinEig, &mut e, ptr::null_mut()) };
        assert_eq!(status, PosdefStatus::Infeasible);
        assert!(last_error().contains("no PSD extension"));
        unsafe { posdef_signal_free(s) };
    }

    #[test]
    fn panics_are_contained() {
        assert_eq!(guard(|| panic!("boom")), PosdefStatus::Panic);
        assert_eq!(last_error(), "internal panic: boom");
    }

    #[test]
    fn error_buffer_truncates() {
        set_error("0123456789".into());
        let mut buf = [0 as c_char; 4];
        assert_eq!(unsafe { posdef_last_error(buf.as_mut_ptr(), 4) }, 10);
        assert_eq!(unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap(), "012");
        assert_eq!(unsafe { posdef_last_error(ptr::null_mut(), 0) }, 10);
    }
}
