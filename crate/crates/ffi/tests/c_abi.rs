use std::ffi::CString;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use posdef_ffi::*;

fn check(status: PosdefStatus) {
    if status != PosdefStatus::Ok {
        let mut buf = vec![0 as std::ffi::c_char; 512];
        unsafe { posdef_last_error(buf.as_mut_ptr(), buf.len()) };
        let msg = unsafe { std::ffi::CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned();
        panic!("{status:?}: {msg}");
    }
}

#[test]
fn dimer_workflow_through_the_c_abi() {
    let cfg = CString::new("seed = 3\n[model]\nn = 61\n[noise]\nsigma = 0.05\n").unwrap();
    let mut noisy = ptr::null_mut();
    check(unsafe { posdef_generate(cfg.as_ptr(), &mut noisy) });
    assert_eq!(unsafe { posdef_signal_len(noisy) }, 61);
    assert!((unsafe { posdef_signal_dt(noisy) } - 0.1).abs() < 1e-15);
    let mut lmin = 0.0;
    check(unsafe { posdef_min_eigenvalue(noisy, &mut lmin) });
    assert!(lmin < 0.0);

    let mut opts = posdef_denoise_options_default();
    opts.f0_known = 0.289444;
    let mut den = ptr::null_mut();
    let mut rep = PosdefDenoiseReport::default();
    check(unsafe { posdef_denoise(noisy, &opts, &mut den, &mut rep) });
    assert!(rep.converged && rep.final_min_eig >= -1e-10);
    let mut first = [0.0];
    check(unsafe { posdef_signal_values(den, first.as_mut_ptr(), ptr::null_mut(), 1) });
    assert_eq!(first[0], 0.289444);

    let mut ext = ptr::null_mut();
    check(unsafe { posdef_extend(den, 5, PosdefExtensionStrategy::MaxMinEig, &mut ext, ptr::null_mut()) });
    assert_eq!(unsafe { posdef_signal_len(ext) }, 66);

    let mut pos = PosdefPositivity::default();
    check(unsafe { posdef_check_positivity(ext, 5.0, 128, f64::NAN, &mut pos) });
    assert!(pos.tol > 0.0);

    for s in [noisy, den, ext] {
        unsafe { posdef_signal_free(s) };
    }
}

#[test]
fn pole_model_round_trip() {
    let (w, p) = ([-1.0, 0.5], [0.25, 0.75]);
    let mut m = ptr::null_mut();
    check(unsafe { posdef_poles_new(0.2, w.as_ptr(), p.as_ptr(), 2, &mut m) });
    let mut s = ptr::null_mut();
    check(unsafe { posdef_poles_extrapolate(m, 20, &mut s) });
    let mut fit = ptr::null_mut();
    check(unsafe { posdef_poles_fit(s, 0, &mut fit) });
    assert_eq!(unsafe { posdef_poles_len(fit) }, 2);
    for (i, (&wi, &pi)) in w.iter().zip(&p).enumerate() {
        let (mut a, mut b) = (0.0, 0.0);
        check(unsafe { posdef_poles_get(fit, i, &mut a, &mut b) });
        assert!((a - wi).abs() < 1e-8 && (b - pi).abs() < 1e-8);
    }
    let (mut a, mut b) = (0.0, 0.0);
    assert_eq!(unsafe { posdef_poles_get(fit, 2, &mut a, &mut b) }, PosdefStatus::InvalidInput);

    let omegas = [-1.0, 0.0, 0.5];
    let mut re = [0.0; 3];
    check(unsafe { posdef_spectrum(s, 3.0, omegas.as_ptr(), 3, re.as_mut_ptr(), ptr::null_mut()) });
    assert!(re[2] > re[1]);
    unsafe {
        posdef_poles_free(m);
        posdef_poles_free(fit);
        posdef_signal_free(s);
    }
}

#[test]
fn file_round_trip() {
    let d = tempfile::tempdir().unwrap();
    let path = CString::new(d.path().join("s.csv").to_str().unwrap()).unwrap();
    let (re, im) = ([1.0, 0.5, 0.25], [0.0, -0.1, 0.3]);
    let mut s = ptr::null_mut();
    check(unsafe { posdef_signal_new(0.5, re.as_ptr(), im.as_ptr(), 3, &mut s) });
    check(unsafe { posdef_signal_write(s, path.as_ptr()) });
    let mut back = ptr::null_mut();
    check(unsafe { posdef_signal_read(path.as_ptr(), &mut back) });
    let (mut r2, mut i2) = ([0.0; 3], [0.0; 3]);
    check(unsafe { posdef_signal_values(back, r2.as_mut_ptr(), i2.as_mut_ptr(), 3) });
    assert_eq!((r2, i2), (re, im));
    let missing = CString::new(d.path().join("nope.csv").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { posdef_signal_read(missing.as_ptr(), &mut back) }, PosdefStatus::Io);
    let bad = CString::new("[model]\nkind = \"triangle\"\n").unwrap();
    assert_eq!(unsafe { posdef_generate(bad.as_ptr(), &mut back) }, PosdefStatus::Parse);
    unsafe {
        posdef_signal_free(s);
        posdef_signal_free(back);
    }
}

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

const C_PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "posdef.h"

int main(void) {
    double re[4] = {1.0, 1.0, 1.0, 1.0};
    PosdefSignal *s = NULL, *e = NULL;
    if (posdef_signal_new(0.1, re, NULL, 4, &s) != POSDEF_STATUS_OK) return 1;
    bool unique = false;
    if (posdef_extend(s, 3, POSDEF_EXTENSION_STRATEGY_MAX_MIN_EIG, &e, &unique) != POSDEF_STATUS_OK) return 2;
    double out[7];
    posdef_signal_values(e, out, NULL, 7);
    for (int i = 0; i < 7; i++) if (fabs(out[i] - 1.0) > 1e-9) return 3;
    if (!unique) return 4;
    PosdefSignal *bad = NULL;
    if (posdef_signal_new(-1.0, re, NULL, 4, &bad) != POSDEF_STATUS_INVALID_INPUT) return 5;
    char msg[128];
    if (posdef_last_error(msg, sizeof msg) == 0) return 6;
    posdef_signal_free(s);
    posdef_signal_free(e);
    printf("ok %s\n", msg);
    return 0;
}
"#;

fn cc() -> Option<String> {
    ["cc", "gcc", "clang"].into_iter().find(|c| Command::new(c).arg("--version").output().is_ok()).map(String::from)
}

#[test]
fn header_compiles_as_c() {
    let Some(cc) = cc() else {
        eprintln!("no C compiler found; header check skipped");
        return;
    };
    let d = tempfile::tempdir().unwrap();
    let src = d.path().join("main.c");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let out = Command::new(&cc).args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"]).arg(crate_dir().join("include")).arg(&src).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

/// Static library built alongside this test, if cargo produced one.
fn static_lib() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    let profile_dir = exe.parent()?.parent()?;
    let lib = profile_dir.join("libposdef_ffi.a");
    lib.exists().then_some(lib)
}

#[test]
fn c_program_links_and_runs() {
    let (Some(cc), Some(lib)) = (cc(), static_lib()) else {
        eprintln!("C compiler or static library unavailable; link check skipped");
        return;
    };
    let d = tempfile::tempdir().unwrap();
    let src = d.path().join("main.c");
    let exe = d.path().join("main");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let out = Command::new(&cc)
        .args(["-std=c99", "-I"])
        .arg(crate_dir().join("include"))
        .arg(&src)
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(Path::new(&exe)).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("ok invalid input"));
}
