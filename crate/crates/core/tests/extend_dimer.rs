use std::time::Instant;

use posdef::extend::{extend_many, extend_one, ExtensionOptions, ExtensionStrategy};
use posdef::gram::{build_gramian, min_eigenvalue, psd_tol};
use posdef::models::{dimer_greens, DimerSpec, TimeGrid};
use posdef::poles::{estimate_rank, SINGULAR_TOL};

fn exact() -> posdef::SampledSignal {
    dimer_greens(&DimerSpec::default(), &TimeGrid::new(0.1, 101).unwrap()).unwrap()
}

#[test]
fn next_point_matches_oracle() {
    let full = exact();
    let (z, rec) = extend_one(&full.truncated(21), &ExtensionOptions::default()).unwrap();
    assert!((z - full.values()[21]).norm() <= 1e-3 * full.f0());
    assert!(rec.unique);
}

#[test]
fn extends_from_t2_to_t10() {
    let full = exact();
    let f0 = full.f0();
    for strategy in [ExtensionStrategy::MaxMinEig, ExtensionStrategy::Central, ExtensionStrategy::PoleModel] {
        let opts = ExtensionOptions { n_points: 80, strategy, ..Default::default() };
        let start = Instant::now();
        let (out, rep) = extend_many(&full.truncated(21), &opts).unwrap();
        let dev = out.max_abs_diff(&full).unwrap();
        eprintln!("{strategy:?}: max deviation {:.3e} f0, {:?}", dev / f0, start.elapsed());
        assert_eq!(rep.records.len(), 80);
        assert!(dev <= 1e-2 * f0);
        assert!(out.values()[21..].iter().all(|v| v.norm() <= f0 * (1.0 + 1e-12)));
        assert!(min_eigenvalue(&build_gramian(&out)).unwrap() >= -psd_tol(f0));
    }
}

#[test]
fn rank_is_preserved() {
    let full = exact();
    let short = full.truncated(21);
    let r = estimate_rank(&build_gramian(&short), SINGULAR_TOL).unwrap();
    let opts = ExtensionOptions { n_points: 30, ..Default::default() };
    let (out, _) = extend_many(&short, &opts).unwrap();
    assert_eq!(estimate_rank(&build_gramian(&out), SINGULAR_TOL).unwrap(), r);
}

#[test]
fn extension_is_incremental() {
    let short = exact().truncated(21);
    let k = ExtensionOptions { n_points: 5, ..Default::default() };
    let m = ExtensionOptions { n_points: 7, ..Default::default() };
    let km = ExtensionOptions { n_points: 12, ..Default::default() };
    let (a, _) = extend_many(&short, &k).unwrap();
    let (b, _) = extend_many(&a, &m).unwrap();
    let (c, _) = extend_many(&short, &km).unwrap();
    assert_eq!(b, c);
}
