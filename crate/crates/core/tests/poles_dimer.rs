use posdef::gram::build_gramian;
use posdef::models::{DimerModel, DimerSpec, TimeGrid};
use posdef::poles::{decompose_cf_with_diagnostics, estimate_rank, extrapolate, SINGULAR_TOL};

#[test]
fn dimer_poles_match_lehmann_representation() {
    let model = DimerModel::new(DimerSpec::default()).unwrap();
    let s = model.greens(&TimeGrid::new(0.1, 101).unwrap()).unwrap();
    let t = build_gramian(&s);
    let expected = model.lehmann_poles(1e-12);
    let r = estimate_rank(&t, SINGULAR_TOL).unwrap();
    assert_eq!(r, expected.len());

    let d = decompose_cf_with_diagnostics(&t, r, 0.1).unwrap();
    eprintln!("{:?}", d.candidates);
    let got = d.model.poles();
    assert_eq!(got.len(), expected.len());
    for (p, &(om, w)) in got.iter().zip(&expected) {
        eprintln!("{:.12} {:.12} | {:.3e} {:.3e}", p.omega, p.weight, p.omega - om, p.weight - w);
        assert!((p.omega - om).abs() < 1e-6);
        assert!((p.weight - w).abs() < 1e-6);
    }
    assert!((d.model.total_weight() - s.f0()).abs() < 1e-8);
}

#[test]
fn dimer_model_extrapolates_to_long_times() {
    let model = DimerModel::new(DimerSpec::default()).unwrap();
    let s = model.greens(&TimeGrid::new(0.1, 101).unwrap()).unwrap();
    let t = build_gramian(&s);
    let r = estimate_rank(&t, SINGULAR_TOL).unwrap();
    let fit = posdef::poles::decompose_cf(&t, r, 0.1).unwrap();
    let long = extrapolate(&fit, 1001).unwrap();
    let exact = model.greens_at(100.0);
    assert!((long.values()[1000] - exact).norm() <= 1e-6 * s.f0());
}
