//! Results must not depend on the working precision or on re-running.

mod common;

use pclass::case::{self, CaseSpec};
use pclass::local::make_base;

fn sample() -> Vec<CaseSpec> {
    let all = case::read_corpus(&common::corpus_path()).unwrap();
    // every seventh case keeps the run short while touching each (ℓ, p)
    all.into_iter().step_by(7).collect()
}

#[test]
fn doubling_precision_leaves_reports_unchanged() {
    for spec in sample() {
        let lo = case::analyze(&spec, 0, Some(32)).unwrap();
        let hi = case::analyze(&spec, 0, Some(64)).unwrap();
        assert_eq!(lo.invariants, hi.invariants, "{spec:?}");
        assert_eq!(lo.multiplicities, hi.multiplicities, "{spec:?}");
        assert_eq!(lo.checks, hi.checks, "{spec:?}");
        assert_eq!(lo.shape, hi.shape, "{spec:?}");
        assert!(lo.passed() && hi.passed(), "{spec:?}");
    }
}

#[test]
fn pth_power_tests_are_stable_in_precision() {
    for &(ell, p) in &[(7u64, 3u64), (2, 2), (3, 3), (11, 5)] {
        let lo = make_base(ell, p, 16).unwrap();
        let hi = make_base(ell, p, 48).unwrap();
        for n in (-60i64..60).filter(|&n| n != 0) {
            let a = lo.classes().is_pth_power(lo.field(), &lo.field().from_int(n)).unwrap();
            let b = hi.classes().is_pth_power(hi.field(), &hi.field().from_int(n)).unwrap();
            assert_eq!(a, b, "ℓ={ell} p={p} n={n}");
        }
    }
}

#[test]
fn reports_are_byte_identical_across_runs() {
    for spec in sample().into_iter().take(5) {
        let a = case::analyze(&spec, 7, None).unwrap().to_json();
        let b = case::analyze(&spec, 7, None).unwrap().to_json();
        assert_eq!(a, b, "{spec:?}");
    }
    let q = CaseSpec::quadratic("-3");
    assert_eq!(case::analyze(&q, 1, None).unwrap().to_json(), case::analyze(&q, 1, None).unwrap().to_json());
}

#[test]
fn low_starting_precision_is_raised_automatically() {
    let spec = CaseSpec::local(3, 3, "u*zeta");
    let r = case::analyze(&spec, 0, Some(8)).unwrap();
    assert!(r.passed());
    assert!(r.timing.precision_attempts.len() > 1, "{:?}", r.timing.precision_attempts);
    let reference = case::analyze(&spec, 0, Some(48)).unwrap();
    assert_eq!(r.multiplicities, reference.multiplicities);
}
