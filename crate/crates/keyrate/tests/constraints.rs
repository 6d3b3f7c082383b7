use approx::assert_abs_diff_eq;
use cvqkd_core::protocol::{alice_reduced_state, qpsk_constellation, UNIFORM_PRIORS};
use cvqkd_core::stats::{honest_moments, AcceptanceEntry, AcceptanceSet, EstimatorMode, Observable};
use cvqkd_keyrate::constraints::*;
use cvqkd_keyrate::honest::honest_state;
use cvqkd_keyrate::linalg::{eigvals, partial_trace_b, trace_re, CMat};
use cvqkd_keyrate::sdp::SdpSettings;
use cvqkd_keyrate::Error;
use num_complex::Complex64;

const T: f64 = 0.4959;
const ETA: f64 = 0.720;
const NU: f64 = 0.1354;
const XI: f64 = 2.71e-3;

fn zero_width_set(beta: [Complex64; 4], n: f64, n2: f64, w: f64) -> AcceptanceSet {
    let mut entries = Vec::new();
    for j in 0..4 {
        for (obs, x) in [(Observable::N, n), (Observable::N2, n2)] {
            entries.push(AcceptanceEntry { symbol: j, observable: obs, expected: x, mu: 0.0, lo: x, hi: x });
        }
    }
    AcceptanceSet {
        version: AcceptanceSet::VERSION,
        mode: EstimatorMode::Ideal,
        beta,
        entries,
        epsilon_at: 7e-11,
        w,
        norms: (24.5, 612.5),
    }
}

#[test]
fn honest_state_is_a_state_with_the_right_marginal() {
    let c = qpsk_constellation(0.75, std::f64::consts::FRAC_PI_4).unwrap();
    let nbar = ETA * T * XI / 2.0 + NU;
    let rho = honest_state(&c.states, UNIFORM_PRIORS, T * ETA, nbar, 10).unwrap();
    assert!(eigvals(&rho).unwrap()[0] > -1e-12);
    // weight beyond the cutoff
    let tail = 1.0 - trace_re(&rho);
    assert!(tail > 0.0 && tail < 1e-7, "{tail}");
    let rho_a = alice_reduced_state(&c, UNIFORM_PRIORS).unwrap();
    let marginal = partial_trace_b(&rho, 4, 11);
    for r in 0..4 {
        for k in 0..4 {
            assert_abs_diff_eq!((marginal[(r, k)] - rho_a[(r, k)]).norm(), 0.0, epsilon = 1e-7);
        }
    }
}

#[test]
fn honest_state_lies_in_the_canonical_feasible_set() {
    let c = qpsk_constellation(0.7540, std::f64::consts::FRAC_PI_4).unwrap();
    let (n, n2) = honest_moments(T, XI, ETA, NU, EstimatorMode::Ideal);
    let beta = c.scaled((T * ETA).sqrt());
    let set = zero_width_set(beta, n, n2, 0.0);
    let rho_a = alice_reduced_state(&c, UNIFORM_PRIORS).unwrap();
    let cs = ConstraintSet::from_acceptance(&set, &rho_a, UNIFORM_PRIORS, 10, IntervalMode::Canonical).unwrap();
    let rho = honest_state(&c.states, UNIFORM_PRIORS, T * ETA, n, 10).unwrap();
    // the only violation is the weight beyond the cutoff
    let viol = cs.max_violation(&rho).unwrap();
    assert!(viol < 1e-7, "{viol}");
    for b in &cs.bounds {
        assert_abs_diff_eq!(b.value(&rho), b.lo, epsilon = 1e-7);
    }
}

#[test]
fn phase_one_finds_an_interior_point() {
    let c = qpsk_constellation(0.75, std::f64::consts::FRAC_PI_4).unwrap();
    let nbar = 0.05;
    let rho = honest_state(&c.states, UNIFORM_PRIORS, 0.36, nbar, 3).unwrap();
    let cs = ConstraintSet::around(&rho, &c.scaled(0.6), 3, 0.05).unwrap();
    let layout = SdpLayout::new(&cs);
    let x = layout.feasible_point(&SdpSettings::default()).unwrap();
    let start = x[0].dense();
    assert!(cs.max_violation(start).unwrap() < 1e-6);
    assert!(eigvals(start).unwrap()[0] > 1e-6);

    let cs_w = ConstraintSet::new(cs.fock, cs.rho_a.clone(), 1e-4, cs.bounds.clone()).unwrap();
    let x = SdpLayout::new(&cs_w).feasible_point(&SdpSettings::default()).unwrap();
    assert!(cs_w.max_violation(x[0].dense()).unwrap() < 1e-6);
}

#[test]
fn contradictory_intervals_yield_a_certificate() {
    let c = qpsk_constellation(0.75, std::f64::consts::FRAC_PI_4).unwrap();
    let rho = honest_state(&c.states, UNIFORM_PRIORS, 0.36, 0.05, 3).unwrap();
    let mut cs = ConstraintSet::around(&rho, &c.scaled(0.6), 3, 0.01).unwrap();
    // displaced photon number above the displaced squared photon number
    let v = cs.bounds[0].value(&rho);
    cs.bounds[0].lo = 10.0 * v + 0.1;
    cs.bounds[0].hi = 10.0 * v + 0.2;
    cs.bounds[1].lo = 0.0;
    cs.bounds[1].hi = 10.0 * v;
    let err = SdpLayout::new(&cs).feasible_point(&SdpSettings::default()).unwrap_err();
    assert!(matches!(err, Error::Infeasible { certificate } if certificate > 0.0), "{err:?}");
}

#[test]
fn verbatim_transcription_is_empty_for_large_mu() {
    let c = qpsk_constellation(0.75, std::f64::consts::FRAC_PI_4).unwrap();
    let mut set = zero_width_set(c.scaled(0.6), 1e-3, 7e-3, 1e-7);
    for e in &mut set.entries {
        e.mu = 1e-2;
        e.lo = e.expected - e.mu - 1e-7 * 24.5;
        e.hi = e.expected + e.mu;
    }
    let rho_a = alice_reduced_state(&c, UNIFORM_PRIORS).unwrap();
    assert!(ConstraintSet::from_acceptance(&set, &rho_a, UNIFORM_PRIORS, 3, IntervalMode::Canonical).is_ok());
    assert!(ConstraintSet::from_acceptance(&set, &rho_a, UNIFORM_PRIORS, 3, IntervalMode::Verbatim).is_err());
}

#[test]
fn invalid_sets_are_rejected() {
    let c = qpsk_constellation(0.75, std::f64::consts::FRAC_PI_4).unwrap();
    let rho = honest_state(&c.states, UNIFORM_PRIORS, 0.36, 0.05, 3).unwrap();
    let cs = ConstraintSet::around(&rho, &c.scaled(0.6), 3, 0.01).unwrap();
    assert!(ConstraintSet::new(cs.fock, cs.rho_a.clone(), 1.5, cs.bounds.clone()).is_err());
    assert!(ConstraintSet::new(cs.fock, CMat::identity(4, 4), 0.0, cs.bounds.clone()).is_err());
}
