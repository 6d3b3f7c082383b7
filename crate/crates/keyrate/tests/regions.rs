use approx::assert_abs_diff_eq;
use cvqkd_keyrate::linalg::{frobenius, min_eig, CMat};
use cvqkd_keyrate::regions::*;
use num_complex::Complex64;
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::gamma::gamma_lr;

#[test]
fn vacuum_element_closed_form() {
    let r = region_operators(5.0, 0.0, 4, DetectorMode::Ideal).unwrap();
    for z in 0..4 {
        assert_abs_diff_eq!(r.r[z][(0, 0)].re, 0.25 * (1.0 - (-25.0f64).exp()), epsilon = 1e-12);
    }
}

#[test]
fn diagonal_elements_match_incomplete_gamma() {
    let (m_range, delta) = (2.5, 0.4);
    let r = region_operators(m_range, delta, 12, DetectorMode::Ideal).unwrap();
    for m in 0..13 {
        let s = (m + 1) as f64;
        let expected = 0.25 * (gamma_lr(s, m_range * m_range) - gamma_lr(s, delta * delta));
        assert_abs_diff_eq!(r.r[1][(m, m)].re, expected, epsilon = 1e-11);
    }
}

#[test]
fn completeness_without_discard() {
    for mode in [DetectorMode::Ideal, DetectorMode::Trusted { eta: 0.72, nu_el: 0.135 }] {
        let r = region_operators(40.0, 0.0, 10, mode).unwrap();
        let sum: CMat = r.r.iter().fold(CMat::zeros(11, 11), |acc, x| acc + x);
        let dev = frobenius(&(sum - CMat::identity(11, 11)));
        assert!(dev < 1e-9, "{mode:?}: {dev}");
    }
}

#[test]
fn operators_are_positive() {
    for (m, d) in [(5.0, 0.0), (5.0, 0.3), (1.5, 0.2), (3.0, 1.0)] {
        for mode in [DetectorMode::Ideal, DetectorMode::Trusted { eta: 0.72, nu_el: 0.135 }] {
            let r = region_operators(m, d, 6, mode).unwrap();
            for rz in r.r.iter().chain(std::iter::once(&r.r_perp)) {
                assert!(min_eig(rz).unwrap() > -1e-12);
            }
        }
    }
}

#[test]
fn four_fold_symmetry() {
    let r = region_operators(5.0, 0.2, 8, DetectorMode::Trusted { eta: 0.72, nu_el: 0.135 }).unwrap();
    let u = r.fock.phase_rotation(std::f64::consts::FRAC_PI_2);
    for z in 0..4 {
        let rotated = &u * &r.r[z] * u.adjoint();
        assert!(frobenius(&(rotated - &r.r[(z + 1) % 4])) < 1e-12);
    }
}

#[test]
fn trusted_outcome_probabilities_match_gaussian() {
    let (eta, nu) = (0.72, 0.135);
    let r = region_operators(30.0, 0.0, 25, DetectorMode::Trusted { eta, nu_el: nu }).unwrap();
    let gamma = Complex64::new(0.35, -0.2);
    let psi = r.fock.coherent(gamma);
    let rho = &psi * psi.adjoint();
    let probs = r.outcome_probabilities(&rho);
    let sigma = ((1.0 + nu) / 2.0).sqrt();
    let phi = |x: f64| Normal::standard().cdf(x / sigma);
    let (x, p) = (eta.sqrt() * gamma.re, eta.sqrt() * gamma.im);
    let expected = [phi(x) * phi(p), phi(-x) * phi(p), phi(-x) * phi(-p), phi(x) * phi(-p)];
    for z in 0..4 {
        assert_abs_diff_eq!(probs[z], expected[z], epsilon = 1e-10);
    }
    assert_abs_diff_eq!(probs[4], 0.0, epsilon = 1e-10);
}

#[test]
fn bad_ranges_are_rejected() {
    assert!(region_operators(1.0, 1.0, 3, DetectorMode::Ideal).is_err());
    assert!(region_operators(1.0, -0.1, 3, DetectorMode::Ideal).is_err());
    assert!(region_operators(5.0, 0.0, 3, DetectorMode::Trusted { eta: 0.0, nu_el: 0.1 }).is_err());
}
