use approx::assert_abs_diff_eq;
use cvqkd_keyrate::linalg::{eigvals, CMat};
use cvqkd_keyrate::sdp::*;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    let a = CMat::from_fn(n, n, |_, _| {
        Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    (&a + a.adjoint()).scale(0.5)
}

fn trace_term(block: usize, n: usize) -> Term {
    Term { block, entries: (0..n).map(|i| (i, i, Complex64::new(1.0, 0.0))).collect() }
}

#[test]
fn minimum_eigenvalue() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in [2, 5, 12] {
        let c = random_hermitian(n, &mut rng);
        let p = SdpProblem {
            kinds: vec![BlockKind::Dense(n)],
            cost: vec![Block::Dense(c.clone())],
            constraints: vec![LinearConstraint { terms: vec![trace_term(0, n)], rhs: 1.0 }],
        };
        let sol = solve(&p, &SdpSettings::default()).unwrap();
        assert!(sol.converged);
        let lam = eigvals(&c).unwrap()[0];
        assert_abs_diff_eq!(sol.primal_objective, lam, epsilon = 1e-7);
        assert_abs_diff_eq!(sol.dual_objective, lam, epsilon = 1e-7);
        assert!(sol.relative_gap() < 1e-8);
    }
}

#[test]
fn linear_program() {
    // min x0 + 2 x1 + 3 x2 s.t. x0 + x1 + x2 = 1, x1 - x2 = 0.2
    let p = SdpProblem {
        kinds: vec![BlockKind::Diag(3)],
        cost: vec![Block::Diag(vec![1.0, 2.0, 3.0])],
        constraints: vec![
            LinearConstraint { terms: vec![Term::diag(0, &[(0, 1.0), (1, 1.0), (2, 1.0)])], rhs: 1.0 },
            LinearConstraint { terms: vec![Term::diag(0, &[(1, 1.0), (2, -1.0)])], rhs: 0.2 },
        ],
    };
    let sol = solve(&p, &SdpSettings::default()).unwrap();
    assert!(sol.converged);
    assert_abs_diff_eq!(sol.primal_objective, 1.2, epsilon = 1e-8);
    let x = sol.x[0].diag();
    assert_abs_diff_eq!(x[1], 0.2, epsilon = 1e-7);
}

#[test]
fn coupled_blocks_with_complex_constraints() {
    // min <C, X> + s s.t. Tr X = 1, Re X_01 + s = 0.3, Im X_01 = -0.1
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let c = random_hermitian(3, &mut rng);
    let half = Complex64::new(0.5, 0.0);
    let ihalf = Complex64::new(0.0, 0.5);
    let p = SdpProblem {
        kinds: vec![BlockKind::Dense(3), BlockKind::Diag(1)],
        cost: vec![Block::Dense(c.clone()), Block::Diag(vec![1.0])],
        constraints: vec![
            LinearConstraint { terms: vec![trace_term(0, 3)], rhs: 1.0 },
            LinearConstraint {
                terms: vec![Term { block: 0, entries: vec![(0, 1, half), (1, 0, half)] }, Term::diag(1, &[(0, 1.0)])],
                rhs: 0.3,
            },
            LinearConstraint { terms: vec![Term { block: 0, entries: vec![(0, 1, -ihalf), (1, 0, ihalf)] }], rhs: -0.1 },
        ],
    };
    let sol = solve(&p, &SdpSettings::default()).unwrap();
    assert!(sol.converged, "{sol:?}");
    let x = sol.x[0].dense();
    assert_abs_diff_eq!(x[(1, 0)].im, -0.1, epsilon = 1e-7);
    assert_abs_diff_eq!(x[(0, 1)].re + sol.x[1].diag()[0], 0.3, epsilon = 1e-7);
    assert!(eigvals(x).unwrap()[0] > -1e-8);
    assert!(sol.relative_gap() < 1e-8);
    // dual feasibility of the returned certificate
    let s = p.adjoint(&sol.y);
    let zc = c - s[0].dense();
    assert!(eigvals(&zc).unwrap()[0] > -1e-7);
}

#[test]
fn malformed_problems_are_rejected() {
    let p = SdpProblem {
        kinds: vec![BlockKind::Diag(2)],
        cost: vec![Block::Diag(vec![1.0, 1.0])],
        constraints: vec![LinearConstraint {
            terms: vec![Term { block: 0, entries: vec![(0, 1, Complex64::new(1.0, 0.0))] }],
            rhs: 1.0,
        }],
    };
    assert!(solve(&p, &SdpSettings::default()).is_err());
}
