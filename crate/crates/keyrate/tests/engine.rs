use cvqkd_core::protocol::qpsk_constellation;
use cvqkd_core::stats::*;
use cvqkd_keyrate::engine::*;
use cvqkd_keyrate::finite::EpsilonBudget;
use cvqkd_keyrate::regions::DetectorMode;
use cvqkd_keyrate::solver::FwSettings;

fn toy_set(w: f64, n_c: usize) -> (AcceptanceSet, [cvqkd_core::Complex64; 4]) {
    let c = qpsk_constellation(0.75, std::f64::consts::FRAC_PI_4).unwrap();
    let t: f64 = 0.5;
    let (n1, n2) = honest_moments(t, 0.01, 1.0, 0.0, EstimatorMode::Ideal);
    let stats = ObservableStats {
        mode: EstimatorMode::Ideal,
        beta: c.states.map(|s| s * t.sqrt()),
        mean_n_beta: [n1; 4],
        mean_n2_beta: [n2; 4],
        m: [250_000_000; 4],
        ber_x: 0.2,
        ber_p: 0.2,
        i_t: 0.0,
    };
    let p = EnergyTestParams::with_threshold(5.0, n_c, w, 1_000_000_000, 1e-8, 1e-11);
    (build_acceptance_set(&stats, &p, 7e-11, [0.0, 0.0], 5.0).unwrap(), c.states)
}

fn toy_config(n_c: usize) -> KeyRateConfig {
    KeyRateConfig { n_c, fw: FwSettings { tol: 1e-4, max_iter: 200, ..Default::default() }, ..Default::default() }
}

#[test]
fn zero_weight_toy_instance() {
    let (set, states) = toy_set(0.0, 3);
    let input = KeyRateInput { acceptance: &set, states, n: 3e9, n_total: 4e9, ber_x: 0.2, ber_p: 0.2 };
    let r = solve_key_rate(&input, &toy_config(3)).unwrap();
    assert_eq!(r.delta_w, 0.0);
    let s = r.solver.unwrap();
    assert!(s.lower <= s.upper);
    assert_eq!(r.entropy_lb, s.lower);
    assert!(s.upper - s.lower < 1e-3, "{s:?}");
    assert_eq!(r.epsilon, EpsilonBudget::standard());
    assert!((r.rate - r.l as f64 / 4e9).abs() < 1e-15);
}

#[test]
fn fixed_leak_is_used_verbatim() {
    let (set, states) = toy_set(1e-7, 2);
    let input = KeyRateInput { acceptance: &set, states, n: 3e9, n_total: 4e9, ber_x: 0.2, ber_p: 0.2 };
    let cfg = KeyRateConfig { leak: LeakModel::Bits { leak_ec: 12345.0 }, ..toy_config(2) };
    let r = solve_key_rate(&input, &cfg).unwrap();
    assert_eq!(r.leak_ec, 12345.0);
    assert!(r.delta_w > 4.7e-3);
}

#[test]
fn mismatched_modes_are_rejected() {
    let (set, states) = toy_set(0.0, 2);
    let input = KeyRateInput { acceptance: &set, states, n: 1e6, n_total: 1e6, ber_x: 0.2, ber_p: 0.2 };
    let cfg = KeyRateConfig { detector: DetectorMode::Trusted { eta: 0.72, nu_el: 0.135 }, ..toy_config(2) };
    assert!(solve_key_rate(&input, &cfg).is_err());
}

#[test]
fn config_round_trips_through_json() {
    let cfg = KeyRateConfig { detector: DetectorMode::Trusted { eta: 0.72, nu_el: 0.135 }, ..Default::default() };
    let s = serde_json::to_string(&cfg).unwrap();
    let back: KeyRateConfig = serde_json::from_str(&s).unwrap();
    assert_eq!(back, cfg);
}
