use approx::assert_relative_eq;
use cvqkd_keyrate::finite::*;

#[test]
fn delta_w_examples() {
    assert_eq!(delta_w(0.0, 4).unwrap(), 0.0);
    let v = delta_w(1e-7, 4).unwrap();
    assert!((v - 4.765e-3).abs() < 5e-6, "{v}");
    let mut last = 0.0;
    for k in 1..=40 {
        let w = 1e-9 * 1.6f64.powi(k);
        let d = delta_w(w.min(1.0), 4).unwrap();
        assert!(d > last);
        last = d;
    }
    assert!(delta_w(-1e-3, 4).is_err());
    assert!(delta_w(0.5, 0).is_err());
}

#[test]
fn delta_aep_examples() {
    let n = 8.9866e8;
    let v = delta_aep(7e-11, 4, n).unwrap();
    assert!((v - 1.104e-3).abs() < 1e-6, "{v}");
    assert_relative_eq!(delta_aep(7e-11, 4, 4.0 * n).unwrap(), v / 2.0, max_relative = 1e-14);
    // closed form with log2(7) and log2(2 / eps)
    let oracle = 2.0 * 7f64.log2() * ((2.0 / 7e-11f64).log2() / n).sqrt();
    assert_relative_eq!(v, oracle, max_relative = 1e-14);
    assert!(delta_aep(0.0, 4, n).is_err());
    assert!(delta_aep(7e-11, 4, 0.0).is_err());
}

#[test]
fn epsilon_budget() {
    let e = EpsilonBudget::standard();
    assert_relative_eq!(e.total(), 1e-10, max_relative = 1e-12);
    // implementation PA parameter from a 100-bit subtraction
    let pa = pa_epsilon_for_bits(100.0);
    assert_eq!(pa, 2f64.powi(-50));
    assert_relative_eq!(e.secrecy(pa), 0.8e-10, max_relative = 1e-4);
    assert_relative_eq!(pa_bits_for_epsilon(pa), 100.0, max_relative = 1e-14);
    assert!(EpsilonBudget { et: 0.0, ..e }.validate().is_err());
}

#[test]
fn key_length_examples() {
    let corr = Corrections { delta_aep: 0.0, delta_w: 0.0 };
    let pa = pa_epsilon_for_bits(100.0);
    let r = key_length(2.0, corr, 0.0, EpsilonBudget::standard(), pa, 1e6, 1e6).unwrap();
    assert_eq!(r.l, 2_000_000 - 100);
    assert!(!r.abort);

    let corr = Corrections::new(7e-11, 7.5e5, 1e-7).unwrap();
    let leak = 7.5e5 * leak_per_symbol_from_efficiency(0.95, 0.3382, 0.3382);
    let r = key_length(1.95, corr, leak, EpsilonBudget::standard(), pa, 7.5e5, 1e6).unwrap();
    // the per-symbol form times N reproduces the unfloored bound
    assert_relative_eq!(r.rate_per_symbol_form * 1e6, r.bound_bits, max_relative = 1e-12);
    assert_eq!(r.l, r.bound_bits.floor() as u64);

    let r = key_length(0.5, corr, leak, EpsilonBudget::standard(), pa, 7.5e5, 1e6).unwrap();
    assert!(r.abort);
    assert_eq!(r.l, 0);
    assert_eq!(r.rate, 0.0);

    assert!(key_length(f64::NAN, corr, 0.0, EpsilonBudget::standard(), pa, 1.0, 1.0).is_err());
    assert!(key_length(1.0, corr, 0.0, EpsilonBudget::standard(), pa, 2.0, 1.0).is_err());
}

#[test]
fn leak_examples() {
    assert_relative_eq!(leak_per_symbol_from_efficiency(1.0, 0.0, 0.0), 0.0);
    assert_relative_eq!(leak_per_symbol_from_efficiency(0.9, 0.5, 0.5), 2.0);
    let c = 1.0 - binary_entropy(0.3382);
    assert_relative_eq!(leak_per_symbol_from_efficiency(0.95, 0.3382, 0.3382), 2.0 * (1.0 - 0.95 * c), max_relative = 1e-14);
    assert_relative_eq!(binary_entropy(0.5), 1.0);
    assert_eq!(binary_entropy(0.0), 0.0);
}

#[test]
fn report_serialises() {
    let corr = Corrections::new(7e-11, 1e6, 1e-7).unwrap();
    let r = key_length(1.99, corr, 1e5, EpsilonBudget::standard(), pa_epsilon_for_bits(100.0), 1e6, 1.2e6).unwrap();
    let s = serde_json::to_string(&r).unwrap();
    let back: KeyLengthReport = serde_json::from_str(&s).unwrap();
    assert_eq!(back.l, r.l);
    assert_eq!(back.abort, r.abort);
}
