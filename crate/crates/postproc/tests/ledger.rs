use cvqkd_postproc::ledger::*;
use cvqkd_postproc::Error;

fn ledger(statuses: &[BlockStatus]) -> BlockLedger {
    let mut l = BlockLedger::new(102_400, 95_232);
    for (k, s) in statuses.iter().enumerate() {
        let i = l.push(StreamId::X, k);
        l.blocks[i].status = *s;
    }
    l
}

#[test]
fn leak_per_block() {
    let l = ledger(&[BlockStatus::Confirmed]);
    assert_eq!(l.leak_accounting().unwrap().leak_ec, 95_232 + 128);
    let l = ledger(&[BlockStatus::Disclosed]);
    assert_eq!(l.leak_accounting().unwrap().leak_ec, 102_400);
    assert_eq!(l.failure_penalty(), 7_040);
}

#[test]
fn unresolved_blocks_are_errors() {
    for s in [BlockStatus::Pending, BlockStatus::Corrected, BlockStatus::Failed] {
        let l = ledger(&[BlockStatus::Confirmed, s]);
        assert!(matches!(l.leak_accounting(), Err(Error::UnresolvedBlock(1))));
    }
}

#[test]
fn frame_error_rate_and_conservation() {
    let mut st = vec![BlockStatus::Confirmed; 17];
    st.extend([BlockStatus::Disclosed; 3]);
    let l = ledger(&st);
    let s = l.leak_accounting().unwrap();
    assert_eq!(s.blocks, 20);
    assert_eq!(s.failed, 3);
    assert!((s.fer - 0.15).abs() < 1e-15);
    assert_eq!(s.leak_ec, 17 * (95_232 + 128) + 3 * 102_400);
    assert_eq!(s.leak_ec + s.retained_bits, s.raw_bits);
    assert_eq!(s.raw_bits, 20 * 102_400);
    for b in &l.blocks {
        let d = l.disclosed_bits(b.status).unwrap();
        assert!(d <= l.l_in as u64);
    }
}

#[test]
fn efficiency_definitions() {
    assert_eq!(binary_entropy(0.5), 1.0);
    assert_eq!(binary_entropy(0.0), 0.0);
    let e = EfficiencyReport::new(0.07, 0.3377, 0.3377);
    assert_eq!(e.x_stream, e.p_stream);
    assert_eq!(e.averaged, e.best_stream);
    // h(0.11) ~ 0.5
    assert!((efficiency(0.5, 0.110028) - 1.0).abs() < 1e-4);
    let e = EfficiencyReport::new(0.07, 0.33, 0.34);
    assert!(e.best_stream == e.x_stream && e.p_stream > e.averaged && e.averaged > e.x_stream);
}
