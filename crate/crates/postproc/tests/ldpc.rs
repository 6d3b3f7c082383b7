use cvqkd_postproc::ldpc::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

fn bsc_trial(code: &LdpcCode, p: f64, seed: u64) -> (bool, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bob: Vec<u8> = (0..code.l_in()).map(|_| rng.random_range(0..2)).collect();
    let alice: Vec<u8> = bob.iter().map(|&b| b ^ u8::from(rng.random_bool(p))).collect();
    let syn = code.syndrome(&bob).unwrap();
    let out = code.decode(&alice, &syn, p, MAX_ITER).unwrap();
    // a syndrome match on the wrong word counts as a failure
    (out.success && out.bits == bob, out.iterations)
}

fn successes(code: &LdpcCode, p: f64, blocks: u64, seed: u64) -> usize {
    (0..blocks).into_par_iter().filter(|&k| bsc_trial(code, p, seed + k).0).count()
}

#[test]
fn code_dimensions() {
    let expect = [(0u8, 96_128usize, 0.06125), (1, 95_232, 0.07), (2, 94_208, 0.08)];
    for (id, l_syn, rate) in expect {
        let spec = CodeSpec::standard(id).unwrap();
        assert_eq!(spec.l_in, BLOCK_LEN);
        assert_eq!(spec.l_syn(), l_syn);
        assert!((1.0 - l_syn as f64 / BLOCK_LEN as f64 - rate).abs() < 1e-12);
    }
    assert!(CodeSpec::standard(3).is_err());
}

#[test]
fn structure_and_linearity() {
    let code = LdpcCode::standard(1).unwrap();
    assert_eq!(code.l_syn(), 95_232);
    assert_eq!(code.four_cycles(), 0);
    assert!((0..code.l_in()).all(|v| code.var_degree(v) >= 1));
    assert!((0..code.l_syn()).all(|c| code.check_vars(c).len() >= 2));

    assert!(code.syndrome(&vec![0; BLOCK_LEN]).unwrap().iter().all(|&s| s == 0));
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a: Vec<u8> = (0..BLOCK_LEN).map(|_| rng.random_range(0..2)).collect();
    let b: Vec<u8> = (0..BLOCK_LEN).map(|_| rng.random_range(0..2)).collect();
    let ab: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
    let (sa, sb, sab) = (code.syndrome(&a).unwrap(), code.syndrome(&b).unwrap(), code.syndrome(&ab).unwrap());
    assert!(sa.iter().zip(&sb).zip(&sab).all(|((x, y), z)| x ^ y == *z));

    let out = code.decode(&a, &sa, 0.3, MAX_ITER).unwrap();
    assert!(out.success && out.iterations <= 1 && out.bits == a);
    assert!(code.syndrome(&a[1..]).is_err());
    assert!(code.decode(&a, &sa, 0.5, 10).is_err());
    assert!(code.decode(&a, &sa[1..], 0.3, 10).is_err());
}

#[test]
fn construction_is_deterministic() {
    let a = LdpcCode::standard(0).unwrap();
    let b = LdpcCode::standard(0).unwrap();
    assert_eq!(a.edges(), b.edges());
    assert!((0..a.l_syn()).all(|c| a.check_vars(c) == b.check_vars(c)));
    assert_eq!(a.four_cycles(), 0);
}

#[test]
fn decodes_below_threshold() {
    let code = LdpcCode::standard(1).unwrap();
    let p = code.spec.threshold - 0.01;
    assert!(successes(&code, p, 20, 1000) >= 19);
}

#[test]
fn fails_above_threshold() {
    let code = LdpcCode::standard(1).unwrap();
    let p = code.spec.threshold + 0.02;
    assert!(successes(&code, p, 4, 2000) <= 2);
}

#[test]
fn other_codes_decode_below_threshold() {
    for id in [0u8, 2] {
        let code = LdpcCode::standard(id).unwrap();
        assert_eq!(code.four_cycles(), 0);
        let p = code.spec.threshold - 0.01;
        assert!(successes(&code, p, 6, 3000 + 100 * u64::from(id)) >= 6, "code {id}");
    }
}
