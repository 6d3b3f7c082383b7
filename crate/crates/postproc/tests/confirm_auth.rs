use cvqkd_postproc::auth::*;
use cvqkd_postproc::bits::PackedBits;
use cvqkd_postproc::confirm::*;
use cvqkd_postproc::entropy::EntropySource;
use cvqkd_postproc::epsilon::*;
use cvqkd_postproc::gf2::gf128_mul;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_block(seed: u64, n: usize) -> PackedBits {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PackedBits::from_bits(&(0..n).map(|_| rng.random_range(0..2)).collect::<Vec<u8>>())
}

#[test]
fn hash_matches_horner_definition() {
    let b = random_block(1, 300);
    let key = 0x1234_5678_9abc_def0_0fed_cba9_8765_4321u128;
    let w = b.words();
    let chunks = [u128::from(w[0]) | u128::from(w[1]) << 64, u128::from(w[2]) | u128::from(w[3]) << 64, w[4] as u128, 300];
    let mut acc = 0u128;
    for c in chunks {
        acc = gf128_mul(acc ^ c, key);
    }
    assert_eq!(poly_hash128(&b, key), acc);
}

#[test]
fn confirmation_detects_single_bit_errors() {
    let a = random_block(2, 102_400);
    assert_eq!(confirm(&a, &a.clone(), 77).unwrap(), Confirmation::Ok);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut src = EntropySource::seeded(9, 0);
    for _ in 0..10_000 {
        let mut b = a.clone();
        let i = rng.random_range(0..b.len());
        b.set(i, 1 - b.get(i));
        assert_eq!(confirm(&a, &b, src.u128().unwrap()).unwrap(), Confirmation::Mismatch);
    }
    assert!(confirm(&a, &a.slice(0, 100), 1).is_err());
}

#[test]
fn correctness_epsilon() {
    // 8.9866e8 key rounds, two bits each, with rate-0.07 syndromes and hashes disclosed
    let blocks = (2.0 * 8.9866e8 / 102_400.0f64).floor();
    let m = blocks * (102_400.0 - 95_232.0 - 128.0);
    let e = epsilon_cor(m, 128);
    assert!((e - m / 128.0 * 2f64.powi(-128)).abs() < 1e-50);
    assert!(e < 1e-32, "{e}");
}

fn secret(seed: u64) -> Vec<u8> {
    let mut b = vec![0u8; SECRET_BYTES];
    EntropySource::seeded(seed, 1).fill(&mut b).unwrap();
    b
}

#[test]
fn tags_are_deterministic_and_detect_tampering() {
    let s = secret(4);
    let mut a = AuthContext::new(&s).unwrap();
    let mut b = AuthContext::new(&s).unwrap();
    let msg: Vec<u8> = (0..1000u32).map(|i| (i * 7) as u8).collect();
    a.absorb(3, &msg);
    b.absorb(3, &msg);
    assert_eq!(a.tag(), b.tag());
    assert_eq!(a.transcript_bits(), 8 * 1005);

    // flip one bit of the transcript
    let mut t = msg.clone();
    t[500] ^= 0x10;
    let mut c = AuthContext::new(&s).unwrap();
    c.absorb(3, &t);
    assert_ne!(a.tag(), c.tag());

    // same bytes under a different framing
    let mut d = AuthContext::new(&s).unwrap();
    d.absorb(3, &msg[..400]);
    d.absorb(3, &msg[400..]);
    assert_ne!(a.tag(), d.tag());
    let mut e = AuthContext::new(&s).unwrap();
    e.absorb(4, &msg);
    assert_ne!(a.tag(), e.tag());

    let mut f = AuthContext::new(&secret(5)).unwrap();
    f.absorb(3, &msg);
    assert_ne!(a.tag(), f.tag());
    assert!(AuthContext::new(&s[1..]).is_err());
}

#[test]
fn epsilon_composition() {
    let c = 480e6 * 8.0;
    let ea = epsilon_auth(c, TAG_BITS);
    assert!(ea < 1e-21, "{ea}");
    assert_eq!(EPSILON_Q, 2f64.powi(-100));

    let l = epsilon_ledger(&EpsilonInputs::default(), 2.0e8, 128, c, TAG_BITS);
    assert!((l.epsilon_sec - 0.8e-10).abs() < 1e-22, "{}", l.epsilon_sec);
    assert_eq!(l.epsilon_pa_imp, 2f64.powi(-50));
    assert!(l.epsilon_cor < 1e-32);
    assert_eq!(l.epsilon_imp, l.epsilon_q + l.epsilon_sec + l.epsilon_cor);
    assert_eq!(l.epsilon_auth, ea);
}

#[test]
fn entropy_sources() {
    let mut a = EntropySource::seeded(1, 2);
    let mut b = EntropySource::seeded(1, 2);
    let mut c = EntropySource::seeded(1, 3);
    let (x, y, z) = (a.u128().unwrap(), b.u128().unwrap(), c.u128().unwrap());
    assert_eq!(x, y);
    assert_ne!(x, z);
    assert_eq!(a.bits(1000).unwrap().len(), 1000);

    let path = std::env::temp_dir().join(format!("cvqkd-entropy-{}", std::process::id()));
    std::fs::write(&path, (0u8..20).collect::<Vec<u8>>()).unwrap();
    let mut f = EntropySource::from_file(&path).unwrap();
    assert_eq!(f.u128().unwrap(), u128::from_le_bytes(std::array::from_fn(|i| i as u8)));
    assert!(f.u128().is_err());
    std::fs::remove_file(path).unwrap();
}

#[test]
fn single_bit_transcript_flips_change_the_tag() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let msg: Vec<u8> = (0..256).map(|_| rng.random()).collect();
    for trial in 0..10_000u64 {
        let s = secret(100 + trial);
        let mut a = AuthContext::new(&s).unwrap();
        a.absorb(2, &msg);
        let mut t = msg.clone();
        let bit = rng.random_range(0..8 * t.len());
        t[bit / 8] ^= 1 << (bit % 8);
        let mut b = AuthContext::new(&s).unwrap();
        b.absorb(2, &t);
        assert_ne!(a.tag(), b.tag(), "trial {trial}");
    }
}
