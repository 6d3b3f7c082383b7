use cvqkd_core::dsp::SlotRole;
use cvqkd_core::records::*;
use cvqkd_core::{Complex64, Error};
use proptest::prelude::*;

#[test]
fn byte_layout() {
    let r = SymbolRecord {
        global_index: 0x0102030405060708,
        frame_id: 0x0a0b0c0d,
        role: SlotRole::Signal,
        alice_symbol: Some(3),
        zeta: Some(Complex64::new(1.5, -2.0)),
        disclosed: true,
    };
    let b = r.to_bytes();
    assert_eq!(b.len(), 31);
    assert_eq!(&b[0..8], &[8, 7, 6, 5, 4, 3, 2, 1]);
    assert_eq!(&b[8..12], &[0x0d, 0x0c, 0x0b, 0x0a]);
    assert_eq!(b[12], 2);
    assert_eq!(b[13], 3);
    assert_eq!(&b[14..22], &1.5f64.to_le_bytes());
    assert_eq!(&b[22..30], &(-2.0f64).to_le_bytes());
    assert_eq!(b[30], 0b11);

    let vac = SymbolRecord { role: SlotRole::Vacuum, alice_symbol: None, zeta: None, disclosed: false, ..r };
    let b = vac.to_bytes();
    assert_eq!(b[13], 255);
    assert_eq!(b[30], 0);
    assert_eq!(SymbolRecord::from_bytes(&b).unwrap(), vac);
}

#[test]
fn malformed_streams_are_rejected() {
    assert!(matches!(read_records(&[0u8; 30][..]), Err(Error::Format(_))));
    let mut b = [0u8; 31];
    b[12] = 9;
    assert!(SymbolRecord::from_bytes(&b).is_err());
    b[12] = 2;
    b[13] = 255;
    assert!(SymbolRecord::from_bytes(&b).is_err(), "signal slots carry a symbol");
}

#[test]
fn sidecar_round_trip() {
    let meta = serde_json::json!({"seed": 5, "n_signal": 1000});
    let mut buf = Vec::new();
    write_sidecar(&mut buf, &meta).unwrap();
    let back: serde_json::Value = read_sidecar(buf.as_slice()).unwrap();
    assert_eq!(back, meta);
}

fn arb_record() -> impl Strategy<Value = SymbolRecord> {
    (any::<u64>(), any::<u32>(), 0u8..4, 0u8..4, any::<Option<(f64, f64)>>(), any::<bool>()).prop_map(
        |(idx, frame, role, sym, z, disclosed)| {
            let role = SlotRole::from_code(role).unwrap();
            SymbolRecord {
                global_index: idx,
                frame_id: frame,
                role,
                alice_symbol: (role == SlotRole::Signal).then_some(sym),
                zeta: z.map(|(a, b)| Complex64::new(a, b)),
                disclosed,
            }
        },
    )
}

proptest! {
    #[test]
    fn stream_round_trip(records in proptest::collection::vec(arb_record(), 0..50)) {
        let mut buf = Vec::new();
        write_records(&mut buf, &records).unwrap();
        prop_assert_eq!(buf.len(), records.len() * RECORD_BYTES);
        let back = read_records(buf.as_slice()).unwrap();
        prop_assert_eq!(back.len(), records.len());
        for (a, b) in back.iter().zip(&records) {
            prop_assert_eq!(a.to_bytes(), b.to_bytes());
        }
    }
}
