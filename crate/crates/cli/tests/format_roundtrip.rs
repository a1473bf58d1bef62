//! Property and fixture tests for the portable grid file format.
//!
//! The encoder must be a bijection onto its accepted inputs: every grid
//! round-trips bit-exactly (struct equality AND byte equality), and every
//! corruption mode is rejected with the matching error, never a panic or a
//! silently wrong grid.

use emfield_cli::format::{FormatError, Payload, PortableGrid};
use proptest::prelude::*;

fn arb_payload(cells: usize) -> impl Strategy<Value = Payload> {
    let real = proptest::collection::vec(any::<f32>(), cells).prop_map(Payload::F32);
    let complex =
        proptest::collection::vec(any::<[f32; 2]>(), cells).prop_map(Payload::C64);
    prop_oneof![real, complex]
}

fn arb_grid() -> impl Strategy<Value = PortableGrid> {
    (1u32..=24, 1u32..=24)
        .prop_flat_map(|(h, w)| {
            (Just(h), Just(w), arb_payload((h * w) as usize))
        })
        .prop_map(|(height, width, payload)| {
            PortableGrid::new(height, width, payload).expect("cell count matches dims")
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    /// Encode → decode is the identity, on the struct and on the bytes.
    /// NaN payloads are included: the format stores raw bit patterns, so
    /// comparison happens on re-encoded bytes, which must match exactly.
    #[test]
    fn encode_decode_round_trips_bit_exactly(grid in arb_grid()) {
        let bytes = grid.encode();
        let back = PortableGrid::decode(&bytes).expect("decode own encoding");
        prop_assert_eq!(back.height(), grid.height());
        prop_assert_eq!(back.width(), grid.width());
        prop_assert_eq!(back.encode(), bytes);
    }

    /// Flipping any single payload byte must be caught by the checksum.
    #[test]
    fn any_payload_corruption_is_detected(grid in arb_grid(), flip in any::<u8>()) {
        let mut bytes = grid.encode();
        // Byte 17 is the first payload byte; the last 4 bytes are the CRC.
        let payload_len = bytes.len() - 17 - 4;
        let idx = 17 + (flip as usize) % payload_len;
        bytes[idx] ^= 0x01;
        let caught = matches!(
            PortableGrid::decode(&bytes),
            Err(FormatError::CrcMismatch { .. })
        );
        prop_assert!(caught, "payload corruption at byte {} escaped the checksum", idx);
    }
}

#[test]
fn corrupted_checksum_is_rejected() {
    let grid = PortableGrid::new(3, 4, Payload::F32(vec![1.5; 12])).unwrap();
    let mut bytes = grid.encode();
    let last = bytes.len() - 1;
    bytes[last] ^= 0x55;
    assert!(matches!(
        PortableGrid::decode(&bytes),
        Err(FormatError::CrcMismatch { .. })
    ));
}

#[test]
fn truncated_file_is_rejected() {
    let grid = PortableGrid::new(3, 4, Payload::C64(vec![[1.0, -2.0]; 12])).unwrap();
    let bytes = grid.encode();
    for cut in [1, 7, bytes.len() / 2] {
        let short = &bytes[..bytes.len() - cut];
        assert!(
            matches!(PortableGrid::decode(short), Err(FormatError::Truncated { .. })),
            "cutting {cut} bytes must report truncation"
        );
    }
}

#[test]
fn wrong_magic_is_rejected() {
    let grid = PortableGrid::new(2, 2, Payload::F32(vec![0.0; 4])).unwrap();
    let mut bytes = grid.encode();
    bytes[0] = b'X';
    assert!(matches!(
        PortableGrid::decode(&bytes),
        Err(FormatError::BadMagic { .. })
    ));
    assert!(matches!(
        PortableGrid::decode(b""),
        Err(FormatError::BadMagic { .. })
    ));
}

#[test]
fn unknown_dtype_is_rejected() {
    let grid = PortableGrid::new(2, 2, Payload::F32(vec![0.0; 4])).unwrap();
    let mut bytes = grid.encode();
    bytes[8] = 9;
    assert!(matches!(
        PortableGrid::decode(&bytes),
        Err(FormatError::UnknownDtype(9))
    ));
}

#[test]
fn trailing_bytes_are_rejected() {
    let grid = PortableGrid::new(2, 2, Payload::F32(vec![0.25; 4])).unwrap();
    let mut bytes = grid.encode();
    bytes.push(0);
    assert!(matches!(
        PortableGrid::decode(&bytes),
        Err(FormatError::TrailingBytes { .. })
    ));
}

#[test]
fn oversized_header_dims_do_not_allocate() {
    // A header claiming u32::MAX x u32::MAX cells describes ~70 TB of
    // payload; the decoder must reject it from the byte count alone.
    let grid = PortableGrid::new(1, 1, Payload::F32(vec![0.0])).unwrap();
    let mut bytes = grid.encode();
    bytes[9..13].copy_from_slice(&u32::MAX.to_le_bytes());
    bytes[13..17].copy_from_slice(&u32::MAX.to_le_bytes());
    assert!(matches!(
        PortableGrid::decode(&bytes),
        Err(FormatError::Truncated { .. })
    ));
}
