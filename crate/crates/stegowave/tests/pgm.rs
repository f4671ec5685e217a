use proptest::prelude::*;
use stegowave::pgm::{load_pgm, save_pgm, PgmError};
use stegowave_core::GrayImage;

const LENA: &[u8] = include_bytes!("data/lena256.pgm");

#[test]
fn fixture_is_canonical() {
    let img = load_pgm(LENA).unwrap();
    assert_eq!(img.side(), 256);
    assert_eq!(save_pgm(&img), LENA);
}

#[test]
fn byte_length_is_header_plus_pixels() {
    for side in [2, 16, 256] {
        let img = GrayImage::filled(side, 7).unwrap();
        let header = format!("P5\n{side} {side}\n255\n");
        assert_eq!(save_pgm(&img).len(), header.len() + side * side);
    }
}

#[test]
fn non_power_of_two_is_rejected() {
    let mut bytes = b"P5\n255 255\n255\n".to_vec();
    bytes.resize(bytes.len() + 255 * 255, 0);
    let err = load_pgm(&bytes).unwrap_err();
    assert!(matches!(err, PgmError::SideNotPowerOfTwo(255)));
    assert_eq!(err.to_string(), "side not power of two (255)");
}

proptest! {
    #[test]
    fn save_then_load_is_identity(log in 1u32..7, seed in any::<u64>()) {
        let side = 1usize << log;
        let mut state = seed;
        let img = GrayImage::from_fn(side, |_, _| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            (state >> 56) as u8
        })
        .unwrap();
        let bytes = save_pgm(&img);
        prop_assert_eq!(load_pgm(&bytes).unwrap(), img);
        prop_assert_eq!(save_pgm(&load_pgm(&bytes).unwrap()), bytes);
    }
}
