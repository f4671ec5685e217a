//! Built-in sanity checks exposed through the `selftest` command.

use alloc::vec::Vec;

use crate::aes::{self, Aes128, SecretKey, SBOX};
use crate::codec;
use crate::haar::{self, HaarMatrix, Matrix};
use crate::symbol::CodingScheme;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
}

/// Runs every check with the standard S-box.
pub fn run() -> Vec<Check> {
    run_with_sbox(&SBOX)
}

/// Runs every check; the cipher checks use `sbox`.
pub fn run_with_sbox(sbox: &[u8; 256]) -> Vec<Check> {
    alloc::vec![
        Check {
            name: "aes128-fips197-appendix-c",
            passed: fips197(sbox),
        },
        Check {
            name: "haar-orthogonality-2..64",
            passed: haar_orthogonality(),
        },
        Check {
            name: "haar-fast-matches-dense",
            passed: haar_fast_vs_dense(),
        },
        Check {
            name: "symbol-codec-round-trip",
            passed: symbol_round_trip(),
        },
        Check {
            name: "compressor-round-trip",
            passed: compressor_round_trip(),
        },
        Check {
            name: "aes-cbc-round-trip",
            passed: cbc_round_trip(),
        },
    ]
}

fn fips197(sbox: &[u8; 256]) -> bool {
    let key = SecretKey::new(core::array::from_fn(|i| i as u8));
    let plain: [u8; 16] = core::array::from_fn(|i| (i as u8) * 0x11);
    let want = [
        0x69, 0xc4, 0xe0, 0xd8, 0x6a, 0x7b, 0x04, 0x30, 0xd8, 0xcd, 0xb7, 0x80, 0x70, 0xb4, 0xc5,
        0x5a,
    ];
    let cipher = Aes128::with_sbox(&key, *sbox);
    let ct = cipher.encrypt_block(&plain);
    ct == want && cipher.decrypt_block(&ct) == plain
}

fn haar_orthogonality() -> bool {
    [2, 4, 8, 16, 32, 64]
        .iter()
        .all(|&n| HaarMatrix::new(n).is_ok_and(|h| h.orthogonality_error() < 1e-9))
}

fn haar_fast_vs_dense() -> bool {
    let n = 32;
    let f = Matrix::from_fn(n, |r, c| ((r * 31 + c * 17) % 256) as f64).expect("valid side");
    let h = HaarMatrix::new(n).expect("valid side");
    let dense = h.forward(&f).expect("same side");
    let fast = haar::forward(&f);
    dense.max_abs_diff(&fast).is_ok_and(|d| d < 1e-9)
        && haar::inverse(&fast)
            .max_abs_diff(&f)
            .is_ok_and(|d| d < 1e-9)
}

fn symbol_round_trip() -> bool {
    (1..=3u8).all(|bps| {
        let scheme = CodingScheme::new(bps).expect("valid bps");
        (0..scheme.level_count()).all(|m| {
            let bits: Vec<bool> = (0..bps).rev().map(|s| (m >> s) & 1 == 1).collect();
            let Ok(amps) = scheme.encode(&bits) else {
                return false;
            };
            let level = amps[0];
            scheme.decode(&amps) == bits
                && scheme.decode(&[level + 1.49]) == bits
                && scheme.decode(&[level - 1.49]) == bits
        })
    })
}

fn compressor_round_trip() -> bool {
    let mut inputs: Vec<Vec<u8>> = alloc::vec![Vec::new(), alloc::vec![0; 1000]];
    inputs.push((0..3000u32).map(|i| (i * 7 / 13) as u8).collect());
    inputs.push(
        (0..257u32)
            .map(|i| (i.wrapping_mul(2_654_435_761) >> 24) as u8)
            .collect(),
    );
    inputs
        .iter()
        .all(|d| codec::decompress(&codec::compress(d)).is_ok_and(|out| &out == d))
}

fn cbc_round_trip() -> bool {
    let key = SecretKey::new([0xa5; 16]);
    (0..48usize).all(|len| {
        let data: Vec<u8> = (0..len).map(|i| i as u8).collect();
        let ct = aes::encrypt(&data, &key, &[0x3c; 16]);
        aes::decrypt(&ct, &key).is_ok_and(|out| out == data)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_pass() {
        let checks = run();
        assert!(checks.iter().all(|c| c.passed), "{checks:?}");
    }

    #[test]
    fn corrupted_sbox_fails_only_cipher_vector() {
        let mut sbox = SBOX;
        sbox[0x00] ^= 0x01;
        let checks = run_with_sbox(&sbox);
        assert!(!checks[0].passed);
        assert!(checks[1..].iter().all(|c| c.passed));
    }
}
