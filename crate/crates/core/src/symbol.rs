//! Amplitude constellation with spacing 3 and its nearest-level slicer.
//!
//! | bps | levels |
//! |-----|--------|
//! | 1   | -1.5, 1.5 |
//! | 2   | -4.5, -1.5, 1.5, 4.5 |
//! | 3   | -10.5, -7.5, ..., 7.5, 10.5 |
//!
//! Groups of `bps` bits are read most-significant-first as a natural binary
//! index into the ascending level list.

use alloc::vec::Vec;

use crate::error::{Error, Result};

pub const SPACING: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CodingScheme {
    bps: u8,
}

impl CodingScheme {
    pub fn new(bps: u8) -> Result<Self> {
        match bps {
            1..=3 => Ok(Self { bps }),
            _ => Err(Error::InvalidBps(bps)),
        }
    }

    pub fn bps(&self) -> u8 {
        self.bps
    }

    pub fn level_count(&self) -> usize {
        1 << self.bps
    }

    /// Amplitude of symbol index `m`.
    pub fn level(&self, m: usize) -> f64 {
        let center = (self.level_count() - 1) as f64 / 2.0;
        SPACING * (m as f64 - center)
    }

    pub fn levels(&self) -> Vec<f64> {
        (0..self.level_count()).map(|m| self.level(m)).collect()
    }

    pub fn max_level(&self) -> f64 {
        self.level(self.level_count() - 1)
    }

    /// Nearest level index; exact midpoints go to the higher level.
    pub fn slice(&self, value: f64) -> usize {
        let pos = libm::floor((value + self.max_level()) / SPACING + 0.5);
        if pos.is_nan() || pos <= 0.0 {
            0
        } else {
            (pos as usize).min(self.level_count() - 1)
        }
    }

    pub fn encode(&self, bits: &[bool]) -> Result<Vec<f64>> {
        let bps = usize::from(self.bps);
        if !bits.len().is_multiple_of(bps) {
            return Err(Error::RaggedBits {
                len: bits.len(),
                bps: self.bps,
            });
        }
        Ok(bits
            .chunks_exact(bps)
            .map(|group| {
                let m = group
                    .iter()
                    .fold(0usize, |acc, &b| (acc << 1) | usize::from(b));
                self.level(m)
            })
            .collect())
    }

    pub fn decode(&self, values: &[f64]) -> Vec<bool> {
        let bps = usize::from(self.bps);
        let mut bits = Vec::with_capacity(values.len() * bps);
        for &v in values {
            let m = self.slice(v);
            for shift in (0..bps).rev() {
                bits.push((m >> shift) & 1 == 1);
            }
        }
        bits
    }
}

/// Expands bytes to bits, most significant bit first.
pub fn bytes_to_bits(bytes: &[u8]) -> Vec<bool> {
    bytes
        .iter()
        .flat_map(|&b| (0..8).rev().map(move |s| (b >> s) & 1 == 1))
        .collect()
}

/// Packs bits (MSB first) into bytes; a partial final byte is dropped.
pub fn bits_to_bytes(bits: &[bool]) -> Vec<u8> {
    bits.chunks_exact(8)
        .map(|c| c.iter().fold(0u8, |acc, &b| (acc << 1) | u8::from(b)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn bits(s: &str) -> Vec<bool> {
        s.bytes().map(|c| c == b'1').collect()
    }

    #[test]
    fn table_values() {
        let table: [(u8, &str, f64); 14] = [
            (1, "0", -1.5),
            (1, "1", 1.5),
            (2, "00", -4.5),
            (2, "01", -1.5),
            (2, "10", 1.5),
            (2, "11", 4.5),
            (3, "000", -10.5),
            (3, "001", -7.5),
            (3, "010", -4.5),
            (3, "011", -1.5),
            (3, "100", 1.5),
            (3, "101", 4.5),
            (3, "110", 7.5),
            (3, "111", 10.5),
        ];
        for (bps, b, amp) in table {
            let s = CodingScheme::new(bps).unwrap();
            assert_eq!(s.encode(&bits(b)).unwrap(), vec![amp], "{bps} b/s {b}");
            assert_eq!(s.decode(&[amp]), bits(b));
        }
    }

    #[test]
    fn max_levels() {
        let max: Vec<f64> = (1..=3)
            .map(|b| CodingScheme::new(b).unwrap().max_level())
            .collect();
        assert_eq!(max, vec![1.5, 4.5, 10.5]);
    }

    #[test]
    fn slicer_examples() {
        assert_eq!(CodingScheme::new(1).unwrap().decode(&[-0.2]), bits("0"));
        assert_eq!(CodingScheme::new(2).unwrap().decode(&[1.4]), bits("10"));
        assert_eq!(CodingScheme::new(3).unwrap().decode(&[5.9]), bits("101"));
    }

    #[test]
    fn midpoints_go_up() {
        assert_eq!(CodingScheme::new(1).unwrap().decode(&[0.0]), bits("1"));
        assert_eq!(CodingScheme::new(3).unwrap().decode(&[6.0]), bits("110"));
        assert_eq!(CodingScheme::new(2).unwrap().decode(&[-3.0]), bits("01"));
    }

    #[test]
    fn out_of_range_values_saturate() {
        let s = CodingScheme::new(2).unwrap();
        assert_eq!(s.decode(&[-1e9, 1e9, f64::NAN]), bits("001100"));
    }

    #[test]
    fn ragged_input_rejected() {
        let s = CodingScheme::new(3).unwrap();
        assert_eq!(
            s.encode(&bits("0101")),
            Err(Error::RaggedBits { len: 4, bps: 3 })
        );
    }

    #[test]
    fn invalid_bps() {
        assert_eq!(CodingScheme::new(0), Err(Error::InvalidBps(0)));
        assert_eq!(CodingScheme::new(4), Err(Error::InvalidBps(4)));
    }

    #[test]
    fn byte_bit_conversion() {
        assert_eq!(bytes_to_bits(&[0b1010_0001]), bits("10100001"));
        assert_eq!(bits_to_bytes(&bits("1010000111")), vec![0b1010_0001]);
    }
}
