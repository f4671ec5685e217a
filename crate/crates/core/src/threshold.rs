use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::haar::CoeffMatrix;
use crate::symbol::CodingScheme;

/// Embedding slot: a coefficient position zeroed by thresholding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Slot {
    pub row: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdResult {
    pub coeffs: CoeffMatrix,
    /// Row-major order.
    pub slots: Vec<Slot>,
    pub k: f64,
}

/// Zeroes every coefficient with `|s| < k`; coefficients with `|s| >= k` are kept as-is.
pub fn hard_threshold(t: &CoeffMatrix, k: f64) -> Result<ThresholdResult> {
    if !(k.is_finite() && k >= 0.0) {
        return Err(Error::NegativeThreshold(k));
    }
    let n = t.side();
    let mut coeffs = t.clone();
    let mut slots = Vec::new();
    for (i, v) in coeffs.values_mut().iter_mut().enumerate() {
        if v.abs() < k {
            *v = 0.0;
            slots.push(Slot {
                row: i / n,
                col: i % n,
            });
        }
    }
    Ok(ThresholdResult { coeffs, slots, k })
}

/// Raw embeddable bits, before frame overhead.
pub fn capacity_bits(slot_count: usize, bps: u8) -> Result<usize> {
    let scheme = CodingScheme::new(bps)?;
    Ok(slot_count * usize::from(scheme.bps()))
}
