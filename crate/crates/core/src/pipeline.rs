//! End-to-end embedding and extraction.
//!
//! Embedding: forward Haar of the cover, hard threshold at `k`, compress and
//! encrypt the payload, frame it, write one symbol amplitude per slot in
//! row-major order (surplus slots stay 0), inverse Haar, then clamp and
//! round to 8 bits. Rounding is then corrected pixel by pixel wherever it
//! would make the receiver misread a coefficient.
//!
//! Extraction: forward Haar of the stego image; a coefficient carries a
//! symbol iff `|v| < (max_level + k) / 2`. Those are sliced in row-major
//! order back into bits and parsed as a frame.

use alloc::vec::Vec;

use rand_core::RngCore;

use crate::aes::{self, Block, CipherText, SecretKey, BLOCK_LEN};
use crate::codec;
use crate::error::{Error, Result};
use crate::frame::{self, PayloadFrame};
use crate::haar::{self, CoeffMatrix, Matrix};
use crate::image::GrayImage;
use crate::metrics;
use crate::refine::{refine_rounding, Targets};
use crate::symbol::{bits_to_bytes, bytes_to_bits, CodingScheme};
use crate::threshold::{hard_threshold, Slot};

pub const DEFAULT_EPSILON: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbedParams {
    pub k: f64,
    pub bps: u8,
    /// Assumed bound on coefficient perturbation from clamping and rounding.
    pub epsilon: f64,
    /// Require `k >= max_level + 2 * epsilon` and verify the stego image at embed time.
    pub strict: bool,
}

impl EmbedParams {
    pub fn new(k: f64, bps: u8) -> Self {
        Self {
            k,
            bps,
            epsilon: DEFAULT_EPSILON,
            strict: true,
        }
    }

    pub fn permissive(k: f64, bps: u8) -> Self {
        Self {
            strict: false,
            ..Self::new(k, bps)
        }
    }

    pub fn scheme(&self) -> Result<CodingScheme> {
        CodingScheme::new(self.bps)
    }

    /// Receiver-side cutoff between symbol-bearing and preserved coefficients.
    pub fn detect_threshold(&self) -> Result<f64> {
        Ok((self.scheme()?.max_level() + self.k) / 2.0)
    }

    /// Checks the parameters for extraction: `k > 0`, `epsilon > 0`, valid bps.
    pub fn validate_basic(&self) -> Result<CodingScheme> {
        let scheme = self.scheme()?;
        if !(self.k.is_finite() && self.k > 0.0) {
            return Err(Error::InvalidParams("k must be a finite value > 0"));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::InvalidParams("epsilon must be a finite value > 0"));
        }
        Ok(scheme)
    }

    /// Checks the parameters for embedding, including the separation condition.
    pub fn validate(&self) -> Result<CodingScheme> {
        let scheme = self.validate_basic()?;
        let max = scheme.max_level();
        if self.strict {
            if self.k < max + 2.0 * self.epsilon {
                return Err(Error::InvalidParams(
                    "strict mode requires k >= max_level + 2 * epsilon",
                ));
            }
        } else if self.k <= max {
            return Err(Error::InvalidParams(
                "k must exceed the largest symbol amplitude",
            ));
        }
        Ok(scheme)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StegoStats {
    pub slot_count: usize,
    pub capacity_bytes: usize,
    pub used_bits: usize,
    pub mse: f64,
    pub psnr_db: f64,
}

impl StegoStats {
    pub fn capacity_kb(&self, bps: u8) -> f64 {
        (self.slot_count * usize::from(bps)) as f64 / 8.0 / 1024.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Embedded {
    pub stego: GrayImage,
    pub stats: StegoStats,
}

/// Clamps to `[0, 255]` and rounds half away from zero.
pub fn normalize_round(m: &Matrix) -> GrayImage {
    let pixels = m
        .values()
        .iter()
        .map(|&v| {
            let v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 255.0) };
            libm::round(v) as u8
        })
        .collect();
    GrayImage::new(m.side(), pixels).expect("matrix side is valid")
}

/// Whole bytes the slots can hold.
pub fn capacity_bytes(slot_count: usize, bps: u8) -> usize {
    slot_count * usize::from(bps) / 8
}

/// Frame size for a compressed blob of `blob_len` bytes.
pub fn frame_len_for_blob(blob_len: usize) -> usize {
    frame::HEADER_LEN + BLOCK_LEN + CipherText::body_len(blob_len)
}

/// Largest compressed blob that fits in `capacity_bytes`, if any.
pub fn max_blob_len(capacity_bytes: usize) -> Option<usize> {
    let body = capacity_bytes.checked_sub(frame::HEADER_LEN + BLOCK_LEN)?;
    let body = body / BLOCK_LEN * BLOCK_LEN;
    body.checked_sub(1)
}

/// Largest incompressible payload that fits in `capacity_bytes`, if any.
pub fn max_raw_payload_len(capacity_bytes: usize) -> Option<usize> {
    max_blob_len(capacity_bytes)?.checked_sub(codec::HEADER_LEN)
}

/// Compress, encrypt and frame a payload.
pub fn seal(payload: &[u8], key: &SecretKey, iv: &Block, bps: u8) -> PayloadFrame {
    let blob = codec::compress_bytes(payload);
    let ct = aes::encrypt(&blob, key, iv);
    PayloadFrame::new(bps, ct.to_bytes())
}

/// Inverse of [`seal`].
pub fn open(frame: &PayloadFrame, key: &SecretKey) -> Result<Vec<u8>> {
    let ct = CipherText::from_bytes(&frame.ciphertext)?;
    let blob = aes::decrypt(&ct, key)?;
    codec::decompress_bytes(&blob).map_err(|_| Error::Padding)
}

/// Result of writing raw frame bytes into a cover.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotEmbedding {
    pub stego: GrayImage,
    pub slots: Vec<Slot>,
    pub used_bits: usize,
}

/// Writes `frame_bytes` into the slots of `cover` at threshold `k` without
/// checking that the receiver can separate symbols from preserved
/// coefficients. Only the capacity is checked.
pub fn embed_frame_bytes(
    cover: &GrayImage,
    frame_bytes: &[u8],
    k: f64,
    bps: u8,
) -> Result<SlotEmbedding> {
    let scheme = CodingScheme::new(bps)?;
    let t = haar::forward(&cover.to_matrix());
    let thr = hard_threshold(&t, k)?;

    let mut bits = bytes_to_bits(frame_bytes);
    let used_bits = bits.len();
    let bps_usize = usize::from(bps);
    bits.resize(bits.len().div_ceil(bps_usize) * bps_usize, false);
    let available = thr.slots.len() * bps_usize;
    if bits.len() > available {
        return Err(Error::CapacityExceeded {
            required: bits.len(),
            available,
        });
    }

    let amplitudes = scheme.encode(&bits)?;
    let mut coeffs = thr.coeffs;
    for (slot, &a) in thr.slots.iter().zip(&amplitudes) {
        coeffs.set(slot.row, slot.col, a);
    }
    let real = haar::inverse(&coeffs);
    let mut stego = normalize_round(&real);
    let targets = Targets::new(
        &coeffs,
        &thr.slots,
        amplitudes.len(),
        scheme.max_level(),
        (scheme.max_level() + k) / 2.0,
    );
    refine_rounding(&mut stego, &real, &targets);
    Ok(SlotEmbedding {
        stego,
        slots: thr.slots,
        used_bits,
    })
}

/// Hides `payload` in `cover`. In strict mode the stego image is extracted
/// again before returning and must reproduce the payload exactly.
pub fn embed(
    cover: &GrayImage,
    payload: &[u8],
    key: &SecretKey,
    params: &EmbedParams,
    iv: &Block,
) -> Result<Embedded> {
    params.validate()?;
    let frame = seal(payload, key, iv, params.bps).to_bytes();
    let out = embed_frame_bytes(cover, &frame, params.k, params.bps)?;

    if params.strict {
        match extract(&out.stego, key, params) {
            Ok(p) if p == payload => {}
            _ => return Err(Error::SelfCheckFailed),
        }
    }

    let mse = metrics::mse(&out.stego, cover)?;
    let stats = StegoStats {
        slot_count: out.slots.len(),
        capacity_bytes: capacity_bytes(out.slots.len(), params.bps),
        used_bits: out.used_bits,
        mse,
        psnr_db: metrics::psnr_from_mse(mse),
    };
    Ok(Embedded {
        stego: out.stego,
        stats,
    })
}

/// Bytes recovered from the symbol-bearing coefficients, before frame parsing.
pub fn extract_raw_bytes(stego: &GrayImage, params: &EmbedParams) -> Result<Vec<u8>> {
    let scheme = params.validate_basic()?;
    let cutoff = params.detect_threshold()?;
    let t = haar::forward(&stego.to_matrix());
    let values: Vec<f64> = t
        .values()
        .iter()
        .copied()
        .filter(|v| v.abs() < cutoff)
        .collect();
    Ok(bits_to_bytes(&scheme.decode(&values)))
}

/// Recovers the payload hidden by [`embed`].
pub fn extract(stego: &GrayImage, key: &SecretKey, params: &EmbedParams) -> Result<Vec<u8>> {
    let bytes = extract_raw_bytes(stego, params)?;
    let frame = PayloadFrame::parse(&bytes, params.bps)?;
    open(&frame, key)
}

/// Symbols written into slots during a dispersion run.
pub enum TestPayload<'a> {
    /// Slots stay at zero.
    Silent,
    /// Each slot receives a uniformly random symbol.
    Random(&'a mut dyn RngCore),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub bin_width: f64,
    /// Left edge of bin 0.
    pub origin: f64,
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispersionReport {
    pub samples: usize,
    pub epsilon: f64,
    /// Fraction of perturbations with `|e| <= epsilon`.
    pub within_epsilon: f64,
    pub max_abs: f64,
    pub p99_abs: f64,
    pub histogram: Histogram,
}

pub const DISPERSION_BIN_WIDTH: f64 = 0.1;

/// Coefficient perturbation caused by clamping and rounding:
/// `forward(normalize_round(inverse(E))) - E` over every position, where `E`
/// is the thresholded cover with test symbols in its slots.
pub fn error_dispersion(
    cover: &GrayImage,
    params: &EmbedParams,
    trials: usize,
    mut payload: TestPayload<'_>,
) -> Result<DispersionReport> {
    let scheme = params.validate_basic()?;
    if trials == 0 {
        return Err(Error::InvalidParams("trials must be >= 1"));
    }
    let t = haar::forward(&cover.to_matrix());
    let thr = hard_threshold(&t, params.k)?;

    let mut errors = Vec::with_capacity(trials * t.values().len());
    for _ in 0..trials {
        let mut embedded: CoeffMatrix = thr.coeffs.clone();
        if let TestPayload::Random(rng) = &mut payload {
            for slot in &thr.slots {
                let m = rng.next_u32() as usize % scheme.level_count();
                embedded.set(slot.row, slot.col, scheme.level(m));
            }
        }
        let stego = normalize_round(&haar::inverse(&embedded));
        let back = haar::forward(&stego.to_matrix());
        errors.extend(
            back.values()
                .iter()
                .zip(embedded.values())
                .map(|(b, e)| b - e),
        );
    }
    Ok(summarize(errors, params.epsilon))
}

fn summarize(errors: Vec<f64>, epsilon: f64) -> DispersionReport {
    let samples = errors.len();
    let within = errors.iter().filter(|e| e.abs() <= epsilon).count();
    let mut abs: Vec<f64> = errors.iter().map(|e| e.abs()).collect();
    abs.sort_by(f64::total_cmp);
    let max_abs = abs.last().copied().unwrap_or(0.0);
    let p99_abs = if samples == 0 {
        0.0
    } else {
        let idx = libm::ceil(0.99 * samples as f64) as usize;
        abs[idx.clamp(1, samples) - 1]
    };

    let lo = errors.iter().copied().fold(0.0, f64::min);
    let hi = errors.iter().copied().fold(0.0, f64::max);
    let origin = libm::floor(lo / DISPERSION_BIN_WIDTH) * DISPERSION_BIN_WIDTH;
    let bins = (libm::floor((hi - origin) / DISPERSION_BIN_WIDTH) as usize) + 1;
    let mut counts = alloc::vec![0u64; bins];
    for e in &errors {
        let b = libm::floor((e - origin) / DISPERSION_BIN_WIDTH) as usize;
        counts[b.min(bins - 1)] += 1;
    }

    DispersionReport {
        samples,
        epsilon,
        within_epsilon: if samples == 0 {
            1.0
        } else {
            within as f64 / samples as f64
        },
        max_abs,
        p99_abs,
        histogram: Histogram {
            bin_width: DISPERSION_BIN_WIDTH,
            origin,
            counts,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn normalize_round_rules() {
        let m = Matrix::from_vec(2, vec![255.7, -0.4, 127.5, 126.49]).unwrap();
        assert_eq!(normalize_round(&m).pixels(), &[255, 0, 128, 126]);
        let m = Matrix::from_vec(2, vec![0.5, 1e9, -1e9, f64::NAN]).unwrap();
        assert_eq!(normalize_round(&m).pixels(), &[1, 255, 0, 0]);
    }

    #[test]
    fn params_validation() {
        assert!(EmbedParams::new(20.0, 2).validate().is_ok());
        // 4.5 + 3.0 = 7.5 is the smallest strict k at 2 b/s
        assert!(EmbedParams::new(7.5, 2).validate().is_ok());
        assert!(EmbedParams::new(7.49, 2).validate().is_err());
        assert!(EmbedParams::permissive(4.6, 2).validate().is_ok());
        assert!(EmbedParams::permissive(4.5, 2).validate().is_err());
        assert!(EmbedParams::new(0.0, 1).validate().is_err());
        assert!(EmbedParams::new(20.0, 4).validate().is_err());
        let mut p = EmbedParams::new(20.0, 1);
        p.epsilon = 0.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn detect_threshold_is_midpoint() {
        assert_eq!(EmbedParams::new(20.0, 2).detect_threshold(), Ok(12.25));
        assert_eq!(EmbedParams::new(14.0, 3).detect_threshold(), Ok(12.25));
    }

    #[test]
    fn capacity_helpers() {
        // 30 bytes of header + IV, then one padded block
        assert_eq!(frame_len_for_blob(0), 46);
        assert_eq!(frame_len_for_blob(15), 46);
        assert_eq!(frame_len_for_blob(16), 62);
        assert_eq!(max_blob_len(45), None);
        assert_eq!(max_blob_len(46), Some(15));
        assert_eq!(max_blob_len(61), Some(15));
        assert_eq!(max_blob_len(62), Some(31));
        for cap in 46..500 {
            let l = max_blob_len(cap).unwrap();
            assert!(frame_len_for_blob(l) <= cap);
            assert!(frame_len_for_blob(l + 1) > cap);
        }
        assert_eq!(max_raw_payload_len(46), Some(6));
    }

    #[test]
    fn seal_open_round_trip() {
        let key = SecretKey::new([3; 16]);
        let frame = seal(b"some secret bytes", &key, &[9; 16], 2);
        assert_eq!(open(&frame, &key).unwrap(), b"some secret bytes".to_vec());
    }

    #[test]
    fn dispersion_summary_order_statistics() {
        let errors = vec![0.05, -0.3, 1.6, -2.0, 0.0];
        let r = summarize(errors, 1.5);
        assert_eq!(r.samples, 5);
        assert!((r.within_epsilon - 0.6).abs() < 1e-12);
        assert_eq!(r.max_abs, 2.0);
        assert!(r.max_abs >= r.p99_abs);
        assert_eq!(r.histogram.counts.iter().sum::<u64>(), 5);
    }
}
