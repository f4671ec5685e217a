//! Stego image quality (mse, PSNR) and per-parameter capacity measurement.

use alloc::vec;

use rand_core::RngCore;

use crate::aes::{Block, SecretKey};
use crate::error::{Error, Result};
use crate::haar;
use crate::image::GrayImage;
use crate::pipeline::{self, EmbedParams};
use crate::threshold::hard_threshold;

/// Bit depth of the images handled here.
pub const BIT_DEPTH: u32 = 8;
pub const MAX_I: u32 = (1 << BIT_DEPTH) - 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityReport {
    pub mse: f64,
    /// `f64::INFINITY` when the images are identical.
    pub psnr_db: f64,
    pub max_i: u32,
}

impl QualityReport {
    pub fn compare(y: &GrayImage, z: &GrayImage) -> Result<Self> {
        let mse = mse(y, z)?;
        Ok(Self {
            mse,
            psnr_db: psnr_from_mse(mse),
            max_i: MAX_I,
        })
    }
}

pub fn mse(y: &GrayImage, z: &GrayImage) -> Result<f64> {
    if y.side() != z.side() {
        return Err(Error::DimensionMismatch {
            left: y.side(),
            right: z.side(),
        });
    }
    let sum: u64 = y
        .pixels()
        .iter()
        .zip(z.pixels())
        .map(|(&a, &b)| {
            let d = u64::from(a.abs_diff(b));
            d * d
        })
        .sum();
    Ok(sum as f64 / y.pixels().len() as f64)
}

/// `10 log10(MAX_I² / mse)`, or `+inf` for `mse == 0`.
pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        return f64::INFINITY;
    }
    let max = f64::from(MAX_I);
    10.0 * libm::log10(max * max / mse)
}

pub fn psnr(y: &GrayImage, z: &GrayImage) -> Result<f64> {
    Ok(psnr_from_mse(mse(y, z)?))
}

/// One grid point of a capacity/quality sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub bps: u8,
    pub k: f64,
    pub slot_count: usize,
    pub capacity_kb: f64,
    pub used_bits: usize,
    pub mse: f64,
    pub psnr_db: f64,
    pub lossless: bool,
}

/// Fills the cover at `(k, bps)` with the largest random payload that fits,
/// measures distortion, and checks whether extraction returns the payload.
///
/// No separation condition is enforced, so points where `k` is too small for
/// the constellation still report slots and distortion; they come back with
/// `lossless == false`.
pub fn sweep_point(
    cover: &GrayImage,
    key: &SecretKey,
    k: f64,
    bps: u8,
    iv: &Block,
    rng: &mut dyn RngCore,
) -> Result<SweepRow> {
    let params = EmbedParams::permissive(k, bps);
    params.validate_basic()?;
    let t = haar::forward(&cover.to_matrix());
    let slot_count = hard_threshold(&t, k)?.slots.len();
    let cap = pipeline::capacity_bytes(slot_count, bps);

    let (embedding, payload) = match pipeline::max_raw_payload_len(cap) {
        Some(len) => {
            let mut payload = vec![0u8; len];
            rng.fill_bytes(&mut payload);
            let frame = pipeline::seal(&payload, key, iv, bps).to_bytes();
            (
                pipeline::embed_frame_bytes(cover, &frame, k, bps)?,
                Some(payload),
            )
        }
        None => (pipeline::embed_frame_bytes(cover, &[], k, bps)?, None),
    };

    let lossless = match &payload {
        Some(p) => pipeline::extract(&embedding.stego, key, &params).is_ok_and(|x| &x == p),
        None => false,
    };
    let report = QualityReport::compare(&embedding.stego, cover)?;
    Ok(SweepRow {
        bps,
        k,
        slot_count,
        capacity_kb: (slot_count * usize::from(bps)) as f64 / 8.0 / 1024.0,
        used_bits: embedding.used_bits,
        mse: report.mse,
        psnr_db: report.psnr_db,
        lossless,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn img(side: usize, v: u8) -> GrayImage {
        GrayImage::filled(side, v).unwrap()
    }

    #[test]
    fn identical_is_zero_and_infinite() {
        let a = img(4, 17);
        assert_eq!(mse(&a, &a), Ok(0.0));
        assert_eq!(psnr(&a, &a), Ok(f64::INFINITY));
    }

    #[test]
    fn extremes() {
        assert_eq!(mse(&img(8, 0), &img(8, 255)), Ok(65025.0));
        assert!(psnr_from_mse(65025.0).abs() < 1e-12);
    }

    #[test]
    fn single_pixel_difference() {
        let a = img(256, 0);
        let mut px = a.clone().into_pixels();
        px[12345] = 255;
        let b = GrayImage::new(256, px).unwrap();
        let m = mse(&a, &b).unwrap();
        assert!((m - 65025.0 / 65536.0).abs() < 1e-15);
        assert!((m - 0.99220).abs() < 1e-5);
    }

    #[test]
    fn table_consistency() {
        assert!((psnr_from_mse(16.5) - 35.956).abs() < 1e-3);
        assert!((psnr_from_mse(54.7) - 30.751).abs() < 1e-3);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(mse(&img(4, 0), &img(8, 0)).is_err());
    }
}
