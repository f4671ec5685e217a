//! Lossless data hiding in hard-thresholded Haar wavelet coefficients.
//!
//! A payload is compressed ([`codec`]), encrypted with AES-128 ([`aes`]),
//! framed ([`frame`]) and written as constellation amplitudes ([`symbol`])
//! into the coefficients that hard thresholding ([`threshold`]) zeroes in
//! the Haar transform ([`haar`]) of an 8-bit grayscale cover. The
//! [`pipeline`] module ties the steps together; [`metrics`] measures the
//! resulting distortion and capacity.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;

pub mod aes;
pub mod codec;
pub mod error;
pub mod frame;
pub mod haar;
pub mod image;
pub mod metrics;
pub mod pipeline;
mod refine;
pub mod selftest;
pub mod symbol;
pub mod threshold;

pub use aes::SecretKey;
pub use error::{Error, Result};
pub use haar::{CoeffMatrix, HaarMatrix, Matrix};
pub use image::GrayImage;
pub use pipeline::{embed, extract, EmbedParams, Embedded, StegoStats};
pub use symbol::CodingScheme;
