use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::haar::Matrix;

/// Returns true when `side` is `2^n` with `n >= 1`.
pub fn is_valid_side(side: usize) -> bool {
    side >= 2 && side.is_power_of_two()
}

/// Square 8-bit grayscale image, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GrayImage {
    side: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(side: usize, pixels: Vec<u8>) -> Result<Self> {
        if !is_valid_side(side) {
            return Err(Error::SideNotPowerOfTwo(side));
        }
        if pixels.len() != side * side {
            return Err(Error::PixelCount {
                expected: side * side,
                actual: pixels.len(),
            });
        }
        Ok(Self { side, pixels })
    }

    pub fn filled(side: usize, value: u8) -> Result<Self> {
        Self::new(side, vec![value; side * side])
    }

    /// Builds an image by evaluating `f(row, col)` at every pixel.
    pub fn from_fn(side: usize, mut f: impl FnMut(usize, usize) -> u8) -> Result<Self> {
        if !is_valid_side(side) {
            return Err(Error::SideNotPowerOfTwo(side));
        }
        let pixels = (0..side * side).map(|i| f(i / side, i % side)).collect();
        Ok(Self { side, pixels })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.side + col]
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_vec(
            self.side,
            self.pixels.iter().map(|&p| f64::from(p)).collect(),
        )
        .expect("image side is always a valid matrix side")
    }
}
