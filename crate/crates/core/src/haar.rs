//! Orthonormal Haar basis and the separable 2D transform `T = H F Hᵗ`.
//!
//! Two routes compute the same transform:
//!
//! * [`HaarMatrix`] builds the dense `N x N` basis from the sampled Haar
//!   functions and multiplies explicitly (O(N³)).
//! * [`forward`] / [`inverse`] run the full-depth averaging/differencing
//!   pyramid on columns then rows (O(N² log N)). Output ordering matches
//!   the dense rows: DC first, then detail rows coarse to fine.
//!
//! The pipeline uses the pyramid; the dense form is the reference.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::image::is_valid_side;

/// Square real matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    side: usize,
    values: Vec<f64>,
}

/// Transform-domain coefficients. Same storage as any other square matrix.
pub type CoeffMatrix = Matrix;

impl Matrix {
    pub fn zeros(side: usize) -> Result<Self> {
        if !is_valid_side(side) {
            return Err(Error::SideNotPowerOfTwo(side));
        }
        Ok(Self {
            side,
            values: vec![0.0; side * side],
        })
    }

    pub fn from_vec(side: usize, values: Vec<f64>) -> Result<Self> {
        if !is_valid_side(side) {
            return Err(Error::SideNotPowerOfTwo(side));
        }
        if values.len() != side * side {
            return Err(Error::PixelCount {
                expected: side * side,
                actual: values.len(),
            });
        }
        Ok(Self { side, values })
    }

    pub fn from_fn(side: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut m = Self::zeros(side)?;
        for r in 0..side {
            for c in 0..side {
                m.values[r * side + c] = f(r, c);
            }
        }
        Ok(m)
    }

    pub fn identity(side: usize) -> Result<Self> {
        Self::from_fn(side, |r, c| if r == c { 1.0 } else { 0.0 })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.side + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.values[row * self.side + col] = value;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.side..(row + 1) * self.side]
    }

    pub fn transpose(&self) -> Self {
        let n = self.side;
        let mut out = self.clone();
        for r in 0..n {
            for c in 0..n {
                out.values[c * n + r] = self.values[r * n + c];
            }
        }
        out
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        self.check_side(rhs)?;
        let n = self.side;
        let mut out = vec![0.0; n * n];
        for r in 0..n {
            let out_row = &mut out[r * n..(r + 1) * n];
            for k in 0..n {
                let a = self.values[r * n + k];
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(&rhs.values[k * n..(k + 1) * n]) {
                    *o += a * b;
                }
            }
        }
        Ok(Self {
            side: n,
            values: out,
        })
    }

    /// Largest absolute element-wise difference.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_side(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    pub fn sum_squares(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    fn check_side(&self, other: &Self) -> Result<()> {
        if self.side != other.side {
            return Err(Error::DimensionMismatch {
                left: self.side,
                right: other.side,
            });
        }
        Ok(())
    }
}

/// Dense orthonormal Haar basis; row `n` is `h_n` sampled at `x = i/N`.
#[derive(Debug, Clone, PartialEq)]
pub struct HaarMatrix {
    h: Matrix,
    ht: Matrix,
}

impl HaarMatrix {
    pub fn new(side: usize) -> Result<Self> {
        if !is_valid_side(side) {
            return Err(Error::SideNotPowerOfTwo(side));
        }
        let n = side;
        let h = Matrix::from_fn(n, |row, i| haar_sample(n, row, i))?;
        let ht = h.transpose();
        Ok(Self { h, ht })
    }

    pub fn side(&self) -> usize {
        self.h.side
    }

    pub fn matrix(&self) -> &Matrix {
        &self.h
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.h.get(row, col)
    }

    /// `max |H Hᵗ - I|`.
    pub fn orthogonality_error(&self) -> f64 {
        let prod = self.h.matmul(&self.ht).expect("same side");
        let eye = Matrix::identity(self.side()).expect("valid side");
        prod.max_abs_diff(&eye).expect("same side")
    }

    /// `T = H F Hᵗ`.
    pub fn forward(&self, f: &Matrix) -> Result<CoeffMatrix> {
        self.h.matmul(f)?.matmul(&self.ht)
    }

    /// `F = Hᵗ T H`.
    pub fn inverse(&self, t: &CoeffMatrix) -> Result<Matrix> {
        self.ht.matmul(t)?.matmul(&self.h)
    }
}

/// Value of basis row `row` at sample `i` for an `n`-point basis.
fn haar_sample(n: usize, row: usize, i: usize) -> f64 {
    let norm = 1.0 / libm::sqrt(n as f64);
    if row == 0 {
        return norm;
    }
    // row = 2^j + k - 1 with 1 <= k <= 2^j
    let j = usize::BITS - 1 - row.leading_zeros();
    let scale = 1usize << j;
    let k = row - scale + 1;
    // Compare x = i/n against (k-1)/2^j, (k-1/2)/2^j, k/2^j in integers.
    let pos = 2 * i * scale;
    let lo = 2 * (k - 1) * n;
    let mid = (2 * k - 1) * n;
    let hi = 2 * k * n;
    let amp = libm::sqrt(scale as f64) * norm;
    if pos >= lo && pos < mid {
        amp
    } else if pos >= mid && pos < hi {
        -amp
    } else {
        0.0
    }
}

fn forward_1d(data: &mut [f64], scratch: &mut [f64]) {
    let mut len = data.len();
    while len >= 2 {
        let half = len / 2;
        for i in 0..half {
            let a = data[2 * i];
            let b = data[2 * i + 1];
            scratch[i] = (a + b) * FRAC_1_SQRT_2;
            scratch[half + i] = (a - b) * FRAC_1_SQRT_2;
        }
        data[..len].copy_from_slice(&scratch[..len]);
        len = half;
    }
}

fn inverse_1d(data: &mut [f64], scratch: &mut [f64]) {
    let n = data.len();
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        for i in 0..half {
            let a = data[i];
            let d = data[half + i];
            scratch[2 * i] = (a + d) * FRAC_1_SQRT_2;
            scratch[2 * i + 1] = (a - d) * FRAC_1_SQRT_2;
        }
        data[..len].copy_from_slice(&scratch[..len]);
        len *= 2;
    }
}

fn separable(m: &Matrix, pass: fn(&mut [f64], &mut [f64])) -> Matrix {
    let n = m.side;
    let mut out = m.clone();
    let mut column = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    for c in 0..n {
        for (r, v) in column.iter_mut().enumerate() {
            *v = out.values[r * n + c];
        }
        pass(&mut column, &mut scratch);
        for (r, v) in column.iter().enumerate() {
            out.values[r * n + c] = *v;
        }
    }
    for row in out.values.chunks_exact_mut(n) {
        pass(row, &mut scratch);
    }
    out
}

/// Fast `T = H F Hᵗ`.
pub fn forward(f: &Matrix) -> CoeffMatrix {
    separable(f, forward_1d)
}

/// Fast `F = Hᵗ T H`. The result may leave `[0, 255]`.
pub fn inverse(t: &CoeffMatrix) -> Matrix {
    separable(t, inverse_1d)
}
