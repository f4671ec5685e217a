//! Rounding correction for stego images.
//!
//! Clamping and rounding the inverse transform perturbs every coefficient. A
//! symbol on a coefficient with a wide spatial support can be erased outright
//! when its per-pixel contribution is below half a gray level. This pass
//! re-rounds selected pixels in the other direction until every coefficient
//! reads back as intended, with a safety margin. Pixels normally stay within
//! 1 of their clamped real-valued reconstruction; next to clamped pixels they
//! may be pushed up to [`STRETCH`] away to compensate.

use alloc::vec::Vec;

use crate::haar::{self, CoeffMatrix, Matrix};
use crate::image::GrayImage;
use crate::symbol::SPACING;
use crate::threshold::Slot;

/// Full correction passes; each starts from an exact forward transform.
const PASSES: usize = 8;

/// Required distance from every decision boundary.
const MARGIN: f64 = 0.1;

/// Largest distance from the clamped reconstruction a pixel may be pushed
/// when the cheap moves run out (only happens next to clamped pixels).
const STRETCH: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    /// Slot carrying a frame symbol.
    Symbol,
    /// Slot beyond the end of the frame.
    Surplus,
    /// Coefficient kept by thresholding.
    Preserved,
}

/// What the receiver must read at every coefficient.
pub(crate) struct Targets<'a> {
    coeffs: &'a CoeffMatrix,
    roles: Vec<Role>,
    cutoff: f64,
    max_level: f64,
}

impl<'a> Targets<'a> {
    /// `coeffs` holds the intended coefficients; the first `symbols` of `slots`
    /// carry frame symbols, whose largest amplitude is `max_level`; the
    /// receiver separates at `cutoff`.
    pub(crate) fn new(
        coeffs: &'a CoeffMatrix,
        slots: &[Slot],
        symbols: usize,
        max_level: f64,
        cutoff: f64,
    ) -> Self {
        let n = coeffs.side();
        let mut roles = alloc::vec![Role::Preserved; n * n];
        for (i, s) in slots.iter().enumerate() {
            roles[s.row * n + s.col] = if i < symbols {
                Role::Symbol
            } else {
                Role::Surplus
            };
        }
        Self {
            coeffs,
            roles,
            cutoff,
            max_level,
        }
    }

    /// Whether the largest symbol can sit below the cutoff with the margin.
    fn feasible(&self) -> bool {
        self.max_level < self.cutoff - MARGIN
    }

    /// How far coefficient `q` at value `v` sits past its allowed region; zero when safe.
    fn badness(&self, q: usize, v: f64) -> f64 {
        let slot_excess = (v.abs() - (self.cutoff - MARGIN)).max(0.0);
        match self.roles[q] {
            Role::Symbol => {
                let drift = (v - self.coeffs.values()[q]).abs() - (SPACING / 2.0 - MARGIN);
                drift.max(0.0) + slot_excess
            }
            Role::Surplus => slot_excess,
            Role::Preserved => (self.cutoff + MARGIN - v.abs()).max(0.0),
        }
    }

    /// Value a violated coefficient is steered toward.
    fn aim(&self, q: usize) -> f64 {
        let want = self.coeffs.values()[q];
        match self.roles[q] {
            Role::Symbol | Role::Surplus => want,
            Role::Preserved => want.signum() * want.abs().min(self.cutoff + SPACING / 2.0),
        }
    }
}

/// Basis rows whose support contains sample `x`, with the basis value there.
fn basis_at(n: usize, x: usize) -> Vec<(usize, f64)> {
    let mut out = alloc::vec![(0, 1.0 / libm::sqrt(n as f64))];
    let mut j = 0;
    while (1 << j) < n {
        let len = n >> j;
        let index = (1 << j) + x / len;
        let sign = if x % len < len / 2 { 1.0 } else { -1.0 };
        out.push((index, sign / libm::sqrt(len as f64)));
        j += 1;
    }
    out
}

/// Pixel span `(start, len)` of basis row `index` in an `n`-point basis.
fn support(n: usize, index: usize) -> (usize, usize) {
    if index == 0 {
        return (0, n);
    }
    let j = usize::BITS - 1 - index.leading_zeros();
    let len = n >> j;
    (len * (index - (1 << j)), len)
}

struct State<'a, 'b> {
    n: usize,
    targets: &'b Targets<'a>,
    /// Basis values per sample index, shared by rows and columns.
    basis: Vec<Vec<(usize, f64)>>,
    pixels: Vec<u8>,
    /// Clamped real-valued reconstruction.
    anchor: Vec<f64>,
    back: Vec<f64>,
}

impl State<'_, '_> {
    fn basis_value(&self, q: usize, pixel: usize) -> f64 {
        let (a, b) = (q / self.n, q % self.n);
        let (r, c) = (pixel / self.n, pixel % self.n);
        let row = self.basis[r].iter().find(|e| e.0 == a).map_or(0.0, |e| e.1);
        let col = self.basis[c].iter().find(|e| e.0 == b).map_or(0.0, |e| e.1);
        row * col
    }

    /// Change in total badness of every coefficient other than `skip` if
    /// `pixel` moves by `step`.
    fn harm(&self, pixel: usize, step: f64, skip: usize) -> f64 {
        let (r, c) = (pixel / self.n, pixel % self.n);
        let mut total = 0.0;
        for &(a, hr) in &self.basis[r] {
            for &(b, hc) in &self.basis[c] {
                let q = a * self.n + b;
                if q == skip {
                    continue;
                }
                let v = self.back[q];
                total += self.targets.badness(q, v + step * hr * hc) - self.targets.badness(q, v);
            }
        }
        total
    }

    /// A step is allowed if it stays in range and within `reach` of the anchor.
    fn movable(&self, pixel: usize, step: i16, reach: f64) -> bool {
        let moved = i16::from(self.pixels[pixel]) + step;
        (0..=255).contains(&moved) && (f64::from(moved) - self.anchor[pixel]).abs() <= reach
    }

    fn cost(&self, pixel: usize, step: i16) -> f64 {
        let p = f64::from(self.pixels[pixel]);
        let a = self.anchor[pixel];
        (a - (p + f64::from(step))).abs() - (a - p).abs()
    }

    fn apply(&mut self, pixel: usize, step: i16) {
        self.pixels[pixel] = (i16::from(self.pixels[pixel]) + step) as u8;
        let (r, c) = (pixel / self.n, pixel % self.n);
        let delta = f64::from(step);
        for &(a, hr) in &self.basis[r] {
            for &(b, hc) in &self.basis[c] {
                self.back[a * self.n + b] += delta * hr * hc;
            }
        }
    }

    /// Moves pixels in the support of coefficient `q` toward its aim, preferring
    /// moves that disturb no other coefficient and cost the least distortion.
    fn fix(&mut self, q: usize) {
        let n = self.n;
        let aim = self.targets.aim(q);
        let dir = if aim > self.back[q] { 1.0 } else { -1.0 };
        let (r0, rlen) = support(n, q / n);
        let (c0, clen) = support(n, q % n);
        let weight = 1.0 / libm::sqrt((rlen * clen) as f64);
        let moves: Vec<(usize, i16)> = (r0..r0 + rlen)
            .flat_map(|r| (c0..c0 + clen).map(move |c| r * n + c))
            .map(|pixel| {
                let step = if dir * self.basis_value(q, pixel) > 0.0 {
                    1
                } else {
                    -1
                };
                (pixel, step)
            })
            .collect();

        // Harmless moves toward the aim, cheapest first.
        let mut ranked: Vec<(f64, f64, usize, i16)> = moves
            .iter()
            .filter(|&&(pixel, step)| self.movable(pixel, step, 1.0))
            .map(|&(pixel, step)| {
                let harm = self.harm(pixel, f64::from(step), q);
                (harm, self.cost(pixel, step), pixel, step)
            })
            .filter(|m| m.0 <= 0.0)
            .collect();
        ranked.sort_by(|x, y| {
            x.0.total_cmp(&y.0)
                .then(x.1.total_cmp(&y.1))
                .then(x.2.cmp(&y.2))
        });
        for &(_, _, pixel, step) in &ranked {
            if (aim - self.back[q]).abs() <= weight / 2.0 {
                break;
            }
            if self.movable(pixel, step, 1.0) && self.harm(pixel, f64::from(step), q) <= 0.0 {
                self.apply(pixel, step);
            }
        }

        // Still misread: take the least harmful move, one at a time.
        let budget = libm::ceil(self.targets.badness(q, self.back[q]) / weight) as usize + 8;
        for _ in 0..budget {
            if self.targets.badness(q, self.back[q]) == 0.0 {
                break;
            }
            let best = moves
                .iter()
                .filter(|&&(pixel, step)| self.movable(pixel, step, STRETCH))
                .map(|&(pixel, step)| {
                    let harm = self.harm(pixel, f64::from(step), q);
                    (harm, self.cost(pixel, step), pixel, step)
                })
                .min_by(|x, y| {
                    x.0.total_cmp(&y.0)
                        .then(x.1.total_cmp(&y.1))
                        .then(x.2.cmp(&y.2))
                });
            match best {
                Some((_, _, pixel, step)) => self.apply(pixel, step),
                None => break,
            }
        }
    }
}

/// Adjusts `stego`, the rounded form of `real`, so that its forward
/// transform satisfies `targets`. Gives up silently after a fixed number of
/// passes, and does nothing when the constellation cannot fit under the
/// cutoff; callers that need a guarantee verify by extraction.
pub(crate) fn refine_rounding(stego: &mut GrayImage, real: &Matrix, targets: &Targets<'_>) {
    if !targets.feasible() {
        return;
    }
    let n = stego.side();
    let mut state = State {
        n,
        targets,
        basis: (0..n).map(|x| basis_at(n, x)).collect(),
        pixels: stego.pixels().to_vec(),
        anchor: real.values().iter().map(|v| v.clamp(0.0, 255.0)).collect(),
        back: Vec::new(),
    };
    for _ in 0..PASSES {
        let image = GrayImage::new(n, state.pixels.clone()).expect("side unchanged");
        state.back = haar::forward(&image.to_matrix()).into_values();
        let violated: Vec<usize> = (0..n * n)
            .filter(|&q| targets.badness(q, state.back[q]) > 0.0)
            .collect();
        if violated.is_empty() {
            break;
        }
        for q in violated {
            if targets.badness(q, state.back[q]) > 0.0 {
                state.fix(q);
            }
        }
    }
    *stego = GrayImage::new(n, state.pixels).expect("side unchanged");
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar::HaarMatrix;

    #[test]
    fn basis_at_matches_dense_matrix() {
        for n in [2, 8, 32] {
            let h = HaarMatrix::new(n).unwrap();
            for x in 0..n {
                let listed = basis_at(n, x);
                for row in 0..n {
                    let want = h.get(row, x);
                    let got = listed.iter().find(|e| e.0 == row).map_or(0.0, |e| e.1);
                    assert!((want - got).abs() < 1e-12, "n={n} row={row} x={x}");
                }
            }
        }
    }

    #[test]
    fn support_covers_nonzero_entries() {
        let n = 16;
        let h = HaarMatrix::new(n).unwrap();
        for row in 0..n {
            let (start, len) = support(n, row);
            for x in 0..n {
                assert_eq!(h.get(row, x) != 0.0, (start..start + len).contains(&x));
            }
        }
    }

    #[test]
    fn restores_an_erased_symbol() {
        // A flat cover with a +1.5 symbol on a 16x16-support coefficient
        // rounds straight back to the cover.
        let n = 32;
        let mut coeffs = haar::forward(&GrayImage::filled(n, 100).unwrap().to_matrix());
        let slots: Vec<Slot> = (1..n * n)
            .map(|i| Slot {
                row: i / n,
                col: i % n,
            })
            .collect();
        let target = Slot { row: 2, col: 3 };
        let symbols = slots.iter().position(|s| *s == target).unwrap() + 1;
        for s in &slots[..symbols] {
            coeffs.set(s.row, s.col, if *s == target { 1.5 } else { 0.0 });
        }
        let real = haar::inverse(&coeffs);
        let mut stego = crate::pipeline::normalize_round(&real);
        assert!(haar::forward(&stego.to_matrix()).get(2, 3).abs() < 1e-9);

        let targets = Targets::new(&coeffs, &slots, symbols, 1.5, 3.0);
        refine_rounding(&mut stego, &real, &targets);
        let back = haar::forward(&stego.to_matrix());
        assert!((back.get(2, 3) - 1.5).abs() < 1.4, "{}", back.get(2, 3));
        for (p, a) in stego.pixels().iter().zip(real.values()) {
            assert!((f64::from(*p) - a).abs() <= 1.0);
        }
    }
}
