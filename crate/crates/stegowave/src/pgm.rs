//! Binary PGM (P5) reading and writing.
//!
//! Only square, power-of-two, 8-bit images are accepted. Output always uses
//! the canonical header `P5\n<side> <side>\n255\n`.

use std::fs;
use std::path::Path;

use stegowave_core::GrayImage;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PgmError {
    #[error("malformed PGM header: {0}")]
    Malformed(&'static str),
    #[error("image is not square ({width}x{height})")]
    NotSquare { width: usize, height: usize },
    #[error("side not power of two ({0})")]
    SideNotPowerOfTwo(usize),
    #[error("unsupported maxval {0} (expected 255)")]
    MaxVal(usize),
    #[error("pixel data has {actual} bytes, expected {expected}")]
    PixelData { expected: usize, actual: usize },
}

/// Splits the next whitespace-delimited header token off `rest`, skipping
/// `#` comments.
fn next_token<'a>(rest: &mut &'a [u8]) -> Option<&'a [u8]> {
    loop {
        let start = rest.iter().position(|b| !b.is_ascii_whitespace())?;
        *rest = &rest[start..];
        if rest[0] == b'#' {
            let end = rest.iter().position(|&b| b == b'\n' || b == b'\r')?;
            *rest = &rest[end..];
            continue;
        }
        let end = rest
            .iter()
            .position(|b| b.is_ascii_whitespace())
            .unwrap_or(rest.len());
        let (token, tail) = rest.split_at(end);
        *rest = tail;
        return Some(token);
    }
}

fn parse_number(rest: &mut &[u8], what: &'static str) -> Result<usize, PgmError> {
    let token = next_token(rest).ok_or(PgmError::Malformed(what))?;
    if token.is_empty() || !token.iter().all(u8::is_ascii_digit) {
        return Err(PgmError::Malformed(what));
    }
    std::str::from_utf8(token)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or(PgmError::Malformed(what))
}

/// Decodes a binary PGM.
pub fn load_pgm(bytes: &[u8]) -> Result<GrayImage, PgmError> {
    let mut rest = bytes;
    if next_token(&mut rest) != Some(b"P5".as_slice()) {
        return Err(PgmError::Malformed("missing P5 magic"));
    }
    let width = parse_number(&mut rest, "bad width")?;
    let height = parse_number(&mut rest, "bad height")?;
    let maxval = parse_number(&mut rest, "bad maxval")?;
    // exactly one whitespace byte separates the header from the raster
    match rest.split_first() {
        Some((b, tail)) if b.is_ascii_whitespace() => rest = tail,
        _ => return Err(PgmError::Malformed("missing raster separator")),
    }
    if width != height {
        return Err(PgmError::NotSquare { width, height });
    }
    if !stegowave_core::image::is_valid_side(width) {
        return Err(PgmError::SideNotPowerOfTwo(width));
    }
    if maxval != 255 {
        return Err(PgmError::MaxVal(maxval));
    }
    let expected = width * height;
    if rest.len() != expected {
        return Err(PgmError::PixelData {
            expected,
            actual: rest.len(),
        });
    }
    Ok(GrayImage::new(width, rest.to_vec()).expect("side and pixel count checked"))
}

/// Encodes `img` as a canonical binary PGM.
pub fn save_pgm(img: &GrayImage) -> Vec<u8> {
    let side = img.side();
    let mut out = format!("P5\n{side} {side}\n255\n").into_bytes();
    out.extend_from_slice(img.pixels());
    out
}

#[derive(Debug, Error)]
pub enum ReadError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Format { path: String, source: PgmError },
}

/// Reads and decodes the PGM at `path`.
pub fn read_pgm(path: &Path) -> Result<GrayImage, ReadError> {
    let bytes = fs::read(path).map_err(|source| ReadError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_pgm(&bytes).map_err(|source| ReadError::Format {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decodes_two_by_two() {
        let mut bytes = b"P5 2 2 255\n".to_vec();
        bytes.extend_from_slice(&[0, 255, 128, 64]);
        let img = load_pgm(&bytes).unwrap();
        assert_eq!(img.side(), 2);
        assert_eq!(img.pixels(), &[0, 255, 128, 64]);
    }

    #[test]
    fn encodes_canonical_header() {
        let img = GrayImage::filled(2, 0).unwrap();
        assert_eq!(save_pgm(&img), b"P5\n2 2\n255\n\0\0\0\0");
    }

    #[test]
    fn comments_are_skipped() {
        let mut bytes = b"P5\n# made by hand\n2 2\n# depth\n255\n".to_vec();
        bytes.extend_from_slice(&[1, 2, 3, 4]);
        assert_eq!(load_pgm(&bytes).unwrap().pixels(), &[1, 2, 3, 4]);
    }

    #[test]
    fn raster_may_start_with_whitespace_bytes() {
        let mut bytes = b"P5 2 2 255\n".to_vec();
        bytes.extend_from_slice(&[b' ', b'\n', 9, 10]);
        assert_eq!(load_pgm(&bytes).unwrap().pixels(), &[32, 10, 9, 10]);
    }

    #[test]
    fn rejects_bad_inputs() {
        let raster = |n: usize| vec![0u8; n];
        let with = |h: &str, n| [h.as_bytes(), &raster(n)].concat();
        assert!(matches!(
            load_pgm(b"P2 2 2 255\n"),
            Err(PgmError::Malformed(_))
        ));
        assert!(matches!(load_pgm(b""), Err(PgmError::Malformed(_))));
        assert!(matches!(
            load_pgm(b"P5 2 x 255\n"),
            Err(PgmError::Malformed(_))
        ));
        assert!(matches!(
            load_pgm(b"P5 2 2 255"),
            Err(PgmError::Malformed(_))
        ));
        assert!(matches!(
            load_pgm(&with("P5 4 2 255\n", 8)),
            Err(PgmError::NotSquare {
                width: 4,
                height: 2
            })
        ));
        assert!(matches!(
            load_pgm(&with("P5 255 255 255\n", 255 * 255)),
            Err(PgmError::SideNotPowerOfTwo(255))
        ));
        assert!(matches!(
            load_pgm(&with("P5 2 2 65535\n", 8)),
            Err(PgmError::MaxVal(65535))
        ));
        assert!(matches!(
            load_pgm(&with("P5 2 2 255\n", 3)),
            Err(PgmError::PixelData {
                expected: 4,
                actual: 3
            })
        ));
        assert!(matches!(
            load_pgm(&with("P5 2 2 255\n", 5)),
            Err(PgmError::PixelData {
                expected: 4,
                actual: 5
            })
        ));
    }

    #[test]
    fn side_error_message() {
        let err =
            load_pgm(&[b"P5 255 255 255\n".as_slice(), &[0; 255 * 255]].concat()).unwrap_err();
        assert!(err.to_string().contains("side not power of two"));
    }
}
