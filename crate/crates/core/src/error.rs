use thiserror::Error;

/// Errors produced by the hiding pipeline and its building blocks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("side {0} is not a power of two >= 2")]
    SideNotPowerOfTwo(usize),
    #[error("expected {expected} pixels, got {actual}")]
    PixelCount { expected: usize, actual: usize },
    #[error("dimension mismatch: {left}x{left} vs {right}x{right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("threshold must be a finite value >= 0, got {0}")]
    NegativeThreshold(f64),
    #[error("bits per symbol must be 1, 2 or 3, got {0}")]
    InvalidBps(u8),
    #[error("bit count {len} is not a multiple of {bps}")]
    RaggedBits { len: usize, bps: u8 },
    #[error("invalid parameters: {0}")]
    InvalidParams(&'static str),
    #[error("capacity exceeded: {required} bits required, {available} bits available")]
    CapacityExceeded { required: usize, available: usize },
    #[error("self-check failed: cover unsuitable at these parameters")]
    SelfCheckFailed,
    #[error("no frame found")]
    NoFrame,
    #[error("unsupported frame version {0}")]
    FrameVersion(u8),
    #[error("frame bps {found} does not match {expected}")]
    FrameBps { found: u8, expected: u8 },
    #[error("frame truncated: {needed} bytes declared, {available} recovered")]
    FrameTruncated { needed: usize, available: usize },
    #[error("CRC mismatch")]
    CrcMismatch,
    #[error("decrypt failed: invalid padding")]
    Padding,
    #[error("ciphertext length {0} is not a positive multiple of 16 plus the IV")]
    CiphertextLength(usize),
    #[error("bad magic")]
    BadMagic,
    #[error("truncated body")]
    TruncatedBody,
    #[error("invalid huffman table")]
    InvalidHuffmanTable,
    #[error("unknown predictor id {0}")]
    UnknownPredictor(u8),
    #[error("corrupt compressed body")]
    CorruptBody,
    #[error("trailing data after compressed body")]
    TrailingData,
}

pub type Result<T> = core::result::Result<T, Error>;
