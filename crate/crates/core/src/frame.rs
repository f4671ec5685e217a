//! Length-and-checksum container written into the embedding slots.
//!
//! ```text
//! "SWH1" | version: u8 = 1 | bps: u8 | ct_len: u32 BE | crc32: u32 BE | ciphertext
//! ```
//!
//! `ciphertext` is the IV followed by the CBC body; `crc32` is the IEEE
//! CRC-32 of those bytes.

use alloc::vec::Vec;

use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"SWH1";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 14;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PayloadFrame {
    pub bps: u8,
    pub ciphertext: Vec<u8>,
}

impl PayloadFrame {
    pub fn new(bps: u8, ciphertext: Vec<u8>) -> Self {
        Self { bps, ciphertext }
    }

    pub fn encoded_len(&self) -> usize {
        HEADER_LEN + self.ciphertext.len()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let ct_len = u32::try_from(self.ciphertext.len()).expect("ciphertext under 4 GiB");
        let mut out = Vec::with_capacity(self.encoded_len());
        out.extend_from_slice(&MAGIC);
        out.push(VERSION);
        out.push(self.bps);
        out.extend_from_slice(&ct_len.to_be_bytes());
        out.extend_from_slice(&crc32fast::hash(&self.ciphertext).to_be_bytes());
        out.extend_from_slice(&self.ciphertext);
        out
    }

    /// Parses a frame from the front of `bytes`; trailing bytes are ignored.
    pub fn parse(bytes: &[u8], expected_bps: u8) -> Result<Self> {
        let header = Header::parse(bytes)?;
        if header.bps != expected_bps {
            return Err(Error::FrameBps {
                found: header.bps,
                expected: expected_bps,
            });
        }
        let end = HEADER_LEN + header.ct_len;
        if bytes.len() < end {
            return Err(Error::FrameTruncated {
                needed: end,
                available: bytes.len(),
            });
        }
        let ciphertext = bytes[HEADER_LEN..end].to_vec();
        if crc32fast::hash(&ciphertext) != header.crc32 {
            return Err(Error::CrcMismatch);
        }
        Ok(Self {
            bps: header.bps,
            ciphertext,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Header {
    pub bps: u8,
    pub ct_len: usize,
    pub crc32: u32,
}

impl Header {
    pub fn parse(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN || bytes[..4] != MAGIC {
            return Err(Error::NoFrame);
        }
        if bytes[4] != VERSION {
            return Err(Error::FrameVersion(bytes[4]));
        }
        Ok(Self {
            bps: bytes[5],
            ct_len: u32::from_be_bytes(bytes[6..10].try_into().expect("4 bytes")) as usize,
            crc32: u32::from_be_bytes(bytes[10..14].try_into().expect("4 bytes")),
        })
    }
}
