//! Lossless byte compressor used on the payload before ciphering.
//!
//! Blob layout (big-endian):
//!
//! ```text
//! "SWC1" | predictor_id: u8 | original_len: u32 | [code lengths: 128 bytes] | body
//! ```
//!
//! `predictor_id = 1`: residuals `r_0 = d_0`, `r_i = d_i - d_{i-1} (mod 256)`.
//! A zero residual is tokenised as `0, c` meaning a run of `c + 1` zeros
//! (1..=256); other residuals are their own token. Tokens are coded with a
//! canonical Huffman code of at most 15 bits; the 256 code lengths are
//! stored as nibbles, high nibble first. The body is MSB-first and
//! zero-padded to a byte boundary.
//!
//! `predictor_id = 255`: the body is the input verbatim. Chosen whenever
//! the coded form would not be smaller.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"SWC1";
pub const HEADER_LEN: usize = 9;
const TABLE_LEN: usize = 128;
pub const MAX_CODE_LEN: u8 = 15;
const MAX_RUN: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Predictor {
    Left,
    Raw,
}

impl Predictor {
    pub fn id(self) -> u8 {
        match self {
            Predictor::Left => 1,
            Predictor::Raw => 255,
        }
    }

    fn from_id(id: u8) -> Result<Self> {
        match id {
            1 => Ok(Predictor::Left),
            255 => Ok(Predictor::Raw),
            other => Err(Error::UnknownPredictor(other)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompressedBlob {
    pub predictor: Predictor,
    pub original_len: u32,
    /// Present for [`Predictor::Left`] only.
    pub code_lengths: Option<[u8; 256]>,
    pub body: Vec<u8>,
}

impl CompressedBlob {
    pub fn encoded_len(&self) -> usize {
        HEADER_LEN + self.code_lengths.map_or(0, |_| TABLE_LEN) + self.body.len()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_len());
        out.extend_from_slice(&MAGIC);
        out.push(self.predictor.id());
        out.extend_from_slice(&self.original_len.to_be_bytes());
        if let Some(lengths) = &self.code_lengths {
            out.extend(lengths.chunks_exact(2).map(|p| (p[0] << 4) | p[1]));
        }
        out.extend_from_slice(&self.body);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < MAGIC.len() || bytes[..4] != MAGIC {
            return Err(Error::BadMagic);
        }
        if bytes.len() < HEADER_LEN {
            return Err(Error::TruncatedBody);
        }
        let predictor = Predictor::from_id(bytes[4])?;
        let original_len = u32::from_be_bytes(bytes[5..9].try_into().expect("4 bytes"));
        let rest = &bytes[HEADER_LEN..];
        match predictor {
            Predictor::Raw => Ok(Self {
                predictor,
                original_len,
                code_lengths: None,
                body: rest.to_vec(),
            }),
            Predictor::Left => {
                if rest.len() < TABLE_LEN {
                    return Err(Error::TruncatedBody);
                }
                let mut lengths = [0u8; 256];
                for (i, &b) in rest[..TABLE_LEN].iter().enumerate() {
                    lengths[2 * i] = b >> 4;
                    lengths[2 * i + 1] = b & 0x0f;
                }
                Ok(Self {
                    predictor,
                    original_len,
                    code_lengths: Some(lengths),
                    body: rest[TABLE_LEN..].to_vec(),
                })
            }
        }
    }
}

pub fn compress(data: &[u8]) -> CompressedBlob {
    let original_len = u32::try_from(data.len()).expect("payload larger than 4 GiB");
    let raw = CompressedBlob {
        predictor: Predictor::Raw,
        original_len,
        code_lengths: None,
        body: data.to_vec(),
    };
    if data.is_empty() {
        return raw;
    }

    let tokens = tokenize(data);
    let mut freq = [0u64; 256];
    for &t in &tokens {
        freq[usize::from(t)] += 1;
    }
    let lengths = code_lengths(&freq, MAX_CODE_LEN);
    let codes = canonical_codes(&lengths);

    let coded_bits: u64 = freq
        .iter()
        .zip(&lengths)
        .map(|(&f, &l)| f * u64::from(l))
        .sum();
    let coded_len = HEADER_LEN as u64 + TABLE_LEN as u64 + coded_bits.div_ceil(8);
    if coded_len >= raw.encoded_len() as u64 {
        return raw;
    }

    let mut w = BitWriter::default();
    for &t in &tokens {
        let (code, len) = codes[usize::from(t)];
        w.put(code, len);
    }
    CompressedBlob {
        predictor: Predictor::Left,
        original_len,
        code_lengths: Some(lengths),
        body: w.finish(),
    }
}

pub fn decompress(blob: &CompressedBlob) -> Result<Vec<u8>> {
    let n = blob.original_len as usize;
    match blob.predictor {
        Predictor::Raw => {
            if blob.body.len() < n {
                Err(Error::TruncatedBody)
            } else if blob.body.len() > n {
                Err(Error::TrailingData)
            } else {
                Ok(blob.body.clone())
            }
        }
        Predictor::Left => {
            let lengths = blob
                .code_lengths
                .as_ref()
                .ok_or(Error::InvalidHuffmanTable)?;
            let decoder = Decoder::new(lengths)?;
            if n > 0 && decoder.symbols.is_empty() {
                return Err(Error::InvalidHuffmanTable);
            }
            let mut r = BitReader::new(&blob.body);
            let mut out = Vec::with_capacity(n);
            let mut prev = 0u8;
            while out.len() < n {
                let t = decoder.next(&mut r)?;
                if t == 0 {
                    let run = usize::from(decoder.next(&mut r)?) + 1;
                    if out.len() + run > n {
                        return Err(Error::CorruptBody);
                    }
                    out.extend(core::iter::repeat_n(prev, run));
                } else {
                    prev = prev.wrapping_add(t);
                    out.push(prev);
                }
            }
            if r.remaining_bits() >= 8 {
                return Err(Error::TrailingData);
            }
            Ok(out)
        }
    }
}

pub fn compress_bytes(data: &[u8]) -> Vec<u8> {
    compress(data).to_bytes()
}

pub fn decompress_bytes(bytes: &[u8]) -> Result<Vec<u8>> {
    decompress(&CompressedBlob::from_bytes(bytes)?)
}

/// Size of the blob that `compress` produces for incompressible input of `len` bytes.
pub fn raw_blob_len(len: usize) -> usize {
    HEADER_LEN + len
}

fn tokenize(data: &[u8]) -> Vec<u8> {
    let mut tokens = Vec::with_capacity(data.len());
    let mut prev = 0u8;
    let mut run = 0usize;
    for &d in data {
        let r = d.wrapping_sub(prev);
        prev = d;
        if r == 0 {
            run += 1;
            if run == MAX_RUN {
                tokens.extend_from_slice(&[0, (MAX_RUN - 1) as u8]);
                run = 0;
            }
            continue;
        }
        if run > 0 {
            tokens.extend_from_slice(&[0, (run - 1) as u8]);
            run = 0;
        }
        tokens.push(r);
    }
    if run > 0 {
        tokens.extend_from_slice(&[0, (run - 1) as u8]);
    }
    tokens
}

/// Huffman code lengths for `freq`, capped at `limit` bits.
/// Ties in the merge order are broken by lowest symbol value.
pub fn code_lengths(freq: &[u64; 256], limit: u8) -> [u8; 256] {
    let mut lengths = [0u8; 256];
    let used: Vec<usize> = (0..256).filter(|&s| freq[s] > 0).collect();
    match used.len() {
        0 => return lengths,
        1 => {
            lengths[used[0]] = 1;
            return lengths;
        }
        _ => {}
    }

    // parent links over leaves 0..256 and internal nodes 256..
    let mut parent: Vec<usize> = vec![usize::MAX; 256];
    let mut heap = BinaryHeap::new();
    for &s in &used {
        heap.push(Reverse((freq[s], s)));
    }
    while heap.len() > 1 {
        let Reverse((wa, a)) = heap.pop().expect("len > 1");
        let Reverse((wb, b)) = heap.pop().expect("len > 1");
        let node = parent.len();
        parent.push(usize::MAX);
        parent[a] = node;
        parent[b] = node;
        heap.push(Reverse((wa + wb, node)));
    }

    let mut depth = vec![0u32; 256];
    for &s in &used {
        let mut d = 0;
        let mut n = s;
        while parent[n] != usize::MAX {
            n = parent[n];
            d += 1;
        }
        depth[s] = d;
    }

    let max_depth = used.iter().map(|&s| depth[s]).max().unwrap_or(0) as usize;
    let mut count = vec![0u32; max_depth.max(usize::from(limit)) + 1];
    for &s in &used {
        count[depth[s] as usize] += 1;
    }
    // Move overlong codes up while keeping the Kraft sum at one.
    let limit = usize::from(limit);
    for i in (limit + 1..count.len()).rev() {
        while count[i] > 0 {
            let mut j = i - 2;
            while count[j] == 0 {
                j -= 1;
            }
            count[i] -= 2;
            count[i - 1] += 1;
            count[j + 1] += 2;
            count[j] -= 1;
        }
    }

    let mut order = used;
    order.sort_by_key(|&s| (depth[s], s));
    let mut it = order.into_iter();
    for (len, &c) in count.iter().enumerate().take(limit + 1) {
        for _ in 0..c {
            let s = it.next().expect("counts match symbols");
            lengths[s] = len as u8;
        }
    }
    lengths
}

/// `(code, length)` per symbol, assigned in (length, symbol) order.
pub fn canonical_codes(lengths: &[u8; 256]) -> [(u32, u8); 256] {
    let mut codes = [(0u32, 0u8); 256];
    let mut order: Vec<usize> = (0..256).filter(|&s| lengths[s] > 0).collect();
    order.sort_by_key(|&s| (lengths[s], s));
    let mut code = 0u32;
    let mut prev_len = 0u8;
    for s in order {
        let len = lengths[s];
        code <<= len - prev_len;
        codes[s] = (code, len);
        code += 1;
        prev_len = len;
    }
    codes
}

struct Decoder {
    /// Symbols sorted by (length, value).
    symbols: Vec<u8>,
    count: [u32; MAX_CODE_LEN as usize + 1],
}

impl Decoder {
    fn new(lengths: &[u8; 256]) -> Result<Self> {
        let mut count = [0u32; MAX_CODE_LEN as usize + 1];
        for &l in lengths.iter() {
            if l > MAX_CODE_LEN {
                return Err(Error::InvalidHuffmanTable);
            }
            if l > 0 {
                count[usize::from(l)] += 1;
            }
        }
        // Kraft sum must not exceed one.
        let mut kraft: u64 = 0;
        for (len, &c) in count.iter().enumerate().skip(1) {
            kraft += u64::from(c) << (MAX_CODE_LEN as usize - len);
        }
        if kraft > 1 << MAX_CODE_LEN {
            return Err(Error::InvalidHuffmanTable);
        }
        let mut symbols: Vec<u8> = (0..=255u8)
            .filter(|&s| lengths[usize::from(s)] > 0)
            .collect();
        symbols.sort_by_key(|&s| (lengths[usize::from(s)], s));
        Ok(Self { symbols, count })
    }

    fn next(&self, r: &mut BitReader<'_>) -> Result<u8> {
        let mut code: u32 = 0;
        let mut first: u32 = 0;
        let mut index: u32 = 0;
        for len in 1..=usize::from(MAX_CODE_LEN) {
            code |= u32::from(r.bit().ok_or(Error::TruncatedBody)?);
            let c = self.count[len];
            if code < first + c {
                return Ok(self.symbols[(index + code - first) as usize]);
            }
            index += c;
            first = (first + c) << 1;
            code <<= 1;
        }
        Err(Error::CorruptBody)
    }
}

#[derive(Default)]
struct BitWriter {
    out: Vec<u8>,
    acc: u8,
    filled: u8,
}

impl BitWriter {
    fn put(&mut self, code: u32, len: u8) {
        for shift in (0..len).rev() {
            self.acc = (self.acc << 1) | ((code >> shift) & 1) as u8;
            self.filled += 1;
            if self.filled == 8 {
                self.out.push(self.acc);
                self.acc = 0;
                self.filled = 0;
            }
        }
    }

    fn finish(mut self) -> Vec<u8> {
        if self.filled > 0 {
            self.out.push(self.acc << (8 - self.filled));
        }
        self.out
    }
}

struct BitReader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> BitReader<'a> {
    fn new(data: &'a [u8]) -> Self {
        Self { data, pos: 0 }
    }

    fn bit(&mut self) -> Option<u8> {
        let byte = *self.data.get(self.pos / 8)?;
        let b = (byte >> (7 - self.pos % 8)) & 1;
        self.pos += 1;
        Some(b)
    }

    fn remaining_bits(&self) -> usize {
        self.data.len() * 8 - self.pos
    }
}
