//! AES-128 (FIPS-197) block cipher with CBC chaining and PKCS#7 padding.

use alloc::vec::Vec;

use crate::error::{Error, Result};

pub const BLOCK_LEN: usize = 16;
pub const KEY_LEN: usize = 16;
const ROUNDS: usize = 10;

pub type Block = [u8; BLOCK_LEN];

#[rustfmt::skip]
pub const SBOX: [u8; 256] = [
    0x63, 0x7c, 0x77, 0x7b, 0xf2, 0x6b, 0x6f, 0xc5, 0x30, 0x01, 0x67, 0x2b, 0xfe, 0xd7, 0xab, 0x76,
    0xca, 0x82, 0xc9, 0x7d, 0xfa, 0x59, 0x47, 0xf0, 0xad, 0xd4, 0xa2, 0xaf, 0x9c, 0xa4, 0x72, 0xc0,
    0xb7, 0xfd, 0x93, 0x26, 0x36, 0x3f, 0xf7, 0xcc, 0x34, 0xa5, 0xe5, 0xf1, 0x71, 0xd8, 0x31, 0x15,
    0x04, 0xc7, 0x23, 0xc3, 0x18, 0x96, 0x05, 0x9a, 0x07, 0x12, 0x80, 0xe2, 0xeb, 0x27, 0xb2, 0x75,
    0x09, 0x83, 0x2c, 0x1a, 0x1b, 0x6e, 0x5a, 0xa0, 0x52, 0x3b, 0xd6, 0xb3, 0x29, 0xe3, 0x2f, 0x84,
    0x53, 0xd1, 0x00, 0xed, 0x20, 0xfc, 0xb1, 0x5b, 0x6a, 0xcb, 0xbe, 0x39, 0x4a, 0x4c, 0x58, 0xcf,
    0xd0, 0xef, 0xaa, 0xfb, 0x43, 0x4d, 0x33, 0x85, 0x45, 0xf9, 0x02, 0x7f, 0x50, 0x3c, 0x9f, 0xa8,
    0x51, 0xa3, 0x40, 0x8f, 0x92, 0x9d, 0x38, 0xf5, 0xbc, 0xb6, 0xda, 0x21, 0x10, 0xff, 0xf3, 0xd2,
    0xcd, 0x0c, 0x13, 0xec, 0x5f, 0x97, 0x44, 0x17, 0xc4, 0xa7, 0x7e, 0x3d, 0x64, 0x5d, 0x19, 0x73,
    0x60, 0x81, 0x4f, 0xdc, 0x22, 0x2a, 0x90, 0x88, 0x46, 0xee, 0xb8, 0x14, 0xde, 0x5e, 0x0b, 0xdb,
    0xe0, 0x32, 0x3a, 0x0a, 0x49, 0x06, 0x24, 0x5c, 0xc2, 0xd3, 0xac, 0x62, 0x91, 0x95, 0xe4, 0x79,
    0xe7, 0xc8, 0x37, 0x6d, 0x8d, 0xd5, 0x4e, 0xa9, 0x6c, 0x56, 0xf4, 0xea, 0x65, 0x7a, 0xae, 0x08,
    0xba, 0x78, 0x25, 0x2e, 0x1c, 0xa6, 0xb4, 0xc6, 0xe8, 0xdd, 0x74, 0x1f, 0x4b, 0xbd, 0x8b, 0x8a,
    0x70, 0x3e, 0xb5, 0x66, 0x48, 0x03, 0xf6, 0x0e, 0x61, 0x35, 0x57, 0xb9, 0x86, 0xc1, 0x1d, 0x9e,
    0xe1, 0xf8, 0x98, 0x11, 0x69, 0xd9, 0x8e, 0x94, 0x9b, 0x1e, 0x87, 0xe9, 0xce, 0x55, 0x28, 0xdf,
    0x8c, 0xa1, 0x89, 0x0d, 0xbf, 0xe6, 0x42, 0x68, 0x41, 0x99, 0x2d, 0x0f, 0xb0, 0x54, 0xbb, 0x16,
];

const INV_SBOX: [u8; 256] = invert(&SBOX);

const RCON: [u8; ROUNDS] = [0x01, 0x02, 0x04, 0x08, 0x10, 0x20, 0x40, 0x80, 0x1b, 0x36];

const fn invert(table: &[u8; 256]) -> [u8; 256] {
    let mut inv = [0u8; 256];
    let mut i = 0;
    while i < 256 {
        inv[table[i] as usize] = i as u8;
        i += 1;
    }
    inv
}

/// 128-bit key shared by sender and receiver.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct SecretKey([u8; KEY_LEN]);

impl SecretKey {
    pub const fn new(bytes: [u8; KEY_LEN]) -> Self {
        Self(bytes)
    }

    pub fn from_slice(bytes: &[u8]) -> Result<Self> {
        let arr: [u8; KEY_LEN] = bytes
            .try_into()
            .map_err(|_| Error::InvalidParams("key must be exactly 16 bytes"))?;
        Ok(Self(arr))
    }

    pub fn as_bytes(&self) -> &[u8; KEY_LEN] {
        &self.0
    }
}

impl core::fmt::Debug for SecretKey {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str("SecretKey(..)")
    }
}

/// Expanded key schedule. Immutable once built.
#[derive(Clone)]
pub struct Aes128 {
    round_keys: [Block; ROUNDS + 1],
    sbox: [u8; 256],
    inv_sbox: [u8; 256],
}

impl Aes128 {
    pub fn new(key: &SecretKey) -> Self {
        Self::with_tables(key, SBOX, INV_SBOX)
    }

    /// Builds a cipher around a caller-supplied S-box. Only useful for
    /// fault-injection checks of the known-answer test.
    #[doc(hidden)]
    pub fn with_sbox(key: &SecretKey, sbox: [u8; 256]) -> Self {
        Self::with_tables(key, sbox, invert(&sbox))
    }

    fn with_tables(key: &SecretKey, sbox: [u8; 256], inv_sbox: [u8; 256]) -> Self {
        let mut words = [[0u8; 4]; 4 * (ROUNDS + 1)];
        for (i, w) in words.iter_mut().take(4).enumerate() {
            w.copy_from_slice(&key.0[4 * i..4 * i + 4]);
        }
        for i in 4..words.len() {
            let mut temp = words[i - 1];
            if i % 4 == 0 {
                temp.rotate_left(1);
                for b in temp.iter_mut() {
                    *b = sbox[usize::from(*b)];
                }
                temp[0] ^= RCON[i / 4 - 1];
            }
            for j in 0..4 {
                words[i][j] = words[i - 4][j] ^ temp[j];
            }
        }
        let mut round_keys = [[0u8; BLOCK_LEN]; ROUNDS + 1];
        for (r, rk) in round_keys.iter_mut().enumerate() {
            for c in 0..4 {
                rk[4 * c..4 * c + 4].copy_from_slice(&words[4 * r + c]);
            }
        }
        Self {
            round_keys,
            sbox,
            inv_sbox,
        }
    }

    pub fn encrypt_block(&self, block: &Block) -> Block {
        let mut s = *block;
        add_round_key(&mut s, &self.round_keys[0]);
        for round in 1..ROUNDS {
            sub_bytes(&mut s, &self.sbox);
            shift_rows(&mut s);
            mix_columns(&mut s);
            add_round_key(&mut s, &self.round_keys[round]);
        }
        sub_bytes(&mut s, &self.sbox);
        shift_rows(&mut s);
        add_round_key(&mut s, &self.round_keys[ROUNDS]);
        s
    }

    pub fn decrypt_block(&self, block: &Block) -> Block {
        let mut s = *block;
        add_round_key(&mut s, &self.round_keys[ROUNDS]);
        for round in (1..ROUNDS).rev() {
            inv_shift_rows(&mut s);
            sub_bytes(&mut s, &self.inv_sbox);
            add_round_key(&mut s, &self.round_keys[round]);
            inv_mix_columns(&mut s);
        }
        inv_shift_rows(&mut s);
        sub_bytes(&mut s, &self.inv_sbox);
        add_round_key(&mut s, &self.round_keys[0]);
        s
    }
}

// State byte (row r, column c) lives at index 4c + r.

fn add_round_key(s: &mut Block, rk: &Block) {
    for (b, k) in s.iter_mut().zip(rk) {
        *b ^= k;
    }
}

fn sub_bytes(s: &mut Block, table: &[u8; 256]) {
    for b in s.iter_mut() {
        *b = table[usize::from(*b)];
    }
}

fn shift_rows(s: &mut Block) {
    let old = *s;
    for r in 1..4 {
        for c in 0..4 {
            s[4 * c + r] = old[4 * ((c + r) % 4) + r];
        }
    }
}

fn inv_shift_rows(s: &mut Block) {
    let old = *s;
    for r in 1..4 {
        for c in 0..4 {
            s[4 * ((c + r) % 4) + r] = old[4 * c + r];
        }
    }
}

fn xtime(b: u8) -> u8 {
    (b << 1) ^ if b & 0x80 != 0 { 0x1b } else { 0 }
}

fn gmul(mut a: u8, mut b: u8) -> u8 {
    let mut p = 0;
    while b != 0 {
        if b & 1 != 0 {
            p ^= a;
        }
        a = xtime(a);
        b >>= 1;
    }
    p
}

fn mix_columns(s: &mut Block) {
    for col in s.chunks_exact_mut(4) {
        let [a0, a1, a2, a3] = [col[0], col[1], col[2], col[3]];
        col[0] = xtime(a0) ^ (xtime(a1) ^ a1) ^ a2 ^ a3;
        col[1] = a0 ^ xtime(a1) ^ (xtime(a2) ^ a2) ^ a3;
        col[2] = a0 ^ a1 ^ xtime(a2) ^ (xtime(a3) ^ a3);
        col[3] = (xtime(a0) ^ a0) ^ a1 ^ a2 ^ xtime(a3);
    }
}

fn inv_mix_columns(s: &mut Block) {
    for col in s.chunks_exact_mut(4) {
        let [a0, a1, a2, a3] = [col[0], col[1], col[2], col[3]];
        col[0] = gmul(a0, 14) ^ gmul(a1, 11) ^ gmul(a2, 13) ^ gmul(a3, 9);
        col[1] = gmul(a0, 9) ^ gmul(a1, 14) ^ gmul(a2, 11) ^ gmul(a3, 13);
        col[2] = gmul(a0, 13) ^ gmul(a1, 9) ^ gmul(a2, 14) ^ gmul(a3, 11);
        col[3] = gmul(a0, 11) ^ gmul(a1, 13) ^ gmul(a2, 9) ^ gmul(a3, 14);
    }
}

pub fn encrypt_block(block: &Block, key: &SecretKey) -> Block {
    Aes128::new(key).encrypt_block(block)
}

pub fn decrypt_block(block: &Block, key: &SecretKey) -> Block {
    Aes128::new(key).decrypt_block(block)
}

/// CBC output: the IV followed by the padded, chained body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CipherText {
    pub iv: Block,
    pub body: Vec<u8>,
}

impl CipherText {
    /// Body length for a plaintext of `len` bytes.
    pub fn body_len(len: usize) -> usize {
        BLOCK_LEN * (len / BLOCK_LEN + 1)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(BLOCK_LEN + self.body.len());
        out.extend_from_slice(&self.iv);
        out.extend_from_slice(&self.body);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 2 * BLOCK_LEN || !bytes.len().is_multiple_of(BLOCK_LEN) {
            return Err(Error::CiphertextLength(bytes.len()));
        }
        let (iv, body) = bytes.split_at(BLOCK_LEN);
        Ok(Self {
            iv: iv.try_into().expect("split at block length"),
            body: body.to_vec(),
        })
    }
}

/// PKCS#7-pads `data` and CBC-encrypts it under `key` starting from `iv`.
pub fn encrypt(data: &[u8], key: &SecretKey, iv: &Block) -> CipherText {
    let cipher = Aes128::new(key);
    let pad = BLOCK_LEN - data.len() % BLOCK_LEN;
    let mut body = Vec::with_capacity(data.len() + pad);
    body.extend_from_slice(data);
    body.resize(data.len() + pad, pad as u8);

    let mut prev = *iv;
    for chunk in body.chunks_exact_mut(BLOCK_LEN) {
        let mut block: Block = chunk.try_into().expect("exact chunk");
        for (b, p) in block.iter_mut().zip(&prev) {
            *b ^= p;
        }
        prev = cipher.encrypt_block(&block);
        chunk.copy_from_slice(&prev);
    }
    CipherText { iv: *iv, body }
}

/// CBC-decrypts and strips PKCS#7 padding.
pub fn decrypt(ct: &CipherText, key: &SecretKey) -> Result<Vec<u8>> {
    if ct.body.is_empty() || !ct.body.len().is_multiple_of(BLOCK_LEN) {
        return Err(Error::CiphertextLength(ct.body.len() + BLOCK_LEN));
    }
    let cipher = Aes128::new(key);
    let mut out = Vec::with_capacity(ct.body.len());
    let mut prev = ct.iv;
    for chunk in ct.body.chunks_exact(BLOCK_LEN) {
        let block: Block = chunk.try_into().expect("exact chunk");
        let mut plain = cipher.decrypt_block(&block);
        for (b, p) in plain.iter_mut().zip(&prev) {
            *b ^= p;
        }
        out.extend_from_slice(&plain);
        prev = block;
    }
    let pad = usize::from(*out.last().expect("non-empty body"));
    if pad == 0
        || pad > BLOCK_LEN
        || out[out.len() - pad..]
            .iter()
            .any(|&b| usize::from(b) != pad)
    {
        return Err(Error::Padding);
    }
    out.truncate(out.len() - pad);
    Ok(out)
}
