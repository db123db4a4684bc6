//! SHAKE256-based streams, digests and seed expansion.

use sha3::digest::{ExtendableOutput, Update, XofReader};
use sha3::{Shake256, Shake256Reader};

use crate::params::{ParamSet, KEY_BYTES, N, Q, SEED_A_BYTES, SEED_SK_BYTES};
use crate::ring::{mulq, Poly};

/// Squeeze granularity of SHAKE256.
pub const BLOCK_BYTES: usize = 136;

/// One domain byte per stream role.
pub mod domain {
    pub const MATRIX: u8 = 0x01;
    pub const A_VECTOR: u8 = 0x02;
    pub const SECRET: u8 = 0x03;
    pub const YBB: u8 = 0x04;
    pub const TRANSCRIPT: u8 = 0x05;
    pub const CHALLENGE: u8 = 0x06;
    pub const H_GEN: u8 = 0x07;
    pub const PUBLIC_KEY: u8 = 0x08;
    pub const KAT: u8 = 0x09;
}

/// Deterministic, restartable byte stream keyed by `(seed, domain, nonce)`.
pub struct XofStream {
    reader: Shake256Reader,
    block: [u8; BLOCK_BYTES],
    pos: usize,
    blocks: u64,
}

impl XofStream {
    pub fn new(seed: &[u8], domain: u8, nonce: u16) -> Self {
        debug_assert!(seed.len() <= 64);
        let mut h = Shake256::default();
        h.update(seed);
        h.update(&[domain]);
        h.update(&nonce.to_le_bytes());
        XofStream {
            reader: h.finalize_xof(),
            block: [0; BLOCK_BYTES],
            pos: BLOCK_BYTES,
            blocks: 0,
        }
    }

    fn refill(&mut self) {
        self.reader.read(&mut self.block);
        self.pos = 0;
        self.blocks += 1;
    }

    #[inline]
    pub fn next_byte(&mut self) -> u8 {
        if self.pos == BLOCK_BYTES {
            self.refill();
        }
        let b = self.block[self.pos];
        self.pos += 1;
        b
    }

    pub fn fill(&mut self, out: &mut [u8]) {
        for b in out {
            *b = self.next_byte();
        }
    }

    pub fn next_u16(&mut self) -> u16 {
        u16::from_le_bytes([self.next_byte(), self.next_byte()])
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut b = [0u8; 8];
        self.fill(&mut b);
        u64::from_le_bytes(b)
    }

    /// Discards `n` bytes.
    pub fn skip(&mut self, mut n: u64) {
        while n > 0 {
            if self.pos == BLOCK_BYTES {
                self.refill();
            }
            let take = n.min((BLOCK_BYTES - self.pos) as u64);
            self.pos += take as usize;
            n -= take;
        }
    }

    /// Number of blocks squeezed so far.
    pub fn blocks_squeezed(&self) -> u64 {
        self.blocks
    }
}

/// Incremental transcript digest. Absorbing in pieces equals absorbing the concatenation.
#[derive(Clone)]
pub struct TranscriptHasher(Shake256);

impl Default for TranscriptHasher {
    fn default() -> Self {
        Self::new()
    }
}

impl TranscriptHasher {
    pub fn new() -> Self {
        let mut h = Shake256::default();
        h.update(&[domain::TRANSCRIPT]);
        TranscriptHasher(h)
    }

    pub fn absorb(&mut self, bytes: &[u8]) {
        self.0.update(bytes);
    }

    pub fn finalize(self, out: &mut [u8]) {
        self.0.finalize_xof().read(out);
    }
}

/// Domain-separated digest of length-prefixed parts.
pub fn h_gen(parts: &[&[u8]], out: &mut [u8]) {
    let mut h = Shake256::default();
    h.update(&[domain::H_GEN]);
    for p in parts {
        h.update(&(p.len() as u64).to_le_bytes());
        h.update(p);
    }
    h.finalize_xof().read(out);
}

/// Digest of a public key.
pub fn hash_pk(pk: &[u8], out: &mut [u8]) {
    let mut h = Shake256::default();
    h.update(&[domain::PUBLIC_KEY]);
    h.update(pk);
    h.finalize_xof().read(out);
}

#[derive(Clone, Copy, PartialEq, Eq, bytemuck::Zeroable, bytemuck::Pod)]
#[repr(C)]
pub struct KeySeeds {
    pub seed_a: [u8; SEED_A_BYTES],
    pub seed_sk: [u8; SEED_SK_BYTES],
    pub key: [u8; KEY_BYTES],
}

/// Splits the master seed into the matrix seed, secret seed and signing key.
pub fn expand_seed(seed: &[u8]) -> KeySeeds {
    let mut buf = [0u8; SEED_A_BYTES + SEED_SK_BYTES + KEY_BYTES];
    h_gen(&[seed], &mut buf);
    let mut s = KeySeeds {
        seed_a: [0; SEED_A_BYTES],
        seed_sk: [0; SEED_SK_BYTES],
        key: [0; KEY_BYTES],
    };
    s.seed_a.copy_from_slice(&buf[..SEED_A_BYTES]);
    s.seed_sk.copy_from_slice(&buf[SEED_A_BYTES..SEED_A_BYTES + SEED_SK_BYTES]);
    s.key.copy_from_slice(&buf[SEED_A_BYTES + SEED_SK_BYTES..]);
    s
}

/// Uniform mod-q coefficients, one at a time, by 16-bit rejection.
pub struct UniformStream(XofStream);

impl UniformStream {
    /// Entry `(i, j)` of the generated matrix part, already in the NTT domain.
    pub fn matrix(seed_a: &[u8], i: usize, j: usize) -> Self {
        UniformStream(XofStream::new(seed_a, domain::MATRIX, ((i as u16) << 8) | j as u16))
    }

    /// Polynomial `a_i` used to build the first matrix column of truncated keys.
    pub fn a_vector(seed_a: &[u8], i: usize) -> Self {
        UniformStream(XofStream::new(seed_a, domain::A_VECTOR, i as u16))
    }

    #[inline]
    pub fn next_coeff(&mut self) -> i32 {
        loop {
            let v = self.0.next_u16() as i32;
            if v < Q {
                return v;
            }
        }
    }

    pub fn fill(mut self, out: &mut Poly) {
        for c in out.coeffs.iter_mut() {
            *c = self.next_coeff();
        }
    }

    /// `acc += stream ∘ b_hat` without materializing the streamed polynomial.
    pub fn mul_acc(mut self, acc: &mut Poly, b_hat: &Poly) {
        for (c, &b) in acc.coeffs.iter_mut().zip(b_hat.coeffs.iter()) {
            *c = (*c + mulq(self.next_coeff(), b)) % Q;
        }
    }
}

pub fn expand_a_entry(seed_a: &[u8], i: usize, j: usize, out: &mut Poly) {
    UniformStream::matrix(seed_a, i, j).fill(out);
}

pub fn expand_a_vector(seed_a: &[u8], i: usize, out: &mut Poly) {
    UniformStream::a_vector(seed_a, i).fill(out);
}

/// Nonce of secret polynomial `index` (generated s part first, then e) for a keygen attempt.
pub fn secret_nonce(params: &ParamSet, counter: u32, index: usize) -> Option<u16> {
    let per = (params.l - 1 + params.k) as u64;
    u16::try_from(counter as u64 * per + index as u64).ok()
}

/// Uniform coefficients in `[-eta, eta]` by nibble rejection, one at a time.
pub struct SecretStream {
    xof: XofStream,
    eta: i32,
    width: u8,
    bound: u8,
    pending: Option<u8>,
}

impl SecretStream {
    pub fn new(seed_sk: &[u8], nonce: u16, eta: i32) -> Self {
        let width = (2 * eta + 1) as u8;
        SecretStream {
            xof: XofStream::new(seed_sk, domain::SECRET, nonce),
            eta,
            width,
            bound: width * (16 / width),
            pending: None,
        }
    }

    #[inline]
    pub fn next_coeff(&mut self) -> i32 {
        loop {
            let nib = match self.pending.take() {
                Some(n) => n,
                None => {
                    let b = self.xof.next_byte();
                    self.pending = Some(b >> 4);
                    b & 15
                }
            };
            if nib < self.bound {
                return self.eta - (nib % self.width) as i32;
            }
        }
    }
}

pub fn expand_s(seed_sk: &[u8], nonce: u16, eta: i32, out: &mut Poly) {
    let mut st = SecretStream::new(seed_sk, nonce, eta);
    for c in out.coeffs.iter_mut() {
        *c = st.next_coeff();
    }
}

/// Binary challenge with exactly `tau` ones, by Fisher-Yates over the XOF.
pub fn sample_challenge(rho: &[u8], tau: usize, out: &mut Poly) {
    let mut st = XofStream::new(rho, domain::CHALLENGE, 0);
    *out = Poly::zero();
    for i in N - tau..N {
        let j = loop {
            let b = st.next_byte() as usize;
            if b <= i {
                break b;
            }
        };
        out.coeffs[i] = out.coeffs[j];
        out.coeffs[j] = 1;
    }
}
