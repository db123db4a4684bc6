//! Fixed-size layouts of keys and signatures.
//!
//! Public key: `seed_A ‖ t_0 ‖ … ‖ t_{k-1}` where `t_i` is the 15-bit high
//! part of `b_i` for truncated keys, or the 16-bit NTT-domain `b̂_i` otherwise.
//!
//! Secret key: `pk ‖ s_gen (l - 1 polys) ‖ s2 (k polys) ‖ K`, small
//! coefficients stored as `bound - s`.
//!
//! Signature: `c (n bits) ‖ LB(z1) (l·n bytes) ‖ len_hb (u16 LE) ‖ len_h (u16 LE)
//! ‖ rANS(HB(z1)) ‖ rANS(h) ‖ zero padding`.

use crate::codec::rans::RansError;
use crate::error::{Error, Result};
use crate::params::{ParamSet, C_BYTES, KEY_BYTES, N, Q, SEED_A_BYTES, SIG_LEN_HEADER};
use crate::ring::Poly;

/// Reads coefficient `i` of a little-endian bit-packed array.
#[inline]
pub fn read_bits(bytes: &[u8], bits: u32, i: usize) -> u32 {
    let start = i * bits as usize;
    let mut v = 0u32;
    for b in 0..bits as usize {
        let pos = start + b;
        v |= (((bytes[pos / 8] >> (pos % 8)) & 1) as u32) << b;
    }
    v
}

/// Packs unsigned coefficients, `bits` each.
pub fn pack_unsigned(p: &Poly, bits: u32, out: &mut [u8]) {
    let len = N * bits as usize / 8;
    out[..len].fill(0);
    let mut acc = 0u64;
    let mut filled = 0;
    let mut pos = 0;
    for &c in &p.coeffs {
        debug_assert!((c as u64) < 1 << bits);
        acc |= (c as u64) << filled;
        filled += bits;
        while filled >= 8 {
            out[pos] = acc as u8;
            pos += 1;
            acc >>= 8;
            filled -= 8;
        }
    }
}

pub fn unpack_unsigned(bytes: &[u8], bits: u32, out: &mut Poly) {
    let mut acc = 0u64;
    let mut filled = 0;
    let mut pos = 0;
    let mask = (1u64 << bits) - 1;
    for c in out.coeffs.iter_mut() {
        while filled < bits {
            acc |= (bytes[pos] as u64) << filled;
            pos += 1;
            filled += 8;
        }
        *c = (acc & mask) as i32;
        acc >>= bits;
        filled -= bits;
    }
}

/// Packs coefficients in `[-bound, bound]` as `bound - c`.
pub fn pack_small(p: &Poly, bound: i32, bits: u32, out: &mut [u8]) {
    let shifted = Poly::from_fn(|i| bound - p.coeffs[i]);
    pack_unsigned(&shifted, bits, out);
}

/// Inverse of [`pack_small`]; rejects out-of-range values.
pub fn unpack_small(bytes: &[u8], bound: i32, bits: u32, out: &mut Poly) -> Result<()> {
    unpack_unsigned(bytes, bits, out);
    for c in out.coeffs.iter_mut() {
        if *c > 2 * bound {
            return Err(Error::Malformed("secret key coefficient"));
        }
        *c = bound - *c;
    }
    Ok(())
}

/// Coefficient `i` of a packed small polynomial, read in place.
#[inline]
pub fn small_coeff(bytes: &[u8], bound: i32, bits: u32, i: usize) -> i32 {
    bound - read_bits(bytes, bits, i) as i32
}

pub fn check_len(what: &'static str, bytes: &[u8], expected: usize) -> Result<()> {
    if bytes.len() != expected {
        return Err(Error::Length { what, expected, actual: bytes.len() });
    }
    Ok(())
}

pub fn pk_seed_a(pk: &[u8]) -> &[u8] {
    &pk[..SEED_A_BYTES]
}

fn pk_poly_range(params: &ParamSet, i: usize) -> std::ops::Range<usize> {
    let start = SEED_A_BYTES + i * params.pk_poly_bytes();
    start..start + params.pk_poly_bytes()
}

pub fn write_pk_poly(pk: &mut [u8], i: usize, p: &Poly, params: &ParamSet) {
    pack_unsigned(p, params.pk_coeff_bits(), &mut pk[pk_poly_range(params, i)]);
}

/// Public-key row `i`, validated against its coefficient range.
pub fn read_pk_poly(pk: &[u8], i: usize, params: &ParamSet, out: &mut Poly) -> Result<()> {
    unpack_unsigned(&pk[pk_poly_range(params, i)], params.pk_coeff_bits(), out);
    let max = (Q - 1) >> params.d;
    if out.coeffs.iter().any(|&c| c > max) {
        return Err(Error::Malformed("public key coefficient"));
    }
    Ok(())
}

pub fn sk_s1_bytes<'a>(sk: &'a [u8], j: usize, params: &ParamSet) -> &'a [u8] {
    let o = params.sk_s1_offset(j);
    &sk[o..o + params.s1_poly_bytes()]
}

pub fn sk_s2_bytes<'a>(sk: &'a [u8], i: usize, params: &ParamSet) -> &'a [u8] {
    let o = params.sk_s2_offset(i);
    &sk[o..o + params.s2_poly_bytes()]
}

pub fn sk_key<'a>(sk: &'a [u8], params: &ParamSet) -> &'a [u8] {
    &sk[params.sk_key_offset()..params.sk_key_offset() + KEY_BYTES]
}

pub fn write_sk_s1(sk: &mut [u8], j: usize, p: &Poly, params: &ParamSet) {
    let o = params.sk_s1_offset(j);
    pack_small(p, params.eta, params.s1_bits(), &mut sk[o..o + params.s1_poly_bytes()]);
}

pub fn write_sk_s2(sk: &mut [u8], i: usize, p: &Poly, params: &ParamSet) {
    let o = params.sk_s2_offset(i);
    pack_small(p, params.s2_bound(), params.s2_bits(), &mut sk[o..o + params.s2_poly_bytes()]);
}

pub fn read_sk_s1(sk: &[u8], j: usize, params: &ParamSet, out: &mut Poly) -> Result<()> {
    unpack_small(sk_s1_bytes(sk, j, params), params.eta, params.s1_bits(), out)
}

pub fn read_sk_s2(sk: &[u8], i: usize, params: &ParamSet, out: &mut Poly) -> Result<()> {
    unpack_small(sk_s2_bytes(sk, i, params), params.s2_bound(), params.s2_bits(), out)
}

/// Validates every packed secret coefficient.
pub fn check_sk(sk: &[u8], params: &ParamSet) -> Result<()> {
    check_len("secret key", sk, params.sk_bytes)?;
    let mut p = Poly::zero();
    for j in 0..params.m() {
        read_sk_s1(sk, j, params, &mut p)?;
    }
    for i in 0..params.k {
        read_sk_s2(sk, i, params, &mut p)?;
    }
    for i in 0..params.k {
        read_pk_poly(sk, i, params, &mut p)?;
    }
    Ok(())
}

pub fn pack_challenge(c: &Poly, out: &mut [u8]) {
    out[..C_BYTES].fill(0);
    for (i, &v) in c.coeffs.iter().enumerate() {
        out[i / 8] |= ((v & 1) as u8) << (i % 8);
    }
}

pub fn unpack_challenge(bytes: &[u8], out: &mut Poly) {
    for i in 0..N {
        out.coeffs[i] = ((bytes[i / 8] >> (i % 8)) & 1) as i32;
    }
}

pub fn sig_lb_offset() -> usize {
    C_BYTES
}

pub fn sig_header_offset(params: &ParamSet) -> usize {
    C_BYTES + params.l * N
}

pub fn sig_payload_offset(params: &ParamSet) -> usize {
    sig_header_offset(params) + SIG_LEN_HEADER
}

pub fn write_sig_header(sig: &mut [u8], len_hb: usize, len_h: usize, params: &ParamSet) {
    let o = sig_header_offset(params);
    sig[o..o + 2].copy_from_slice(&(len_hb as u16).to_le_bytes());
    sig[o + 2..o + 4].copy_from_slice(&(len_h as u16).to_le_bytes());
}

/// Assembles a signature from its parts. Payloads over budget are an overflow.
pub fn pack_sig(c: &Poly, lb: &[u8], hb: &[u8], h: &[u8], params: &ParamSet) -> Result<Vec<u8>> {
    let budget = params.payload_budget();
    if hb.len() + h.len() > budget {
        return Err(RansError::Overflow { capacity: budget }.into());
    }
    let mut sig = vec![0u8; params.sig_bytes];
    pack_challenge(c, &mut sig[..C_BYTES]);
    sig[sig_lb_offset()..sig_header_offset(params)].copy_from_slice(lb);
    write_sig_header(&mut sig, hb.len(), h.len(), params);
    let p = sig_payload_offset(params);
    sig[p..p + hb.len()].copy_from_slice(hb);
    sig[p + hb.len()..p + hb.len() + h.len()].copy_from_slice(h);
    Ok(sig)
}

/// Borrowed, validated view of a signature. No region is copied.
#[derive(Debug, Clone)]
pub struct SigView<'a> {
    raw: &'a [u8],
    l: usize,
    hb: std::ops::Range<usize>,
    h: std::ops::Range<usize>,
}

impl<'a> SigView<'a> {
    /// Checks total length, payload lengths and zero padding.
    pub fn parse(raw: &'a [u8], params: &ParamSet) -> Result<Self> {
        check_len("signature", raw, params.sig_bytes)?;
        let o = sig_header_offset(params);
        let len_hb = u16::from_le_bytes([raw[o], raw[o + 1]]) as usize;
        let len_h = u16::from_le_bytes([raw[o + 2], raw[o + 3]]) as usize;
        if len_hb + len_h > params.payload_budget() {
            return Err(Error::Malformed("signature payload length"));
        }
        let p = sig_payload_offset(params);
        let end = p + len_hb + len_h;
        if raw[end..].iter().any(|&b| b != 0) {
            return Err(Error::Malformed("signature padding"));
        }
        Ok(SigView {
            raw,
            l: params.l,
            hb: p..p + len_hb,
            h: p + len_hb..end,
        })
    }

    pub fn raw(&self) -> &'a [u8] {
        self.raw
    }

    pub fn challenge_bytes(&self) -> &'a [u8] {
        &self.raw[..C_BYTES]
    }

    /// All low bytes of z1, column-major by polynomial.
    pub fn lb(&self) -> &'a [u8] {
        &self.raw[C_BYTES..C_BYTES + self.l * N]
    }

    pub fn lb_column(&self, j: usize) -> &'a [u8] {
        &self.raw[C_BYTES + j * N..C_BYTES + (j + 1) * N]
    }

    pub fn hb_stream(&self) -> &'a [u8] {
        &self.raw[self.hb.clone()]
    }

    pub fn h_stream(&self) -> &'a [u8] {
        &self.raw[self.h.clone()]
    }
}
