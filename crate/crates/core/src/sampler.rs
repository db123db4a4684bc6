//! Hyperball sampler for the signing mask.
//!
//! Each Gaussian sample consumes exactly 8 stream bytes: 63 bits drive a
//! constant-time scan of the cumulative table and 1 bit gives the sign. That
//! fixed stride lets any mask component be regenerated by skipping ahead.
//! After the `(l + k) * n` samples the stream yields one byte whose low two
//! bits are the signer's auxiliary bits.

use crate::error::{Error, Result};
use crate::hashing::{domain, XofStream};
use crate::params::{ParamSet, N};
use crate::ring::{Poly, PolyVec};

pub const SAMPLE_BYTES: u64 = 8;
const FRAC_BITS: u32 = 32;

/// Cumulative table for |X| of a centered discrete Gaussian:
/// `T[m] = 2^63 - floor(2^63 * P(|X| > m))`, cut once the tail drops below 2^-64.
pub fn cdt_table(sigma: f64) -> Vec<u64> {
    let rho = |x: f64| (-(x * x) / (2.0 * sigma * sigma)).exp();
    let mut total = 1.0;
    let mut x = 1.0;
    loop {
        let t = 2.0 * rho(x);
        if t < 1e-30 * total {
            break;
        }
        total += t;
        x += 1.0;
    }
    let cut = (-64f64).exp2();
    let mut table = Vec::new();
    let mut m = 0.0;
    loop {
        // tail summed from the far end keeps relative precision for small probabilities
        let mut tail = 0.0;
        let mut y = x;
        while y > m {
            tail += 2.0 * rho(y);
            y -= 1.0;
        }
        let tail = tail / total;
        table.push((1u64 << 63) - (tail * 2f64.powi(63)).floor() as u64);
        if tail < cut {
            break;
        }
        m += 1.0;
    }
    table
}

/// Discrete Gaussian samples read straight off an [`XofStream`].
pub struct GaussStream<'a> {
    xof: XofStream,
    cdt: &'a [u64],
}

impl<'a> GaussStream<'a> {
    pub fn new(xof: XofStream, cdt: &'a [u64]) -> Self {
        GaussStream { xof, cdt }
    }

    /// Opens the mask stream for `nonce`, positioned at sample `index`.
    pub fn for_mask(seed: &[u8], nonce: u16, cdt: &'a [u64], index: u64) -> Self {
        let mut xof = XofStream::new(seed, domain::YBB, nonce);
        xof.skip(index * SAMPLE_BYTES);
        GaussStream { xof, cdt }
    }

    #[inline]
    pub fn sample(&mut self) -> i32 {
        let v = self.xof.next_u64();
        let r = v >> 1;
        let mut mag = 0i32;
        for &t in self.cdt {
            mag += (r >= t) as i32;
        }
        let neg = (v & 1) as i32;
        mag - 2 * neg * mag
    }

    /// Byte following the sample block.
    pub fn aux_byte(&mut self) -> u8 {
        self.xof.next_byte()
    }
}

/// `floor(2^32 * radius / sqrt(s))`, or `None` for the degenerate `s = 0`.
pub fn inv_sqrt(s: u64, b0: u64, lambda: u64) -> Option<u64> {
    if s == 0 {
        return None;
    }
    let r = (b0 * lambda) as u128;
    let num = (r * r) << (2 * FRAC_BITS);
    Some((num / s as u128).isqrt() as u64)
}

/// Round-half-away-from-zero of `alpha * x` with `alpha` in 32-bit fixed point.
#[inline]
pub fn scale_round(alpha: u64, x: i32) -> i32 {
    let m = ((alpha * x.unsigned_abs() as u64 + (1 << (FRAC_BITS - 1))) >> FRAC_BITS) as i32;
    if x < 0 {
        -m
    } else {
        m
    }
}

/// An accepted mask draw: enough to regenerate any component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Accepted {
    pub nonce: u16,
    pub alpha: u64,
    pub b: u8,
    pub b_prime: u8,
}

fn dims(params: &ParamSet) -> u64 {
    (params.l + params.k) as u64
}

fn radius_sq(params: &ParamSet) -> u64 {
    let r = params.hyperball_radius();
    r * r
}

/// Tries one nonce without storing samples: pass 1 sums squares, pass 2
/// recomputes the scaled norm.
pub fn try_nonce(seed: &[u8], nonce: u16, params: &ParamSet) -> Option<Accepted> {
    let count = dims(params) * N as u64;
    let mut g = GaussStream::for_mask(seed, nonce, &params.cdt, 0);
    let mut s = 0u64;
    for _ in 0..count {
        let x = g.sample() as i64;
        s += (x * x) as u64;
    }
    let alpha = inv_sqrt(s, params.b0, params.lambda_scale)?;
    let mut g = GaussStream::for_mask(seed, nonce, &params.cdt, 0);
    let mut norm = 0u64;
    for _ in 0..count {
        let y = scale_round(alpha, g.sample()) as i64;
        norm += (y * y) as u64;
    }
    if norm > radius_sq(params) {
        return None;
    }
    let aux = g.aux_byte();
    Some(Accepted {
        nonce,
        alpha,
        b: aux & 1,
        b_prime: (aux >> 1) & 1,
    })
}

/// First accepted nonce at or after `start`.
pub fn find_accepted(seed: &[u8], start: u16, params: &ParamSet) -> Result<Accepted> {
    let mut nonce = start;
    loop {
        if let Some(a) = try_nonce(seed, nonce, params) {
            return Ok(a);
        }
        nonce = nonce.checked_add(1).ok_or(Error::IterationCap(u16::MAX as u32 + 1))?;
    }
}

/// Scaled mask coefficients of one component, produced on demand.
pub struct MaskComponent<'a> {
    g: GaussStream<'a>,
    alpha: u64,
}

impl<'a> MaskComponent<'a> {
    /// Component `idx` counts y1 parts first (`0..l`), then y2 parts.
    pub fn new(seed: &[u8], acc: &Accepted, idx: usize, cdt: &'a [u64]) -> Self {
        MaskComponent {
            g: GaussStream::for_mask(seed, acc.nonce, cdt, (idx * N) as u64),
            alpha: acc.alpha,
        }
    }

    #[inline]
    pub fn next_coeff(&mut self) -> i32 {
        scale_round(self.alpha, self.g.sample())
    }
}

/// Writes mask component `idx` as signed integers.
pub fn regenerate_component(seed: &[u8], acc: &Accepted, idx: usize, params: &ParamSet, out: &mut Poly) {
    let mut m = MaskComponent::new(seed, acc, idx, &params.cdt);
    for c in out.coeffs.iter_mut() {
        *c = m.next_coeff();
    }
}

/// Streamed two-pass sampler writing into caller outputs. Returns the accepted draw.
pub fn hyperball_two_pass(seed: &[u8], nonce: u16, params: &ParamSet, y1: &mut [Poly], y2: &mut [Poly]) -> Result<Accepted> {
    debug_assert_eq!(y1.len(), params.l);
    debug_assert_eq!(y2.len(), params.k);
    let count = dims(params) * N as u64;
    let mut nonce = nonce;
    loop {
        let mut g = GaussStream::for_mask(seed, nonce, &params.cdt, 0);
        let mut s = 0u64;
        for _ in 0..count {
            let x = g.sample() as i64;
            s += (x * x) as u64;
        }
        if let Some(alpha) = inv_sqrt(s, params.b0, params.lambda_scale) {
            let mut g = GaussStream::for_mask(seed, nonce, &params.cdt, 0);
            let mut norm = 0u64;
            for p in y1.iter_mut().chain(y2.iter_mut()) {
                for c in p.coeffs.iter_mut() {
                    *c = scale_round(alpha, g.sample());
                    norm += (*c as i64 * *c as i64) as u64;
                }
            }
            if norm <= radius_sq(params) {
                let aux = g.aux_byte();
                return Ok(Accepted { nonce, alpha, b: aux & 1, b_prime: (aux >> 1) & 1 });
            }
        }
        nonce = nonce.checked_add(1).ok_or(Error::IterationCap(u16::MAX as u32 + 1))?;
    }
}

#[derive(Debug, Clone)]
pub struct OnePass {
    pub y1: PolyVec,
    pub y2: PolyVec,
    pub alpha: Option<u64>,
    pub accepted: bool,
    pub b: u8,
    pub b_prime: u8,
}

/// Buffered oracle: draws every sample into one array, then scales and tests.
pub fn hyperball_one_pass_oracle(seed: &[u8], nonce: u16, params: &ParamSet) -> OnePass {
    let (l, k) = (params.l, params.k);
    let mut g = GaussStream::new(XofStream::new(seed, domain::YBB, nonce), &params.cdt);
    let xs: Vec<i32> = (0..(l + k) * N).map(|_| g.sample()).collect();
    let aux = g.aux_byte();
    let s: u64 = xs.iter().map(|&x| (x as i64 * x as i64) as u64).sum();
    let alpha = inv_sqrt(s, params.b0, params.lambda_scale);
    let ys: Vec<i32> = xs.iter().map(|&x| alpha.map_or(0, |a| scale_round(a, x))).collect();
    let norm: u64 = ys.iter().map(|&y| (y as i64 * y as i64) as u64).sum();
    let poly = |i: usize| Poly::from_fn(|j| ys[i * N + j]);
    OnePass {
        y1: PolyVec((0..l).map(poly).collect()),
        y2: PolyVec((l..l + k).map(poly).collect()),
        alpha,
        accepted: alpha.is_some() && norm <= radius_sq(params),
        b: aux & 1,
        b_prime: (aux >> 1) & 1,
    }
}
