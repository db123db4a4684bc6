//! Spectral norm of the secret: per-frequency squared magnitudes over the
//! 256 primitive 512th roots of unity, accumulated across polynomials.
//!
//! A real polynomial's spectrum comes in conjugate pairs, so 128 complex
//! points suffice: fold `u_m = s_m + i s_{m+128}`, twist by `e^{iπm/256}` and
//! run a 128-point DFT. Each output is written to two bins.

use std::f64::consts::PI;

use crate::params::N;
use crate::ring::Poly;

pub const FFT_POINTS: usize = N / 2;
/// Interleaved `(re, im)` f64 pairs.
pub const FFT_WORDS: usize = 2 * FFT_POINTS;
pub const FFT_WORKSPACE_BYTES: usize = FFT_WORDS * 8;
pub const NORM_BYTES: usize = N * 8;
/// Fractional bits of a quantized bin.
pub const BIN_FRAC_BITS: u32 = 16;

/// Places coefficient `m` of the folded input.
#[inline]
pub fn load_coeff(ws: &mut [f64], m: usize, v: i32) {
    if m < FFT_POINTS {
        ws[2 * m] = v as f64;
    } else {
        ws[2 * (m - FFT_POINTS) + 1] = v as f64;
    }
}

fn twist(ws: &mut [f64]) {
    for m in 0..FFT_POINTS {
        let (s, c) = (PI * m as f64 / N as f64).sin_cos();
        let (re, im) = (ws[2 * m], ws[2 * m + 1]);
        ws[2 * m] = re * c - im * s;
        ws[2 * m + 1] = re * s + im * c;
    }
}

/// In-place radix-2 DFT with kernel `e^{+2πi km/128}`.
pub fn fft(ws: &mut [f64]) {
    let n = FFT_POINTS;
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if i < j {
            ws.swap(2 * i, 2 * j);
            ws.swap(2 * i + 1, 2 * j + 1);
        }
    }
    let mut len = 2;
    while len <= n {
        let step = 2.0 * PI / len as f64;
        for start in (0..n).step_by(len) {
            for k in 0..len / 2 {
                let (s, c) = (step * k as f64).sin_cos();
                let (a, b) = (start + k, start + k + len / 2);
                let (br, bi) = (ws[2 * b], ws[2 * b + 1]);
                let (tr, ti) = (br * c - bi * s, br * s + bi * c);
                let (ar, ai) = (ws[2 * a], ws[2 * a + 1]);
                ws[2 * a] = ar + tr;
                ws[2 * a + 1] = ai + ti;
                ws[2 * b] = ar - tr;
                ws[2 * b + 1] = ai - ti;
            }
        }
        len <<= 1;
    }
}

/// Squared magnitude in fixed point.
#[inline]
fn quantize(re: f64, im: f64) -> u64 {
    ((re * re + im * im) * (1u64 << BIN_FRAC_BITS) as f64).round() as u64
}

/// Per-bin accumulator of squared spectral magnitudes (`n` 64-bit bins).
pub struct NormAccumulator<'a> {
    bins: &'a mut [u64],
}

impl<'a> NormAccumulator<'a> {
    pub fn new(bins: &'a mut [u64]) -> Self {
        assert_eq!(bins.len(), N);
        bins.fill(0);
        NormAccumulator { bins }
    }

    pub fn reset(&mut self) {
        self.bins.fill(0);
    }

    pub fn bins(&self) -> &[u64] {
        self.bins
    }

    /// Adds the spectrum of the folded input already loaded into `ws`.
    pub fn accumulate_loaded(&mut self, ws: &mut [f64]) {
        twist(ws);
        fft(ws);
        for k in 0..FFT_POINTS {
            let v = quantize(ws[2 * k], ws[2 * k + 1]);
            self.bins[2 * k] += v;
            self.bins[2 * k + 1] += v;
        }
    }

    /// Adds the spectrum of `p` using `ws` (256 f64) as scratch.
    pub fn accumulate(&mut self, ws: &mut [f64], p: &Poly) {
        for (m, &c) in p.coeffs.iter().enumerate() {
            load_coeff(ws, m, c);
        }
        self.accumulate_loaded(ws);
    }

    pub fn max_bin(&self) -> u64 {
        self.bins.iter().copied().max().unwrap_or(0)
    }

    /// Passes iff the largest bin is at most `gamma_sq_n`.
    pub fn check(&self, gamma_sq_n: u64) -> bool {
        self.max_bin() <= gamma_sq_n << BIN_FRAC_BITS
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spectrum(p: &Poly) -> Vec<u64> {
        let mut bins = vec![0u64; N];
        let mut ws = vec![0f64; FFT_WORDS];
        NormAccumulator::new(&mut bins).accumulate(&mut ws, p);
        bins
    }

    /// Direct evaluation at every primitive 512th root of unity.
    fn direct(p: &Poly) -> Vec<f64> {
        let mut out: Vec<f64> = (0..N)
            .map(|k| {
                let theta = PI * (2 * k + 1) as f64 / N as f64;
                let (mut re, mut im) = (0.0, 0.0);
                for (m, &c) in p.coeffs.iter().enumerate() {
                    let (s, co) = (theta * m as f64).sin_cos();
                    re += c as f64 * co;
                    im += c as f64 * s;
                }
                re * re + im * im
            })
            .collect();
        out.sort_by(f64::total_cmp);
        out
    }

    #[test]
    fn zero_and_unit() {
        assert!(spectrum(&Poly::zero()).iter().all(|&b| b == 0));
        assert!(spectrum(&Poly::one()).iter().all(|&b| b == 1 << BIN_FRAC_BITS));
    }

    #[test]
    fn check_threshold() {
        let mut bins = vec![0u64; N];
        let mut acc = NormAccumulator::new(&mut bins);
        assert!(acc.check(1));
        let mut ws = vec![0f64; FFT_WORDS];
        acc.accumulate(&mut ws, &Poly::one());
        assert!(!acc.check(0));
        assert!(acc.check(1));
        acc.reset();
        assert_eq!(acc.max_bin(), 0);
    }

    proptest! {
        #[test]
        fn parseval(v in prop::collection::vec(-3i32..=3, N)) {
            let p = Poly::from_fn(|i| v[i]);
            let total: u64 = spectrum(&p).iter().sum();
            let expect = (N as u64 * v.iter().map(|&c| (c * c) as u64).sum::<u64>()) << BIN_FRAC_BITS;
            prop_assert!(total.abs_diff(expect) <= N as u64, "{} vs {}", total, expect);
        }

        #[test]
        fn matches_direct_evaluation(v in prop::collection::vec(-2i32..=2, N)) {
            let p = Poly::from_fn(|i| v[i]);
            let mut fast: Vec<f64> = spectrum(&p).iter().map(|&b| b as f64 / 65536.0).collect();
            fast.sort_by(f64::total_cmp);
            for (a, b) in fast.iter().zip(direct(&p)) {
                prop_assert!((a - b).abs() < 1e-3, "{} vs {}", a, b);
            }
        }
    }
}
