//! Decompositions, entropy coding and fixed-size byte layouts.

pub mod overlay;
pub mod pack;
pub mod rans;

pub use overlay::HbHintOverlay;
pub use pack::SigView;

use crate::params::Q;

const Q2: i32 = 2 * Q;

/// Splits `z = 256 * hb + lb` with `lb` in `[0, 256)`.
#[inline]
pub fn decompose_z1(z: i32) -> (i32, u8) {
    (z.div_euclid(256), z.rem_euclid(256) as u8)
}

#[inline]
pub fn recompose_z1(hb: i32, lb: u8) -> i32 {
    hb * 256 + lb as i32
}

/// Number of high-bit values for a mod-2q input: `2(q - 1) / alpha_h`.
#[inline]
pub fn hint_modulus(alpha_h: i32) -> i32 {
    2 * (Q - 1) / alpha_h
}

/// Rounded high bits of `w` in `[0, 2q)`, wrapping the top value to 0.
#[inline]
pub fn highbits_h(w: i32, alpha_h: i32) -> i32 {
    debug_assert!((0..Q2).contains(&w));
    let a = alpha_h;
    let hb = (w + a / 2) / a;
    if hb == hint_modulus(alpha_h) {
        0
    } else {
        hb
    }
}

/// Hint `HB(w) - HB(w - 2 z2)` mod M for `w` in `[0, 2q)`.
#[inline]
pub fn make_hint(w: i32, z2: i32, alpha_h: i32) -> i32 {
    let shifted = (w - 2 * z2).rem_euclid(Q2);
    (highbits_h(w, alpha_h) - highbits_h(shifted, alpha_h)).rem_euclid(hint_modulus(alpha_h))
}

/// Maps a hint in `[0, M)` to its centered coding symbol.
#[inline]
pub fn hint_symbol(h: i32, m: i32) -> i32 {
    if h < m / 2 {
        h
    } else {
        h - m
    }
}

#[inline]
pub fn hint_from_symbol(s: i32, m: i32) -> i32 {
    s.rem_euclid(m)
}

/// Verifier-side high bits of `w`: `h + HB(v)` mod M, where `v = w - 2 z2` mod 2q.
#[inline]
pub fn use_hint(h: i32, v: i32, alpha_h: i32) -> i32 {
    (h + highbits_h(v, alpha_h)).rem_euclid(hint_modulus(alpha_h))
}

/// Estimate of `z2` from the recovered high bits `w1` of `w`, the value
/// `v = w - 2 z2` mod 2q and the parity bit of `w`. The error is at most
/// `alpha_h / 4 + 1` in absolute value.
#[inline]
pub fn recover_z2(w1: i32, v: i32, parity: u8, alpha_h: i32) -> i32 {
    let t = (alpha_h * w1 + parity as i32 - v).rem_euclid(Q2);
    let t = if t > Q2 / 2 { t - Q2 } else { t };
    debug_assert!(t % 2 == 0);
    t / 2
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn z1_examples() {
        assert_eq!(decompose_z1(0), (0, 0));
        assert_eq!(decompose_z1(600), (2, 88));
        assert_eq!(decompose_z1(-5), (-1, 251));
        assert_eq!(recompose_z1(-1, 251), -5);
    }

    #[test]
    fn highbits_examples() {
        assert_eq!(highbits_h(0, 512), 0);
        assert_eq!(highbits_h(255, 512), 0);
        assert_eq!(highbits_h(256, 512), 1);
        assert_eq!(highbits_h(Q2 - 1, 512), 0);
        assert_eq!(highbits_h(Q2 - 1, 256), 0);
        assert_eq!(hint_modulus(512), 252);
        assert_eq!(hint_modulus(256), 504);
        for w in [0, 1, 777, 64512, Q2 - 1] {
            assert_eq!(make_hint(w, 0, 512), 0);
        }
    }

    #[test]
    fn hint_symbols() {
        let m = 252;
        for h in 0..m {
            let s = hint_symbol(h, m);
            assert!((-m / 2..m / 2).contains(&s));
            assert_eq!(hint_from_symbol(s, m), h);
        }
    }

    proptest! {
        #[test]
        fn z1_round_trip(z in -100_000i32..100_000) {
            let (hb, lb) = decompose_z1(z);
            prop_assert_eq!(recompose_z1(hb, lb), z);
        }

        #[test]
        fn z2_recovery_is_close(w in 0..Q2, z2 in -4000i32..4000, wide in any::<bool>()) {
            let alpha = if wide { 256 } else { 512 };
            let v = (w - 2 * z2).rem_euclid(Q2);
            let h = make_hint(w, z2, alpha);
            let w1 = use_hint(h, v, alpha);
            prop_assert_eq!(w1, highbits_h(w, alpha));
            let est = recover_z2(w1, v, (w & 1) as u8, alpha);
            prop_assert!((est - z2).abs() <= alpha / 4 + 1, "{} vs {}", est, z2);
        }
    }
}
