//! Signing: buffered reference signer and the pass-decomposed streamed signer.
//!
//! Both signers walk the same nonce sequence and take the same decision at
//! every iteration, so their outputs are byte-identical. All randomness is
//! derived from the signing key and the message.

mod streamed;

pub use streamed::{sign_arena_bytes, sign_streamed, sign_streamed_traced};

use crate::codec::{self, pack, rans};
use crate::error::{Error, Result};
use crate::hashing::{h_gen, hash_pk, sample_challenge, TranscriptHasher, UniformStream};
use crate::params::{ParamSet, N, Q};
use crate::ring::{center, from_crt, inv_ntt, ntt, pointwise_mul_acc, pointwise_mul_assign, schoolbook_negacyclic, Poly, PolyVec};
use crate::sampler::{find_accepted, regenerate_component, Accepted};
use crate::workspace::WorkArena;
use crate::ExecPath;

/// Why one sampled nonce did or did not produce a signature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    /// First response component over its bound.
    RejectFirst,
    /// Full response norm over its bound.
    RejectNorm,
    /// Second acceptance clause failed.
    RejectReflect,
    /// A payload symbol fell outside its table or the payload overflowed.
    Encode,
    Accept,
}

/// One iteration of the signing loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Iteration {
    pub nonce: u16,
    pub outcome: Outcome,
}

pub fn sign(sk: &[u8], msg: &[u8], params: &ParamSet, path: ExecPath, arena: &WorkArena) -> Result<Vec<u8>> {
    match path {
        ExecPath::Reference => sign_reference(sk, msg, params),
        ExecPath::Streamed => sign_streamed(sk, msg, params, arena),
    }
}

/// Message digest bound to the public key.
pub fn message_digest(pk: &[u8], msg: &[u8], params: &ParamSet, out: &mut [u8]) {
    let mut tr = [0u8; 64];
    let tr = &mut tr[..params.tr_bytes];
    hash_pk(pk, tr);
    h_gen(&[tr, msg], &mut out[..params.mu_bytes]);
}

/// Seed of the mask sampler.
pub(crate) fn mask_seed(key: &[u8], mu: &[u8], out: &mut [u8]) {
    h_gen(&[key, mu], out);
}

pub(crate) fn next_nonce(nonce: u16) -> Result<u16> {
    nonce.checked_add(1).ok_or(Error::IterationCap(u16::MAX as u32 + 1))
}

/// Writes the NTT-domain first-column entry of row `row` into `out`.
pub fn first_column(pk: &[u8], row: usize, params: &ParamSet, out: &mut Poly) -> Result<()> {
    if params.d == 0 {
        pack::read_pk_poly(pk, row, params, out)
    } else {
        pk_column_stream(pk, row, params, out)
    }
}

/// `NTT(2 (a_row - 2 b1_row))` for truncated keys, built in place in `out`.
pub fn pk_column_stream(pk: &[u8], row: usize, params: &ParamSet, out: &mut Poly) -> Result<()> {
    debug_assert!(params.d > 0);
    pack::read_pk_poly(pk, row, params, out)?;
    let mut a = UniformStream::a_vector(pack::pk_seed_a(pk), row);
    for c in out.coeffs.iter_mut() {
        *c = (2 * (a.next_coeff() - 2 * *c)).rem_euclid(Q);
    }
    ntt(out);
    Ok(())
}

/// `z += (-1)^b c ⋆ s` for a binary challenge `c`, by signed shifts of `s`.
pub fn sparse_mul_acc(z: &mut Poly, c: &Poly, s: &Poly, b: u8) {
    let sign = 1 - 2 * (b & 1) as i32;
    for (i, &ci) in c.coeffs.iter().enumerate() {
        if ci == 0 {
            continue;
        }
        for j in 0..i {
            z.coeffs[j] -= sign * s.coeffs[j + N - i];
        }
        for j in i..N {
            z.coeffs[j] += sign * s.coeffs[j - i];
        }
    }
}

/// `z += (-1)^b c ⋆ s`, sparse for truncated keys and through `c_hat` otherwise.
/// `s` is consumed as scratch. `c` holds coefficients (d > 0) or the NTT of `c` (d = 0).
pub(crate) fn challenge_mul_acc(z: &mut Poly, c: &Poly, s: &mut Poly, b: u8, params: &ParamSet) {
    if params.d > 0 {
        sparse_mul_acc(z, c, s, b);
        return;
    }
    let sign = 1 - 2 * (b & 1) as i32;
    s.reduce();
    ntt(s);
    pointwise_mul_assign(s, c);
    inv_ntt(s);
    for (zc, &v) in z.coeffs.iter_mut().zip(s.coeffs.iter()) {
        *zc += sign * center(v as i64, Q as i64) as i32;
    }
}

/// Coefficient `i` of a packed challenge.
#[inline]
pub(crate) fn challenge_bit(c_bits: &[u8], i: usize) -> i32 {
    ((c_bits[i / 8] >> (i % 8)) & 1) as i32
}

/// Lowest bit of every coefficient of `p`.
pub(crate) fn parity_bits(p: &Poly, out: &mut [u8; N / 8]) {
    out.fill(0);
    for (i, &c) in p.coeffs.iter().enumerate() {
        out[i / 8] |= ((c & 1) as u8) << (i % 8);
    }
}

/// Replaces the lifted row values by their high bits and packs them.
pub(crate) fn pack_highbits(w: &mut Poly, params: &ParamSet, out: &mut [u8]) {
    for c in w.coeffs.iter_mut() {
        *c = codec::highbits_h(*c, params.alpha_h);
    }
    pack::pack_unsigned(w, params.hint_bits(), out);
}

/// Acceptance test shared by both signers, in the order the streamed signer evaluates it.
pub(crate) fn classify(first_sq: u64, norm_sq: u64, reflect_sq: u64, b_prime: u8, params: &ParamSet) -> Outcome {
    if first_sq > params.b1 * params.b1 {
        Outcome::RejectFirst
    } else if norm_sq >= params.b_prime * params.b_prime {
        Outcome::RejectNorm
    } else if b_prime == 0 && reflect_sq <= params.b_reflect * params.b_reflect {
        Outcome::RejectReflect
    } else {
        Outcome::Accept
    }
}

pub(crate) fn sq(p: &Poly) -> u64 {
    p.coeffs.iter().map(|&c| (c as i64 * c as i64) as u64).sum()
}

pub fn sign_reference(sk: &[u8], msg: &[u8], params: &ParamSet) -> Result<Vec<u8>> {
    Ok(sign_reference_traced(sk, msg, params)?.0)
}

/// Buffered signer. Every vector of an iteration is materialized.
pub fn sign_reference_traced(sk: &[u8], msg: &[u8], params: &ParamSet) -> Result<(Vec<u8>, Vec<Iteration>)> {
    pack::check_sk(sk, params)?;
    let (k, l, m) = (params.k, params.l, params.m());
    let pk = &sk[..params.pk_bytes];
    let seed_a = pack::pk_seed_a(pk);

    let mut col0 = PolyVec::zero(k);
    let mut a_gen = vec![PolyVec::zero(m); k];
    for i in 0..k {
        first_column(pk, i, params, &mut col0[i])?;
        for j in 0..m {
            let mut e = Poly::zero();
            UniformStream::matrix(seed_a, i, j).fill(&mut e);
            e.scale_q(2);
            a_gen[i][j] = e;
        }
    }
    let mut s_gen = PolyVec::zero(m);
    let mut s2 = PolyVec::zero(k);
    for j in 0..m {
        pack::read_sk_s1(sk, j, params, &mut s_gen[j])?;
    }
    for i in 0..k {
        pack::read_sk_s2(sk, i, params, &mut s2[i])?;
    }

    let mut mu = vec![0u8; params.mu_bytes];
    message_digest(pk, msg, params, &mut mu);
    let mut seed = [0u8; crate::params::SEED_YBB_BYTES];
    mask_seed(pack::sk_key(sk, params), &mu, &mut seed);

    let sign = |b: u8| 1 - 2 * (b & 1) as i32;
    let mut trace = Vec::new();
    let mut nonce = 0u16;
    loop {
        let acc: Accepted = find_accepted(&seed, nonce, params)?;
        nonce = acc.nonce;
        let mut y = PolyVec::zero(l + k);
        for idx in 0..l + k {
            regenerate_component(&seed, &acc, idx, params, &mut y[idx]);
        }
        let mut y1_hat = PolyVec(y.0[..l].to_vec());
        for p in y1_hat.0.iter_mut() {
            p.reduce();
            ntt(p);
        }
        let mut parity = [0u8; N / 8];
        parity_bits(&y[0], &mut parity);

        let mut w_lift = PolyVec::zero(k);
        let mut transcript = TranscriptHasher::new();
        let mut row_pack = vec![0u8; params.row_pack_bytes()];
        for i in 0..k {
            let mut w = Poly::zero();
            pointwise_mul_acc(&mut w, &col0[i], &y1_hat[0]);
            for j in 0..m {
                pointwise_mul_acc(&mut w, &a_gen[i][j], &y1_hat[j + 1]);
            }
            inv_ntt(&mut w);
            let mut y2 = y[l + i].reduced();
            y2.scale_q(2);
            w.add_assign_q(&y2);
            let bits = if i == 0 { parity } else { [0u8; N / 8] };
            w_lift[i] = from_crt(&w, &bits);
            let mut hb = w_lift[i];
            pack_highbits(&mut hb, params, &mut row_pack);
            transcript.absorb(&row_pack);
        }
        transcript.absorb(&parity);
        transcript.absorb(&mu);
        let mut rho = vec![0u8; params.rho_bytes];
        transcript.finalize(&mut rho);
        let mut c = Poly::zero();
        sample_challenge(&rho, params.tau, &mut c);

        let mut z = y.clone();
        for t in 0..N {
            z[0].coeffs[t] += sign(acc.b) * c.coeffs[t];
        }
        let mut c_lift = c;
        c_lift.reduce();
        for idx in 1..l + k {
            let s = if idx < l { &s_gen[idx - 1] } else { &s2[idx - l] };
            let prod = schoolbook_negacyclic(&c_lift, s);
            for t in 0..N {
                z[idx].coeffs[t] += sign(acc.b) * center(prod.coeffs[t] as i64, Q as i64) as i32;
            }
        }
        let norm_sq: u64 = z.iter().map(sq).sum();
        let reflect_sq: u64 = z
            .iter()
            .zip(y.iter())
            .map(|(zp, yp)| sq(&Poly::from_fn(|t| 2 * zp.coeffs[t] - yp.coeffs[t])))
            .sum();
        let mut outcome = classify(sq(&z[0]), norm_sq, reflect_sq, acc.b_prime, params);
        let mut out = None;
        if outcome == Outcome::Accept {
            match encode_reference(&c, &z, &w_lift, params) {
                Some(sig) => out = Some(sig),
                None => outcome = Outcome::Encode,
            }
        }
        trace.push(Iteration { nonce, outcome });
        if let Some(sig) = out {
            return Ok((sig, trace));
        }
        nonce = next_nonce(nonce)?;
    }
}

/// Computes hints and payloads from full vectors. `None` means restart.
fn encode_reference(c: &Poly, z: &PolyVec, w_lift: &PolyVec, params: &ParamSet) -> Option<Vec<u8>> {
    let (k, l) = (params.k, params.l);
    let modulus = params.hint_modulus();
    let mut h_syms = Vec::with_capacity(k * N);
    for i in 0..k {
        for t in 0..N {
            let h = codec::make_hint(w_lift[i].coeffs[t], z[l + i].coeffs[t], params.alpha_h);
            h_syms.push(codec::hint_symbol(h, modulus));
        }
    }
    let mut hb_syms = Vec::with_capacity(l * N);
    let mut lb = vec![0u8; l * N];
    for j in 0..l {
        for t in 0..N {
            let (hb, low) = codec::decompose_z1(z[j].coeffs[t]);
            hb_syms.push(hb);
            lb[j * N + t] = low;
        }
    }
    let budget = params.payload_budget();
    let h = rans::encode_full(&h_syms, &params.h_table, budget).ok()?;
    let hb = rans::encode_full(&hb_syms, &params.hb_table, budget - h.len()).ok()?;
    pack::pack_sig(c, &lb, &hb, &h, params).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keygen::keygen_reference;
    use crate::params::{param_set, Level};
    use proptest::prelude::*;

    #[test]
    fn sparse_examples() {
        let s = Poly::from_fn(|i| i as i32 + 1);
        let mut delta = Poly::zero();
        delta.coeffs[0] = 1;
        let mut z = Poly::zero();
        sparse_mul_acc(&mut z, &delta, &s, 0);
        assert_eq!(z, s);
        let mut z = Poly::zero();
        sparse_mul_acc(&mut z, &delta, &s, 1);
        assert_eq!(z, Poly::from_fn(|i| -s.coeffs[i]));

        let mut x = Poly::zero();
        x.coeffs[1] = 1;
        let y = Poly::from_fn(|i| 1000 + i as i32);
        let mut z = y;
        sparse_mul_acc(&mut z, &x, &s, 0);
        assert_eq!(z.coeffs[0], y.coeffs[0] - s.coeffs[N - 1]);
        assert_eq!(z.coeffs[5], y.coeffs[5] + s.coeffs[4]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn sparse_matches_ntt_and_schoolbook(
            seed in any::<[u8; 32]>(),
            b in 0u8..2,
            tau in 1usize..=128,
            sv in prop::collection::vec(-2i32..=2, N),
            yv in prop::collection::vec(-5000i32..=5000, N),
        ) {
            let mut c = Poly::zero();
            sample_challenge(&seed, tau, &mut c);
            let s = Poly::from_fn(|i| sv[i]);
            let y = Poly::from_fn(|i| yv[i]);
            let mut sparse = y;
            sparse_mul_acc(&mut sparse, &c, &s, b);

            let school = schoolbook_negacyclic(&c, &s);
            let sign = 1 - 2 * b as i32;
            let want = Poly::from_fn(|t| y.coeffs[t] + sign * center(school.coeffs[t] as i64, Q as i64) as i32);
            prop_assert_eq!(sparse, want);

            let mut c_hat = c;
            ntt(&mut c_hat);
            let mut via_ntt = y;
            let mut scratch = s;
            let p = param_set(Level::H5);
            challenge_mul_acc(&mut via_ntt, &c_hat, &mut scratch, b, &p);
            prop_assert_eq!(via_ntt, want);
        }
    }

    #[test]
    fn first_column_matches_buffered_unpack() {
        for level in [Level::H2, Level::H3] {
            let p = param_set(level);
            let kp = keygen_reference(&[5; 32], &p).unwrap();
            for i in 0..p.k {
                let mut got = Poly::zero();
                pk_column_stream(&kp.pk, i, &p, &mut got).unwrap();
                let mut b1 = Poly::zero();
                pack::read_pk_poly(&kp.pk, i, &p, &mut b1).unwrap();
                let mut a = Poly::zero();
                crate::hashing::expand_a_vector(pack::pk_seed_a(&kp.pk), i, &mut a);
                let mut want = Poly::from_fn(|t| (2 * a.coeffs[t] - 4 * b1.coeffs[t]).rem_euclid(Q));
                ntt(&mut want);
                assert_eq!(got, want);
            }
        }
    }

    #[test]
    fn reference_is_deterministic_and_bounded() {
        for level in Level::ALL {
            let p = param_set(level);
            let kp = keygen_reference(&[2; 32], &p).unwrap();
            let (sig, trace) = sign_reference_traced(&kp.sk, b"message", &p).unwrap();
            assert_eq!(sig.len(), p.sig_bytes);
            assert_eq!(sig, sign_reference(&kp.sk, b"message", &p).unwrap());
            assert_eq!(trace.last().unwrap().outcome, Outcome::Accept);
            assert!(trace[..trace.len() - 1].iter().all(|it| it.outcome != Outcome::Accept));
            assert!(trace.windows(2).all(|w| w[0].nonce < w[1].nonce));
        }
    }

    #[test]
    fn classify_order() {
        let p = param_set(Level::H2);
        let big = u64::MAX / 4;
        assert_eq!(classify(big, big, 0, 0, &p), Outcome::RejectFirst);
        assert_eq!(classify(0, big, 0, 0, &p), Outcome::RejectNorm);
        assert_eq!(classify(0, 0, 0, 0, &p), Outcome::RejectReflect);
        assert_eq!(classify(0, 0, 0, 1, &p), Outcome::Accept);
        assert_eq!(classify(0, 0, big, 0, &p), Outcome::Accept);
        let b1 = p.b1 * p.b1;
        assert_eq!(classify(b1, 0, big, 0, &p), Outcome::Accept);
        let bp = p.b_prime * p.b_prime;
        assert_eq!(classify(0, bp, big, 0, &p), Outcome::RejectNorm);
    }
}
