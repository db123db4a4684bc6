//! Key generation: buffered reference and streamed variants.
//!
//! The secret is `s1 = (1, s_gen)` and `s2`. For truncated keys (d = 1) the
//! row value `t = a + A_gen s_gen + e mod q` is split as `t = 2 b1 + b0`,
//! `b1` goes to the public key and `s2 = e - b0`. For d = 0 the public key
//! stores `b̂ = -2 (Â_gen ∘ NTT(s_gen) + NTT(e))` and `s2 = e`.
//! Attempts whose secret fails the spectral norm bound restart with the next
//! counter value.

pub mod norm;
mod streamed;

pub use norm::NormAccumulator;
pub use streamed::{keygen_arena_bytes, keygen_streamed};

use crate::codec::pack;
use crate::error::{Error, Result};
use crate::hashing::{expand_a_entry, expand_a_vector, expand_s, expand_seed, secret_nonce, KeySeeds};
use crate::params::{ParamSet, SEED_BYTES};
use crate::ring::{inv_ntt, ntt, pointwise_mul_acc, Poly, PolyVec};
use crate::workspace::WorkArena;
use crate::ExecPath;

#[derive(Clone, PartialEq, Eq)]
pub struct KeyPair {
    pub pk: Vec<u8>,
    pub sk: Vec<u8>,
}

impl std::fmt::Debug for KeyPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KeyPair")
            .field("pk_len", &self.pk.len())
            .field("sk_len", &self.sk.len())
            .finish_non_exhaustive()
    }
}

/// Runs key generation on the chosen path.
pub fn keygen(seed: &[u8], params: &ParamSet, path: ExecPath, arena: &WorkArena) -> Result<KeyPair> {
    match path {
        ExecPath::Reference => keygen_reference(seed, params),
        ExecPath::Streamed => keygen_streamed(seed, params, arena),
    }
}

/// Fresh key pair from operating-system randomness.
pub fn keygen_random(params: &ParamSet, path: ExecPath, arena: &WorkArena) -> Result<KeyPair> {
    let mut seed = [0u8; SEED_BYTES];
    getrandom::getrandom(&mut seed).map_err(|e| Error::Usage(format!("OS randomness unavailable: {e}")))?;
    keygen(&seed, params, path, arena)
}

pub(crate) fn check_seed(seed: &[u8]) -> Result<KeySeeds> {
    pack::check_len("seed", seed, SEED_BYTES)?;
    Ok(expand_seed(seed))
}

pub(crate) fn nonce(params: &ParamSet, counter: u32, index: usize) -> Result<u16> {
    secret_nonce(params, counter, index).ok_or(Error::IterationCap(counter))
}

/// Every intermediate of the buffered computation, for differential tests.
#[derive(Debug, Clone)]
pub struct KeygenTrace {
    pub keys: KeyPair,
    pub counter: u32,
    pub s_gen: PolyVec,
    pub e: PolyVec,
    pub s2: PolyVec,
    /// Row values before packing: `t` for d = 1, `b̂` for d = 0.
    pub rows: PolyVec,
}

pub fn keygen_reference(seed: &[u8], params: &ParamSet) -> Result<KeyPair> {
    Ok(keygen_reference_trace(seed, params)?.keys)
}

pub fn keygen_reference_trace(seed: &[u8], params: &ParamSet) -> Result<KeygenTrace> {
    let seeds = check_seed(seed)?;
    let (k, m) = (params.k, params.m());
    let mut a_hat = vec![PolyVec::zero(m); k];
    for (i, row) in a_hat.iter_mut().enumerate() {
        for j in 0..m {
            expand_a_entry(&seeds.seed_a, i, j, &mut row[j]);
        }
    }
    let mut bins = vec![0u64; params.n];
    let mut ws = vec![0f64; norm::FFT_WORDS];
    let mut counter = 0u32;
    loop {
        let mut s_gen = PolyVec::zero(m);
        let mut e = PolyVec::zero(k);
        for j in 0..m {
            expand_s(&seeds.seed_sk, nonce(params, counter, j)?, params.eta, &mut s_gen[j]);
        }
        for i in 0..k {
            expand_s(&seeds.seed_sk, nonce(params, counter, m + i)?, params.eta, &mut e[i]);
        }
        let mut s_hat = s_gen.clone();
        for p in s_hat.0.iter_mut() {
            p.reduce();
            ntt(p);
        }
        let mut rows = PolyVec::zero(k);
        let mut s2 = e.clone();
        for i in 0..k {
            let mut acc = Poly::zero();
            for j in 0..m {
                pointwise_mul_acc(&mut acc, &a_hat[i][j], &s_hat[j]);
            }
            if params.d == 0 {
                let mut e_hat = e[i].reduced();
                ntt(&mut e_hat);
                acc.add_assign_q(&e_hat);
                acc.scale_q(-2);
            } else {
                inv_ntt(&mut acc);
                let mut a = Poly::zero();
                expand_a_vector(&seeds.seed_a, i, &mut a);
                acc.add_assign_q(&a);
                acc.add_assign_q(&e[i].reduced());
                for t in 0..params.n {
                    s2[i].coeffs[t] -= acc.coeffs[t] & 1;
                }
            }
            rows[i] = acc;
        }
        let mut acc = NormAccumulator::new(&mut bins);
        for p in s_gen.iter().chain(s2.iter()) {
            acc.accumulate(&mut ws, p);
        }
        if !acc.check(params.gamma_sq_n) {
            counter += 1;
            continue;
        }

        let mut pk = vec![0u8; params.pk_bytes];
        pk[..seeds.seed_a.len()].copy_from_slice(&seeds.seed_a);
        for i in 0..k {
            let packed = if params.d == 0 {
                rows[i]
            } else {
                Poly::from_fn(|t| rows[i].coeffs[t] >> 1)
            };
            pack::write_pk_poly(&mut pk, i, &packed, params);
        }
        let mut sk = vec![0u8; params.sk_bytes];
        sk[..params.pk_bytes].copy_from_slice(&pk);
        for j in 0..m {
            pack::write_sk_s1(&mut sk, j, &s_gen[j], params);
        }
        for i in 0..k {
            pack::write_sk_s2(&mut sk, i, &s2[i], params);
        }
        let ko = params.sk_key_offset();
        sk[ko..].copy_from_slice(&seeds.key);
        return Ok(KeygenTrace {
            keys: KeyPair { pk, sk },
            counter,
            s_gen,
            e,
            s2,
            rows,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{param_set, Level, Q};
    use crate::ring::schoolbook_negacyclic;

    #[test]
    fn sizes_and_determinism() {
        for level in Level::ALL {
            let p = param_set(level);
            let a = keygen_reference(&[1; 32], &p).unwrap();
            let b = keygen_reference(&[1; 32], &p).unwrap();
            assert_eq!(a, b);
            assert_eq!((a.pk.len(), a.sk.len()), (p.pk_bytes, p.sk_bytes));
            assert_eq!(&a.sk[..p.pk_bytes], a.pk.as_slice());
            pack::check_sk(&a.sk, &p).unwrap();
        }
        assert!(matches!(keygen_reference(&[0; 31], &param_set(Level::H2)), Err(Error::Length { .. })));
    }

    /// `a + A_gen s_gen + e = 2 b1 + b0` and `s2 = e - b0`, checked with schoolbook products.
    #[test]
    fn truncated_rows_recompose() {
        for level in [Level::H2, Level::H3] {
            let p = param_set(level);
            let tr = keygen_reference_trace(&[9; 32], &p).unwrap();
            let seeds = expand_seed(&[9; 32]);
            for i in 0..p.k {
                let mut expect = Poly::zero();
                expand_a_vector(&seeds.seed_a, i, &mut expect);
                for j in 0..p.m() {
                    let mut a_hat = Poly::zero();
                    expand_a_entry(&seeds.seed_a, i, j, &mut a_hat);
                    let mut a = a_hat;
                    inv_ntt(&mut a);
                    expect.add_assign_q(&schoolbook_negacyclic(&a, &tr.s_gen[j]));
                }
                expect.add_assign_q(&tr.e[i].reduced());
                assert_eq!(tr.rows[i], expect);
                let mut b1 = Poly::zero();
                pack::read_pk_poly(&tr.keys.pk, i, &p, &mut b1).unwrap();
                for t in 0..p.n {
                    let b0 = expect.coeffs[t] - 2 * b1.coeffs[t];
                    assert!(b0 == 0 || b0 == 1);
                    assert_eq!(tr.s2[i].coeffs[t], tr.e[i].coeffs[t] - b0);
                }
                let mut s2 = Poly::zero();
                pack::read_sk_s2(&tr.keys.sk, i, &p, &mut s2).unwrap();
                assert_eq!(s2, tr.s2[i]);
            }
        }
    }

    /// First matrix column plus `2 A_gen s_gen + 2 s2` vanishes mod q.
    #[test]
    fn key_identity() {
        for level in Level::ALL {
            let p = param_set(level);
            let tr = keygen_reference_trace(&[4; 32], &p).unwrap();
            let seeds = expand_seed(&[4; 32]);
            for i in 0..p.k {
                let mut col0 = Poly::zero();
                pack::read_pk_poly(&tr.keys.pk, i, &p, &mut col0).unwrap();
                if p.d == 0 {
                    inv_ntt(&mut col0);
                } else {
                    let mut a = Poly::zero();
                    expand_a_vector(&seeds.seed_a, i, &mut a);
                    col0 = Poly::from_fn(|t| (2 * (a.coeffs[t] - 2 * col0.coeffs[t])).rem_euclid(Q));
                }
                let mut sum = col0;
                for j in 0..p.m() {
                    let mut a = Poly::zero();
                    expand_a_entry(&seeds.seed_a, i, j, &mut a);
                    inv_ntt(&mut a);
                    let mut prod = schoolbook_negacyclic(&a, &tr.s_gen[j]);
                    prod.scale_q(2);
                    sum.add_assign_q(&prod);
                }
                let mut s2 = tr.s2[i].reduced();
                s2.scale_q(2);
                sum.add_assign_q(&s2);
                assert_eq!(sum, Poly::zero(), "{level} row {i}");
            }
        }
    }
}
