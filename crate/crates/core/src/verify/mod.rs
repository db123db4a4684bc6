//! Verification: buffered reference and row-streamed verifier.
//!
//! Inputs are untrusted. Any malformed signature or public-key content is a
//! rejection, never an error; errors are reserved for wrong key lengths and
//! arena exhaustion. Both verifiers reach the same decision on every input.

mod streamed;

pub use streamed::{verify_arena_bytes, verify_streamed, verify_streamed_report, VerifyReport};

use crate::codec::{self, pack, rans, SigView};
use crate::error::Result;
use crate::hashing::{sample_challenge, TranscriptHasher, UniformStream};
use crate::params::{ParamSet, C_BYTES, N};
use crate::ring::{from_crt, inv_ntt, ntt, pointwise_mul_acc, Poly, PolyVec};
use crate::sign::{first_column, message_digest};
use crate::workspace::WorkArena;
use crate::ExecPath;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decision {
    Accept,
    Reject,
}

impl Decision {
    pub fn is_accept(self) -> bool {
        self == Decision::Accept
    }
}

/// Why a signature was rejected. Diagnostic only; paths may differ in the
/// reason they report first, never in the decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    Format,
    PublicKey,
    Decode,
    Norm,
    Challenge,
}

pub fn verify(pk: &[u8], msg: &[u8], sig: &[u8], params: &ParamSet, path: ExecPath, arena: &WorkArena) -> Result<Decision> {
    match path {
        ExecPath::Reference => verify_reference(pk, msg, sig, params),
        ExecPath::Streamed => verify_streamed(pk, msg, sig, params, arena),
    }
}

/// Low bits of `z1_0 - c`, the parity of the first lifted row.
pub(crate) fn first_parity(z0: &Poly, c_bits: &[u8], out: &mut [u8; N / 8]) {
    out.fill(0);
    for (t, &z) in z0.coeffs.iter().enumerate() {
        let c = ((c_bits[t / 8] >> (t % 8)) & 1) as i32;
        out[t / 8] |= (((z - c) & 1) as u8) << (t % 8);
    }
}

fn sq(v: i32) -> u64 {
    (v as i64 * v as i64) as u64
}

pub fn verify_reference(pk: &[u8], msg: &[u8], sig: &[u8], params: &ParamSet) -> Result<Decision> {
    Ok(match verify_reference_reason(pk, msg, sig, params)? {
        None => Decision::Accept,
        Some(_) => Decision::Reject,
    })
}

/// Buffered verifier. `None` means accept.
pub fn verify_reference_reason(pk: &[u8], msg: &[u8], sig: &[u8], params: &ParamSet) -> Result<Option<RejectReason>> {
    pack::check_len("public key", pk, params.pk_bytes)?;
    let (k, l, m) = (params.k, params.l, params.m());
    let Ok(view) = SigView::parse(sig, params) else {
        return Ok(Some(RejectReason::Format));
    };
    let Ok(hb) = rans::decode_all(view.hb_stream(), l * N, &params.hb_table) else {
        return Ok(Some(RejectReason::Decode));
    };
    let Ok(h) = rans::decode_all(view.h_stream(), k * N, &params.h_table) else {
        return Ok(Some(RejectReason::Decode));
    };
    let lb = view.lb();
    let z1 = PolyVec((0..l).map(|j| Poly::from_fn(|t| codec::recompose_z1(hb[j * N + t], lb[j * N + t]))).collect());
    let c_bits = view.challenge_bytes();
    let mut parity = [0u8; N / 8];
    first_parity(&z1[0], c_bits, &mut parity);

    let mut col0 = PolyVec::zero(k);
    for i in 0..k {
        if first_column(pk, i, params, &mut col0[i]).is_err() {
            return Ok(Some(RejectReason::PublicKey));
        }
    }
    let seed_a = pack::pk_seed_a(pk);
    let mut z1_hat = z1.clone();
    for (j, p) in z1_hat.0.iter_mut().enumerate() {
        p.reduce();
        if j > 0 {
            p.scale_q(2);
        }
        ntt(p);
    }

    let mut norm: u64 = z1.iter().flat_map(|p| p.coeffs.iter()).map(|&v| sq(v)).sum();
    let mut w1 = PolyVec::zero(k);
    for i in 0..k {
        let mut w = Poly::zero();
        pointwise_mul_acc(&mut w, &col0[i], &z1_hat[0]);
        for j in 0..m {
            let mut a = Poly::zero();
            UniformStream::matrix(seed_a, i, j).fill(&mut a);
            pointwise_mul_acc(&mut w, &a, &z1_hat[j + 1]);
        }
        inv_ntt(&mut w);
        let bits = if i == 0 { parity } else { [0u8; N / 8] };
        let v = from_crt(&w, &bits);
        for t in 0..N {
            let hint = codec::hint_from_symbol(h[i * N + t], params.hint_modulus());
            let top = codec::use_hint(hint, v.coeffs[t], params.alpha_h);
            let bit = (bits[t / 8] >> (t % 8)) & 1;
            norm += sq(codec::recover_z2(top, v.coeffs[t], bit, params.alpha_h));
            w1[i].coeffs[t] = top;
        }
    }

    let mut mu = vec![0u8; params.mu_bytes];
    message_digest(pk, msg, params, &mut mu);
    let mut transcript = TranscriptHasher::new();
    let mut row = vec![0u8; params.row_pack_bytes()];
    for p in w1.iter() {
        pack::pack_unsigned(p, params.hint_bits(), &mut row);
        transcript.absorb(&row);
    }
    transcript.absorb(&parity);
    transcript.absorb(&mu);
    let mut rho = vec![0u8; params.rho_bytes];
    transcript.finalize(&mut rho);
    let mut c = Poly::zero();
    sample_challenge(&rho, params.tau, &mut c);
    let mut c_re = [0u8; C_BYTES];
    pack::pack_challenge(&c, &mut c_re);

    if norm >= params.b_dprime * params.b_dprime {
        return Ok(Some(RejectReason::Norm));
    }
    if c_re != c_bits {
        return Ok(Some(RejectReason::Challenge));
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keygen::keygen_reference;
    use crate::params::{param_set, Level};
    use crate::sign::sign_reference;

    #[test]
    fn honest_accepts_and_tampering_rejects() {
        for level in Level::ALL {
            let p = param_set(level);
            let kp = keygen_reference(&[6; 32], &p).unwrap();
            let sig = sign_reference(&kp.sk, b"hello", &p).unwrap();
            assert_eq!(verify_reference(&kp.pk, b"hello", &sig, &p).unwrap(), Decision::Accept);
            assert_eq!(verify_reference(&kp.pk, b"hellp", &sig, &p).unwrap(), Decision::Reject);
            for bit in (0..sig.len() * 8).step_by(97) {
                let mut bad = sig.clone();
                bad[bit / 8] ^= 1 << (bit % 8);
                assert_eq!(verify_reference(&kp.pk, b"hello", &bad, &p).unwrap(), Decision::Reject, "{level} bit {bit}");
            }
            assert_eq!(verify_reference(&kp.pk, b"hello", &sig[1..], &p).unwrap(), Decision::Reject);
            assert!(verify_reference(&kp.pk[1..], b"hello", &sig, &p).is_err());
        }
    }
}
