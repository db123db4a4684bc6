use super::{
    challenge_bit, challenge_mul_acc, classify, first_column, mask_seed, message_digest, next_nonce, pack_highbits, parity_bits, sq, Iteration,
    Outcome,
};
use crate::codec::rans::RansStreamEncoder;
use crate::codec::{self, pack};
use crate::error::Result;
use crate::hashing::{sample_challenge, TranscriptHasher, UniformStream};
use crate::params::{ParamSet, C_BYTES, N, Q, SEED_YBB_BYTES};
use crate::ring::{from_crt_coeff, inv_ntt, ntt, pointwise_mul_assign, Poly};
use crate::sampler::{find_accepted, regenerate_component, Accepted, MaskComponent};
use crate::workspace::{AllocKind, Scope, WorkArena};

const DIGEST_MAX: usize = 64;

/// State that lives for the whole call. The polynomial slot is kept separately.
#[derive(Clone, Copy, bytemuck::Zeroable, bytemuck::Pod)]
#[repr(C)]
struct Driver {
    mu: [u8; DIGEST_MAX],
    seed: [u8; SEED_YBB_BYTES],
    rho: [u8; DIGEST_MAX],
    c_bits: [u8; C_BYTES],
    parity: [u8; N / 8],
}

const POLY: usize = size_of::<Poly>();

/// Arena bytes that hold the streamed signer at `params`, including slack.
pub fn sign_arena_bytes(params: &ParamSet) -> usize {
    size_of::<Driver>() + POLY + 3 * POLY + params.payload_budget().max(params.row_pack_bytes()) + 512
}

pub fn sign_streamed(sk: &[u8], msg: &[u8], params: &ParamSet, arena: &WorkArena) -> Result<Vec<u8>> {
    sign_streamed_traced(sk, msg, params, arena, None)
}

/// Streamed signer. Passes A and B run per nonce; C1 and C2 only after acceptance.
pub fn sign_streamed_traced(
    sk: &[u8],
    msg: &[u8],
    params: &ParamSet,
    arena: &WorkArena,
    mut trace: Option<&mut Vec<Iteration>>,
) -> Result<Vec<u8>> {
    pack::check_sk(sk, params)?;
    assert!(params.mu_bytes <= DIGEST_MAX && params.rho_bytes <= DIGEST_MAX);
    let pk = &sk[..params.pk_bytes];
    let top = arena.scope("sign")?;
    let drv: &mut Driver = top.alloc(AllocKind::State, "driver")?;
    message_digest(pk, msg, params, &mut drv.mu);
    mask_seed(pack::sk_key(sk, params), &drv.mu[..params.mu_bytes], &mut drv.seed);
    // Row accumulator in pass A, the challenge afterwards.
    let slot: &mut Poly = top.alloc(AllocKind::Poly, "slot")?;
    let mut sig = vec![0u8; params.sig_bytes];
    let mut nonce = 0u16;
    loop {
        let acc = find_accepted(&drv.seed, nonce, params)?;
        nonce = acc.nonce;
        pass_a(pk, params, &acc, drv, slot, &top)?;
        if params.d == 0 {
            ntt(slot);
        }
        let mut outcome = pass_b(sk, params, &acc, drv, slot, &top)?;
        if outcome == Outcome::Accept {
            let done = match pass_c1(sk, params, &acc, drv, slot, &top, &mut sig)? {
                Some(len_h) => pass_c2(sk, params, &acc, drv, slot, &top, &mut sig, len_h)?,
                None => false,
            };
            if !done {
                outcome = Outcome::Encode;
            }
        }
        if let Some(t) = trace.as_deref_mut() {
            t.push(Iteration { nonce, outcome });
        }
        if outcome == Outcome::Accept {
            return Ok(sig);
        }
        nonce = next_nonce(nonce)?;
    }
}

/// Lifted rows `first .. first + rows.len()` of `w = A1 y1 + 2 y2`, one mask
/// regeneration per column shared by all rows. `ytmp` is scratch; `parity`
/// receives the low bits of the first mask component when row 0 is included.
#[allow(clippy::too_many_arguments)]
fn lifted_rows(
    pk: &[u8],
    params: &ParamSet,
    seed: &[u8],
    acc: &Accepted,
    first: usize,
    rows: &mut [&mut Poly],
    ytmp: &mut Poly,
    parity: &mut [u8; N / 8],
) -> Result<()> {
    let seed_a = pack::pk_seed_a(pk);
    for (r, w) in rows.iter_mut().enumerate() {
        first_column(pk, first + r, params, w)?;
    }
    regenerate_component(seed, acc, 0, params, ytmp);
    if first == 0 {
        parity_bits(ytmp, parity);
    }
    ytmp.reduce();
    ntt(ytmp);
    for w in rows.iter_mut() {
        pointwise_mul_assign(w, ytmp);
    }
    for j in 1..params.l {
        regenerate_component(seed, acc, j, params, ytmp);
        ytmp.reduce();
        ytmp.scale_q(2);
        ntt(ytmp);
        for (r, w) in rows.iter_mut().enumerate() {
            UniformStream::matrix(seed_a, first + r, j - 1).mul_acc(w, ytmp);
        }
    }
    for (r, w) in rows.iter_mut().enumerate() {
        let i = first + r;
        inv_ntt(w);
        let mut y2 = MaskComponent::new(seed, acc, params.l + i, &params.cdt);
        for (t, c) in w.coeffs.iter_mut().enumerate() {
            let v = (*c + (2 * y2.next_coeff()).rem_euclid(Q)) % Q;
            let bit = if i == 0 { (parity[t / 8] >> (t % 8)) & 1 } else { 0 };
            *c = from_crt_coeff(v, bit);
        }
    }
    Ok(())
}

/// Pass A: rows of `w`, high bits absorbed row by row, challenge into the slot.
fn pass_a(pk: &[u8], params: &ParamSet, acc: &Accepted, drv: &mut Driver, slot: &mut Poly, top: &Scope<'_>) -> Result<()> {
    let scope = top.scope("pass_a")?;
    let ytmp: &mut Poly = scope.alloc(AllocKind::Poly, "mask")?;
    let stage: &mut [u8] = scope.alloc_slice(params.row_pack_bytes(), AllocKind::Staging, "row_pack")?;
    let mut transcript = TranscriptHasher::new();

    #[cfg(feature = "row-batching")]
    {
        let pair: &mut Poly = scope.alloc(AllocKind::Poly, "row_pair")?;
        let mut i = 0;
        while i < params.k {
            if i + 1 < params.k {
                lifted_rows(pk, params, &drv.seed, acc, i, &mut [&mut *slot, &mut *pair], ytmp, &mut drv.parity)?;
                pack_highbits(slot, params, stage);
                transcript.absorb(stage);
                pack_highbits(pair, params, stage);
                transcript.absorb(stage);
                i += 2;
            } else {
                lifted_rows(pk, params, &drv.seed, acc, i, &mut [&mut *slot], ytmp, &mut drv.parity)?;
                pack_highbits(slot, params, stage);
                transcript.absorb(stage);
                i += 1;
            }
        }
    }
    #[cfg(not(feature = "row-batching"))]
    for i in 0..params.k {
        lifted_rows(pk, params, &drv.seed, acc, i, &mut [&mut *slot], ytmp, &mut drv.parity)?;
        pack_highbits(slot, params, stage);
        transcript.absorb(stage);
    }

    transcript.absorb(&drv.parity);
    transcript.absorb(&drv.mu[..params.mu_bytes]);
    transcript.finalize(&mut drv.rho[..params.rho_bytes]);
    sample_challenge(&drv.rho[..params.rho_bytes], params.tau, slot);
    pack::pack_challenge(slot, &mut drv.c_bits);
    Ok(())
}

/// Secret component `idx` of `(s1, s2)` for `idx >= 1`.
pub(crate) fn read_secret(sk: &[u8], idx: usize, params: &ParamSet, out: &mut Poly) -> Result<()> {
    if idx < params.l {
        pack::read_sk_s1(sk, idx - 1, params, out)
    } else {
        pack::read_sk_s2(sk, idx - params.l, params, out)
    }
}

/// Response component `idx` into `z`; `s` is scratch.
fn response(sk: &[u8], params: &ParamSet, acc: &Accepted, drv: &Driver, c: &Poly, idx: usize, z: &mut Poly, s: &mut Poly) -> Result<()> {
    regenerate_component(&drv.seed, acc, idx, params, z);
    if idx == 0 {
        let sign = 1 - 2 * (acc.b & 1) as i32;
        for (t, v) in z.coeffs.iter_mut().enumerate() {
            *v += sign * challenge_bit(&drv.c_bits, t);
        }
    } else {
        read_secret(sk, idx, params, s)?;
        challenge_mul_acc(z, c, s, acc.b, params);
    }
    Ok(())
}

/// Pass B: one response component at a time, with early exits.
fn pass_b(sk: &[u8], params: &ParamSet, acc: &Accepted, drv: &Driver, c: &Poly, top: &Scope<'_>) -> Result<Outcome> {
    let scope = top.scope("pass_b")?;
    let z: &mut Poly = scope.alloc(AllocKind::Poly, "response")?;
    let s: &mut Poly = scope.alloc(AllocKind::Poly, "secret")?;
    let norm_bound = params.b_prime * params.b_prime;
    let (mut norm, mut reflect) = (0u64, 0u64);
    for idx in 0..params.l + params.k {
        response(sk, params, acc, drv, c, idx, z, s)?;
        let part = sq(z);
        if idx == 0 && part > params.b1 * params.b1 {
            return Ok(Outcome::RejectFirst);
        }
        norm += part;
        if norm >= norm_bound {
            return Ok(Outcome::RejectNorm);
        }
        if acc.b_prime == 0 {
            let mut y = MaskComponent::new(&drv.seed, acc, idx, &params.cdt);
            for &v in z.coeffs.iter() {
                let r = 2 * v as i64 - y.next_coeff() as i64;
                reflect += (r * r) as u64;
            }
        }
    }
    Ok(classify(0, norm, reflect, acc.b_prime, params))
}

/// Pass C1: hint rows in reverse order straight into the encoder. The
/// finished stream is parked at the end of `sig`. `None` means restart.
fn pass_c1(sk: &[u8], params: &ParamSet, acc: &Accepted, drv: &Driver, c: &Poly, top: &Scope<'_>, sig: &mut [u8]) -> Result<Option<usize>> {
    let pk = &sk[..params.pk_bytes];
    let scope = top.scope("pass_c1")?;
    let w: &mut Poly = scope.alloc(AllocKind::Poly, "row")?;
    let z2: &mut Poly = scope.alloc(AllocKind::Poly, "response")?;
    let s: &mut Poly = scope.alloc(AllocKind::Poly, "secret")?;
    let stage: &mut [u8] = scope.alloc_slice(params.payload_budget(), AllocKind::Staging, "h_stream")?;
    let modulus = params.hint_modulus();
    let mut parity = drv.parity;
    let mut enc = RansStreamEncoder::new(stage, &params.h_table);
    for i in (0..params.k).rev() {
        lifted_rows(pk, params, &drv.seed, acc, i, &mut [&mut *w], z2, &mut parity)?;
        response(sk, params, acc, drv, c, params.l + i, z2, s)?;
        for t in (0..N).rev() {
            let h = codec::make_hint(w.coeffs[t], z2.coeffs[t], params.alpha_h);
            if enc.push(codec::hint_symbol(h, modulus)).is_err() {
                return Ok(None);
            }
        }
    }
    let Ok(len) = enc.finalize() else {
        return Ok(None);
    };
    let end = sig.len();
    sig[end - len..].copy_from_slice(&stage[..len]);
    Ok(Some(len))
}

/// Pass C2: first-part responses in reverse order. Low bytes go straight
/// into `sig`, high parts into the encoder; then the payload is assembled.
#[allow(clippy::too_many_arguments)]
fn pass_c2(
    sk: &[u8],
    params: &ParamSet,
    acc: &Accepted,
    drv: &Driver,
    c: &Poly,
    top: &Scope<'_>,
    sig: &mut [u8],
    len_h: usize,
) -> Result<bool> {
    let scope = top.scope("pass_c2")?;
    let z: &mut Poly = scope.alloc(AllocKind::Poly, "response")?;
    let s: &mut Poly = scope.alloc(AllocKind::Poly, "secret")?;
    let stage: &mut [u8] = scope.alloc_slice(params.payload_budget() - len_h, AllocKind::Staging, "hb_stream")?;
    let lb = pack::sig_lb_offset();
    let mut enc = RansStreamEncoder::new(stage, &params.hb_table);
    for i in (0..params.l).rev() {
        response(sk, params, acc, drv, c, i, z, s)?;
        for t in (0..N).rev() {
            let (hb, low) = codec::decompose_z1(z.coeffs[t]);
            sig[lb + i * N + t] = low;
            if enc.push(hb).is_err() {
                return Ok(false);
            }
        }
    }
    let Ok(len_hb) = enc.finalize() else {
        return Ok(false);
    };
    let p = pack::sig_payload_offset(params);
    let end = sig.len();
    sig.copy_within(end - len_h..end, p + len_hb);
    sig[p..p + len_hb].copy_from_slice(&stage[..len_hb]);
    sig[p + len_hb + len_h..].fill(0);
    pack::write_sig_header(sig, len_hb, len_h, params);
    sig[..C_BYTES].copy_from_slice(&drv.c_bits);
    Ok(true)
}
