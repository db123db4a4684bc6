use super::{first_parity, Decision, RejectReason};
use crate::codec::overlay::OVERLAY_BYTES;
use crate::codec::rans::{FreqTable, RansDecoder};
use crate::codec::{self, pack, HbHintOverlay, SigView};
use crate::error::Result;
use crate::hashing::{sample_challenge, TranscriptHasher, UniformStream};
use crate::params::{ParamSet, C_BYTES, N};
use crate::ring::{from_crt_coeff, inv_ntt, ntt, pointwise_mul_assign, Poly};
use crate::sign::{first_column, message_digest};
use crate::workspace::{AllocKind, WorkArena};

const DIGEST_MAX: usize = 64;

#[derive(Clone, Copy, bytemuck::Zeroable, bytemuck::Pod)]
#[repr(C)]
struct State {
    mu: [u8; DIGEST_MAX],
    rho: [u8; DIGEST_MAX],
    parity: [u8; N / 8],
    c_re: [u8; C_BYTES],
}

/// What the streamed verifier did, for audits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyReport {
    pub decision: Decision,
    pub reason: Option<RejectReason>,
    /// Rows of the matrix product that were completed.
    pub rows_processed: usize,
    /// Full decodes of one high-bits column.
    pub column_decodes: usize,
}

impl VerifyReport {
    fn reject(reason: RejectReason, rows_processed: usize, column_decodes: usize) -> Self {
        VerifyReport {
            decision: Decision::Reject,
            reason: Some(reason),
            rows_processed,
            column_decodes,
        }
    }
}

/// Arena bytes that hold the streamed verifier at `params`, including slack.
pub fn verify_arena_bytes(params: &ParamSet) -> usize {
    size_of::<State>() + OVERLAY_BYTES + 2 * size_of::<Poly>() + params.row_pack_bytes() + 256
}

pub fn verify_streamed(pk: &[u8], msg: &[u8], sig: &[u8], params: &ParamSet, arena: &WorkArena) -> Result<Decision> {
    Ok(verify_streamed_report(pk, msg, sig, params, arena)?.decision)
}

/// Decodes high-bits column `j` into the overlay and recomposes it into `z`.
fn decode_column(dec: &mut RansDecoder<'_>, overlay: &mut HbHintOverlay<'_>, view: &SigView<'_>, j: usize, z: &mut Poly) -> Option<()> {
    let col = overlay.hb_col();
    for v in col.iter_mut() {
        *v = i8::try_from(dec.decode().ok()?).ok()?;
    }
    let col = overlay.read_hb_col().expect("column view");
    let lb = view.lb_column(j);
    for t in 0..N {
        z.coeffs[t] = codec::recompose_z1(col[t] as i32, lb[t]);
    }
    Some(())
}

fn hb_decoder<'a>(view: &SigView<'a>, table: &'a FreqTable) -> Option<RansDecoder<'a>> {
    RansDecoder::new(view.hb_stream(), table).ok()
}

/// Row-streamed verifier with a working set that does not depend on `k` or `l`.
pub fn verify_streamed_report(pk: &[u8], msg: &[u8], sig: &[u8], params: &ParamSet, arena: &WorkArena) -> Result<VerifyReport> {
    pack::check_len("public key", pk, params.pk_bytes)?;
    assert!(params.mu_bytes <= DIGEST_MAX && params.rho_bytes <= DIGEST_MAX);
    let Ok(view) = SigView::parse(sig, params) else {
        return Ok(VerifyReport::reject(RejectReason::Format, 0, 0));
    };
    let (k, l) = (params.k, params.l);
    let bound = params.b_dprime * params.b_dprime;
    let mut decodes = 0;

    let scope = arena.scope("verify")?;
    let st: &mut State = scope.alloc(AllocKind::State, "state")?;
    let overlay_mem: &mut [u16] = scope.alloc_slice(OVERLAY_BYTES / 2, AllocKind::Workspace, "overlay")?;
    let mut overlay = HbHintOverlay::new(bytemuck::cast_slice_mut(overlay_mem));
    let z: &mut Poly = scope.alloc(AllocKind::Poly, "z_column")?;
    let acc: &mut Poly = scope.alloc(AllocKind::Poly, "row")?;
    let stage: &mut [u8] = scope.alloc_slice(params.row_pack_bytes(), AllocKind::Staging, "row_pack")?;

    // Pre-pass: full decode once for the z1 norm and the first-row parity.
    let mut norm = 0u64;
    {
        let Some(mut dec) = hb_decoder(&view, &params.hb_table) else {
            return Ok(VerifyReport::reject(RejectReason::Decode, 0, decodes));
        };
        for j in 0..l {
            if decode_column(&mut dec, &mut overlay, &view, j, z).is_none() {
                return Ok(VerifyReport::reject(RejectReason::Decode, 0, decodes));
            }
            decodes += 1;
            norm += z.coeffs.iter().map(|&v| (v as i64 * v as i64) as u64).sum::<u64>();
            if j == 0 {
                first_parity(z, view.challenge_bytes(), &mut st.parity);
            }
        }
        if dec.finish().is_err() {
            return Ok(VerifyReport::reject(RejectReason::Decode, 0, decodes));
        }
    }
    if norm >= bound {
        return Ok(VerifyReport::reject(RejectReason::Norm, 0, decodes));
    }

    let Ok(mut h_dec) = RansDecoder::new(view.h_stream(), &params.h_table) else {
        return Ok(VerifyReport::reject(RejectReason::Decode, 0, decodes));
    };
    let seed_a = pack::pk_seed_a(pk);
    let modulus = params.hint_modulus();
    let mut transcript = TranscriptHasher::new();
    for r in 0..k {
        if first_column(pk, r, params, acc).is_err() {
            return Ok(VerifyReport::reject(RejectReason::PublicKey, r, decodes));
        }
        let Some(mut dec) = hb_decoder(&view, &params.hb_table) else {
            return Ok(VerifyReport::reject(RejectReason::Decode, r, decodes));
        };
        for j in 0..l {
            if decode_column(&mut dec, &mut overlay, &view, j, z).is_none() {
                return Ok(VerifyReport::reject(RejectReason::Decode, r, decodes));
            }
            decodes += 1;
            z.reduce();
            if j == 0 {
                ntt(z);
                pointwise_mul_assign(acc, z);
            } else {
                z.scale_q(2);
                ntt(z);
                UniformStream::matrix(seed_a, r, j - 1).mul_acc(acc, z);
            }
        }
        inv_ntt(acc);

        let row = overlay.h_row();
        for v in row.iter_mut() {
            let Ok(s) = h_dec.decode() else {
                return Ok(VerifyReport::reject(RejectReason::Decode, r, decodes));
            };
            *v = codec::hint_from_symbol(s, modulus) as u16;
        }
        let row = overlay.read_h_row().expect("row view");
        for t in 0..N {
            let bit = if r == 0 { (st.parity[t / 8] >> (t % 8)) & 1 } else { 0 };
            let v = from_crt_coeff(acc.coeffs[t], bit);
            let top = codec::use_hint(row[t] as i32, v, params.alpha_h);
            let z2 = codec::recover_z2(top, v, bit, params.alpha_h) as i64;
            norm += (z2 * z2) as u64;
            acc.coeffs[t] = top;
        }
        if norm >= bound {
            return Ok(VerifyReport::reject(RejectReason::Norm, r + 1, decodes));
        }
        pack::pack_unsigned(acc, params.hint_bits(), stage);
        transcript.absorb(stage);
    }
    if h_dec.finish().is_err() {
        return Ok(VerifyReport::reject(RejectReason::Decode, k, decodes));
    }

    message_digest(pk, msg, params, &mut st.mu);
    transcript.absorb(&st.parity);
    transcript.absorb(&st.mu[..params.mu_bytes]);
    transcript.finalize(&mut st.rho[..params.rho_bytes]);
    sample_challenge(&st.rho[..params.rho_bytes], params.tau, z);
    pack::pack_challenge(z, &mut st.c_re);
    if st.c_re[..] != *view.challenge_bytes() {
        return Ok(VerifyReport::reject(RejectReason::Challenge, k, decodes));
    }
    Ok(VerifyReport {
        decision: Decision::Accept,
        reason: None,
        rows_processed: k,
        column_decodes: decodes,
    })
}
