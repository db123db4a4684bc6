use super::norm::{self, NormAccumulator, FFT_WORDS, NORM_BYTES};
use super::{check_seed, nonce, KeyPair};
use crate::codec::pack;
use crate::error::Result;
use crate::hashing::{KeySeeds, SecretStream, UniformStream};
use crate::params::{ParamSet, N, Q};
use crate::ring::{inv_ntt, ntt, Poly};
use crate::workspace::{AllocKind, Scope, WorkArena};

/// Arena bytes that comfortably hold either streamed keygen.
pub fn keygen_arena_bytes(_params: &ParamSet) -> usize {
    NORM_BYTES + norm::FFT_WORKSPACE_BYTES + 2 * size_of::<Poly>() + 512
}

pub fn keygen_streamed(seed: &[u8], params: &ParamSet, arena: &WorkArena) -> Result<KeyPair> {
    let seeds = check_seed(seed)?;
    let top = arena.scope("keygen")?;
    let state: &mut KeySeeds = top.alloc(AllocKind::State, "seeds")?;
    *state = seeds;
    let mut pk = vec![0u8; params.pk_bytes];
    let mut sk = vec![0u8; params.sk_bytes];
    pk[..state.seed_a.len()].copy_from_slice(&state.seed_a);
    if params.d == 0 {
        two_pass(state, params, &top, &mut pk, &mut sk)?;
    } else {
        truncated(state, params, &top, &mut pk, &mut sk)?;
    }
    sk[..params.pk_bytes].copy_from_slice(&pk);
    let ko = params.sk_key_offset();
    sk[ko..].copy_from_slice(&state.key);
    Ok(KeyPair { pk, sk })
}

fn fill_secret(seeds: &KeySeeds, params: &ParamSet, counter: u32, index: usize, out: &mut Poly) -> Result<()> {
    let mut s = SecretStream::new(&seeds.seed_sk, nonce(params, counter, index)?, params.eta);
    for c in out.coeffs.iter_mut() {
        *c = s.next_coeff();
    }
    Ok(())
}

/// d > 0: one row accumulator, one sampling slot, norm bins, and a short-lived FFT workspace.
fn truncated(seeds: &KeySeeds, params: &ParamSet, top: &Scope<'_>, pk: &mut [u8], sk: &mut [u8]) -> Result<()> {
    let (k, m) = (params.k, params.m());
    let bins: &mut [u64] = top.alloc_slice(N, AllocKind::Workspace, "norm")?;
    let b: &mut Poly = top.alloc(AllocKind::Poly, "row")?;
    let s: &mut Poly = top.alloc(AllocKind::Poly, "sample")?;
    let mut counter = 0u32;
    loop {
        let mut acc = NormAccumulator::new(bins);
        for i in 0..k {
            *b = Poly::zero();
            for j in 0..m {
                fill_secret(seeds, params, counter, j, s)?;
                if i == 0 {
                    pack::write_sk_s1(sk, j, s, params);
                    accumulate(top, &mut acc, s)?;
                }
                s.reduce();
                ntt(s);
                UniformStream::matrix(&seeds.seed_a, i, j).mul_acc(b, s);
            }
            inv_ntt(b);
            fill_secret(seeds, params, counter, m + i, s)?;
            let mut a = UniformStream::a_vector(&seeds.seed_a, i);
            for (t, e) in b.coeffs.iter_mut().zip(s.coeffs.iter_mut()) {
                *t = (*t + a.next_coeff() + e.rem_euclid(Q)) % Q;
                *e -= *t & 1;
                *t >>= 1;
            }
            pack::write_pk_poly(pk, i, b, params);
            pack::write_sk_s2(sk, i, s, params);
            accumulate(top, &mut acc, s)?;
        }
        if acc.check(params.gamma_sq_n) {
            return Ok(());
        }
        counter += 1;
    }
}

fn accumulate(top: &Scope<'_>, acc: &mut NormAccumulator<'_>, p: &Poly) -> Result<()> {
    let fft = top.scope("fft")?;
    let ws: &mut [f64] = fft.alloc_slice(FFT_WORDS, AllocKind::Workspace, "fft_ws")?;
    acc.accumulate(ws, p);
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Norm,
    Matrix,
}

/// The two lifetime-disjoint unions of d = 0 keygen. Each region is one
/// 2048-byte block viewed either as norm state or as a polynomial slot.
struct Unions<'a> {
    /// Norm bins, then the row accumulator.
    acc: &'a mut [u64],
    /// FFT workspace, then the sampling slot.
    work: &'a mut [f64],
    phase: Phase,
}

impl<'a> Unions<'a> {
    fn norm_view(&mut self) -> (NormAccumulator<'_>, &mut [f64]) {
        assert_eq!(self.phase, Phase::Norm, "norm view outside norm phase");
        (NormAccumulator::new(self.acc), self.work)
    }

    fn enter_matrix(&mut self) {
        self.acc.fill(0);
        self.work.fill(0.0);
        self.phase = Phase::Matrix;
    }

    fn matrix_view(&mut self) -> (&mut Poly, &mut Poly) {
        assert_eq!(self.phase, Phase::Matrix, "poly view outside matrix phase");
        let row = &mut bytemuck::cast_slice_mut::<u64, Poly>(self.acc)[0];
        let s = &mut bytemuck::cast_slice_mut::<f64, Poly>(self.work)[0];
        (row, s)
    }
}

/// d = 0: norm rejection first, then the matrix pass re-expands the same secrets.
fn two_pass(seeds: &KeySeeds, params: &ParamSet, top: &Scope<'_>, pk: &mut [u8], sk: &mut [u8]) -> Result<()> {
    let (k, m) = (params.k, params.m());
    let mut u = Unions {
        acc: top.alloc_slice(NORM_BYTES / 8, AllocKind::Workspace, "union_acc")?,
        work: top.alloc_slice(FFT_WORDS, AllocKind::Workspace, "union_work")?,
        phase: Phase::Norm,
    };
    let counter = {
        let mut counter = 0u32;
        loop {
            let (mut acc, ws) = u.norm_view();
            for idx in 0..m + k {
                let mut s = SecretStream::new(&seeds.seed_sk, nonce(params, counter, idx)?, params.eta);
                for t in 0..N {
                    norm::load_coeff(ws, t, s.next_coeff());
                }
                acc.accumulate_loaded(ws);
            }
            if acc.check(params.gamma_sq_n) {
                break counter;
            }
            counter += 1;
        }
    };
    u.enter_matrix();
    let (b, s) = u.matrix_view();
    for i in 0..k {
        *b = Poly::zero();
        for j in 0..m {
            fill_secret(seeds, params, counter, j, s)?;
            if i == 0 {
                pack::write_sk_s1(sk, j, s, params);
            }
            s.reduce();
            ntt(s);
            UniformStream::matrix(&seeds.seed_a, i, j).mul_acc(b, s);
        }
        fill_secret(seeds, params, counter, m + i, s)?;
        pack::write_sk_s2(sk, i, s, params);
        s.reduce();
        ntt(s);
        b.add_assign_q(s);
        b.scale_q(-2);
        pack::write_pk_poly(pk, i, b, params);
    }
    Ok(())
}
