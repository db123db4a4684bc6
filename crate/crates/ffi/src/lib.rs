//! C ABI over `haetae-core`.
//!
//! A context owns one parameter set, an execution path and a work arena.
//! Contexts are not thread-safe; use one per thread. Every function returns
//! a [`HaetaeStatus`]; output buffers must be at least the size reported by
//! the matching `haetae_*_bytes` query.

use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use haetae_core::keygen::{keygen, keygen_arena_bytes};
use haetae_core::params::{param_set, Level, ParamSet, SEED_BYTES};
use haetae_core::sign::{sign, sign_arena_bytes};
use haetae_core::verify::{verify, verify_arena_bytes};
use haetae_core::{Error, ExecPath, WorkArena};

/// Result codes. Negative values are errors.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HaetaeStatus {
    Ok = 0,
    /// Verification ran and rejected the signature.
    Reject = 1,
    NullPointer = -1,
    InvalidLevel = -2,
    BufferTooSmall = -3,
    InvalidLength = -4,
    ArenaExhausted = -5,
    Internal = -6,
}

/// Opaque handle.
pub struct HaetaeCtx {
    params: ParamSet,
    path: ExecPath,
    arena: WorkArena,
}

fn status_of(e: &Error) -> HaetaeStatus {
    match e {
        Error::Arena(_) => HaetaeStatus::ArenaExhausted,
        Error::Length { .. } => HaetaeStatus::InvalidLength,
        _ => HaetaeStatus::Internal,
    }
}

fn guard(f: impl FnOnce() -> HaetaeStatus) -> HaetaeStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(HaetaeStatus::Internal)
}

/// # Safety
/// `p` must be null or point to `len` readable bytes. A null `p` is allowed when `len` is 0.
unsafe fn input<'a>(p: *const u8, len: usize) -> Option<&'a [u8]> {
    if len == 0 {
        return Some(&[]);
    }
    (!p.is_null()).then(|| slice::from_raw_parts(p, len))
}

/// # Safety
/// `p` must be null or point to `cap` writable bytes.
unsafe fn output<'a>(p: *mut u8, cap: usize, need: usize) -> Result<&'a mut [u8], HaetaeStatus> {
    if p.is_null() {
        return Err(HaetaeStatus::NullPointer);
    }
    if cap < need {
        return Err(HaetaeStatus::BufferTooSmall);
    }
    Ok(slice::from_raw_parts_mut(p, need))
}

/// Creates a context for level 2, 3 or 5. `streamed` selects the
/// low-working-set path; otherwise the buffered reference path is used.
///
/// # Safety
/// `out` must be a valid pointer to a `HaetaeCtx*`.
#[no_mangle]
pub unsafe extern "C" fn haetae_ctx_new(level: u32, streamed: bool, out: *mut *mut HaetaeCtx) -> HaetaeStatus {
    if out.is_null() {
        return HaetaeStatus::NullPointer;
    }
    *out = ptr::null_mut();
    let level = match level {
        2 => Level::H2,
        3 => Level::H3,
        5 => Level::H5,
        _ => return HaetaeStatus::InvalidLevel,
    };
    guard(|| {
        let params = param_set(level);
        let bytes = keygen_arena_bytes(&params).max(sign_arena_bytes(&params)).max(verify_arena_bytes(&params));
        let path = if streamed { ExecPath::Streamed } else { ExecPath::Reference };
        let ctx = Box::new(HaetaeCtx { arena: WorkArena::with_capacity(bytes), params, path });
        *out = Box::into_raw(ctx);
        HaetaeStatus::Ok
    })
}

/// # Safety
/// `ctx` must be null or a pointer from [`haetae_ctx_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn haetae_ctx_free(ctx: *mut HaetaeCtx) {
    if !ctx.is_null() {
        drop(Box::from_raw(ctx));
    }
}

/// # Safety
/// `ctx` must be a live context.
#[no_mangle]
pub unsafe extern "C" fn haetae_pk_bytes(ctx: *const HaetaeCtx) -> usize {
    ctx.as_ref().map_or(0, |c| c.params.pk_bytes)
}

/// # Safety
/// `ctx` must be a live context.
#[no_mangle]
pub unsafe extern "C" fn haetae_sk_bytes(ctx: *const HaetaeCtx) -> usize {
    ctx.as_ref().map_or(0, |c| c.params.sk_bytes)
}

/// # Safety
/// `ctx` must be a live context.
#[no_mangle]
pub unsafe extern "C" fn haetae_sig_bytes(ctx: *const HaetaeCtx) -> usize {
    ctx.as_ref().map_or(0, |c| c.params.sig_bytes)
}

/// Peak arena bytes used by poly, staging and workspace buffers during the last operation.
///
/// # Safety
/// `ctx` must be a live context.
#[no_mangle]
pub unsafe extern "C" fn haetae_last_watermark(ctx: *const HaetaeCtx) -> usize {
    ctx.as_ref().map_or(0, |c| c.arena.large_watermark())
}

/// Deterministic key generation from a 32-byte seed.
///
/// # Safety
/// Pointers must be valid for the given lengths.
#[no_mangle]
pub unsafe extern "C" fn haetae_keygen(
    ctx: *mut HaetaeCtx,
    seed: *const u8,
    seed_len: usize,
    pk: *mut u8,
    pk_cap: usize,
    sk: *mut u8,
    sk_cap: usize,
) -> HaetaeStatus {
    let Some(ctx) = ctx.as_mut() else {
        return HaetaeStatus::NullPointer;
    };
    let Some(seed) = input(seed, seed_len) else {
        return HaetaeStatus::NullPointer;
    };
    if seed.len() != SEED_BYTES {
        return HaetaeStatus::InvalidLength;
    }
    let (pk, sk) = match (output(pk, pk_cap, ctx.params.pk_bytes), output(sk, sk_cap, ctx.params.sk_bytes)) {
        (Ok(pk), Ok(sk)) => (pk, sk),
        (Err(e), _) | (_, Err(e)) => return e,
    };
    guard(|| {
        ctx.arena.reset_stats();
        match keygen(seed, &ctx.params, ctx.path, &ctx.arena) {
            Ok(kp) => {
                pk.copy_from_slice(&kp.pk);
                sk.copy_from_slice(&kp.sk);
                HaetaeStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Signs `msg`; writes exactly `haetae_sig_bytes` bytes.
///
/// # Safety
/// Pointers must be valid for the given lengths.
#[no_mangle]
pub unsafe extern "C" fn haetae_sign(
    ctx: *mut HaetaeCtx,
    sk: *const u8,
    sk_len: usize,
    msg: *const u8,
    msg_len: usize,
    sig: *mut u8,
    sig_cap: usize,
) -> HaetaeStatus {
    let Some(ctx) = ctx.as_mut() else {
        return HaetaeStatus::NullPointer;
    };
    let (Some(sk), Some(msg)) = (input(sk, sk_len), input(msg, msg_len)) else {
        return HaetaeStatus::NullPointer;
    };
    let sig = match output(sig, sig_cap, ctx.params.sig_bytes) {
        Ok(s) => s,
        Err(e) => return e,
    };
    guard(|| {
        ctx.arena.reset_stats();
        match sign(sk, msg, &ctx.params, ctx.path, &ctx.arena) {
            Ok(s) => {
                sig.copy_from_slice(&s);
                HaetaeStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Returns `Ok` on accept and `Reject` on reject.
///
/// # Safety
/// Pointers must be valid for the given lengths.
#[no_mangle]
pub unsafe extern "C" fn haetae_verify(
    ctx: *mut HaetaeCtx,
    pk: *const u8,
    pk_len: usize,
    msg: *const u8,
    msg_len: usize,
    sig: *const u8,
    sig_len: usize,
) -> HaetaeStatus {
    let Some(ctx) = ctx.as_mut() else {
        return HaetaeStatus::NullPointer;
    };
    let (Some(pk), Some(msg), Some(sig)) = (input(pk, pk_len), input(msg, msg_len), input(sig, sig_len)) else {
        return HaetaeStatus::NullPointer;
    };
    guard(|| {
        ctx.arena.reset_stats();
        match verify(pk, msg, sig, &ctx.params, ctx.path, &ctx.arena) {
            Ok(d) if d.is_accept() => HaetaeStatus::Ok,
            Ok(_) => HaetaeStatus::Reject,
            Err(e) => status_of(&e),
        }
    })
}

/// Static, NUL-terminated description of a status code. Takes the raw
/// integer so that any value coming from C is safe to pass.
#[no_mangle]
pub extern "C" fn haetae_status_str(status: i32) -> *const c_char {
    let s: &'static [u8] = match status {
        0 => b"ok\0",
        1 => b"signature rejected\0",
        -1 => b"null pointer\0",
        -2 => b"invalid level\0",
        -3 => b"buffer too small\0",
        -4 => b"invalid input length\0",
        -5 => b"work arena exhausted\0",
        -6 => b"internal error\0",
        _ => b"unknown status\0",
    };
    s.as_ptr().cast()
}
