//! Differential self-test: each property compares a streamed component
//! against its buffered counterpart on deterministic inputs.

use std::fmt;

use crate::codec::rans::{self, FreqTable, RansStreamEncoder};
use crate::codec::SigView;
use crate::error::Result;
use crate::hashing::{domain, XofStream};
use crate::keygen::{keygen_arena_bytes, keygen_reference, keygen_streamed};
use crate::params::{ParamSet, N};
use crate::ring::Poly;
use crate::sampler::{hyperball_one_pass_oracle, hyperball_two_pass};
use crate::sign::{sign_arena_bytes, sign_reference, sign_streamed};
use crate::verify::{verify_arena_bytes, verify_reference, verify_streamed};
use crate::workspace::WorkArena;

#[derive(Debug, Clone, Copy)]
pub struct Options {
    /// Trials per property.
    pub trials: usize,
    /// Test fixture: hands the streaming entropy encoder a perturbed table.
    pub broken_table: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options { trials: 20, broken_table: false }
    }
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub trials: usize,
    /// First mismatch, if any.
    pub detail: Option<String>,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {} ({} trials)", self.name, self.trials)?;
        if let Some(d) = &self.detail {
            write!(f, ": {d}")?;
        }
        Ok(())
    }
}

fn check(name: &'static str, trials: usize, mut trial: impl FnMut(usize) -> Result<Option<String>>) -> Result<Check> {
    for i in 0..trials {
        if let Some(d) = trial(i)? {
            return Ok(Check { name, passed: false, trials: i + 1, detail: Some(d) });
        }
    }
    Ok(Check { name, passed: true, trials, detail: None })
}

fn seed(tag: u8, i: usize) -> [u8; 32] {
    let mut s = [0u8; 32];
    XofStream::new(&[tag], domain::KAT, i as u16).fill(&mut s);
    s
}

/// Moves one slot of probability mass between the two most likely symbols.
pub fn perturbed(table: &FreqTable) -> FreqTable {
    let mut freqs = table.freqs().to_vec();
    let mut order: Vec<usize> = (0..freqs.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(freqs[i]));
    freqs[order[0]] -= 1;
    freqs[order[1]] += 1;
    FreqTable::new(table.offset(), freqs).expect("perturbed table stays valid")
}

/// Pushes `symbols` through the streaming encoder in reverse order.
pub fn stream_encode(symbols: &[i32], table: &FreqTable, capacity: usize) -> std::result::Result<Vec<u8>, rans::RansError> {
    let mut buf = vec![0u8; capacity];
    let mut enc = RansStreamEncoder::new(&mut buf, table);
    for &s in symbols.iter().rev() {
        enc.push(s)?;
    }
    let len = enc.finalize()?;
    buf.truncate(len);
    Ok(buf)
}

fn sampler_identity(p: &ParamSet, trials: usize) -> Result<Check> {
    let mut y1 = vec![Poly::zero(); p.l];
    let mut y2 = vec![Poly::zero(); p.k];
    check("sampler two-pass = one-pass", trials, |i| {
        let s = seed(1, i);
        let nonce = (i * 7) as u16;
        let oracle = hyperball_one_pass_oracle(&s, nonce, p);
        let acc = hyperball_two_pass(&s, nonce, p, &mut y1, &mut y2)?;
        if (acc.nonce == nonce) != oracle.accepted {
            return Ok(Some(format!("trial {i}: decision differs")));
        }
        if !oracle.accepted {
            return Ok(None);
        }
        let same = Some(acc.alpha) == oracle.alpha
            && acc.b == oracle.b
            && acc.b_prime == oracle.b_prime
            && y1[..] == oracle.y1.0[..]
            && y2[..] == oracle.y2.0[..];
        Ok((!same).then(|| format!("trial {i}: values differ")))
    })
}

fn rans_identity(p: &ParamSet, trials: usize, broken: bool) -> Result<Check> {
    let (hb_stream_table, h_stream_table) = if broken {
        (perturbed(&p.hb_table), perturbed(&p.h_table))
    } else {
        (p.hb_table.clone(), p.h_table.clone())
    };
    check("rANS streaming = full-array", trials, |i| {
        let kp = keygen_reference(&seed(2, i / 4), p)?;
        let sig = sign_reference(&kp.sk, &(i as u64).to_le_bytes(), p)?;
        let view = SigView::parse(&sig, p)?;
        let budget = p.payload_budget();
        for (what, data, count, table, stream_table) in [
            ("high bits", view.hb_stream(), p.l * N, &p.hb_table, &hb_stream_table),
            ("hints", view.h_stream(), p.k * N, &p.h_table, &h_stream_table),
        ] {
            let symbols = rans::decode_all(data, count, table)?;
            let full = rans::encode_full(&symbols, table, budget)?;
            let streamed = stream_encode(&symbols, stream_table, budget).ok();
            if streamed.as_deref() != Some(&full[..]) {
                return Ok(Some(format!("trial {i}: {what} streams differ")));
            }
            if full != data || rans::decode_all(&full, count, table)? != symbols {
                return Ok(Some(format!("trial {i}: {what} round trip differs")));
            }
        }
        Ok(None)
    })
}

fn keygen_identity(p: &ParamSet, trials: usize) -> Result<Check> {
    let arena = WorkArena::with_capacity(keygen_arena_bytes(p));
    check("keygen streamed = reference", trials, |i| {
        let s = seed(3, i);
        let same = keygen_streamed(&s, p, &arena)? == keygen_reference(&s, p)?;
        Ok((!same).then(|| format!("trial {i}: keys differ")))
    })
}

fn sign_identity(p: &ParamSet, trials: usize) -> Result<Check> {
    let arena = WorkArena::with_capacity(sign_arena_bytes(p));
    check("sign streamed = reference", trials, |i| {
        let kp = keygen_reference(&seed(4, i / 4), p)?;
        let msg = seed(5, i);
        let same = sign_streamed(&kp.sk, &msg, p, &arena)? == sign_reference(&kp.sk, &msg, p)?;
        Ok((!same).then(|| format!("trial {i}: signatures differ")))
    })
}

fn verify_identity(p: &ParamSet, trials: usize) -> Result<Check> {
    let arena = WorkArena::with_capacity(verify_arena_bytes(p));
    check("verify streamed = reference", trials, |i| {
        let kp = keygen_reference(&seed(6, i / 4), p)?;
        let msg = seed(7, i);
        let mut sig = sign_reference(&kp.sk, &msg, p)?;
        // odd trials check a tampered signature
        if i % 2 == 1 {
            let bit = (i * 131) % (sig.len() * 8);
            sig[bit / 8] ^= 1 << (bit % 8);
        }
        let want = verify_reference(&kp.pk, &msg, &sig, p)?;
        let got = verify_streamed(&kp.pk, &msg, &sig, p, &arena)?;
        if got != want {
            return Ok(Some(format!("trial {i}: streamed {got:?}, reference {want:?}")));
        }
        Ok((want.is_accept() == (i % 2 == 1)).then(|| format!("trial {i}: unexpected {want:?}")))
    })
}

/// Runs every property at one parameter set.
pub fn run(params: &ParamSet, opts: Options) -> Result<Vec<Check>> {
    Ok(vec![
        sampler_identity(params, opts.trials)?,
        rans_identity(params, opts.trials, opts.broken_table)?,
        keygen_identity(params, opts.trials)?,
        sign_identity(params, opts.trials)?,
        verify_identity(params, opts.trials)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{param_set, Level};

    #[test]
    fn pristine_passes() {
        for level in Level::ALL {
            let checks = run(&param_set(level), Options { trials: 4, broken_table: false }).unwrap();
            assert_eq!(checks.len(), 5);
            assert!(checks.iter().all(|c| c.passed), "{checks:?}");
        }
    }

    #[test]
    fn broken_table_fails_rans_only() {
        let p = param_set(Level::H2);
        let checks = run(&p, Options { trials: 4, broken_table: true }).unwrap();
        let failed: Vec<_> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
        assert_eq!(failed, ["rANS streaming = full-array"]);
        assert!(checks[1].to_string().starts_with("FAIL"));
    }
}
