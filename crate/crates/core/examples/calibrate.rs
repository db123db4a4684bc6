//! Measures keygen and signing statistics and prints a constants file.
//!
//! ```text
//! cargo run --release --example calibrate -- stats [signatures]
//! cargo run --release --example calibrate -- emit [signatures] > constants/haetae.constants
//! ```
//!
//! `emit` keeps the bound formulas below, sets the keygen norm bound to the
//! median of the observed largest spectral bin, and rebuilds both entropy
//! tables from the symbol histograms of honest signatures.

use std::fmt::Write as _;
use std::time::Instant;

use haetae_core::codec::{rans, SigView};
use haetae_core::keygen::{keygen_reference, keygen_reference_trace, norm, NormAccumulator};
use haetae_core::params::{param_set, Level, ParamSet, N};
use haetae_core::sampler::cdt_table;
use haetae_core::sign::{sign_reference_traced, Outcome};

/// Per-coefficient mask scale.
const MASK_SCALE: f64 = 160.0;
const SIGMA: f64 = 8.0;
/// Symbol window of both tables.
const SYMBOL_LO: i32 = -8;
const SYMBOLS: usize = 16;

struct Bounds {
    b0: u64,
    b_prime: u64,
    b_dprime: u64,
    b1: u64,
    b_reflect: u64,
}

fn bounds(p: &ParamSet) -> Bounds {
    let dims = ((p.k + p.l) * N) as f64;
    let lambda = (p.k + p.l) as f64;
    let b0 = (MASK_SCALE * dims.sqrt() / lambda).ceil() as u64;
    let radius = b0 as f64 * lambda;
    let b_prime = (radius * radius + 450_000.0).sqrt().ceil() as u64;
    let slack = ((p.k * N) as f64).sqrt() * (p.alpha_h as f64 / 4.0 + 1.0);
    Bounds {
        b0,
        b_prime,
        b_dprime: b_prime + slack.ceil() as u64,
        b1: (radius * 1.25 / lambda.sqrt()).ceil() as u64,
        b_reflect: radius as u64,
    }
}

fn with_bounds(level: Level) -> ParamSet {
    let mut p = param_set(level);
    let b = bounds(&p);
    p.b0 = b.b0;
    p.b_prime = b.b_prime;
    p.b_dprime = b.b_dprime;
    p.b1 = b.b1;
    p.b_reflect = b.b_reflect;
    p.lambda_scale = (p.k + p.l) as u64;
    p
}

fn keygen_max_bins(p: &ParamSet, samples: usize) -> Vec<u64> {
    let mut open = p.clone();
    open.gamma_sq_n = u64::MAX >> 20;
    let mut bins = vec![0u64; N];
    let mut ws = vec![0f64; norm::FFT_WORDS];
    let mut out: Vec<u64> = (0..samples)
        .map(|i| {
            let seed = seed_bytes(0x4b00_0000 + i as u64);
            let tr = keygen_reference_trace(&seed, &open).unwrap();
            let mut acc = NormAccumulator::new(&mut bins);
            for s in tr.s_gen.iter().chain(tr.s2.iter()) {
                acc.accumulate(&mut ws, s);
            }
            acc.max_bin() >> norm::BIN_FRAC_BITS
        })
        .collect();
    out.sort_unstable();
    out
}

fn seed_bytes(i: u64) -> [u8; 32] {
    let mut s = [0u8; 32];
    s[..8].copy_from_slice(&i.to_le_bytes());
    s
}

#[derive(Default)]
struct SignStats {
    outcomes: [usize; 5],
    hb: Vec<u64>,
    h: Vec<u64>,
    payload_max: usize,
    payload_sum: usize,
    sigs: usize,
    secs: f64,
}

fn sign_stats(p: &ParamSet, samples: usize) -> SignStats {
    let mut st = SignStats {
        hb: vec![0; SYMBOLS],
        h: vec![0; SYMBOLS],
        ..Default::default()
    };
    let t0 = Instant::now();
    for i in 0..samples {
        let kp = keygen_reference(&seed_bytes(0x5100_0000 + (i / 8) as u64), p).unwrap();
        let msg = (i as u64).to_le_bytes();
        let (sig, trace) = sign_reference_traced(&kp.sk, &msg, p).unwrap();
        for it in &trace {
            let slot = match it.outcome {
                Outcome::RejectFirst => 0,
                Outcome::RejectNorm => 1,
                Outcome::RejectReflect => 2,
                Outcome::Encode => 3,
                Outcome::Accept => 4,
            };
            st.outcomes[slot] += 1;
        }
        let view = SigView::parse(&sig, p).unwrap();
        let payload = view.hb_stream().len() + view.h_stream().len();
        st.payload_max = st.payload_max.max(payload);
        st.payload_sum += payload;
        st.sigs += 1;
        for s in rans::decode_all(view.hb_stream(), p.l * N, &p.hb_table).unwrap() {
            st.hb[(s - SYMBOL_LO) as usize] += 1;
        }
        for s in rans::decode_all(view.h_stream(), p.k * N, &p.h_table).unwrap() {
            st.h[(s - SYMBOL_LO) as usize] += 1;
        }
    }
    st.secs = t0.elapsed().as_secs_f64();
    st
}

fn print_stats(level: Level, p: &ParamSet, kg: &[u64], st: &SignStats) {
    let total: usize = st.outcomes.iter().sum();
    eprintln!("== {level}");
    eprintln!(
        "keygen max bin: min {} median {} p90 {} max {}",
        kg[0],
        kg[kg.len() / 2],
        kg[kg.len() * 9 / 10],
        kg[kg.len() - 1]
    );
    eprintln!(
        "sign iterations {total}: first {} norm {} reflect {} encode {} accept {}",
        st.outcomes[0], st.outcomes[1], st.outcomes[2], st.outcomes[3], st.outcomes[4]
    );
    eprintln!(
        "payload mean {:.1} max {} budget {}; {:.2} ms/signature",
        st.payload_sum as f64 / st.sigs as f64,
        st.payload_max,
        p.payload_budget(),
        1e3 * st.secs / st.sigs as f64
    );
    eprintln!("hb histogram {:?}", st.hb);
    eprintln!("h histogram  {:?}", st.h);
}

fn emit_level(out: &mut String, level: Level, p: &ParamSet, gamma: u64, st: &SignStats) {
    let name = level.prefix();
    let b = bounds(p);
    let hb = rans::FreqTable::from_counts(SYMBOL_LO, &st.hb).unwrap();
    let h = rans::FreqTable::from_counts(SYMBOL_LO, &st.h).unwrap();
    let _ = writeln!(out, "{name}.eta = {}", p.eta);
    let _ = writeln!(out, "{name}.gamma_sq_n = {gamma}");
    let _ = writeln!(out, "{name}.sigma_gauss = {}", SIGMA as u64);
    for (key, v) in [("b0", b.b0), ("b_prime", b.b_prime), ("b_dprime", b.b_dprime), ("b1", b.b1), ("b_reflect", b.b_reflect)] {
        let _ = writeln!(out, "{name}.{key} = {v}");
    }
    for (key, v) in [("tr_bytes", p.tr_bytes), ("mu_bytes", p.mu_bytes), ("rho_bytes", p.rho_bytes)] {
        let _ = writeln!(out, "{name}.{key} = {v}");
    }
    for (i, v) in cdt_table(SIGMA).iter().enumerate() {
        let _ = writeln!(out, "{name}.cdt.{i} = {v}");
    }
    for (tag, table) in [("hb", &hb), ("h", &h)] {
        let _ = writeln!(out, "{name}.rans.{tag}.offset = {}", table.offset());
        for (i, f) in table.freqs().iter().enumerate() {
            let _ = writeln!(out, "{name}.rans.{tag}.{i} = {f}");
        }
    }
    out.push('\n');
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mode = args.first().map(String::as_str).unwrap_or("stats");
    let samples: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(200);
    let mut out = String::from(
        "# Per-level constants for the HAETAE parameter sets.\n\
         # Format: `level.key = integer`; lists use `.0`, `.1`, ... suffixes.\n\
         # Generated by `cargo run --release --example calibrate -- emit`.\n\
         version = 1\n\n",
    );
    for level in Level::ALL {
        let p = with_bounds(level);
        let kg = keygen_max_bins(&p, samples);
        let st = sign_stats(&p, samples);
        print_stats(level, &p, &kg, &st);
        if mode == "emit" {
            emit_level(&mut out, level, &p, kg[kg.len() / 2], &st);
        }
    }
    if mode == "emit" {
        print!("{out}");
    }
}
