//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::fs;
use std::path::Path;
use std::time::Instant;

use haetae_core::codec::{rans, SigView};
use haetae_core::hashing::{domain, sample_challenge, TranscriptHasher, XofStream};
use haetae_core::keygen::{keygen_arena_bytes, keygen_reference, keygen_streamed};
use haetae_core::params::{param_set, Level, ParamSet, N, Q};
use haetae_core::ring::{inv_ntt, ntt, pointwise_mul_assign, Poly};
use haetae_core::sampler::{hyperball_one_pass_oracle, hyperball_two_pass, try_nonce};
use haetae_core::selftest::stream_encode;
use haetae_core::sign::{sign_arena_bytes, sign_reference, sign_streamed, sparse_mul_acc};
use haetae_core::verify::{verify_arena_bytes, verify_reference, verify_streamed};
use haetae_core::WorkArena;
use sha3::digest::{ExtendableOutput, Update, XofReader};

const POLY: usize = size_of::<Poly>();

type Outcome = Result<String, String>;
type Criterion = fn(&[u8; 32]) -> Outcome;

/// Deterministic byte source for trial inputs.
struct Rng(XofStream);

impl Rng {
    fn new(label: &str, master: &[u8; 32]) -> Self {
        let mut seed = master.to_vec();
        seed.extend_from_slice(label.as_bytes());
        let mut d = [0u8; 64];
        let mut h = sha3::Shake256::default();
        h.update(&seed);
        h.finalize_xof().read(&mut d);
        Rng(XofStream::new(&d, domain::KAT, 0))
    }

    fn bytes<const L: usize>(&mut self) -> [u8; L] {
        let mut b = [0u8; L];
        self.0.fill(&mut b);
        b
    }

    fn below(&mut self, n: usize) -> usize {
        (u64::from_le_bytes(self.bytes()) % n as u64) as usize
    }

    fn vec(&mut self, len: usize) -> Vec<u8> {
        let mut v = vec![0u8; len];
        self.0.fill(&mut v);
        v
    }

    /// Random bytes of random length in `lo..hi`.
    fn sized(&mut self, lo: usize, hi: usize) -> Vec<u8> {
        let len = lo + self.below(hi - lo);
        self.vec(len)
    }

    fn poly(&mut self, lo: i32, hi: i32) -> Poly {
        Poly::from_fn(|_| lo + self.below((hi - lo + 1) as usize) as i32)
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: haetae_core::Error) -> String {
    e.to_string()
}

/// Naive negacyclic product over i128, independent of the library.
fn oracle_mul(a: &Poly, b: &Poly) -> Poly {
    let mut acc = [0i128; N];
    for i in 0..N {
        for j in 0..N {
            let prod = a.coeffs[i] as i128 * b.coeffs[j] as i128;
            if i + j < N {
                acc[i + j] += prod;
            } else {
                acc[i + j - N] -= prod;
            }
        }
    }
    Poly::from_fn(|t| acc[t].rem_euclid(Q as i128) as i32)
}

fn round_trip(master: &[u8; 32]) -> Outcome {
    let start = Instant::now();
    let mut tampered = 0;
    for level in Level::ALL {
        let p = param_set(level);
        let mut rng = Rng::new(&format!("round-trip {level}"), master);
        let ka = WorkArena::with_capacity(keygen_arena_bytes(&p));
        let sa = WorkArena::with_capacity(sign_arena_bytes(&p));
        let va = WorkArena::with_capacity(verify_arena_bytes(&p));
        for i in 0..200 {
            let seed: [u8; 32] = rng.bytes();
            let msg = rng.sized(1, 129);
            let kp = keygen_streamed(&seed, &p, &ka).map_err(err)?;
            let sig = sign_streamed(&kp.sk, &msg, &p, &sa).map_err(err)?;
            ensure(verify_streamed(&kp.pk, &msg, &sig, &p, &va).map_err(err)?.is_accept(), || format!("{level} trial {i}: honest signature rejected"))?;
            for _ in 0..3 {
                let bit = rng.below(sig.len() * 8);
                let mut bad = sig.clone();
                bad[bit / 8] ^= 1 << (bit % 8);
                let d = verify_streamed(&kp.pk, &msg, &bad, &p, &va).map_err(err)?;
                ensure(!d.is_accept(), || format!("{level} trial {i}: false accept with bit {bit} flipped"))?;
                tampered += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 120.0, || format!("took {secs:.1} s"))?;
    Ok(format!("600 round trips, {tampered} tampered signatures rejected, {secs:.1} s"))
}

fn sampler_equivalence(master: &[u8; 32]) -> Outcome {
    let mut accepted = 0;
    for level in Level::ALL {
        let p = param_set(level);
        let mut rng = Rng::new(&format!("sampler {level}"), master);
        let mut y1 = vec![Poly::zero(); p.l];
        let mut y2 = vec![Poly::zero(); p.k];
        for i in 0..1000 {
            let seed: [u8; 64] = rng.bytes();
            let nonce = rng.below(1 << 16) as u16;
            let oracle = hyperball_one_pass_oracle(&seed, nonce, &p);
            let two = try_nonce(&seed, nonce, &p);
            ensure(two.is_some() == oracle.accepted, || format!("{level} pair {i}: decisions differ"))?;
            let Some(acc) = two else { continue };
            ensure(Some(acc.alpha) == oracle.alpha && acc.b == oracle.b && acc.b_prime == oracle.b_prime, || format!("{level} pair {i}: scale or bits differ"))?;
            hyperball_two_pass(&seed, nonce, &p, &mut y1, &mut y2).map_err(err)?;
            ensure(y1[..] == oracle.y1.0[..] && y2[..] == oracle.y2.0[..], || format!("{level} pair {i}: values differ"))?;
            accepted += 1;
        }
    }
    Ok(format!("3000 pairs, {accepted} accepted, zero mismatches"))
}

fn rans_identity(master: &[u8; 32]) -> Outcome {
    for level in Level::ALL {
        let p = param_set(level);
        let mut rng = Rng::new(&format!("rans {level}"), master);
        let mut kp = keygen_reference(&rng.bytes::<32>(), &p).map_err(err)?;
        for i in 0..1000 {
            if i % 50 == 0 {
                kp = keygen_reference(&rng.bytes::<32>(), &p).map_err(err)?;
            }
            let sig = sign_reference(&kp.sk, &rng.bytes::<16>(), &p).map_err(err)?;
            let view = SigView::parse(&sig, &p).map_err(err)?;
            for (data, count, table) in [(view.h_stream(), p.k * N, &p.h_table), (view.hb_stream(), p.l * N, &p.hb_table)] {
                let symbols = rans::decode_all(data, count, table).map_err(|e| format!("{level} payload {i}: {e}"))?;
                let full = rans::encode_full(&symbols, table, p.payload_budget()).map_err(|e| e.to_string())?;
                let streamed = stream_encode(&symbols, table, p.payload_budget()).map_err(|e| e.to_string())?;
                ensure(full == streamed && full == data, || format!("{level} payload {i}: bytes differ"))?;
                ensure(rans::decode_all(&full, count, table).ok().as_deref() == Some(&symbols[..]), || format!("{level} payload {i}: decode differs"))?;
            }
        }
    }
    Ok("3000 payload pairs byte-identical, all decodes round-trip".into())
}

fn differentials(master: &[u8; 32]) -> Outcome {
    for level in Level::ALL {
        let p = param_set(level);
        let mut rng = Rng::new(&format!("differential {level}"), master);
        let ka = WorkArena::with_capacity(keygen_arena_bytes(&p));
        let sa = WorkArena::with_capacity(sign_arena_bytes(&p));
        let va = WorkArena::with_capacity(verify_arena_bytes(&p));
        for i in 0..100 {
            let seed: [u8; 32] = rng.bytes();
            let msg = rng.sized(0, 64);
            let kp = keygen_reference(&seed, &p).map_err(err)?;
            ensure(keygen_streamed(&seed, &p, &ka).map_err(err)? == kp, || format!("{level} trial {i}: keys differ"))?;
            let sig = sign_reference(&kp.sk, &msg, &p).map_err(err)?;
            ensure(sign_streamed(&kp.sk, &msg, &p, &sa).map_err(err)? == sig, || format!("{level} trial {i}: signatures differ"))?;
            let mut cand = sig.clone();
            if i % 2 == 1 {
                let bit = rng.below(sig.len() * 8);
                cand[bit / 8] ^= 1 << (bit % 8);
            }
            let want = verify_reference(&kp.pk, &msg, &cand, &p).map_err(err)?;
            let got = verify_streamed(&kp.pk, &msg, &cand, &p, &va).map_err(err)?;
            ensure(want == got, || format!("{level} trial {i}: decisions differ"))?;
        }
    }
    Ok("300 keygen/sign/verify trials, zero mismatches".into())
}

fn honest_sign(p: &ParamSet, arena: &WorkArena) -> Result<(), String> {
    let kp = keygen_reference(&[0x5a; 32], p).map_err(err)?;
    arena.reset_stats();
    sign_streamed(&kp.sk, b"memory", p, arena).map_err(err)?;
    Ok(())
}

fn memory_structure(_: &[u8; 32]) -> Outcome {
    let passes = ["pass_a", "pass_b", "pass_c1", "pass_c2"];
    let mut parts = Vec::new();
    for level in Level::ALL {
        let p = param_set(level);
        let arena = WorkArena::with_capacity(sign_arena_bytes(&p));
        honest_sign(&p, &arena)?;
        let overlaps = arena.overlapping(&passes);
        ensure(overlaps.is_empty(), || format!("{level}: {} overlapping pass pairs", overlaps.len()))?;
        let report = arena.report();
        let peaks: Vec<usize> = passes
            .iter()
            .map(|name| report.row(&format!("sign/{name}")).map(|r| r.large_peak).ok_or(format!("{level}: no {name} row")))
            .collect::<Result<_, _>>()?;
        let max = *peaks.iter().max().unwrap();
        ensure(arena.large_watermark() == POLY + max, || format!("{level}: peak {} != driver {POLY} + max {max}", arena.large_watermark()))?;
        parts.push(format!("{level} {} = {POLY} + {max}", arena.large_watermark()));
    }
    Ok(parts.join(", "))
}

fn baselines(_: &[u8; 32]) -> Outcome {
    let mut parts = Vec::new();
    for level in Level::ALL {
        let p = param_set(level);
        let arena = WorkArena::with_capacity(sign_arena_bytes(&p));
        honest_sign(&p, &arena)?;
        let sign_peak = arena.large_watermark();
        let sign_limit = (p.k + 3) * 1024 + p.l * 256;
        ensure(sign_peak < sign_limit, || format!("{level} sign {sign_peak} >= {sign_limit}"))?;

        let kp = keygen_reference(&[0x33; 32], &p).map_err(err)?;
        let sig = sign_reference(&kp.sk, b"baseline", &p).map_err(err)?;
        let arena = WorkArena::with_capacity(verify_arena_bytes(&p));
        ensure(verify_streamed(&kp.pk, b"baseline", &sig, &p, &arena).map_err(err)?.is_accept(), || format!("{level}: verify rejected"))?;
        let verify_peak = arena.large_watermark();
        let verify_limit = (p.k + 2) * 1024;
        ensure(verify_peak < verify_limit, || format!("{level} verify {verify_peak} >= {verify_limit}"))?;
        parts.push(format!("{level} sign {sign_peak}<{sign_limit} verify {verify_peak}<{verify_limit}"));
    }
    let p = param_set(Level::H5);
    let arena = WorkArena::with_capacity(keygen_arena_bytes(&p));
    keygen_streamed(&[0x44; 32], &p, &arena).map_err(err)?;
    let (large, total) = (arena.large_watermark(), arena.watermark());
    ensure(large <= 2 * 1024 + 2048, || format!("H5 keygen {large} > 4096"))?;
    ensure(total - large <= 512, || format!("H5 keygen driver slack {} > 512", total - large))?;
    parts.push(format!("H5 keygen {large}<=4096 (+{} driver)", total - large));
    Ok(parts.join(", "))
}

fn verify_uniformity(_: &[u8; 32]) -> Outcome {
    let mut peaks = Vec::new();
    for level in Level::ALL {
        let p = param_set(level);
        let kp = keygen_reference(&[0x21; 32], &p).map_err(err)?;
        let sig = sign_reference(&kp.sk, b"uniform", &p).map_err(err)?;
        let arena = WorkArena::with_capacity(verify_arena_bytes(&p));
        ensure(verify_streamed(&kp.pk, b"uniform", &sig, &p, &arena).map_err(err)?.is_accept(), || format!("{level}: verify rejected"))?;
        peaks.push(arena.watermark());
    }
    let spread = peaks.iter().max().unwrap() - peaks.iter().min().unwrap();
    ensure(spread <= 256, || format!("watermarks {peaks:?} spread {spread}"))?;
    Ok(format!("watermarks {peaks:?}, spread {spread} B"))
}

fn ring_correctness(master: &[u8; 32]) -> Outcome {
    let mut rng = Rng::new("ring", master);
    for i in 0..1000 {
        let a = rng.poly(0, Q - 1);
        let b = rng.poly(0, Q - 1);
        let (mut ah, mut bh) = (a, b);
        ntt(&mut ah);
        ntt(&mut bh);
        let mut back = ah;
        inv_ntt(&mut back);
        ensure(back == a, || format!("pair {i}: NTT round trip"))?;
        pointwise_mul_assign(&mut ah, &bh);
        inv_ntt(&mut ah);
        ensure(ah == oracle_mul(&a, &b), || format!("pair {i}: NTT product"))?;
    }
    let taus = Level::ALL.map(|l| param_set(l).tau);
    for i in 0..1000 {
        let mut c = Poly::zero();
        sample_challenge(&rng.bytes::<32>(), taus[i % 3], &mut c);
        let s = rng.poly(-3, 3);
        let b = (i % 2) as u8;
        let mut sparse = Poly::zero();
        sparse_mul_acc(&mut sparse, &c, &s, b);
        let sparse = Poly::from_fn(|t| sparse.coeffs[t].rem_euclid(Q));
        let mut school = oracle_mul(&c, &s);
        let (mut ch, mut sh) = (c, Poly::from_fn(|t| s.coeffs[t].rem_euclid(Q)));
        ntt(&mut ch);
        ntt(&mut sh);
        pointwise_mul_assign(&mut sh, &ch);
        inv_ntt(&mut sh);
        if b == 1 {
            school = Poly::from_fn(|t| (Q - school.coeffs[t]) % Q);
            sh = Poly::from_fn(|t| (Q - sh.coeffs[t]) % Q);
        }
        ensure(sparse == school && sh == school, || format!("pair {i}: sparse, NTT and schoolbook disagree"))?;
    }
    Ok("1000 NTT pairs, 1000 sparse triples exact".into())
}

fn fixed_sizes(master: &[u8; 32]) -> Outcome {
    let want = [(Level::H2, 992, 1408, 1474), (Level::H3, 1472, 2112, 2349), (Level::H5, 2080, 2752, 2948)];
    let mut rng = Rng::new("sizes", master);
    for (level, pk, sk, sig) in want {
        let p = param_set(level);
        for _ in 0..5 {
            let kp = keygen_reference(&rng.bytes::<32>(), &p).map_err(err)?;
            let s = sign_reference(&kp.sk, &rng.sized(0, 300), &p).map_err(err)?;
            let got = (kp.pk.len(), kp.sk.len(), s.len());
            ensure(got == (pk, sk, sig), || format!("{level}: {got:?}"))?;
        }
    }
    Ok("992/1408/1474, 1472/2112/2349, 2080/2752/2948".into())
}

fn transcript(master: &[u8; 32]) -> Outcome {
    for level in Level::ALL {
        let p = param_set(level);
        let mut rng = Rng::new(&format!("transcript {level}"), master);
        for i in 0..1000 {
            let pieces: Vec<Vec<u8>> = (0..p.k + 2).map(|_| rng.sized(0, p.row_pack_bytes() + 1)).collect();
            let mut inc = TranscriptHasher::new();
            for piece in &pieces {
                inc.absorb(piece);
            }
            let mut a = vec![0u8; p.rho_bytes];
            inc.finalize(&mut a);

            let mut whole = vec![domain::TRANSCRIPT];
            pieces.iter().for_each(|piece| whole.extend_from_slice(piece));
            let mut h = sha3::Shake256::default();
            h.update(&whole);
            let mut b = vec![0u8; p.rho_bytes];
            h.finalize_xof().read(&mut b);
            ensure(a == b, || format!("{level} transcript {i} differs"))?;
        }
    }
    Ok("3000 transcripts exact".into())
}

const FORBIDDEN: &[&str] = &["static mut", "thread_local!", "lazy_static!", "OnceCell", "OnceLock", "LazyLock", "Lazy<"];
const INTERIOR: &[&str] = &["Cell<", "Mutex<", "RwLock<", "Atomic"];

fn scan(dir: &Path, files: &mut usize, hits: &mut Vec<String>) {
    let mut entries: Vec<_> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    entries.sort();
    for path in entries {
        if path.is_dir() {
            scan(&path, files, hits);
            continue;
        }
        if path.extension().is_none_or(|e| e != "rs") {
            continue;
        }
        *files += 1;
        for (n, line) in fs::read_to_string(&path).unwrap().lines().enumerate() {
            let code = line.split("//").next().unwrap_or("").trim();
            let is_static = code.starts_with("static ") || code.starts_with("pub static ") || code.starts_with("pub(crate) static ");
            if FORBIDDEN.iter().any(|p| code.contains(p)) || (is_static && INTERIOR.iter().any(|p| code.contains(p))) {
                hits.push(format!("{}:{}", path.display(), n + 1));
            }
        }
    }
}

fn static_state(_: &[u8; 32]) -> Outcome {
    let crates = Path::new(env!("CARGO_MANIFEST_DIR")).parent().unwrap();
    let (mut files, mut hits) = (0, Vec::new());
    for name in ["core", "ffi"] {
        scan(&crates.join(name).join("src"), &mut files, &mut hits);
    }
    ensure(hits.is_empty(), || format!("mutable statics at {}", hits.join(", ")))?;
    Ok(format!("{files} source files, zero mutable statics"))
}

fn main() {
    let master: [u8; 32] = match std::env::var("HAETAE_ACCEPTANCE_SEED") {
        Ok(h) => hex::decode(h).ok().and_then(|v| v.try_into().ok()).expect("HAETAE_ACCEPTANCE_SEED must be 64 hex digits"),
        Err(_) => {
            let mut m = [0u8; 32];
            getrandom::getrandom(&mut m).expect("OS randomness");
            m
        }
    };
    println!("acceptance seed {} (set HAETAE_ACCEPTANCE_SEED to replay)", hex::encode(master));
    let criteria: [(&str, Criterion); 11] = [
        ("round trip and tamper rejection", round_trip),
        ("sampler two-pass equivalence", sampler_equivalence),
        ("rANS byte identity", rans_identity),
        ("streamed vs reference differentials", differentials),
        ("sign memory structure", memory_structure),
        ("baseline beating", baselines),
        ("verify uniformity", verify_uniformity),
        ("ring correctness", ring_correctness),
        ("fixed sizes", fixed_sizes),
        ("incremental transcript", transcript),
        ("static-state audit", static_state),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run(&master) {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} of 11 criteria passed", 11 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
