//! Known-answer records in a request/response text layout.
//!
//! Each record is a block of `field = value` lines with lowercase hex
//! values, separated by blank lines:
//!
//! ```text
//! count = 0
//! seed = 00a1...
//! msg = 5c...
//! pk = ...
//! sk = ...
//! sig = ...
//! ```

use std::fmt;

use crate::error::{Error, Result};
use crate::hashing::{domain, XofStream};
use crate::keygen::keygen_reference;
use crate::params::{Level, ParamSet, SEED_BYTES};
use crate::sign::sign_reference;
use crate::verify::verify_reference;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KatRecord {
    pub count: usize,
    pub seed: [u8; SEED_BYTES],
    pub msg: Vec<u8>,
    pub pk: Vec<u8>,
    pub sk: Vec<u8>,
    pub sig: Vec<u8>,
}

/// Deterministic seed and message for record `count` at `level`.
pub fn request(level: Level, count: usize) -> ([u8; SEED_BYTES], Vec<u8>) {
    let nonce = u16::try_from(count).expect("record count fits in u16");
    let mut xof = XofStream::new(level.prefix().as_bytes(), domain::KAT, nonce);
    let mut seed = [0u8; SEED_BYTES];
    xof.fill(&mut seed);
    let mut msg = vec![0u8; 33 * (count + 1)];
    xof.fill(&mut msg);
    (seed, msg)
}

impl KatRecord {
    /// Builds a record from `(seed, msg)` with the reference implementation.
    pub fn respond(count: usize, seed: [u8; SEED_BYTES], msg: Vec<u8>, params: &ParamSet) -> Result<Self> {
        let kp = keygen_reference(&seed, params)?;
        let sig = sign_reference(&kp.sk, &msg, params)?;
        Ok(KatRecord {
            count,
            seed,
            msg,
            pk: kp.pk,
            sk: kp.sk,
            sig,
        })
    }

    /// Regenerates the record from its seed and message and checks that
    /// every byte matches and the signature verifies.
    pub fn replay(&self, params: &ParamSet) -> Result<bool> {
        let again = KatRecord::respond(self.count, self.seed, self.msg.clone(), params)?;
        Ok(again == *self && verify_reference(&self.pk, &self.msg, &self.sig, params)?.is_accept())
    }
}

impl fmt::Display for KatRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "count = {}", self.count)?;
        writeln!(f, "seed = {}", hex::encode(self.seed))?;
        writeln!(f, "msg = {}", hex::encode(&self.msg))?;
        writeln!(f, "pk = {}", hex::encode(&self.pk))?;
        writeln!(f, "sk = {}", hex::encode(&self.sk))?;
        writeln!(f, "sig = {}", hex::encode(&self.sig))
    }
}

pub fn generate(level: Level, params: &ParamSet, count: usize) -> Result<Vec<KatRecord>> {
    (0..count)
        .map(|i| {
            let (seed, msg) = request(level, i);
            KatRecord::respond(i, seed, msg, params)
        })
        .collect()
}

/// Renders records blank-line separated.
pub fn render(records: &[KatRecord]) -> String {
    records.iter().map(|r| r.to_string()).collect::<Vec<_>>().join("\n")
}

fn field<'a>(block: &[(&str, &'a str)], name: &'static str) -> Result<&'a str> {
    block
        .iter()
        .find(|(k, _)| *k == name)
        .map(|(_, v)| *v)
        .ok_or(Error::Malformed(name))
}

fn hex_field(block: &[(&str, &str)], name: &'static str) -> Result<Vec<u8>> {
    hex::decode(field(block, name)?).map_err(|_| Error::Malformed(name))
}

pub fn parse(text: &str) -> Result<Vec<KatRecord>> {
    let mut out = Vec::new();
    let mut block: Vec<(&str, &str)> = Vec::new();
    for line in text.lines().chain(std::iter::once("")) {
        let line = line.trim();
        if line.starts_with('#') {
            continue;
        }
        if !line.is_empty() {
            let (k, v) = line.split_once('=').ok_or(Error::Malformed("kat line"))?;
            block.push((k.trim(), v.trim()));
            continue;
        }
        if block.is_empty() {
            continue;
        }
        let count = field(&block, "count")?.parse().map_err(|_| Error::Malformed("count"))?;
        let seed = hex_field(&block, "seed")?.try_into().map_err(|_| Error::Malformed("seed"))?;
        out.push(KatRecord {
            count,
            seed,
            msg: hex_field(&block, "msg")?,
            pk: hex_field(&block, "pk")?,
            sk: hex_field(&block, "sk")?,
            sig: hex_field(&block, "sig")?,
        });
        block.clear();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::param_set;

    #[test]
    fn render_parse_replay() {
        let p = param_set(Level::H2);
        let recs = generate(Level::H2, &p, 3).unwrap();
        let text = render(&recs);
        assert!(text.lines().all(|l| l == l.to_lowercase()));
        let back = parse(&text).unwrap();
        assert_eq!(back, recs);
        assert!(back.iter().all(|r| r.replay(&p).unwrap()));
        assert_eq!(back[1].msg.len(), 66);
    }

    #[test]
    fn tampered_record_fails_replay() {
        let p = param_set(Level::H3);
        let mut rec = generate(Level::H3, &p, 1).unwrap().remove(0);
        rec.sig[10] ^= 4;
        assert!(!rec.replay(&p).unwrap());
    }

    #[test]
    fn requests_differ_by_level_and_count() {
        assert_ne!(request(Level::H2, 0).0, request(Level::H5, 0).0);
        assert_ne!(request(Level::H2, 0).0, request(Level::H2, 1).0);
    }

    #[test]
    fn malformed_text_is_an_error() {
        assert!(parse("count = 0\nseed = zz\n").is_err());
        assert!(parse("count 0\n").is_err());
        assert!(parse("").unwrap().is_empty());
    }
}
