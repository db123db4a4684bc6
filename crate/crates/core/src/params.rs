//! Per-level parameter registry.
//!
//! Structural parameters (dimensions, modulus, compression bases, encoded
//! sizes) are compile-time constants. Bounds, the Gaussian table and the
//! entropy-coder frequency tables are loaded from a constants file; the
//! default one ships embedded in the library.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::codec::rans::FreqTable;

/// Polynomial degree shared by every level.
pub const N: usize = 256;
/// Prime modulus shared by every level.
pub const Q: i32 = 64513;
/// Size of one polynomial with 32-bit coefficients, the unit of memory accounting.
pub const POLY_BYTES: usize = N * 4;

pub const SEED_BYTES: usize = 32;
pub const SEED_A_BYTES: usize = 32;
pub const SEED_SK_BYTES: usize = 64;
pub const KEY_BYTES: usize = 32;
pub const SEED_YBB_BYTES: usize = 64;
/// Packed binary challenge.
pub const C_BYTES: usize = N / 8;
/// Two little-endian u16 payload lengths ahead of the entropy-coded region.
pub const SIG_LEN_HEADER: usize = 4;

/// Embedded default constants file.
pub const DEFAULT_CONSTANTS: &str = include_str!("../constants/haetae.constants");
/// Constants-file format version this library understands.
pub const CONSTANTS_VERSION: i128 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    H2,
    H3,
    H5,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::H2, Level::H3, Level::H5];

    /// Key prefix used in the constants file.
    pub fn prefix(self) -> &'static str {
        match self {
            Level::H2 => "h2",
            Level::H3 => "h3",
            Level::H5 => "h5",
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Level::H2 => "HAETAE-2",
            Level::H3 => "HAETAE-3",
            Level::H5 => "HAETAE-5",
        };
        f.write_str(s)
    }
}

impl FromStr for Level {
    type Err = ConstantsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "2" | "h2" | "haetae2" | "haetae-2" => Ok(Level::H2),
            "3" | "h3" | "haetae3" | "haetae-3" => Ok(Level::H3),
            "5" | "h5" | "haetae5" | "haetae-5" => Ok(Level::H5),
            _ => Err(ConstantsError::UnknownLevel(s.to_owned())),
        }
    }
}

#[derive(Debug, Error)]
pub enum ConstantsError {
    #[error("unknown level `{0}`")]
    UnknownLevel(String),
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing key `{0}`")]
    Missing(String),
    #[error("key `{key}`: {msg}")]
    Invalid { key: String, msg: String },
    #[error("unsupported constants version {0}")]
    Version(i128),
    #[error("reading constants file")]
    Io(#[from] std::io::Error),
}

/// Parsed `level.key = integer` file.
#[derive(Debug, Clone, Default)]
pub struct ConstantsFile {
    entries: BTreeMap<String, i128>,
}

impl ConstantsFile {
    pub fn parse(text: &str) -> Result<Self, ConstantsError> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConstantsError::Syntax {
                line: idx + 1,
                msg: "expected `key = integer`".into(),
            })?;
            let key = key.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(ConstantsError::Syntax {
                    line: idx + 1,
                    msg: format!("bad key `{key}`"),
                });
            }
            let value: i128 = value.trim().parse().map_err(|_| ConstantsError::Syntax {
                line: idx + 1,
                msg: format!("`{}` is not an integer", value.trim()),
            })?;
            if entries.insert(key.to_owned(), value).is_some() {
                return Err(ConstantsError::Syntax {
                    line: idx + 1,
                    msg: format!("duplicate key `{key}`"),
                });
            }
        }
        Ok(ConstantsFile { entries })
    }

    pub fn read(path: &Path) -> Result<Self, ConstantsError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn get(&self, key: &str) -> Option<i128> {
        self.entries.get(key).copied()
    }

    fn require(&self, key: &str) -> Result<i128, ConstantsError> {
        self.get(key).ok_or_else(|| ConstantsError::Missing(key.to_owned()))
    }

    fn level_u64(&self, level: Level, key: &str) -> Result<u64, ConstantsError> {
        let full = format!("{}.{key}", level.prefix());
        let v = self.require(&full)?;
        u64::try_from(v).map_err(|_| ConstantsError::Invalid {
            key: full,
            msg: "must be a non-negative 64-bit value".into(),
        })
    }

    /// Consecutive `prefix.0`, `prefix.1`, ... entries.
    fn level_list(&self, level: Level, key: &str) -> Vec<i128> {
        let mut out = Vec::new();
        while let Some(v) = self.get(&format!("{}.{key}.{}", level.prefix(), out.len())) {
            out.push(v);
        }
        out
    }

    fn table(&self, level: Level, name: &str) -> Result<FreqTable, ConstantsError> {
        let key = format!("rans.{name}");
        let offset = self.level_u64_signed(level, &format!("{key}.offset"))?;
        let freqs = self
            .level_list(level, &key)
            .into_iter()
            .map(u32::try_from)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| ConstantsError::Invalid {
                key: format!("{}.{key}", level.prefix()),
                msg: "frequencies must be non-negative".into(),
            })?;
        FreqTable::new(offset, freqs).map_err(|msg| ConstantsError::Invalid {
            key: format!("{}.{key}", level.prefix()),
            msg,
        })
    }

    fn level_u64_signed(&self, level: Level, key: &str) -> Result<i32, ConstantsError> {
        let full = format!("{}.{key}", level.prefix());
        let v = self.require(&full)?;
        i32::try_from(v).map_err(|_| ConstantsError::Invalid {
            key: full,
            msg: "out of range".into(),
        })
    }
}

/// Every constant one security level needs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamSet {
    pub level: Level,
    pub n: usize,
    pub q: i32,
    pub k: usize,
    pub l: usize,
    pub tau: usize,
    pub d: u32,
    pub alpha_z1: i32,
    pub alpha_h: i32,
    pub pk_bytes: usize,
    pub sk_bytes: usize,
    pub sig_bytes: usize,
    pub lambda_scale: u64,
    pub eta: i32,
    pub gamma_sq_n: u64,
    pub sigma_gauss: u64,
    pub b0: u64,
    pub b_prime: u64,
    pub b_dprime: u64,
    pub b1: u64,
    /// Bound of the second signing clause, `||2z - y|| > B`.
    pub b_reflect: u64,
    pub tr_bytes: usize,
    pub mu_bytes: usize,
    pub rho_bytes: usize,
    /// Cumulative table of |x| for the discrete Gaussian, scaled by 2^63.
    pub cdt: Vec<u64>,
    pub hb_table: FreqTable,
    pub h_table: FreqTable,
}

struct Fixed {
    k: usize,
    l: usize,
    tau: usize,
    d: u32,
    alpha_h: i32,
    pk: usize,
    sk: usize,
    sig: usize,
}

const fn fixed(level: Level) -> Fixed {
    match level {
        Level::H2 => Fixed { k: 2, l: 4, tau: 58, d: 1, alpha_h: 512, pk: 992, sk: 1408, sig: 1474 },
        Level::H3 => Fixed { k: 3, l: 6, tau: 80, d: 1, alpha_h: 512, pk: 1472, sk: 2112, sig: 2349 },
        Level::H5 => Fixed { k: 4, l: 7, tau: 128, d: 0, alpha_h: 256, pk: 2080, sk: 2752, sig: 2948 },
    }
}

/// Registry for `level` built from the embedded constants file.
pub fn param_set(level: Level) -> ParamSet {
    let file = ConstantsFile::parse(DEFAULT_CONSTANTS).expect("embedded constants parse");
    ParamSet::from_constants(level, &file).expect("embedded constants are valid")
}

impl ParamSet {
    pub fn from_constants(level: Level, file: &ConstantsFile) -> Result<Self, ConstantsError> {
        let version = file.require("version")?;
        if version != CONSTANTS_VERSION {
            return Err(ConstantsError::Version(version));
        }
        let f = fixed(level);
        let eta = file.level_u64(level, "eta")?;
        let cdt = file
            .level_list(level, "cdt")
            .into_iter()
            .map(u64::try_from)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| ConstantsError::Invalid {
                key: format!("{}.cdt", level.prefix()),
                msg: "entries must be non-negative".into(),
            })?;
        let p = ParamSet {
            level,
            n: N,
            q: Q,
            k: f.k,
            l: f.l,
            tau: f.tau,
            d: f.d,
            alpha_z1: 256,
            alpha_h: f.alpha_h,
            pk_bytes: f.pk,
            sk_bytes: f.sk,
            sig_bytes: f.sig,
            lambda_scale: (f.l + f.k) as u64,
            eta: i32::try_from(eta).unwrap_or(i32::MAX),
            gamma_sq_n: file.level_u64(level, "gamma_sq_n")?,
            sigma_gauss: file.level_u64(level, "sigma_gauss")?,
            b0: file.level_u64(level, "b0")?,
            b_prime: file.level_u64(level, "b_prime")?,
            b_dprime: file.level_u64(level, "b_dprime")?,
            b1: file.level_u64(level, "b1")?,
            b_reflect: file.level_u64(level, "b_reflect")?,
            tr_bytes: file.level_u64(level, "tr_bytes")? as usize,
            mu_bytes: file.level_u64(level, "mu_bytes")? as usize,
            rho_bytes: file.level_u64(level, "rho_bytes")? as usize,
            cdt,
            hb_table: file.table(level, "hb")?,
            h_table: file.table(level, "h")?,
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<(), ConstantsError> {
        let bad = |key: &str, msg: &str| ConstantsError::Invalid {
            key: format!("{}.{key}", self.level.prefix()),
            msg: msg.into(),
        };
        if !(1..=3).contains(&self.eta) {
            return Err(bad("eta", "must be in 1..=3"));
        }
        if self.sk_layout_bytes() != self.sk_bytes {
            return Err(bad("eta", "secret-key packing does not match the fixed key size"));
        }
        if self.cdt.is_empty() || self.cdt.windows(2).any(|w| w[0] > w[1]) || self.cdt[self.cdt.len() - 1] > 1 << 63 {
            return Err(bad("cdt", "must be a non-empty non-decreasing table bounded by 2^63"));
        }
        for (key, v) in [("tr_bytes", self.tr_bytes), ("mu_bytes", self.mu_bytes), ("rho_bytes", self.rho_bytes)] {
            if !(16..=64).contains(&v) {
                return Err(bad(key, "digest length must be 16..=64 bytes"));
            }
        }
        if self.b0 == 0 || self.b_prime == 0 || self.b_dprime == 0 || self.b1 == 0 {
            return Err(bad("b0", "norm bounds must be positive"));
        }
        // Squared radii must fit comfortably in 64-bit accumulators.
        let radius = self.b0 * self.lambda_scale;
        if [radius, self.b_prime, self.b_dprime, self.b1, self.b_reflect].iter().any(|&b| b >= 1 << 30) {
            return Err(bad("b0", "norm bounds must stay below 2^30"));
        }
        if self.sigma_gauss == 0 {
            return Err(bad("sigma_gauss", "must be positive"));
        }
        let m = self.hint_modulus();
        if self.h_table.min_symbol() <= -m / 2 || self.h_table.max_symbol() >= m / 2 {
            return Err(bad("rans.h", "alphabet must be centered within the hint range"));
        }
        if self.payload_budget() > u16::MAX as usize {
            return Err(bad("rans", "payload budget exceeds length header"));
        }
        Ok(())
    }

    /// Modulus of hint values, `2(q-1)/alpha_h`.
    pub fn hint_modulus(&self) -> i32 {
        2 * (self.q - 1) / self.alpha_h
    }

    /// Bits per packed `HighBits^h` coefficient.
    pub fn hint_bits(&self) -> u32 {
        32 - ((self.hint_modulus() - 1) as u32).leading_zeros()
    }

    /// Bytes of one packed `HighBits^h` row, the transcript staging buffer.
    pub fn row_pack_bytes(&self) -> usize {
        self.n * self.hint_bits() as usize / 8
    }

    /// Number of generated secret columns (`s1` minus its constant first entry).
    pub fn m(&self) -> usize {
        self.l - 1
    }

    /// Bytes available for both entropy-coded payloads.
    pub fn payload_budget(&self) -> usize {
        self.sig_bytes - C_BYTES - self.l * self.n - SIG_LEN_HEADER
    }

    /// Hyperball radius `B0 * Lambda`.
    pub fn hyperball_radius(&self) -> u64 {
        self.b0 * self.lambda_scale
    }

    /// Bits per packed `s_gen` coefficient.
    pub fn s1_bits(&self) -> u32 {
        bit_len(2 * self.eta as u32)
    }

    /// Bits per packed `s2` coefficient. Truncated keys use `e - b0`, stored
    /// over the symmetric range `[-(eta + d), eta + d]`.
    pub fn s2_bits(&self) -> u32 {
        bit_len(2 * (self.eta as u32 + self.d))
    }

    /// Largest `|s2|` coefficient.
    pub fn s2_bound(&self) -> i32 {
        self.eta + self.d as i32
    }

    pub fn s1_poly_bytes(&self) -> usize {
        self.n * self.s1_bits() as usize / 8
    }

    pub fn s2_poly_bytes(&self) -> usize {
        self.n * self.s2_bits() as usize / 8
    }

    /// Bits per packed public-key coefficient.
    pub fn pk_coeff_bits(&self) -> u32 {
        if self.d == 0 {
            16
        } else {
            bit_len(((self.q - 1) >> self.d) as u32)
        }
    }

    pub fn pk_poly_bytes(&self) -> usize {
        self.n * self.pk_coeff_bits() as usize / 8
    }

    fn pk_layout_bytes(&self) -> usize {
        SEED_A_BYTES + self.k * self.pk_poly_bytes()
    }

    fn sk_layout_bytes(&self) -> usize {
        self.pk_layout_bytes() + self.m() * self.s1_poly_bytes() + self.k * self.s2_poly_bytes() + KEY_BYTES
    }

    /// Offset of `s_gen` column `j` inside the secret key.
    pub fn sk_s1_offset(&self, j: usize) -> usize {
        self.pk_bytes + j * self.s1_poly_bytes()
    }

    /// Offset of `s2` row `i` inside the secret key.
    pub fn sk_s2_offset(&self, i: usize) -> usize {
        self.pk_bytes + self.m() * self.s1_poly_bytes() + i * self.s2_poly_bytes()
    }

    pub fn sk_key_offset(&self) -> usize {
        self.sk_bytes - KEY_BYTES
    }
}

fn bit_len(v: u32) -> u32 {
    32 - v.leading_zeros()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_values() {
        let h2 = param_set(Level::H2);
        assert_eq!((h2.k, h2.l, h2.tau, h2.d, h2.alpha_h), (2, 4, 58, 1, 512));
        assert_eq!((h2.pk_bytes, h2.sk_bytes, h2.sig_bytes), (992, 1408, 1474));
        let h3 = param_set(Level::H3);
        assert_eq!((h3.k, h3.l, h3.tau, h3.d, h3.alpha_h), (3, 6, 80, 1, 512));
        assert_eq!((h3.pk_bytes, h3.sk_bytes, h3.sig_bytes), (1472, 2112, 2349));
        assert_eq!(h3.lambda_scale, 9);
        let h5 = param_set(Level::H5);
        assert_eq!((h5.k, h5.l, h5.tau, h5.d, h5.alpha_h), (4, 7, 128, 0, 256));
        assert_eq!((h5.pk_bytes, h5.sk_bytes, h5.sig_bytes), (2080, 2752, 2948));
        for p in [h2, h3, h5] {
            assert_eq!((p.n, p.q, p.alpha_z1), (256, 64513, 256));
            assert_eq!(p.n * 4, POLY_BYTES);
            assert_eq!(POLY_BYTES, 1024);
            assert_eq!(p.lambda_scale, (p.k + p.l) as u64);
            assert_eq!(p.pk_layout_bytes(), p.pk_bytes);
            assert_eq!(p.sk_layout_bytes(), p.sk_bytes);
        }
    }

    #[test]
    fn pure() {
        for level in Level::ALL {
            assert_eq!(param_set(level), param_set(level));
        }
    }

    #[test]
    fn hint_geometry() {
        let h2 = param_set(Level::H2);
        assert_eq!(h2.hint_modulus(), 252);
        assert_eq!(h2.row_pack_bytes(), 256);
        let h5 = param_set(Level::H5);
        assert_eq!(h5.hint_modulus(), 504);
        assert_eq!(h5.row_pack_bytes(), 288);
    }

    #[test]
    fn parser_errors() {
        assert!(matches!(ConstantsFile::parse("x 1"), Err(ConstantsError::Syntax { line: 1, .. })));
        assert!(matches!(ConstantsFile::parse("a = b"), Err(ConstantsError::Syntax { .. })));
        assert!(matches!(ConstantsFile::parse("a = 1\na = 2"), Err(ConstantsError::Syntax { line: 2, .. })));
        let f = ConstantsFile::parse("# comment\n\nversion = 1 # trailing\n").unwrap();
        assert_eq!(f.get("version"), Some(1));
        assert!(matches!(ParamSet::from_constants(Level::H2, &f), Err(ConstantsError::Missing(_))));
    }

    #[test]
    fn eta_must_match_key_size() {
        let text = DEFAULT_CONSTANTS.replace("h2.eta = 1", "h2.eta = 2");
        let f = ConstantsFile::parse(&text).unwrap();
        assert!(ParamSet::from_constants(Level::H2, &f).is_err());
    }
}
