//! Byte-renormalized rANS with 32-bit state and 12-bit frequency scale.
//!
//! rANS is last-in first-out. [`encode_full`] materializes the symbol array
//! and walks it backward, writing from the end of its output buffer.
//! [`RansStreamEncoder`] instead takes symbols already in reverse order
//! and keeps its bytes in emission order, reversing once at finalization.
//! Both produce the same stream: the 4-byte final state (little-endian)
//! followed by renormalization bytes.

use thiserror::Error;

pub const SCALE_BITS: u32 = 12;
pub const SCALE: u32 = 1 << SCALE_BITS;
const RANS_L: u32 = 1 << 23;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RansError {
    #[error("encoded payload exceeds its {capacity}-byte budget")]
    Overflow { capacity: usize },
    #[error("symbol {0} is outside the frequency table")]
    Symbol(i32),
    #[error("rANS stream truncated")]
    Truncated,
    #[error("rANS stream has an invalid state")]
    BadState,
    #[error("rANS stream has trailing data")]
    Trailing,
}

/// Static frequency table over the symbols `offset .. offset + freqs.len()`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreqTable {
    offset: i32,
    freqs: Vec<u32>,
    cum: Vec<u32>,
    slots: Vec<u16>,
}

impl FreqTable {
    pub fn new(offset: i32, freqs: Vec<u32>) -> Result<Self, String> {
        if freqs.is_empty() || freqs.len() > u16::MAX as usize {
            return Err(format!("alphabet size {} out of range", freqs.len()));
        }
        let total: u64 = freqs.iter().map(|&f| f as u64).sum();
        if total != SCALE as u64 {
            return Err(format!("frequencies sum to {total}, expected {SCALE}"));
        }
        let mut cum = Vec::with_capacity(freqs.len());
        let mut slots = vec![0u16; SCALE as usize];
        let mut acc = 0u32;
        for (i, &f) in freqs.iter().enumerate() {
            cum.push(acc);
            slots[acc as usize..(acc + f) as usize].fill(i as u16);
            acc += f;
        }
        Ok(FreqTable { offset, freqs, cum, slots })
    }

    /// Builds a table from raw counts, giving every symbol at least one slot.
    pub fn from_counts(offset: i32, counts: &[u64]) -> Result<Self, String> {
        let n = counts.len() as u64;
        if n == 0 || n > SCALE as u64 {
            return Err(format!("alphabet size {n} out of range"));
        }
        let total: u64 = counts.iter().sum::<u64>().max(1);
        let spare = SCALE as u64 - n;
        let mut freqs: Vec<u32> = counts.iter().map(|&c| 1 + (c * spare / total) as u32).collect();
        let mut sum: u32 = freqs.iter().sum();
        // hand leftover slots to the largest symbols
        let mut order: Vec<usize> = (0..freqs.len()).collect();
        order.sort_by_key(|&i| std::cmp::Reverse(counts[i]));
        let mut k = 0;
        while sum < SCALE {
            freqs[order[k % order.len()]] += 1;
            sum += 1;
            k += 1;
        }
        FreqTable::new(offset, freqs)
    }

    pub fn offset(&self) -> i32 {
        self.offset
    }

    pub fn freqs(&self) -> &[u32] {
        &self.freqs
    }

    pub fn min_symbol(&self) -> i32 {
        self.offset
    }

    pub fn max_symbol(&self) -> i32 {
        self.offset + self.freqs.len() as i32 - 1
    }

    /// True if `s` can be encoded.
    pub fn contains(&self, s: i32) -> bool {
        self.index(s).is_some()
    }

    fn index(&self, s: i32) -> Option<usize> {
        let i = s.checked_sub(self.offset)?;
        let i = usize::try_from(i).ok()?;
        (self.freqs.get(i).copied().unwrap_or(0) > 0).then_some(i)
    }

    /// Ideal code length of `s` in bits.
    pub fn cost_bits(&self, s: i32) -> Option<f64> {
        self.index(s).map(|i| SCALE_BITS as f64 - (self.freqs[i] as f64).log2())
    }
}

#[inline]
fn encode_step(x: u32, f: u32, cum: u32, mut emit: impl FnMut(u8) -> Result<(), RansError>) -> Result<u32, RansError> {
    let x_max = ((RANS_L >> SCALE_BITS) << 8) * f;
    let mut x = x;
    while x >= x_max {
        emit(x as u8)?;
        x >>= 8;
    }
    Ok(((x / f) << SCALE_BITS) + (x % f) + cum)
}

/// Encodes `symbols` in array order into a fresh buffer of at most `capacity` bytes.
pub fn encode_full(symbols: &[i32], table: &FreqTable, capacity: usize) -> Result<Vec<u8>, RansError> {
    let mut buf = vec![0u8; capacity];
    let mut pos = capacity;
    let mut x = RANS_L;
    for &s in symbols.iter().rev() {
        let i = table.index(s).ok_or(RansError::Symbol(s))?;
        x = encode_step(x, table.freqs[i], table.cum[i], |b| {
            if pos == 0 {
                return Err(RansError::Overflow { capacity });
            }
            pos -= 1;
            buf[pos] = b;
            Ok(())
        })?;
    }
    if pos < 4 {
        return Err(RansError::Overflow { capacity });
    }
    pos -= 4;
    buf[pos..pos + 4].copy_from_slice(&x.to_le_bytes());
    Ok(buf.split_off(pos))
}

/// Streaming encoder over a caller-owned staging buffer. Symbols must be
/// pushed in reverse of decode order.
#[derive(Debug)]
pub struct RansStreamEncoder<'a> {
    x: u32,
    out: &'a mut [u8],
    len: usize,
    table: &'a FreqTable,
}

impl<'a> RansStreamEncoder<'a> {
    pub fn new(out: &'a mut [u8], table: &'a FreqTable) -> Self {
        RansStreamEncoder { x: RANS_L, out, len: 0, table }
    }

    fn emit(out: &mut [u8], len: &mut usize, b: u8) -> Result<(), RansError> {
        if *len == out.len() {
            return Err(RansError::Overflow { capacity: out.len() });
        }
        out[*len] = b;
        *len += 1;
        Ok(())
    }

    pub fn push(&mut self, s: i32) -> Result<(), RansError> {
        let i = self.table.index(s).ok_or(RansError::Symbol(s))?;
        let (out, len) = (&mut *self.out, &mut self.len);
        self.x = encode_step(self.x, self.table.freqs[i], self.table.cum[i], |b| Self::emit(out, len, b))?;
        Ok(())
    }

    /// Bytes emitted so far, excluding the final state.
    pub fn emitted(&self) -> usize {
        self.len
    }

    /// Flushes the state and reverses the buffer into stream order.
    /// Returns the stream length; the stream is `out[..len]`.
    pub fn finalize(mut self) -> Result<usize, RansError> {
        for shift in [24, 16, 8, 0] {
            Self::emit(self.out, &mut self.len, (self.x >> shift) as u8)?;
        }
        self.out[..self.len].reverse();
        Ok(self.len)
    }
}

/// Strict streaming decoder: the stream must end exactly at the initial state.
#[derive(Debug, Clone)]
pub struct RansDecoder<'a> {
    data: &'a [u8],
    pos: usize,
    x: u32,
    table: &'a FreqTable,
}

impl<'a> RansDecoder<'a> {
    pub fn new(data: &'a [u8], table: &'a FreqTable) -> Result<Self, RansError> {
        let head: [u8; 4] = data.get(..4).ok_or(RansError::Truncated)?.try_into().unwrap();
        let x = u32::from_le_bytes(head);
        if !(RANS_L..RANS_L << 8).contains(&x) {
            return Err(RansError::BadState);
        }
        Ok(RansDecoder { data, pos: 4, x, table })
    }

    pub fn decode(&mut self) -> Result<i32, RansError> {
        let slot = self.x & (SCALE - 1);
        let i = self.table.slots[slot as usize] as usize;
        self.x = self.table.freqs[i] * (self.x >> SCALE_BITS) + slot - self.table.cum[i];
        while self.x < RANS_L {
            let b = *self.data.get(self.pos).ok_or(RansError::Truncated)?;
            self.pos += 1;
            self.x = (self.x << 8) | b as u32;
        }
        Ok(self.table.offset + i as i32)
    }

    /// Checks that the stream was consumed exactly.
    pub fn finish(self) -> Result<(), RansError> {
        if self.pos != self.data.len() {
            return Err(RansError::Trailing);
        }
        if self.x != RANS_L {
            return Err(RansError::BadState);
        }
        Ok(())
    }
}

/// Decodes exactly `count` symbols and checks the stream end.
pub fn decode_all(data: &[u8], count: usize, table: &FreqTable) -> Result<Vec<i32>, RansError> {
    let mut dec = RansDecoder::new(data, table)?;
    let out = (0..count).map(|_| dec.decode()).collect::<Result<Vec<_>, _>>()?;
    dec.finish()?;
    Ok(out)
}
