//! Packed bit strings used as message payloads.

use std::fmt;

use smallvec::SmallVec;

/// An immutable-length bit string, packed little-endian into 64-bit words.
///
/// Bit `i` lives in word `i / 64` at position `i % 64`. Bits past `len` are
/// always zero so that equality and hashing are structural.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bits {
    len: usize,
    words: SmallVec<[u64; 2]>,
}

impl Bits {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        Bits { len: 0, words: SmallVec::with_capacity(bits.div_ceil(64)) }
    }

    pub fn zeros(len: usize) -> Self {
        Bits { len, words: SmallVec::from_elem(0, len.div_ceil(64)) }
    }

    /// A single-bit payload.
    pub fn bit(b: bool) -> Self {
        let mut out = Bits::with_capacity(1);
        out.push(b);
        out
    }

    /// The low `width` bits of `value`, least significant first.
    pub fn from_uint(value: u64, width: usize) -> Self {
        let mut out = Bits::with_capacity(width);
        out.push_uint(value, width);
        out
    }

    pub fn from_bools<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        let mut out = Bits::new();
        for b in iter {
            out.push(b);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, b: bool) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % 64);
        if b {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn push(&mut self, b: bool) {
        if self.len.is_multiple_of(64) {
            self.words.push(0);
        }
        if b {
            self.words[self.len / 64] |= 1u64 << (self.len % 64);
        }
        self.len += 1;
    }

    /// Appends the low `width` bits of `value` (`width <= 64`).
    pub fn push_uint(&mut self, value: u64, width: usize) {
        assert!(width <= 64);
        for i in 0..width {
            self.push((value >> i) & 1 == 1);
        }
    }

    /// Appends the low `width` bits of a 128-bit value.
    pub fn push_u128(&mut self, value: u128, width: usize) {
        assert!(width <= 128);
        for i in 0..width {
            self.push((value >> i) & 1 == 1);
        }
    }

    /// Reads `width <= 64` bits starting at `offset` as an unsigned integer.
    pub fn read_uint(&self, offset: usize, width: usize) -> u64 {
        assert!(width <= 64);
        assert!(offset + width <= self.len, "read past end of bit string");
        let mut v = 0u64;
        for i in 0..width {
            if self.get(offset + i) {
                v |= 1u64 << i;
            }
        }
        v
    }

    pub fn read_u128(&self, offset: usize, width: usize) -> u128 {
        assert!(width <= 128);
        assert!(offset + width <= self.len, "read past end of bit string");
        let mut v = 0u128;
        for i in 0..width {
            if self.get(offset + i) {
                v |= 1u128 << i;
            }
        }
        v
    }

    pub fn extend(&mut self, other: &Bits) {
        for i in 0..other.len {
            self.push(other.get(i));
        }
    }

    /// Copies bits `[start, start + len)`, clamped to the end of the string.
    pub fn slice(&self, start: usize, len: usize) -> Bits {
        let end = (start + len).min(self.len);
        let mut out = Bits::with_capacity(end.saturating_sub(start));
        for i in start..end {
            out.push(self.get(i));
        }
        out
    }

    /// Splits into consecutive chunks of `chunk` bits; the last may be shorter.
    pub fn chunks(&self, chunk: usize) -> Vec<Bits> {
        assert!(chunk > 0);
        (0..self.len).step_by(chunk).map(|s| self.slice(s, chunk)).collect()
    }

    pub fn concat<'a, I: IntoIterator<Item = &'a Bits>>(parts: I) -> Bits {
        let mut out = Bits::new();
        for p in parts {
            out.extend(p);
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bits(\"")?;
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        write!(f, "\")")
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl std::str::FromStr for Bits {
    type Err = String;

    /// Parses a string of `0`/`1` characters, first character = bit 0.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(format!("invalid bit character {other:?}")),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Bits::from_bools)
    }
}
