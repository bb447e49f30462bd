//! Fixed-length binary words.
//!
//! Coordinates are numbered from 1 starting at the most significant bit, so the
//! word `1000000` has coordinate 1 set. Internally a word of length `n` lives in
//! the low `n` bits of a `u64`, which makes the unsigned value and the hex
//! rendering line up with the usual MSB-first reading.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

/// Longest supported word.
pub const MAX_LEN: u32 = 64;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitWord {
    len: u32,
    bits: u64,
}

#[inline]
pub(crate) fn mask(len: u32) -> u64 {
    if len >= 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

impl BitWord {
    /// Builds a word of length `len` from the low `len` bits of `bits`.
    pub fn new(len: u32, bits: u64) -> Result<Self> {
        if len == 0 || len > MAX_LEN {
            return invalid(format!("word length {len} outside 1..={MAX_LEN}"));
        }
        if bits & !mask(len) != 0 {
            return invalid(format!("value {bits:#x} does not fit in {len} bits"));
        }
        Ok(BitWord { len, bits })
    }

    pub(crate) const fn from_raw(len: u32, bits: u64) -> Self {
        BitWord { len, bits }
    }

    pub fn zero(len: u32) -> Result<Self> {
        Self::new(len, 0)
    }

    /// Parses a binary string such as `"1001011"`.
    pub fn from_bin(s: &str) -> Result<Self> {
        s.parse()
    }

    /// Parses an MSB-first hex rendering of a word of the given length.
    pub fn from_hex(len: u32, s: &str) -> Result<Self> {
        let bits = u64::from_str_radix(s, 16)
            .map_err(|e| Error::InvalidArgument(format!("bad hex word {s:?}: {e}")))?;
        Self::new(len, bits)
    }

    pub fn len(&self) -> u32 {
        self.len
    }

    /// Always false; words have at least one coordinate.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// The word read as an unsigned integer, coordinate 1 most significant.
    pub fn value(&self) -> u64 {
        self.bits
    }

    pub fn weight(&self) -> u32 {
        self.bits.count_ones()
    }

    /// Coordinate `i` (1-based, MSB first).
    pub fn bit(&self, i: u32) -> bool {
        assert!(
            i >= 1 && i <= self.len,
            "coordinate {i} out of 1..={}",
            self.len
        );
        (self.bits >> (self.len - i)) & 1 == 1
    }

    /// Returns a copy with coordinate `i` (1-based) inverted.
    pub fn flip(&self, i: u32) -> Self {
        assert!(
            i >= 1 && i <= self.len,
            "coordinate {i} out of 1..={}",
            self.len
        );
        BitWord {
            len: self.len,
            bits: self.bits ^ (1u64 << (self.len - i)),
        }
    }

    pub fn xor(&self, other: &BitWord) -> Result<Self> {
        self.check_len(other)?;
        Ok(BitWord {
            len: self.len,
            bits: self.bits ^ other.bits,
        })
    }

    /// Hex digits needed to show `len` bits.
    pub fn hex_width(len: u32) -> usize {
        len.div_ceil(4) as usize
    }

    /// Zero-padded uppercase hex, MSB first (`1111111` renders as `7F`).
    pub fn to_hex(&self) -> String {
        format!("{:0width$X}", self.bits, width = Self::hex_width(self.len))
    }

    fn check_len(&self, other: &BitWord) -> Result<()> {
        if self.len != other.len {
            return invalid(format!("length mismatch: {} vs {}", self.len, other.len));
        }
        Ok(())
    }
}

/// Number of coordinates at which `u` and `v` differ.
pub fn hamming_distance(u: &BitWord, v: &BitWord) -> Result<u32> {
    u.check_len(v)?;
    Ok((u.bits ^ v.bits).count_ones())
}

impl FromStr for BitWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let len = s.len() as u32;
        if len == 0 || len > MAX_LEN {
            return invalid(format!("word length {len} outside 1..={MAX_LEN}"));
        }
        let mut bits = 0u64;
        for c in s.chars() {
            bits <<= 1;
            match c {
                '0' => {}
                '1' => bits |= 1,
                _ => return invalid(format!("non-binary character {c:?} in {s:?}")),
            }
        }
        Ok(BitWord { len, bits })
    }
}

impl fmt::Display for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:0width$b}", self.bits, width = self.len as usize)
    }
}

impl fmt::Debug for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitWord({self})")
    }
}
