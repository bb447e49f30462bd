//! Uniform quantization and two's-complement arithmetic.
//!
//! A weight `ω` is stored as a `b`-bit signed integer `v` with `ω ≈ v·Δ`. The
//! bit pattern of `v` is its two's-complement encoding read MSB first, so the
//! sign bit is coordinate 1.

use serde::{Deserialize, Serialize};

use crate::bitword::BitWord;
use crate::error::{invalid, Error, Result};
use crate::matrix::DistanceMatrix;

/// Widest two's-complement pattern handled by the value-indexed tables.
pub const MAX_BITS: u32 = 16;

/// Per-layer quantization parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantConfig {
    bits: u32,
    delta: f64,
}

impl QuantConfig {
    /// `bits` must be 4 or 8 and `delta` finite and positive.
    pub fn new(bits: u32, delta: f64) -> Result<Self> {
        if bits != 4 && bits != 8 {
            return invalid(format!("bit width {bits} is not 4 or 8"));
        }
        if !(delta.is_finite() && delta > 0.0) {
            return invalid(format!("scale {delta} is not a positive finite number"));
        }
        Ok(QuantConfig { bits, delta })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// Inclusive range `[−2^(b−1), 2^(b−1) − 1]`.
pub fn value_range(bits: u32) -> (i64, i64) {
    assert!((1..=63).contains(&bits), "bit width {bits} unsupported");
    let half = 1i64 << (bits - 1);
    (-half, half - 1)
}

pub(crate) fn check_bits(bits: u32) -> Result<()> {
    if !(1..=MAX_BITS).contains(&bits) {
        return invalid(format!("bit width {bits} outside 1..={MAX_BITS}"));
    }
    Ok(())
}

pub(crate) fn check_value(v: i64, bits: u32, index: Option<usize>) -> Result<()> {
    let (lo, hi) = value_range(bits);
    if v < lo || v > hi {
        return Err(Error::OutOfRange {
            value: v,
            bits,
            index,
        });
    }
    Ok(())
}

/// Two's-complement pattern of an in-range `v`, as an unsigned integer.
#[inline]
pub(crate) fn pattern(v: i64, bits: u32) -> u64 {
    (v as u64) & ((1u64 << bits) - 1)
}

/// Inverse of [`pattern`].
#[inline]
pub(crate) fn from_pattern(p: u64, bits: u32) -> i64 {
    let shift = 64 - bits;
    ((p << shift) as i64) >> shift
}

/// Rounds `omega / Δ` half-to-even and saturates to the representable range.
pub fn quantize(omega: f64, cfg: &QuantConfig) -> Result<i64> {
    if !omega.is_finite() {
        return invalid(format!("weight {omega} is not finite"));
    }
    let (lo, hi) = value_range(cfg.bits);
    let q = (omega / cfg.delta).round_ties_even();
    Ok(q.clamp(lo as f64, hi as f64) as i64)
}

pub fn dequantize(v: i64, cfg: &QuantConfig) -> f64 {
    v as f64 * cfg.delta
}

/// `b`-bit two's-complement encoding of `v`, sign bit first.
pub fn twos_complement_bits(v: i64, bits: u32) -> Result<BitWord> {
    check_bits(bits)?;
    check_value(v, bits, None)?;
    BitWord::new(bits, pattern(v, bits))
}

/// Bit flips needed to turn the stored pattern of `u` into that of `v`.
pub fn flip_count(u: i64, v: i64, bits: u32) -> Result<u32> {
    check_bits(bits)?;
    check_value(u, bits, None)?;
    check_value(v, bits, None)?;
    Ok((pattern(u, bits) ^ pattern(v, bits)).count_ones())
}

/// [`flip_count`] for every pair of `b`-bit values.
pub fn flip_count_matrix(bits: u32) -> Result<DistanceMatrix> {
    check_bits(bits)?;
    Ok(DistanceMatrix::from_fn(bits, |u, v| {
        (pattern(u, bits) ^ pattern(v, bits)).count_ones()
    }))
}
