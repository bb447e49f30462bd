//! Square tables indexed by signed quantized values, with text renderings.

use std::fmt::{Display, Write};

use crate::quant::value_range;

/// A `2^b × 2^b` table whose rows and columns run over the signed values
/// `−2^(b−1) … 2^(b−1)−1` in ascending order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValueMatrix<T> {
    bits: u32,
    entries: Vec<T>,
}

/// Number of bit flips needed to move between each pair of values.
pub type DistanceMatrix = ValueMatrix<u32>;

/// How often each value was changed into each other value.
pub type PairCounts = ValueMatrix<u64>;

impl<T: Copy + Default> ValueMatrix<T> {
    pub(crate) fn from_fn(bits: u32, mut f: impl FnMut(i64, i64) -> T) -> Self {
        let (lo, hi) = value_range(bits);
        let mut entries = Vec::with_capacity(1usize << (2 * bits));
        for u in lo..=hi {
            for v in lo..=hi {
                entries.push(f(u, v));
            }
        }
        ValueMatrix { bits, entries }
    }

    pub(crate) fn zeros(bits: u32) -> Self {
        ValueMatrix {
            bits,
            entries: vec![T::default(); 1usize << (2 * bits)],
        }
    }
}

impl<T: Copy> ValueMatrix<T> {
    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Number of rows (and columns).
    pub fn size(&self) -> usize {
        1 << self.bits
    }

    fn index(&self, v: i64) -> usize {
        let (lo, hi) = value_range(self.bits);
        assert!((lo..=hi).contains(&v), "value {v} outside {lo}..={hi}");
        (v - lo) as usize
    }

    /// Entry for row value `row` and column value `col`.
    pub fn get(&self, row: i64, col: i64) -> T {
        let (r, c) = (self.index(row), self.index(col));
        self.entries[r * self.size() + c]
    }

    pub(crate) fn get_mut(&mut self, row: i64, col: i64) -> &mut T {
        let (r, c) = (self.index(row), self.index(col));
        let size = self.size();
        &mut self.entries[r * size + c]
    }

    /// Row `i` (0-based, i.e. value `i − 2^(b−1)`).
    pub fn row(&self, i: usize) -> &[T] {
        &self.entries[i * self.size()..(i + 1) * self.size()]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.entries.chunks(self.size())
    }

    /// The signed values labelling rows and columns.
    pub fn labels(&self) -> std::ops::RangeInclusive<i64> {
        let (lo, hi) = value_range(self.bits);
        lo..=hi
    }
}

impl<T: Copy + Display> ValueMatrix<T> {
    /// Aligned plain-text table with a header row of values.
    pub fn to_table(&self) -> String {
        let width = self
            .labels()
            .map(|v| v.to_string().len())
            .chain(self.entries.iter().map(|e| e.to_string().len()))
            .max()
            .unwrap_or(1);
        let mut out = String::new();
        let _ = write!(out, "{:>width$}", "");
        for v in self.labels() {
            let _ = write!(out, " {v:>width$}");
        }
        out.push('\n');
        for (v, row) in self.labels().zip(self.rows()) {
            let _ = write!(out, "{v:>width$}");
            for e in row {
                let _ = write!(out, " {e:>width$}");
            }
            out.push('\n');
        }
        out
    }

    /// Comma-separated rendering; the first row and column carry the values.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("value");
        for v in self.labels() {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
        for (v, row) in self.labels().zip(self.rows()) {
            let _ = write!(out, "{v}");
            for e in row {
                let _ = write!(out, ",{e}");
            }
            out.push('\n');
        }
        out
    }
}
