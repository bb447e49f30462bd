//! Binary linear codes over GF(2).
//!
//! A [`BinaryCode`] is stored as a generator matrix together with a parity-check
//! matrix and a certified minimum distance. Codewords are only materialized on
//! request, which keeps long Hamming codes (dimension up to 57) cheap to build
//! while the codes actually used for weight protection (dimension ≤ 11) can be
//! enumerated and brute-forced.
//!
//! Besides the linear constructions, [`min_distance_of_words`] and
//! [`shorten_words`] work on arbitrary word sets, linear or not.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bitword::{mask, BitWord, MAX_LEN};
use crate::error::{invalid, Result};
use crate::gf2::{self, Echelon};

/// Largest dimension whose codewords may be listed or scanned one by one.
pub const MAX_ENUMERABLE_DIMENSION: u32 = 24;

/// Seed used for the subcode behind `C14_4`.
pub const DEFAULT_SUBCODE_SEED: u64 = 0x00C0_DE14_0004;

/// Primitive polynomials (bit `i` = coefficient of `x^i`) for `r = 2..=6`.
///
/// Hamming code coordinate `j` gets parity-check column `α^(j-1)`, with `α` a
/// root of the polynomial. For `r = 3` this gives columns 1,2,4,3,6,7,5, which
/// yields the `(7, 16, 3)` codeword set used by the 4-bit codebooks.
const PRIMITIVE_POLYS: [u64; 5] = [0b111, 0b1011, 0b1_0011, 0b10_0101, 0b100_0011];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryCode {
    n: u32,
    generator: Vec<u64>,
    parity: Vec<u64>,
    min_distance: u32,
}

impl BinaryCode {
    /// Builds the code spanned by `rows`, which must be linearly independent
    /// words of one common length.
    pub fn from_generator(rows: &[BitWord]) -> Result<Self> {
        let Some(first) = rows.first() else {
            return invalid("generator must have at least one row");
        };
        let n = first.len();
        if rows.iter().any(|r| r.len() != n) {
            return invalid("generator rows have different lengths");
        }
        let gen: Vec<u64> = rows.iter().map(|r| r.value()).collect();
        if gf2::rank(&gen) != gen.len() {
            return invalid("generator rows are linearly dependent");
        }
        Ok(Self::from_raw(n, gen))
    }

    fn from_raw(n: u32, generator: Vec<u64>) -> Self {
        let parity = gf2::null_space(&generator, n);
        let min_distance = certify_min_distance(n, &generator, &parity);
        BinaryCode {
            n,
            generator,
            parity,
            min_distance,
        }
    }

    /// Length `n`.
    pub fn len(&self) -> u32 {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Dimension `b`; the code has `2^b` codewords.
    pub fn dimension(&self) -> u32 {
        self.generator.len() as u32
    }

    pub fn cardinality(&self) -> u128 {
        1u128 << self.dimension()
    }

    /// Minimum Hamming weight over the nonzero codewords.
    pub fn min_distance(&self) -> u32 {
        self.min_distance
    }

    pub fn generator(&self) -> Vec<BitWord> {
        self.generator
            .iter()
            .map(|&g| BitWord::from_raw(self.n, g))
            .collect()
    }

    /// Rows of a parity-check matrix; empty when the code is the whole space.
    pub fn parity_check(&self) -> Vec<BitWord> {
        self.parity
            .iter()
            .map(|&h| BitWord::from_raw(self.n, h))
            .collect()
    }

    pub fn contains(&self, w: &BitWord) -> bool {
        w.len() == self.n && self.contains_raw(w.value())
    }

    #[inline]
    pub(crate) fn contains_raw(&self, w: u64) -> bool {
        self.parity
            .iter()
            .all(|h| (h & w).count_ones().is_multiple_of(2))
    }

    /// All `2^b` codewords, sorted by unsigned value.
    pub fn codewords(&self) -> Result<Vec<BitWord>> {
        if self.dimension() > MAX_ENUMERABLE_DIMENSION {
            return invalid(format!(
                "dimension {} too large to enumerate (max {MAX_ENUMERABLE_DIMENSION})",
                self.dimension()
            ));
        }
        let mut words: Vec<u64> = span(&self.generator).collect();
        words.sort_unstable();
        Ok(words
            .into_iter()
            .map(|w| BitWord::from_raw(self.n, w))
            .collect())
    }

    /// Appends an overall parity bit as the new coordinate 1, so that every
    /// codeword of the result has even weight.
    pub fn extend(&self) -> Result<Self> {
        if self.n + 1 > MAX_LEN {
            return invalid(format!("extended length {} exceeds {MAX_LEN}", self.n + 1));
        }
        let n = self.n;
        let gen = self
            .generator
            .iter()
            .map(|&g| ((g.count_ones() as u64 & 1) << n) | g)
            .collect();
        Ok(Self::from_raw(n + 1, gen))
    }

    /// Shortens at each of `positions` (1-based, referring to this code's
    /// coordinates): keep the codewords that are zero there, then delete those
    /// coordinates. Positions are processed from the highest index down.
    pub fn shorten(&self, positions: &[u32]) -> Result<Self> {
        let order = check_positions(self.n, positions)?;
        let mut n = self.n;
        let mut gen = self.generator.clone();
        for p in order {
            let bit = n - p;
            if let Some(k) = gen.iter().position(|g| g >> bit & 1 == 1) {
                let pivot = gen.swap_remove(k);
                for g in gen.iter_mut() {
                    if *g >> bit & 1 == 1 {
                        *g ^= pivot;
                    }
                }
            }
            for g in gen.iter_mut() {
                *g = delete_bit(*g, bit);
            }
            n -= 1;
        }
        if gen.is_empty() {
            return invalid("shortened code contains only the zero word");
        }
        Ok(Self::from_raw(n, gen))
    }

    /// Shortens at the `k` highest-numbered coordinates.
    pub fn shorten_last(&self, k: u32) -> Result<Self> {
        if k >= self.n {
            return invalid(format!("cannot shorten {k} of {} coordinates", self.n));
        }
        let positions: Vec<u32> = (self.n - k + 1..=self.n).collect();
        self.shorten(&positions)
    }

    /// A `dim`-dimensional subcode whose generator is drawn by seeded rejection
    /// sampling of uniformly random nonzero codewords.
    pub fn linear_subcode(&self, dim: u32, seed: u64) -> Result<Self> {
        let k = self.dimension();
        if dim == 0 || dim > k {
            return invalid(format!("subcode dimension {dim} outside 1..={k}"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut basis = Echelon::new();
        let mut rows = Vec::with_capacity(dim as usize);
        while rows.len() < dim as usize {
            let msg = rng.gen::<u64>() & mask(k);
            if msg == 0 {
                continue;
            }
            let word = self.encode_message(msg);
            if basis.insert(word) {
                rows.push(word);
            }
        }
        Ok(Self::from_raw(self.n, rows))
    }

    /// XOR of the generator rows selected by `msg` (row 0 ↔ most significant
    /// message bit).
    fn encode_message(&self, msg: u64) -> u64 {
        let k = self.generator.len();
        self.generator
            .iter()
            .enumerate()
            .filter(|(i, _)| msg >> (k - 1 - i) & 1 == 1)
            .fold(0, |acc, (_, g)| acc ^ g)
    }
}

/// The `(2^r − 1, 2^(2^r − r − 1), 3)` Hamming code, `2 ≤ r ≤ 6`.
pub fn construct_hamming(r: u32) -> Result<BinaryCode> {
    if !(2..=6).contains(&r) {
        return invalid(format!("Hamming parameter r = {r} outside 2..=6"));
    }
    let poly = PRIMITIVE_POLYS[(r - 2) as usize];
    let n = (1u32 << r) - 1;
    // columns α^0, α^1, ... in GF(2^r)
    let mut columns = Vec::with_capacity(n as usize);
    let mut a = 1u64;
    for _ in 0..n {
        columns.push(a);
        a <<= 1;
        if a >> r & 1 == 1 {
            a ^= poly;
        }
    }
    let parity_rows: Vec<u64> = (0..r)
        .map(|i| {
            columns
                .iter()
                .enumerate()
                .filter(|(_, c)| *c >> i & 1 == 1)
                .fold(0u64, |acc, (j, _)| acc | 1u64 << (n - 1 - j as u32))
        })
        .collect();
    let generator = gf2::null_space(&parity_rows, n);
    Ok(BinaryCode::from_raw(n, generator))
}

/// Smallest distance between two distinct words of `words`, by pairwise scan.
pub fn min_distance_of_words(words: &[BitWord]) -> Result<u32> {
    let set: BTreeSet<BitWord> = words.iter().copied().collect();
    if set.len() < 2 {
        return invalid("minimum distance needs at least two distinct codewords");
    }
    let v: Vec<BitWord> = set.into_iter().collect();
    let mut best = u32::MAX;
    for (i, a) in v.iter().enumerate() {
        for b in &v[i + 1..] {
            best = best.min(crate::bitword::hamming_distance(a, b)?);
        }
    }
    Ok(best)
}

/// Shortening of an arbitrary word set; see [`BinaryCode::shorten`].
pub fn shorten_words(words: &[BitWord], positions: &[u32]) -> Result<Vec<BitWord>> {
    let Some(first) = words.first() else {
        return invalid("cannot shorten an empty code");
    };
    let n = first.len();
    if words.iter().any(|w| w.len() != n) {
        return invalid("words have different lengths");
    }
    let order = check_positions(n, positions)?;
    if order.len() as u32 >= n {
        return invalid("shortening would delete every coordinate");
    }
    let mut cur: Vec<u64> = words.iter().map(|w| w.value()).collect();
    let mut len = n;
    for p in order {
        let bit = len - p;
        cur = cur
            .into_iter()
            .filter(|w| w >> bit & 1 == 0)
            .map(|w| delete_bit(w, bit))
            .collect();
        len -= 1;
    }
    let set: BTreeSet<u64> = cur.into_iter().collect();
    Ok(set.into_iter().map(|w| BitWord::from_raw(len, w)).collect())
}

fn check_positions(n: u32, positions: &[u32]) -> Result<Vec<u32>> {
    let mut sorted = positions.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            return invalid(format!("duplicate shortening position {}", w[0]));
        }
    }
    if let Some(&p) = sorted.iter().find(|&&p| p == 0 || p > n) {
        return invalid(format!("shortening position {p} outside 1..={n}"));
    }
    Ok(sorted)
}

fn delete_bit(x: u64, bit: u32) -> u64 {
    let low = x & mask(bit);
    let high = if bit + 1 >= 64 { 0 } else { x >> (bit + 1) };
    (high << bit) | low
}

/// Iterates over the span of `gen` in Gray-code order (starting with 0).
pub(crate) fn span(gen: &[u64]) -> impl Iterator<Item = u64> + '_ {
    let total = 1u64 << gen.len();
    let mut cur = 0u64;
    (0..total).map(move |i| {
        if i > 0 {
            cur ^= gen[i.trailing_zeros() as usize];
        }
        cur
    })
}

fn certify_min_distance(n: u32, gen: &[u64], parity: &[u64]) -> u32 {
    if gen.len() as u32 <= MAX_ENUMERABLE_DIMENSION {
        return span(gen)
            .skip(1)
            .map(u64::count_ones)
            .min()
            .expect("dimension is positive");
    }
    // Smallest set of parity-check columns summing to zero.
    let columns: Vec<u64> = (0..n)
        .map(|j| {
            parity
                .iter()
                .enumerate()
                .fold(0u64, |acc, (i, h)| acc | (h >> (n - 1 - j) & 1) << i)
        })
        .collect();
    (1..=n)
        .find(|&w| has_zero_sum_subset(&columns, w as usize, 0, 0))
        .expect("n + 1 columns of a rank-deficient set always sum to zero")
}

fn has_zero_sum_subset(cols: &[u64], need: usize, start: usize, acc: u64) -> bool {
    if need == 0 {
        return acc == 0;
    }
    (start..=cols.len().saturating_sub(need))
        .any(|i| has_zero_sum_subset(cols, need - 1, i + 1, acc ^ cols[i]))
}
