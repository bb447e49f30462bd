//! Linear assignments of quantized values to codewords.
//!
//! An [`EncodingMap`] is fixed by the images of the standard basis patterns
//! `e^(1) … e^(b)` (with `e^(1)` the sign bit). Every other pattern maps to the
//! XOR of the images of its set bits, so two values that differ only in
//! coordinate `i` always land at distance `weight(image[i])`. Putting the
//! heaviest codeword on the sign bit therefore makes sign flips, the ones
//! attackers favour, as expensive as the code allows.

use std::collections::HashMap;

use crate::bitword::{hamming_distance, BitWord};
use crate::catalog::CodeId;
use crate::code::{span, BinaryCode, MAX_ENUMERABLE_DIMENSION};
use crate::error::{invalid, Result};
use crate::gf2::{self, Echelon};
use crate::matrix::DistanceMatrix;
use crate::quant::{check_bits, check_value, from_pattern, pattern, MAX_BITS};

/// Codebooks for the 4-bit codes, ordered by value from −8 to 7.
const C7_3_TABLE: [&str; 16] = [
    "7F", "34", "68", "23", "1A", "51", "0D", "46", "00", "4B", "17", "5C", "65", "2E", "72", "39",
];
const C8_4_TABLE: [&str; 16] = [
    "FF", "B4", "E8", "A3", "9A", "D1", "8D", "C6", "00", "4B", "17", "5C", "65", "2E", "72", "39",
];
const C9_4_TABLE: [&str; 16] = [
    "1EF", "1F0", "193", "18C", "155", "14A", "129", "136", "000", "01F", "07C", "063", "0BA",
    "0A5", "0C6", "0D9",
];

/// Inverse lookup from codeword to pattern.
#[derive(Clone, Debug)]
enum Inverse {
    /// Indexed by codeword value; `u32::MAX` marks a non-codeword.
    Dense(Vec<u32>),
    Sparse(HashMap<u64, u32>),
}

const DENSE_INVERSE_MAX_LEN: u32 = 16;

#[derive(Clone, Debug)]
pub struct EncodingMap {
    code: BinaryCode,
    id: Option<CodeId>,
    bits: u32,
    table: Vec<u64>,
    basis: Vec<u64>,
    inverse: Inverse,
}

/// Outcome of decoding one stored word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decoded {
    Value(i64),
    Detected(Detection),
}

/// A stored word that is not a codeword. No correction is attempted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Detection {
    pub word: BitWord,
    /// Distance to the closest codeword; informational only.
    pub nearest_distance: u32,
}

impl EncodingMap {
    /// Builds the map `pattern ↦ XOR of basis_images[i] over set coordinates i`.
    pub fn from_basis(code: BinaryCode, basis_images: &[BitWord]) -> Result<Self> {
        let bits = code.dimension();
        check_bits(bits)?;
        if bits > MAX_BITS {
            return invalid(format!("code dimension {bits} exceeds {MAX_BITS}"));
        }
        if basis_images.len() != bits as usize {
            return invalid(format!(
                "expected {bits} basis images, got {}",
                basis_images.len()
            ));
        }
        for img in basis_images {
            if !code.contains(img) {
                return invalid(format!("basis image {img} is not a codeword"));
            }
        }
        let basis: Vec<u64> = basis_images.iter().map(|w| w.value()).collect();
        if gf2::rank(&basis) != basis.len() {
            return invalid("basis images are linearly dependent");
        }
        let size = 1usize << bits;
        let table: Vec<u64> = (0..size as u64)
            .map(|p| {
                (0..bits)
                    .filter(|i| p >> (bits - 1 - i) & 1 == 1)
                    .fold(0, |acc, i| acc ^ basis[i as usize])
            })
            .collect();
        let inverse = if code.len() <= DENSE_INVERSE_MAX_LEN {
            let mut inv = vec![u32::MAX; 1usize << code.len()];
            for (p, &w) in table.iter().enumerate() {
                inv[w as usize] = p as u32;
            }
            Inverse::Dense(inv)
        } else {
            Inverse::Sparse(
                table
                    .iter()
                    .enumerate()
                    .map(|(p, &w)| (w, p as u32))
                    .collect(),
            )
        };
        Ok(EncodingMap {
            code,
            id: None,
            bits,
            table,
            basis,
            inverse,
        })
    }

    /// The codebook for one of the named codes.
    ///
    /// The three 4-bit maps are the published codebooks; the 8-bit maps use
    /// [`greedy_basis`] over [`CodeId::construct`].
    pub fn canonical(id: CodeId) -> Self {
        let pinned = match id {
            CodeId::C7_3 => Some(&C7_3_TABLE),
            CodeId::C8_4 => Some(&C8_4_TABLE),
            CodeId::C9_4 => Some(&C9_4_TABLE),
            _ => None,
        };
        let mut map = match pinned {
            Some(hex) => {
                let words: Vec<BitWord> = hex
                    .iter()
                    .map(|h| BitWord::from_hex(id.len(), h).expect("pinned codebook entry"))
                    .collect();
                // e^(1), e^(2), e^(3), e^(4) are the patterns of −8, 4, 2, 1
                let basis = [words[0], words[12], words[10], words[9]];
                let code = match id {
                    CodeId::C9_4 => BinaryCode::from_generator(&basis).expect("pinned basis"),
                    _ => id.construct(),
                };
                let map = Self::from_basis(code, &basis).expect("pinned basis");
                debug_assert!(map.codebook().iter().zip(&words).all(|(a, b)| a == b));
                map
            }
            None => {
                let code = id.construct();
                let basis = greedy_basis(&code).expect("catalog code is enumerable");
                Self::from_basis(code, &basis).expect("greedy basis is valid")
            }
        };
        map.id = Some(id);
        map
    }

    pub fn code(&self) -> &BinaryCode {
        &self.code
    }

    /// Catalog name, when the map came from [`EncodingMap::canonical`].
    pub fn code_id(&self) -> Option<CodeId> {
        self.id
    }

    /// Quantization bit width `b`.
    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Codeword length `n`.
    pub fn len(&self) -> u32 {
        self.code.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn basis_images(&self) -> Vec<BitWord> {
        self.words(&self.basis)
    }

    /// Codeword for the pattern with unsigned value `p`.
    pub fn table_entry(&self, p: u64) -> BitWord {
        BitWord::from_raw(self.len(), self.table[p as usize])
    }

    /// Codewords ordered by value, from `−2^(b−1)` up to `2^(b−1) − 1`.
    pub fn codebook(&self) -> Vec<BitWord> {
        let half = 1u64 << (self.bits - 1);
        let size = 1u64 << self.bits;
        (0..size)
            .map(|i| self.table_entry((i + half) % size))
            .collect()
    }

    /// One zero-padded hex codeword per line, ordered by value.
    pub fn codebook_text(&self) -> String {
        self.codebook().iter().map(|w| w.to_hex() + "\n").collect()
    }

    pub fn encode_value(&self, v: i64) -> Result<BitWord> {
        check_value(v, self.bits, None)?;
        Ok(self.table_entry(pattern(v, self.bits)))
    }

    #[inline]
    pub(crate) fn encode_raw(&self, v: i64) -> u64 {
        self.table[pattern(v, self.bits) as usize]
    }

    /// The value whose codeword is `w`, or `None` for a non-codeword.
    #[inline]
    pub(crate) fn decode_raw(&self, w: u64) -> Option<i64> {
        let p = match &self.inverse {
            Inverse::Dense(inv) => *inv.get(w as usize)?,
            Inverse::Sparse(inv) => *inv.get(&w)?,
        };
        (p != u32::MAX).then(|| from_pattern(u64::from(p), self.bits))
    }

    pub fn decode_value(&self, w: &BitWord) -> Result<Decoded> {
        if w.len() != self.len() {
            return invalid(format!(
                "word length {} does not match code length {}",
                w.len(),
                self.len()
            ));
        }
        Ok(match self.decode_raw(w.value()) {
            Some(v) => Decoded::Value(v),
            None => Decoded::Detected(Detection {
                word: *w,
                nearest_distance: self.nearest_distance(w.value()),
            }),
        })
    }

    fn nearest_distance(&self, w: u64) -> u32 {
        self.table
            .iter()
            .map(|c| (c ^ w).count_ones())
            .min()
            .unwrap_or(0)
    }

    /// Distances between the codewords of every pair of values.
    pub fn distance_matrix(&self) -> DistanceMatrix {
        DistanceMatrix::from_fn(self.bits, |u, v| {
            (self.encode_raw(u) ^ self.encode_raw(v)).count_ones()
        })
    }

    /// Codeword distance between the encodings of two values.
    pub fn value_distance(&self, u: i64, v: i64) -> Result<u32> {
        hamming_distance(&self.encode_value(u)?, &self.encode_value(v)?)
    }

    fn words(&self, raw: &[u64]) -> Vec<BitWord> {
        raw.iter()
            .map(|&w| BitWord::from_raw(self.len(), w))
            .collect()
    }
}

/// Picks basis images heaviest-first: each image is the maximum-weight
/// codeword independent of those already chosen, ties going to the smallest
/// unsigned value.
pub fn greedy_basis(code: &BinaryCode) -> Result<Vec<BitWord>> {
    if code.dimension() > MAX_ENUMERABLE_DIMENSION {
        return invalid(format!(
            "dimension {} too large for greedy assignment",
            code.dimension()
        ));
    }
    let gen: Vec<u64> = code.generator().iter().map(|w| w.value()).collect();
    let mut candidates: Vec<u64> = span(&gen).skip(1).collect();
    candidates.sort_unstable_by(|a, b| b.count_ones().cmp(&a.count_ones()).then(a.cmp(b)));
    let mut basis = Echelon::new();
    let chosen: Vec<u64> = candidates
        .into_iter()
        .filter(|&c| basis.insert(c))
        .take(code.dimension() as usize)
        .collect();
    Ok(chosen
        .into_iter()
        .map(|w| BitWord::from_raw(code.len(), w))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::construct_hamming;
    use crate::quant::value_range;

    fn w(s: &str) -> BitWord {
        s.parse().unwrap()
    }

    fn c73_map() -> EncodingMap {
        EncodingMap::from_basis(
            construct_hamming(3).unwrap(),
            &[w("1111111"), w("1100101"), w("0010111"), w("1001011")],
        )
        .unwrap()
    }

    #[test]
    fn worked_example() {
        let m = c73_map();
        assert_eq!(m.table_entry(0b1101), w("1010001"));
        assert_eq!(m.table_entry(0b0000), w("0000000"));
        assert_eq!(m.table_entry(0b1000), w("1111111"));
    }

    #[test]
    fn from_basis_rejects_bad_images() {
        let code = construct_hamming(3).unwrap();
        let dependent = [w("1111111"), w("1100101"), w("0011010"), w("1001011")];
        assert!(EncodingMap::from_basis(code.clone(), &dependent).is_err());
        let outside = [w("1111110"), w("1100101"), w("0010111"), w("1001011")];
        assert!(EncodingMap::from_basis(code.clone(), &outside).is_err());
        assert!(EncodingMap::from_basis(code, &[w("1111111")]).is_err());
    }

    #[test]
    fn canonical_4bit_codebooks() {
        let hex = |id| -> Vec<String> {
            EncodingMap::canonical(id)
                .codebook()
                .iter()
                .map(|w| w.to_hex())
                .collect()
        };
        assert_eq!(hex(CodeId::C7_3), C7_3_TABLE);
        assert_eq!(hex(CodeId::C8_4), C8_4_TABLE);
        assert_eq!(hex(CodeId::C9_4), C9_4_TABLE);
        let m = EncodingMap::canonical(CodeId::C7_3);
        assert_eq!(m.encode_value(-5).unwrap().to_hex(), "23");
        assert_eq!(
            EncodingMap::canonical(CodeId::C9_4)
                .encode_value(-8)
                .unwrap()
                .to_hex(),
            "1EF"
        );
    }

    #[test]
    fn canonical_maps_cover_their_codes() {
        for id in CodeId::ALL {
            let m = EncodingMap::canonical(id);
            assert_eq!(m.bits(), id.bits());
            assert_eq!(m.len(), id.len());
            assert_eq!(m.code().min_distance(), id.design_distance(), "{id}");
            let mut book = m.codebook();
            book.sort();
            assert_eq!(book, m.code().codewords().unwrap(), "{id}");
        }
    }

    #[test]
    fn greedy_first_image_is_heaviest() {
        let g7 = greedy_basis(&construct_hamming(3).unwrap()).unwrap();
        assert_eq!(g7[0], w("1111111"));
        assert_eq!(
            gf2::rank(&g7.iter().map(|x| x.value()).collect::<Vec<_>>()),
            4
        );
        let g8 = greedy_basis(&CodeId::C8_4.construct()).unwrap();
        assert_eq!(g8[0].to_hex(), "FF");
    }

    #[test]
    fn greedy_weights_agree_with_pinned_maps() {
        for id in [CodeId::C7_3, CodeId::C8_4, CodeId::C9_4] {
            let pinned = EncodingMap::canonical(id);
            let greedy = greedy_basis(pinned.code()).unwrap();
            let mut a: Vec<u32> = pinned.basis_images().iter().map(BitWord::weight).collect();
            let mut b: Vec<u32> = greedy.iter().map(BitWord::weight).collect();
            assert_eq!(a[0], b[0], "{id}");
            a.sort();
            b.sort();
            assert_eq!(a, b, "{id}");
        }
    }

    #[test]
    fn encode_decode_examples() {
        let m = EncodingMap::canonical(CodeId::C7_3);
        assert_eq!(m.encode_value(-8).unwrap(), w("1111111"));
        assert_eq!(m.encode_value(0).unwrap(), w("0000000"));
        assert!(m.encode_value(8).is_err());
        assert!(m.encode_value(-9).is_err());
        assert_eq!(
            EncodingMap::canonical(CodeId::C8_4)
                .encode_value(7)
                .unwrap()
                .to_hex(),
            "39"
        );

        let c23 = BitWord::from_hex(7, "23").unwrap();
        assert_eq!(m.decode_value(&c23).unwrap(), Decoded::Value(-5));
        assert_eq!(m.decode_value(&w("0000000")).unwrap(), Decoded::Value(0));
        match m.decode_value(&c23.flip(3)).unwrap() {
            Decoded::Detected(d) => assert_eq!(d.nearest_distance, 1),
            other => panic!("expected detection, got {other:?}"),
        }
        assert!(m.decode_value(&w("000")).is_err());
    }

    #[test]
    fn distance_matrix_examples() {
        let d7 = EncodingMap::canonical(CodeId::C7_3).distance_matrix();
        assert_eq!(d7.get(0, -8), 7);
        let d8 = EncodingMap::canonical(CodeId::C8_4).distance_matrix();
        for v in 0..8 {
            assert_eq!(d8.get(v, v - 8), 8);
        }
        for id in CodeId::ALL {
            let m = EncodingMap::canonical(id);
            let d = m.distance_matrix();
            let (lo, hi) = value_range(m.bits());
            for u in lo..=hi {
                assert_eq!(d.get(u, u), 0);
                for v in (u + 1)..=hi {
                    assert_eq!(d.get(u, v), d.get(v, u));
                    assert!(d.get(u, v) >= m.code().min_distance());
                }
            }
        }
    }

    #[test]
    fn sparse_inverse_for_long_codes() {
        let code = construct_hamming(5).unwrap().shorten_last(15).unwrap();
        assert_eq!((code.len(), code.dimension()), (16, 11));
        let long = code.extend().unwrap();
        let basis = greedy_basis(&long).unwrap();
        let m = EncodingMap::from_basis(long, &basis).unwrap();
        for v in [-1024i64, -1, 0, 5, 1023] {
            let c = m.encode_value(v).unwrap();
            assert_eq!(m.decode_value(&c).unwrap(), Decoded::Value(v));
        }
        assert!(matches!(
            m.decode_value(&m.encode_value(3).unwrap().flip(1)).unwrap(),
            Decoded::Detected(_)
        ));
    }
}
