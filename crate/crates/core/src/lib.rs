//! Protection of quantized neural-network weights against bit-flip attacks.
//!
//! Weights are stored as codewords of a binary linear code instead of raw
//! two's-complement integers. A flip of fewer than `d` bits (the code's minimum
//! distance) never produces another codeword, so a periodic sweep over the
//! stored words detects it, and an attacker who wants to turn one value into
//! another must flip as many bits as the two codewords differ in. The
//! value-to-codeword assignment puts the heaviest codeword on the sign bit,
//! the bit most attacks target.
//!
//! ```
//! use flipguard::{CodeId, EncodingMap};
//!
//! let map = EncodingMap::canonical(CodeId::C7_3);
//! assert_eq!(map.encode_value(-5)?.to_hex(), "23");
//! // changing 0 into -8 flips one bit in two's complement, seven here
//! assert_eq!(map.value_distance(0, -8)?, 7);
//! # Ok::<(), flipguard::Error>(())
//! ```
//!
//! The modules build on each other:
//!
//! * [`bitword`] and [`code`]: words, distances and code constructions
//! * [`encoding`]: linear value-to-codeword maps and distance tables
//! * [`quant`]: quantization and two's-complement arithmetic
//! * [`protect`]: packed blobs, the detection sweep and memory overhead
//! * [`attack`]: attack traces, replay cost and trace synthesis

pub mod attack;
pub mod bitword;
pub mod catalog;
pub mod code;
pub mod encoding;
mod error;
mod gf2;
pub mod matrix;
pub mod protect;
pub mod quant;

pub use attack::{AttackTrace, CostStats, Representation, SynthParams, TraceMeta, WeightChange};
pub use bitword::{hamming_distance, BitWord};
pub use catalog::CodeId;
pub use code::{construct_hamming, BinaryCode};
pub use encoding::{greedy_basis, Decoded, Detection, EncodingMap};
pub use error::{Error, Result};
pub use matrix::{DistanceMatrix, PairCounts, ValueMatrix};
pub use protect::{DecodeOutcome, EncodedBlob, Overhead, VerifyReport};
pub use quant::QuantConfig;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/codes.md")]
    mod codes {}
    #[doc = include_str!("../../../book/src/quantization.md")]
    mod quantization {}
    #[doc = include_str!("../../../book/src/encoding.md")]
    mod encoding {}
    #[doc = include_str!("../../../book/src/protection.md")]
    mod protection {}
    #[doc = include_str!("../../../book/src/attacks.md")]
    mod attacks {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
