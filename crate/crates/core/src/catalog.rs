//! The six named codes used for 4-bit and 8-bit weights.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::code::{construct_hamming, BinaryCode, DEFAULT_SUBCODE_SEED};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CodeId {
    C7_3,
    C8_4,
    C9_4,
    C12_3,
    C13_4,
    C14_4,
}

impl CodeId {
    pub const ALL: [CodeId; 6] = [
        CodeId::C7_3,
        CodeId::C8_4,
        CodeId::C9_4,
        CodeId::C12_3,
        CodeId::C13_4,
        CodeId::C14_4,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CodeId::C7_3 => "C7_3",
            CodeId::C8_4 => "C8_4",
            CodeId::C9_4 => "C9_4",
            CodeId::C12_3 => "C12_3",
            CodeId::C13_4 => "C13_4",
            CodeId::C14_4 => "C14_4",
        }
    }

    /// Codeword length.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(self) -> u32 {
        match self {
            CodeId::C7_3 => 7,
            CodeId::C8_4 => 8,
            CodeId::C9_4 => 9,
            CodeId::C12_3 => 12,
            CodeId::C13_4 => 13,
            CodeId::C14_4 => 14,
        }
    }

    /// Quantization bit width the code carries.
    pub fn bits(self) -> u32 {
        match self {
            CodeId::C7_3 | CodeId::C8_4 | CodeId::C9_4 => 4,
            _ => 8,
        }
    }

    /// Best achievable minimum distance for this length and size.
    pub fn design_distance(self) -> u32 {
        match self {
            CodeId::C7_3 | CodeId::C12_3 => 3,
            _ => 4,
        }
    }

    /// Stable one-byte tag used in blob headers.
    pub fn tag(self) -> u8 {
        self as u8 + 1
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        Self::ALL.get(usize::from(tag).checked_sub(1)?).copied()
    }

    /// The code built from Hamming codes by extension, shortening at the last
    /// coordinates and (for `C14_4`) a seeded random subcode.
    pub fn construct(self) -> BinaryCode {
        let built = match self {
            CodeId::C7_3 => construct_hamming(3),
            CodeId::C8_4 => construct_hamming(3).and_then(|c| c.extend()),
            CodeId::C9_4 => extended_16().and_then(|c| c.shorten_last(7)),
            CodeId::C12_3 => construct_hamming(4).and_then(|c| c.shorten_last(3)),
            CodeId::C13_4 => extended_16().and_then(|c| c.shorten_last(3)),
            CodeId::C14_4 => extended_16()
                .and_then(|c| c.shorten_last(2))
                .and_then(|c| c.linear_subcode(8, DEFAULT_SUBCODE_SEED)),
        };
        built.expect("catalog constructions use fixed valid parameters")
    }
}

fn extended_16() -> Result<BinaryCode> {
    construct_hamming(4)?.extend()
}

impl fmt::Display for CodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CodeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown code id {s:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for id in CodeId::ALL {
            assert_eq!(id.as_str().parse::<CodeId>().unwrap(), id);
            assert_eq!(CodeId::from_tag(id.tag()), Some(id));
        }
        assert!("C10_3".parse::<CodeId>().is_err());
        assert_eq!(CodeId::from_tag(0), None);
        assert_eq!(CodeId::from_tag(7), None);
    }

    #[test]
    fn constructions_have_catalog_parameters() {
        for id in CodeId::ALL {
            let c = id.construct();
            assert_eq!(c.len(), id.len(), "{id}");
            assert_eq!(c.dimension(), id.bits(), "{id}");
            assert_eq!(c.min_distance(), id.design_distance(), "{id}");
        }
    }
}
