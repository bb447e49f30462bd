//! Bit-packed protected tensors and the detection sweep.
//!
//! # Blob layout
//!
//! All integers are big-endian.
//!
//! | offset | size | field                                   |
//! |--------|------|-----------------------------------------|
//! | 0      | 8    | magic `DNCODE01`                        |
//! | 8      | 1    | code tag (1 = `C7_3` … 6 = `C14_4`)     |
//! | 9      | 1    | bit width `b`                           |
//! | 10     | 1    | code length `n`                         |
//! | 11     | 8    | weight count                            |
//! | 19     | 2    | layer id length `L`                     |
//! | 21     | `L`  | layer id, UTF-8                         |
//! | 21+`L` | …    | payload, `ceil(count·n/8)` bytes        |
//!
//! The payload is the concatenation of the `n`-bit codewords with coordinate 1
//! of the first codeword in the most significant bit of the first byte. Unused
//! low bits of the last byte are zero.

use std::fmt;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::CodeId;
use crate::encoding::EncodingMap;
use crate::error::{invalid, Error, Result};
use crate::quant::check_value;

pub const MAGIC: [u8; 8] = *b"DNCODE01";

const FIXED_HEADER_LEN: usize = 21;

/// Below this many weights the sweep stays on the calling thread.
const PARALLEL_THRESHOLD: usize = 1 << 16;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlobHeader {
    pub code_id: CodeId,
    pub bits: u32,
    pub n: u32,
    pub count: u64,
    pub layer_id: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedBlob {
    header: BlobHeader,
    payload: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub clean: bool,
    /// Indices of weights whose stored word is not a codeword, ascending.
    pub corrupted_indices: Vec<u64>,
    pub scanned: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DecodeOutcome {
    Values(Vec<i64>),
    Corrupted(VerifyReport),
}

fn payload_len(count: u64, n: u32) -> Result<usize> {
    count
        .checked_mul(u64::from(n))
        .map(|bits| bits.div_ceil(8))
        .and_then(|b| usize::try_from(b).ok())
        .ok_or_else(|| Error::CorruptBlob(format!("payload size overflows for {count} weights")))
}

/// Packs `n`-bit words back to back, MSB first.
pub fn pack_words(words: impl IntoIterator<Item = u64>, n: u32) -> Vec<u8> {
    assert!((1..=64).contains(&n));
    let mut out = Vec::new();
    let mut acc: u128 = 0;
    let mut pending = 0u32;
    for w in words {
        acc = (acc << n) | u128::from(w);
        pending += n;
        while pending >= 8 {
            pending -= 8;
            out.push((acc >> pending) as u8);
        }
        acc &= (1u128 << pending) - 1;
    }
    if pending > 0 {
        out.push((acc << (8 - pending)) as u8);
    }
    out
}

/// Reads the `index`-th `n`-bit word from a packed payload.
#[inline]
pub fn unpack_word(payload: &[u8], index: u64, n: u32) -> u64 {
    let start = index * u64::from(n);
    let end = start + u64::from(n);
    let first = (start / 8) as usize;
    let last = ((end - 1) / 8) as usize;
    let mut acc: u128 = 0;
    for &byte in &payload[first..=last] {
        acc = (acc << 8) | u128::from(byte);
    }
    let trailing = (last as u64 + 1) * 8 - end;
    ((acc >> trailing) & ((1u128 << n) - 1)) as u64
}

fn catalog_id(map: &EncodingMap) -> Result<CodeId> {
    map.code_id()
        .ok_or_else(|| Error::InvalidArgument("encoding map has no catalog code id".into()))
}

/// Encodes every value with `map` into a packed blob.
pub fn encode_tensor(map: &EncodingMap, values: &[i64], layer_id: &str) -> Result<EncodedBlob> {
    let code_id = catalog_id(map)?;
    if layer_id.len() > usize::from(u16::MAX) {
        return invalid("layer id longer than 65535 bytes");
    }
    for (i, &v) in values.iter().enumerate() {
        check_value(v, map.bits(), Some(i))?;
    }
    let payload = pack_words(values.iter().map(|&v| map.encode_raw(v)), map.len());
    Ok(EncodedBlob {
        header: BlobHeader {
            code_id,
            bits: map.bits(),
            n: map.len(),
            count: values.len() as u64,
            layer_id: layer_id.to_owned(),
        },
        payload,
    })
}

impl EncodedBlob {
    pub fn header(&self) -> &BlobHeader {
        &self.header
    }

    pub fn payload(&self) -> &[u8] {
        &self.payload
    }

    /// Inverts coordinate `coordinate` (1-based) of the stored word of weight
    /// `index`, as a fault would.
    pub fn flip_bit(&mut self, index: u64, coordinate: u32) -> Result<()> {
        if index >= self.header.count || coordinate == 0 || coordinate > self.header.n {
            return invalid(format!(
                "no coordinate {coordinate} in weight {index} of {}",
                self.header.count
            ));
        }
        let bit = index * u64::from(self.header.n) + u64::from(coordinate - 1);
        self.payload[(bit / 8) as usize] ^= 0x80 >> (bit % 8);
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let h = &self.header;
        let mut out = Vec::with_capacity(FIXED_HEADER_LEN + h.layer_id.len() + self.payload.len());
        out.extend_from_slice(&MAGIC);
        out.push(h.code_id.tag());
        out.push(h.bits as u8);
        out.push(h.n as u8);
        out.extend_from_slice(&h.count.to_be_bytes());
        out.extend_from_slice(&(h.layer_id.len() as u16).to_be_bytes());
        out.extend_from_slice(h.layer_id.as_bytes());
        out.extend_from_slice(&self.payload);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let corrupt = |m: &str| Error::CorruptBlob(m.to_owned());
        if bytes.len() < FIXED_HEADER_LEN {
            return Err(corrupt("truncated header"));
        }
        if bytes[..8] != MAGIC {
            return Err(corrupt("bad magic"));
        }
        let code_id = CodeId::from_tag(bytes[8])
            .ok_or_else(|| Error::CorruptBlob(format!("unknown code tag {}", bytes[8])))?;
        let (bits, n) = (u32::from(bytes[9]), u32::from(bytes[10]));
        if bits != code_id.bits() || n != code_id.len() {
            return Err(Error::CorruptBlob(format!(
                "header says b = {bits}, n = {n} but {code_id} has b = {}, n = {}",
                code_id.bits(),
                code_id.len()
            )));
        }
        let count = u64::from_be_bytes(bytes[11..19].try_into().expect("8 bytes"));
        let layer_len = usize::from(u16::from_be_bytes([bytes[19], bytes[20]]));
        let layer_end = FIXED_HEADER_LEN + layer_len;
        let layer_bytes = bytes
            .get(FIXED_HEADER_LEN..layer_end)
            .ok_or_else(|| corrupt("truncated layer id"))?;
        let layer_id = std::str::from_utf8(layer_bytes)
            .map_err(|_| corrupt("layer id is not UTF-8"))?
            .to_owned();
        let payload = &bytes[layer_end..];
        let expected = payload_len(count, n)?;
        if payload.len() < expected {
            return Err(Error::CorruptBlob(format!(
                "truncated payload: {} of {expected} bytes",
                payload.len()
            )));
        }
        if payload.len() > expected {
            return Err(Error::CorruptBlob(format!(
                "{} trailing bytes after payload",
                payload.len() - expected
            )));
        }
        Ok(EncodedBlob {
            header: BlobHeader {
                code_id,
                bits,
                n,
                count,
                layer_id,
            },
            payload: payload.to_vec(),
        })
    }

    fn check_against(&self, map: &EncodingMap) -> Result<()> {
        let h = &self.header;
        if map.code_id() != Some(h.code_id) || map.bits() != h.bits || map.len() != h.n {
            return invalid(format!(
                "blob encoded with {} (b = {}, n = {}) does not match the given map",
                h.code_id, h.bits, h.n
            ));
        }
        if self.payload.len() != payload_len(h.count, h.n)? {
            return Err(Error::CorruptBlob(
                "payload length does not match header".into(),
            ));
        }
        let used_bits = h.count * u64::from(h.n) % 8;
        if used_bits != 0 {
            let last = *self.payload.last().expect("non-empty when bits are used");
            if last & (0xFF >> used_bits) != 0 {
                return Err(Error::CorruptBlob("nonzero padding bits".into()));
            }
        }
        Ok(())
    }
}

/// Flags every weight whose stored word is not a codeword.
pub fn verify_blob(map: &EncodingMap, blob: &EncodedBlob) -> Result<VerifyReport> {
    blob.check_against(map)?;
    let count = blob.header.count;
    let n = blob.header.n;
    let payload = &blob.payload;
    let bad = |i: &u64| map.decode_raw(unpack_word(payload, *i, n)).is_none();
    let corrupted_indices: Vec<u64> = if count as usize >= PARALLEL_THRESHOLD {
        (0..count).into_par_iter().filter(bad).collect()
    } else {
        (0..count).filter(bad).collect()
    };
    Ok(VerifyReport {
        clean: corrupted_indices.is_empty(),
        corrupted_indices,
        scanned: count,
    })
}

/// Decodes all weights, or returns the verification report if any stored word
/// is not a codeword.
pub fn decode_tensor(map: &EncodingMap, blob: &EncodedBlob) -> Result<DecodeOutcome> {
    blob.check_against(map)?;
    let n = blob.header.n;
    let mut values = Vec::with_capacity(blob.header.count as usize);
    for i in 0..blob.header.count {
        match map.decode_raw(unpack_word(&blob.payload, i, n)) {
            Some(v) => values.push(v),
            None => return verify_blob(map, blob).map(DecodeOutcome::Corrupted),
        }
    }
    Ok(DecodeOutcome::Values(values))
}

/// [`decode_tensor`] together with its wall-clock time.
pub fn decode_tensor_timed(
    map: &EncodingMap,
    blob: &EncodedBlob,
) -> (Result<DecodeOutcome>, Duration) {
    let start = Instant::now();
    let out = decode_tensor(map, blob);
    (out, start.elapsed())
}

/// Memory cost of storing `b`-bit weights as `n`-bit codewords.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Overhead {
    pub code_id: CodeId,
    pub bits_per_weight: u32,
    /// `100 · (n − b) / b`, exact.
    pub memory_overhead_percent: Ratio<u32>,
}

impl Overhead {
    pub fn percent_f64(&self) -> f64 {
        f64::from(*self.memory_overhead_percent.numer())
            / f64::from(*self.memory_overhead_percent.denom())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "code": self.code_id.as_str(),
            "bits": self.code_id.bits(),
            "bits_per_weight": self.bits_per_weight,
            "memory_overhead_percent": self.percent_f64(),
        })
    }
}

impl fmt::Display for Overhead {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} bits_per_weight={} memory_overhead={}%",
            self.code_id,
            self.bits_per_weight,
            self.percent_f64()
        )
    }
}

pub fn overhead_report(code_id: CodeId, bits: u32) -> Result<Overhead> {
    if code_id.bits() != bits {
        return invalid(format!(
            "{code_id} stores {}-bit weights, not {bits}-bit",
            code_id.bits()
        ));
    }
    let n = code_id.len();
    Ok(Overhead {
        code_id,
        bits_per_weight: n,
        memory_overhead_percent: Ratio::new(100 * (n - bits), bits),
    })
}

/// Plaintext per-layer quantization metadata stored next to the blobs.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerMeta {
    pub layer_id: String,
    pub bits: u32,
    pub delta: f64,
}

/// One `layer_id,b,delta` line per layer.
pub fn write_sidecar(layers: &[LayerMeta]) -> Result<String> {
    let mut out = String::new();
    for l in layers {
        if l.layer_id.contains(['\n', '\r']) {
            return invalid(format!("layer id {:?} contains a line break", l.layer_id));
        }
        out.push_str(&format!("{},{},{}\n", l.layer_id, l.bits, l.delta));
    }
    Ok(out)
}

pub fn parse_sidecar(text: &str) -> Result<Vec<LayerMeta>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let err = |m: String| Error::Parse {
                context: format!("sidecar line {}", i + 1),
                message: m,
            };
            // layer ids may contain commas; the numeric fields never do
            let mut fields = line.rsplitn(3, ',');
            let delta = fields.next().unwrap_or_default();
            let bits = fields
                .next()
                .ok_or_else(|| err("missing bit width".into()))?;
            let layer_id = fields
                .next()
                .ok_or_else(|| err("missing layer id".into()))?;
            let bits: u32 = bits
                .trim()
                .parse()
                .map_err(|e| err(format!("bit width: {e}")))?;
            let delta: f64 = delta
                .trim()
                .parse()
                .map_err(|e| err(format!("scale: {e}")))?;
            crate::quant::QuantConfig::new(bits, delta).map_err(|e| err(e.to_string()))?;
            Ok(LayerMeta {
                layer_id: layer_id.to_owned(),
                bits,
                delta,
            })
        })
        .collect()
}
