//! Attack traces and attacker cost.
//!
//! A trace records which quantized weights an attack run changed and to what.
//! Replaying it against a storage representation gives the number of bit flips
//! the attacker would have needed: the Hamming distance between the stored
//! forms of the old and new value, summed over the changes.

use std::fs;
use std::path::Path;

use num_rational::Ratio;
use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encoding::EncodingMap;
use crate::error::{invalid, Error, Result};
use crate::matrix::PairCounts;
use crate::quant::{check_bits, check_value, from_pattern, pattern, value_range};

/// Average Rowhammer flipping speed, bits per second.
pub const FLIP_RATE_BITS_PER_SECOND: f64 = 0.31;

/// Share of changed weights whose sign bit flips, for 4-bit networks.
pub const MSB_FRACTION_4BIT: f64 = 0.714;
/// Share of changed weights whose sign bit flips, for 8-bit networks.
pub const MSB_FRACTION_8BIT: f64 = 0.804;

/// Probabilities of 1, 2, 3 and 4 flipped bits per change, 4-bit networks.
pub const MULTIFLIP_4BIT: [f64; 4] = [0.85, 0.14, 0.0099, 0.0001];
/// Probabilities of 1, 2, 3 and 4 flipped bits per change, 8-bit networks.
pub const MULTIFLIP_8BIT: [f64; 4] = [0.60, 0.36, 0.037, 0.003];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightChange {
    #[serde(rename = "layer")]
    pub layer_id: String,
    pub index: u64,
    pub old: i64,
    pub new: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceMeta {
    /// Free-form tag such as `BFA`, `T-BFA-Nto1`, `TA-LBF` or `SYNTH`.
    pub method: String,
    pub b: u32,
    pub model: String,
    pub dataset: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackTrace {
    pub meta: TraceMeta,
    pub changes: Vec<WeightChange>,
}

impl AttackTrace {
    /// Checks the bit width and every change against it.
    pub fn validate(&self) -> Result<()> {
        check_bits(self.meta.b)?;
        for (i, c) in self.changes.iter().enumerate() {
            check_value(c.old, self.meta.b, Some(i))?;
            check_value(c.new, self.meta.b, Some(i))?;
            if c.old == c.new {
                return Err(Error::Parse {
                    context: format!("changes[{i}]"),
                    message: format!("old and new are both {}", c.old),
                });
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("traces always serialize");
        s.push('\n');
        s
    }
}

pub fn parse_trace(document: &str) -> Result<AttackTrace> {
    let trace: AttackTrace = serde_json::from_str(document).map_err(|e| Error::Parse {
        context: format!("line {}, column {}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    trace.validate()?;
    Ok(trace)
}

/// Reads every `*.json` file in `dir` as a trace, in file-name order.
pub fn load_trace_dir(dir: &Path) -> Result<Vec<AttackTrace>> {
    let io = |p: &Path, e: std::io::Error| Error::Io {
        path: p.display().to_string(),
        message: e.to_string(),
    };
    let mut paths: Vec<_> = fs::read_dir(dir)
        .map_err(|e| io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).map_err(|e| io(p, e))?;
            parse_trace(&text).map_err(|e| match e {
                Error::Parse { context, message } => Error::Parse {
                    context: format!("{}: {context}", p.display()),
                    message,
                },
                other => other,
            })
        })
        .collect()
}

/// How weights are laid out in memory.
#[derive(Clone, Copy, Debug)]
pub enum Representation<'a> {
    /// Plain `bits`-bit two's complement.
    TwosComplement {
        bits: u32,
    },
    Encoded(&'a EncodingMap),
}

impl Representation<'_> {
    pub fn bits(&self) -> u32 {
        match self {
            Representation::TwosComplement { bits } => *bits,
            Representation::Encoded(map) => map.bits(),
        }
    }

    #[inline]
    fn flips(&self, old: i64, new: i64) -> u32 {
        match self {
            Representation::TwosComplement { bits } => {
                (pattern(old, *bits) ^ pattern(new, *bits)).count_ones()
            }
            Representation::Encoded(map) => {
                (map.encode_raw(old) ^ map.encode_raw(new)).count_ones()
            }
        }
    }
}

/// Bit flips needed to carry out every change of `trace` under `repr`.
pub fn cost_of_trace(trace: &AttackTrace, repr: Representation<'_>) -> Result<u64> {
    if repr.bits() != trace.meta.b {
        return invalid(format!(
            "trace uses {}-bit weights but the representation stores {}-bit weights",
            trace.meta.b,
            repr.bits()
        ));
    }
    trace.validate()?;
    Ok(trace
        .changes
        .iter()
        .map(|c| u64::from(repr.flips(c.old, c.new)))
        .sum())
}

/// Per-trace cost summary over a collection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CostStats {
    pub traces: usize,
    pub min: u64,
    pub avg: Ratio<u64>,
    pub max: u64,
}

impl CostStats {
    pub fn avg_f64(&self) -> f64 {
        *self.avg.numer() as f64 / *self.avg.denom() as f64
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "traces": self.traces,
            "min": self.min,
            "avg": self.avg_f64(),
            "max": self.max,
        })
    }
}

pub fn trace_stats(traces: &[AttackTrace], repr: Representation<'_>) -> Result<CostStats> {
    if traces.is_empty() {
        return invalid("no traces to summarize");
    }
    let costs: Vec<u64> = traces
        .par_iter()
        .map(|t| cost_of_trace(t, repr))
        .collect::<Result<_>>()?;
    let total: u64 = costs.iter().sum();
    Ok(CostStats {
        traces: costs.len(),
        min: *costs.iter().min().expect("non-empty"),
        avg: Ratio::new(total, costs.len() as u64),
        max: *costs.iter().max().expect("non-empty"),
    })
}

/// Wall time a Rowhammer attacker would need for `cost` flips at
/// [`FLIP_RATE_BITS_PER_SECOND`].
pub fn estimated_attack_seconds(cost: u64) -> f64 {
    cost as f64 / FLIP_RATE_BITS_PER_SECOND
}

/// Parameters of the synthetic trace generator.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthParams {
    pub bits: u32,
    pub num_changes: usize,
    /// Probability that the first flipped bit of a change is the sign bit.
    pub msb_fraction: f64,
    /// Probabilities of flipping 1, 2, 3 or 4 bits in one change.
    pub multiflip_weights: [f64; 4],
    pub seed: u64,
}

impl SynthParams {
    /// Defaults calibrated to the observed attack statistics for 4- and 8-bit
    /// networks.
    pub fn defaults(bits: u32, num_changes: usize, seed: u64) -> Result<Self> {
        let (msb_fraction, multiflip_weights) = match bits {
            4 => (MSB_FRACTION_4BIT, MULTIFLIP_4BIT),
            8 => (MSB_FRACTION_8BIT, MULTIFLIP_8BIT),
            _ => return invalid(format!("no default statistics for {bits}-bit weights")),
        };
        Ok(SynthParams {
            bits,
            num_changes,
            msb_fraction,
            multiflip_weights,
            seed,
        })
    }

    fn validate(&self) -> Result<()> {
        check_bits(self.bits)?;
        if !(0.0..=1.0).contains(&self.msb_fraction) {
            return invalid(format!("msb fraction {} outside [0, 1]", self.msb_fraction));
        }
        if self
            .multiflip_weights
            .iter()
            .any(|p| !(0.0..=1.0).contains(p))
        {
            return invalid("flip-count probabilities must lie in [0, 1]");
        }
        let sum: f64 = self.multiflip_weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return invalid(format!("flip-count probabilities sum to {sum}, not 1"));
        }
        if let Some(k) = (1..=4u32)
            .filter(|&k| self.multiflip_weights[k as usize - 1] > 0.0)
            .find(|&k| k > self.bits)
        {
            return invalid(format!(
                "cannot flip {k} bits of a {}-bit weight",
                self.bits
            ));
        }
        Ok(())
    }
}

/// Generates a trace with the statistics of `params`.
///
/// Each change picks a uniform old value and a flip count `k`; the first
/// flipped coordinate is the sign bit with probability `msb_fraction` and
/// otherwise a uniform lower coordinate, and the other `k − 1` coordinates are
/// drawn without replacement from those left. The change therefore costs
/// exactly `k` flips in two's complement.
pub fn synthesize_trace(params: &SynthParams) -> Result<AttackTrace> {
    params.validate()?;
    let bits = params.bits;
    let (lo, hi) = value_range(bits);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let flip_dist = WeightedIndex::new(params.multiflip_weights)
        .map_err(|e| Error::InvalidArgument(format!("flip-count distribution: {e}")))?;
    let changes = (0..params.num_changes)
        .map(|i| {
            let old = rng.gen_range(lo..=hi);
            let k = flip_dist.sample(&mut rng) + 1;
            let first = if bits == 1 || rng.gen_bool(params.msb_fraction) {
                1
            } else {
                rng.gen_range(2..=bits)
            };
            let mut rest: Vec<u32> = (1..=bits).filter(|&c| c != first).collect();
            rest.shuffle(&mut rng);
            let flip_mask = std::iter::once(first)
                .chain(rest.into_iter().take(k - 1))
                .fold(0u64, |m, c| m | 1u64 << (bits - c));
            let new = from_pattern(pattern(old, bits) ^ flip_mask, bits);
            WeightChange {
                layer_id: "synthetic".into(),
                index: i as u64,
                old,
                new,
            }
        })
        .collect();
    Ok(AttackTrace {
        meta: TraceMeta {
            method: "SYNTH".into(),
            b: bits,
            model: "synthetic".into(),
            dataset: "synthetic".into(),
        },
        changes,
    })
}

/// Counts of each `(old, new)` pair over all changes of all traces.
pub fn pair_frequency(bits: u32, traces: &[AttackTrace]) -> Result<PairCounts> {
    check_bits(bits)?;
    let mut counts = PairCounts::zeros(bits);
    for t in traces {
        if t.meta.b != bits {
            return invalid(format!("trace has b = {}, expected {bits}", t.meta.b));
        }
        t.validate()?;
        for c in &t.changes {
            *counts.get_mut(c.old, c.new) += 1;
        }
    }
    Ok(counts)
}
