//! Acceptance suite: one `[PASS]`/`[FAIL]` line per criterion.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use flipguard::attack::{self, AttackTrace, SynthParams};
use flipguard::protect::{self, DecodeOutcome};
use flipguard::quant::{self, value_range};
use flipguard::{BitWord, CodeId, EncodingMap, Representation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

const TABLE_IV: [(CodeId, &str); 3] = [
    (
        CodeId::C7_3,
        "7F 34 68 23 1A 51 0D 46 00 4B 17 5C 65 2E 72 39",
    ),
    (
        CodeId::C8_4,
        "FF B4 E8 A3 9A D1 8D C6 00 4B 17 5C 65 2E 72 39",
    ),
    (
        CodeId::C9_4,
        "1EF 1F0 193 18C 155 14A 129 136 000 01F 07C 063 0BA 0A5 0C6 0D9",
    ),
];

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(name)
}

fn maps() -> Vec<EncodingMap> {
    CodeId::ALL
        .into_iter()
        .map(EncodingMap::canonical)
        .collect()
}

fn codebook_fidelity() -> Outcome {
    let start = Instant::now();
    for (id, expected) in TABLE_IV {
        let out = Command::new(env!("CARGO_BIN_EXE_flipguard"))
            .args(["codebook", "--code", id.as_str()])
            .output()
            .map_err(|e| e.to_string())?;
        ensure!(out.status.success(), "{id}: exit {:?}", out.status.code());
        let got = String::from_utf8_lossy(&out.stdout)
            .split_whitespace()
            .collect::<Vec<_>>()
            .join(" ");
        ensure!(got == expected, "{id}: got {got}");
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!("3 codebooks bit-exact in {elapsed:.0?}"))
}

fn published(name: &str) -> Vec<(i64, Vec<u32>)> {
    let text = std::fs::read_to_string(fixture(&format!("distances_{name}.txt"))).unwrap();
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let mut cells = l.split_whitespace();
            let row = cells.next().unwrap().parse().unwrap();
            (
                row,
                cells
                    .map(|c| if c == "-" { 0 } else { c.parse().unwrap() })
                    .collect(),
            )
        })
        .collect()
}

fn distance_fidelity() -> Outcome {
    let cases = [
        (
            "twos_complement",
            quant::flip_count_matrix(4).map_err(|e| e.to_string())?,
        ),
        (
            "C7_3",
            EncodingMap::canonical(CodeId::C7_3).distance_matrix(),
        ),
        (
            "C8_4",
            EncodingMap::canonical(CodeId::C8_4).distance_matrix(),
        ),
        (
            "C9_4",
            EncodingMap::canonical(CodeId::C9_4).distance_matrix(),
        ),
    ];
    let mut compared = 0;
    for (name, matrix) in cases {
        let table = published(name);
        ensure!(
            table.len() == 16,
            "{name}: fixture has {} rows",
            table.len()
        );
        for (row, entries) in table {
            ensure!(
                entries.len() == 16,
                "{name}: row {row} has {} cells",
                entries.len()
            );
            for (col, want) in (-8..8).zip(entries) {
                let got = matrix.get(row, col);
                ensure!(got == want, "{name}[{row}][{col}]: {got} != {want}");
                compared += 1;
            }
        }
    }
    Ok(format!("{compared} entries equal"))
}

fn brute_min_distance(words: &[BitWord]) -> u32 {
    let mut best = u32::MAX;
    for (i, a) in words.iter().enumerate() {
        for b in &words[i + 1..] {
            best = best.min((a.value() ^ b.value()).count_ones());
        }
    }
    best
}

fn code_parameters() -> Outcome {
    let start = Instant::now();
    let rows = [
        (7, 16, 3),
        (8, 16, 4),
        (9, 16, 4),
        (12, 256, 3),
        (13, 256, 4),
        (14, 256, 4),
    ];
    for (id, (n, m, d)) in CodeId::ALL.into_iter().zip(rows) {
        let code = id.construct();
        let words = code.codewords().map_err(|e| e.to_string())?;
        let got = (code.len(), words.len(), brute_min_distance(&words));
        ensure!(got == (n, m, d), "{id}: {got:?} != {:?}", (n, m, d));
        ensure!(
            code.min_distance() == d,
            "{id}: reported d = {}",
            code.min_distance()
        );
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    Ok(format!("6 rows, brute force in {elapsed:.0?}"))
}

fn tiling() -> Outcome {
    let code = CodeId::C7_3.construct();
    let mut hits = [0u32; 128];
    for c in code.codewords().map_err(|e| e.to_string())? {
        hits[c.value() as usize] += 1;
        for i in 0..7 {
            hits[(c.value() ^ (1 << i)) as usize] += 1;
        }
    }
    ensure!(hits.iter().all(|&h| h == 1), "coverage counts {hits:?}");
    Ok("16 balls partition 128 words".into())
}

fn worked_example() -> Outcome {
    let text =
        std::fs::read_to_string(fixture("worked_example.json")).map_err(|e| e.to_string())?;
    let trace = attack::parse_trace(&text).map_err(|e| e.to_string())?;
    let map = EncodingMap::canonical(CodeId::C7_3);
    let base = attack::cost_of_trace(&trace, Representation::TwosComplement { bits: 4 })
        .map_err(|e| e.to_string())?;
    let prot =
        attack::cost_of_trace(&trace, Representation::Encoded(&map)).map_err(|e| e.to_string())?;
    ensure!((base, prot) == (3, 21), "costs {base} / {prot}");
    Ok("3 unprotected, 21 under C7_3".into())
}

fn msb_trace(bits: u32) -> AttackTrace {
    let params = SynthParams {
        bits,
        num_changes: 1000,
        msb_fraction: 1.0,
        multiflip_weights: [1.0, 0.0, 0.0, 0.0],
        seed: 2024,
    };
    attack::synthesize_trace(&params).unwrap()
}

fn msb_amplification() -> Outcome {
    let mut summary = Vec::new();
    for map in maps() {
        let b = map.bits();
        let trace = msb_trace(b);
        let base = attack::trace_stats(
            std::slice::from_ref(&trace),
            Representation::TwosComplement { bits: b },
        )
        .map_err(|e| e.to_string())?;
        let prot = attack::trace_stats(std::slice::from_ref(&trace), Representation::Encoded(&map))
            .map_err(|e| e.to_string())?;
        let ratio = prot.avg / base.avg;
        let id = map.code_id().unwrap();

        // Brute force: distance between codewords of every value and its MSB partner.
        let book = map.codebook();
        let half = book.len() / 2;
        let msb_weights: Vec<u32> = (0..half)
            .map(|i| (book[i].value() ^ book[i + half].value()).count_ones())
            .collect();
        let heaviest = map
            .code()
            .codewords()
            .unwrap()
            .iter()
            .map(BitWord::weight)
            .max()
            .unwrap();
        let first = map.basis_images()[0].weight();

        let expected = match id {
            CodeId::C7_3 => 7,
            CodeId::C8_4 | CodeId::C9_4 => 8,
            _ => first,
        };
        ensure!(
            *ratio.denom() == 1 && *ratio.numer() == u64::from(expected),
            "{id}: ratio {ratio}"
        );
        ensure!(
            msb_weights.iter().all(|&w| w == first),
            "{id}: MSB distances {msb_weights:?}"
        );
        ensure!(
            first == heaviest,
            "{id}: first image weight {first}, heaviest codeword {heaviest}"
        );
        summary.push(format!("{id}={ratio}"));
    }
    Ok(summary.join(" "))
}

fn overheads() -> Outcome {
    let expected = [75.0, 100.0, 125.0, 50.0, 62.5, 75.0];
    for (id, want) in CodeId::ALL.into_iter().zip(expected) {
        let r = protect::overhead_report(id, id.bits()).map_err(|e| e.to_string())?;
        ensure!(r.percent_f64() == want, "{id}: {}", r.percent_f64());
    }
    Ok("75/100/125 and 50/62.5/75 percent".into())
}

fn detection() -> Outcome {
    let map = EncodingMap::canonical(CodeId::C7_3);
    let clean = protect::encode_tensor(&map, &(-8..8).collect::<Vec<_>>(), "sweep")
        .map_err(|e| e.to_string())?;
    let mut cases = 0;
    for index in 0..16u64 {
        for a in 1..=7 {
            for b in a..=7 {
                let mut blob = clean.clone();
                blob.flip_bit(index, a).unwrap();
                if b != a {
                    blob.flip_bit(index, b).unwrap();
                }
                let report = protect::verify_blob(&map, &blob).map_err(|e| e.to_string())?;
                ensure!(
                    report.corrupted_indices == [index],
                    "word {index} flips {a},{b} missed"
                );
                cases += 1;
            }
        }
    }
    ensure!(cases == 448, "{cases} cases");

    let map = EncodingMap::canonical(CodeId::C13_4);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let count = 100_000u64;
    let values: Vec<i64> = (0..count).map(|_| rng.gen_range(-128..128)).collect();
    let mut blob = protect::encode_tensor(&map, &values, "sampled").map_err(|e| e.to_string())?;
    for index in 0..count {
        let k = rng.gen_range(1..=3);
        let coords = rand::seq::index::sample(&mut rng, 13, k);
        for c in coords {
            blob.flip_bit(index, c as u32 + 1).unwrap();
        }
    }
    let report = protect::verify_blob(&map, &blob).map_err(|e| e.to_string())?;
    ensure!(
        report.corrupted_indices.len() as u64 == count,
        "{} of {count} flagged",
        report.corrupted_indices.len()
    );
    Ok(format!("448 exhaustive + {count} sampled flagged"))
}

fn properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for map in maps() {
        let id = map.code_id().unwrap();
        let size = 1u64 << map.bits();
        let pairs: Vec<(u64, u64)> = if map.bits() == 4 {
            (0..size)
                .flat_map(|u| (0..size).map(move |v| (u, v)))
                .collect()
        } else {
            (0..10_000)
                .map(|_| (rng.gen_range(0..size), rng.gen_range(0..size)))
                .collect()
        };
        for (u, v) in pairs {
            let sum = map.table_entry(u).xor(&map.table_entry(v)).unwrap();
            ensure!(
                map.table_entry(u ^ v) == sum,
                "{id}: not linear at {u}, {v}"
            );
        }
    }

    let all = maps();
    for t in 0..10_000 {
        let map = &all[t % all.len()];
        let (lo, hi) = value_range(map.bits());
        let len = rng.gen_range(0..64);
        let values: Vec<i64> = (0..len).map(|_| rng.gen_range(lo..=hi)).collect();
        let blob = protect::encode_tensor(map, &values, "rt").map_err(|e| e.to_string())?;
        let back = protect::EncodedBlob::from_bytes(&blob.to_bytes()).map_err(|e| e.to_string())?;
        let out = protect::decode_tensor(map, &back).map_err(|e| e.to_string())?;
        ensure!(
            out == DecodeOutcome::Values(values),
            "round trip {t} failed"
        );
    }

    for map in &all {
        let n = map.len();
        for count in 0..=1000usize {
            let words: Vec<u64> = (0..count)
                .map(|_| rng.gen::<u64>() & ((1 << n) - 1))
                .collect();
            let packed = protect::pack_words(words.iter().copied(), n);
            ensure!(
                packed.len() == (count * n as usize).div_ceil(8),
                "n = {n}, count = {count}: length"
            );
            for (i, w) in words.iter().enumerate() {
                ensure!(
                    protect::unpack_word(&packed, i as u64, n) == *w,
                    "n = {n}, count = {count}, word {i}"
                );
            }
        }
    }
    Ok("linearity, 10^4 round trips, pack/unpack 0..=1000".into())
}

fn desk_scale() -> Outcome {
    let traces: Vec<AttackTrace> = (0..20)
        .map(|s| attack::synthesize_trace(&SynthParams::defaults(8, 25, s).unwrap()).unwrap())
        .collect();
    for repr in [
        Representation::TwosComplement { bits: 8 },
        Representation::Encoded(&EncodingMap::canonical(CodeId::C13_4)),
    ] {
        let s = attack::trace_stats(&traces, repr).map_err(|e| e.to_string())?;
        let json = s.to_json();
        for key in ["min", "avg", "max"] {
            ensure!(json[key].is_number(), "stats missing {key}");
        }
        ensure!(
            s.min as f64 <= s.avg_f64() && s.avg_f64() <= s.max as f64,
            "min/avg/max out of order"
        );
    }
    Ok("absolute flip counts and attack success rates need trained models and the original attacks, so they are \
        not reproduced; checked the min/avg/max stats schema instead"
        .into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("codebook fidelity", codebook_fidelity),
        ("distance-matrix fidelity", distance_fidelity),
        ("code parameters", code_parameters),
        ("perfect-code tiling", tiling),
        ("worked-example replay", worked_example),
        ("MSB amplification", msb_amplification),
        ("memory overheads", overheads),
        ("detection completeness", detection),
        ("property suites", properties),
        ("desk-scale substitutes", desk_scale),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.into_iter().enumerate() {
        let outcome =
            catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("[PASS] {} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {} {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
