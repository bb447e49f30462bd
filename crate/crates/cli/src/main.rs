use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use flipguard::attack::{self, SynthParams};
use flipguard::protect::{self, DecodeOutcome, EncodedBlob, VerifyReport};
use flipguard::{quant, CodeId, EncodingMap, Representation};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Exit status when a sweep finds corrupted weights.
const EXIT_CORRUPTED: u8 = 2;

#[derive(Parser)]
#[command(
    name = "flipguard",
    version,
    about = "Protect quantized weights against bit-flip attacks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the codeword of every value, one hex word per line
    Codebook {
        #[arg(long)]
        code: CodeId,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print bit flips needed between every pair of values
    Distances {
        /// Omit to show plain two's complement
        #[arg(long, required_unless_present = "bits")]
        code: Option<CodeId>,
        #[arg(long, value_parser = parse_bits)]
        bits: Option<u32>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Encode whitespace-separated integers into a protected blob
    Encode {
        #[arg(long)]
        code: CodeId,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "layer0")]
        layer: String,
    },
    /// Decode a blob, refusing if any weight is corrupted
    Decode {
        #[command(flatten)]
        blob: BlobArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one detection sweep over a blob
    Verify {
        #[command(flatten)]
        blob: BlobArgs,
    },
    /// Replay attack traces and report attacker cost
    AnalyzeTrace {
        #[arg(
            long = "in",
            required_unless_present = "trace_dir",
            conflicts_with = "trace_dir"
        )]
        input: Option<PathBuf>,
        #[arg(long)]
        trace_dir: Option<PathBuf>,
        /// Omit to compare against every code for the trace bit width
        #[arg(long)]
        code: Option<CodeId>,
        /// Write the value pair-frequency matrix here
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Generate a synthetic attack trace
    Simulate {
        #[arg(long, value_parser = parse_bits)]
        bits: u32,
        #[arg(long)]
        changes: usize,
        #[arg(long)]
        msb_fraction: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Memory overhead of the codes
    Overhead {
        #[arg(long)]
        code: Option<CodeId>,
        #[arg(long, value_parser = parse_bits)]
        bits: Option<u32>,
    },
    /// Time decoding of random weights
    Bench {
        #[arg(long)]
        code: CodeId,
        #[arg(long, default_value_t = 1_000_000)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct BlobArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Defaults to the code named in the blob header
    #[arg(long)]
    code: Option<CodeId>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Csv,
}

fn parse_bits(s: &str) -> Result<u32, String> {
    match s {
        "4" => Ok(4),
        "8" => Ok(8),
        _ => Err(format!("bit width must be 4 or 8, got {s}")),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn render<T: Copy + std::fmt::Display>(m: &flipguard::ValueMatrix<T>, format: Format) -> String {
    match format {
        Format::Table => m.to_table(),
        Format::Csv => m.to_csv(),
    }
}

fn load_blob(args: &BlobArgs) -> Result<(EncodingMap, EncodedBlob)> {
    let bytes =
        fs::read(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let blob = EncodedBlob::from_bytes(&bytes)?;
    let id = args.code.unwrap_or(blob.header().code_id);
    Ok((EncodingMap::canonical(id), blob))
}

fn report_json(report: &VerifyReport) -> String {
    serde_json::to_string(report).expect("report serializes") + "\n"
}

fn corrupted(report: &VerifyReport) -> Result<ExitCode> {
    print!("{}", report_json(report));
    eprintln!(
        "corruption detected in {} of {} weights",
        report.corrupted_indices.len(),
        report.scanned
    );
    Ok(ExitCode::from(EXIT_CORRUPTED))
}

fn run(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Codebook { code, out } => {
            emit(
                out.as_deref(),
                &EncodingMap::canonical(code).codebook_text(),
            )?;
        }
        Command::Distances {
            code,
            bits,
            format,
            out,
        } => {
            let matrix = match code {
                Some(id) => {
                    if bits.is_some_and(|b| b != id.bits()) {
                        bail!("{id} stores {}-bit weights", id.bits());
                    }
                    EncodingMap::canonical(id).distance_matrix()
                }
                None => quant::flip_count_matrix(bits.expect("enforced by clap"))?,
            };
            emit(out.as_deref(), &render(&matrix, format))?;
        }
        Command::Encode {
            code,
            input,
            out,
            layer,
        } => {
            let text = fs::read_to_string(&input)
                .with_context(|| format!("reading {}", input.display()))?;
            let values = text
                .split_whitespace()
                .enumerate()
                .map(|(i, tok)| {
                    tok.parse::<i64>()
                        .with_context(|| format!("token {} ({tok:?}) is not an integer", i + 1))
                })
                .collect::<Result<Vec<_>>>()?;
            let blob = protect::encode_tensor(&EncodingMap::canonical(code), &values, &layer)?;
            fs::write(&out, blob.to_bytes())
                .with_context(|| format!("writing {}", out.display()))?;
            eprintln!(
                "encoded {} weights with {code} into {} payload bytes",
                values.len(),
                blob.payload().len()
            );
        }
        Command::Decode { blob, out } => {
            let (map, blob) = load_blob(&blob)?;
            match protect::decode_tensor(&map, &blob)? {
                DecodeOutcome::Values(values) => {
                    let text: String = values.iter().map(|v| format!("{v}\n")).collect();
                    emit(out.as_deref(), &text)?;
                }
                DecodeOutcome::Corrupted(report) => return corrupted(&report),
            }
        }
        Command::Verify { blob } => {
            let (map, blob) = load_blob(&blob)?;
            let report = protect::verify_blob(&map, &blob)?;
            if !report.clean {
                return corrupted(&report);
            }
            print!("{}", report_json(&report));
            eprintln!("clean: {} weights scanned", report.scanned);
        }
        Command::AnalyzeTrace {
            input,
            trace_dir,
            code,
            out,
            format,
        } => {
            let traces = match (input, trace_dir) {
                (Some(p), _) => {
                    let text = fs::read_to_string(&p)
                        .with_context(|| format!("reading {}", p.display()))?;
                    vec![attack::parse_trace(&text)?]
                }
                (None, Some(dir)) => attack::load_trace_dir(&dir)?,
                (None, None) => unreachable!("enforced by clap"),
            };
            let Some(first) = traces.first() else {
                bail!("no traces found");
            };
            let bits = first.meta.b;
            let codes: Vec<CodeId> = match code {
                Some(id) => vec![id],
                None => CodeId::ALL
                    .into_iter()
                    .filter(|c| c.bits() == bits)
                    .collect(),
            };
            let summary = analyze(&traces, bits, &codes)?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
            if let Some(path) = out {
                let pairs = attack::pair_frequency(bits, &traces)?;
                emit(Some(&path), &render(&pairs, format))?;
            }
        }
        Command::Simulate {
            bits,
            changes,
            msb_fraction,
            seed,
            out,
        } => {
            let mut params = SynthParams::defaults(bits, changes, seed)?;
            if let Some(f) = msb_fraction {
                params.msb_fraction = f;
            }
            let trace = attack::synthesize_trace(&params)?;
            emit(out.as_deref(), &trace.to_json())?;
        }
        Command::Overhead { code, bits } => {
            let codes: Vec<CodeId> = match code {
                Some(id) => vec![id],
                None => CodeId::ALL
                    .into_iter()
                    .filter(|c| bits.is_none_or(|b| b == c.bits()))
                    .collect(),
            };
            for id in codes {
                let report = protect::overhead_report(id, bits.unwrap_or(id.bits()))?;
                println!("{}", report.to_json());
            }
        }
        Command::Bench { code, count, seed } => {
            let map = EncodingMap::canonical(code);
            let (lo, hi) = quant::value_range(map.bits());
            let mut rng = StdRng::seed_from_u64(seed);
            let values: Vec<i64> = (0..count).map(|_| rng.gen_range(lo..=hi)).collect();
            let blob = protect::encode_tensor(&map, &values, "bench")?;
            let (outcome, elapsed) = protect::decode_tensor_timed(&map, &blob);
            if !matches!(outcome?, DecodeOutcome::Values(_)) {
                bail!("freshly encoded blob failed to decode");
            }
            let secs = elapsed.as_secs_f64();
            println!(
                "{code}: decoded {count} weights in {:.3} ms ({:.1} Mweights/s)",
                secs * 1e3,
                count as f64 / secs.max(1e-12) / 1e6
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn analyze(
    traces: &[flipguard::AttackTrace],
    bits: u32,
    codes: &[CodeId],
) -> Result<serde_json::Value> {
    let base = attack::trace_stats(traces, Representation::TwosComplement { bits })?;
    let mut encoded = Vec::new();
    for &id in codes {
        let map = EncodingMap::canonical(id);
        let stats = attack::trace_stats(traces, Representation::Encoded(&map))?;
        let mut entry = stats.to_json();
        entry["code"] = id.as_str().into();
        entry["ratio"] = if base.avg_f64() > 0.0 {
            (stats.avg_f64() / base.avg_f64()).into()
        } else {
            serde_json::Value::Null
        };
        entry["estimated_attack_seconds_avg"] =
            (stats.avg_f64() / attack::FLIP_RATE_BITS_PER_SECOND).into();
        encoded.push(entry);
    }
    let mut base_json = base.to_json();
    base_json["estimated_attack_seconds_avg"] =
        (base.avg_f64() / attack::FLIP_RATE_BITS_PER_SECOND).into();
    Ok(serde_json::json!({
        "b": bits,
        "traces": traces.len(),
        "twos_complement": base_json,
        "encoded": encoded,
    }))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<flipguard::Error>() {
                Some(flipguard::Error::CorruptBlob(_)) => ExitCode::from(EXIT_CORRUPTED),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
