//! Command line driver: encode/decode single strings, run benchmark
//! experiments, and check the library's quantitative guarantees.
//!
//! Exit code 0 means every asserted bound passed.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use num_rational::BigRational;

use nextbit_codec::harness::{
    check_light_bound, check_pseudodeterminism, emit_report, run_average_experiment,
    run_conditional_experiment, run_robustified_experiment, run_worst_case_enumeration,
    worst_case_q, Check, ExperimentConfig, PredictorChoice,
};
use nextbit_codec::source::parse_source_config;
use nextbit_codec::{codec, container, BitString, PredictorParams, SourceSpec};

#[derive(Parser)]
#[command(name = "nextbit", version, about = "Predictor-driven exact arithmetic codec")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a bit string under a source model.
    Encode(EncodeArgs),
    /// Decode a serialized container under a source model.
    Decode(DecodeArgs),
    /// Run an experiment and report aggregate statistics.
    Bench(BenchArgs),
    /// Check one of the library's properties; exits nonzero on failure.
    Check(CheckArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Source configuration file.
    #[arg(long)]
    source: PathBuf,
    /// Error parameter q.
    #[arg(long, default_value_t = 8)]
    q: u64,
    /// Root seed for all derived randomness.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Base predictor: `oracle` | `noisy:<trials|auto>` | `adversarial` |
    /// `faulty:<num>/<den>`.
    #[arg(long, default_value = "oracle")]
    predictor: String,
}

#[derive(Args)]
struct EncodeArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// First coded position (1 = whole string).
    #[arg(long, default_value_t = 1)]
    k: u32,
    /// The bit string to encode.
    #[arg(long)]
    input: String,
    /// Output file for the container bytes; hex to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DecodeArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Container file to decode.
    #[arg(long, name = "in")]
    input: Option<PathBuf>,
    /// Container bytes as hex (alternative to --in).
    #[arg(long)]
    hex: Option<String>,
    /// Conditioning prefix x[..k-1] for containers with k > 1.
    #[arg(long, default_value = "")]
    prefix: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Avg,
    Worst,
    Cond,
    Robust,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, value_enum)]
    mode: Mode,
    /// First coded position for conditional mode.
    #[arg(long, default_value_t = 1)]
    k: u32,
    #[arg(long, default_value_t = 200)]
    trials: u64,
    /// Multiplicative slack for worst-case mode, e.g. 1/4.
    #[arg(long, default_value = "1/4")]
    eps: String,
    /// Repetitions per support string in robust mode.
    #[arg(long, default_value_t = 50)]
    reps: u64,
    /// Write per-trial records plus a summary to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Property {
    Pseudodet,
    Light,
    Worstcase,
    Roundtrip,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, value_enum)]
    property: Property,
    #[arg(long, default_value_t = 2000)]
    trials: u64,
    /// Light threshold for the light property, e.g. 3/20.
    #[arg(long, default_value = "1/4")]
    delta: String,
    /// Multiplicative slack for the worst-case property.
    #[arg(long, default_value = "1/4")]
    eps: String,
}

fn parse_rational(text: &str) -> Result<BigRational, String> {
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text.trim(), "1"),
    };
    let num = num.parse().map_err(|_| format!("bad numerator in {text:?}"))?;
    let den: num_bigint::BigInt =
        den.parse().map_err(|_| format!("bad denominator in {text:?}"))?;
    if den == 0.into() {
        return Err("denominator is zero".into());
    }
    Ok(BigRational::new(num, den))
}

fn parse_predictor(text: &str) -> Result<PredictorChoice, String> {
    if text == "oracle" {
        return Ok(PredictorChoice::Oracle);
    }
    if text == "adversarial" {
        return Ok(PredictorChoice::Adversarial);
    }
    if let Some(rest) = text.strip_prefix("noisy:") {
        let trials = if rest == "auto" {
            None
        } else {
            Some(
                BigUint::from_str(rest)
                    .map_err(|_| format!("bad sample count {rest:?}"))?,
            )
        };
        return Ok(PredictorChoice::Noisy { trials });
    }
    if let Some(rest) = text.strip_prefix("faulty:") {
        let (num, den) = rest
            .split_once('/')
            .ok_or_else(|| "faulty wants <num>/<den>".to_string())?;
        return Ok(PredictorChoice::Faulty {
            num: num.parse().map_err(|_| "bad violation numerator")?,
            den: den.parse().map_err(|_| "bad violation denominator")?,
        });
    }
    Err(format!("unknown predictor {text:?}"))
}

fn load_source(path: &PathBuf) -> Result<SourceSpec, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("{}: {e}", path.display()))?;
    parse_source_config(&text).map_err(|e| e.to_string())
}

fn experiment_config(common: &CommonArgs, k: u32, trials: u64) -> Result<ExperimentConfig, String> {
    Ok(ExperimentConfig {
        source: load_source(&common.source)?,
        q: common.q,
        k,
        trials,
        root_seed: common.seed,
        predictor: parse_predictor(&common.predictor)?,
    })
}

fn print_checks(checks: &[Check]) -> bool {
    let mut all = true;
    for c in checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        println!("{tag} {}: {}", c.name, c.detail);
        all &= c.passed;
    }
    all
}

fn to_hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn from_hex(text: &str) -> Result<Vec<u8>, String> {
    let text = text.trim();
    if !text.len().is_multiple_of(2) {
        return Err("odd number of hex digits".into());
    }
    (0..text.len())
        .step_by(2)
        .map(|i| u8::from_str_radix(&text[i..i + 2], 16).map_err(|e| e.to_string()))
        .collect()
}

fn cmd_encode(args: &EncodeArgs) -> Result<bool, String> {
    let src = load_source(&args.common.source)?;
    let params = PredictorParams::new(src.n(), src.ell(), args.common.q)
        .map_err(|e| e.to_string())?;
    let base = parse_predictor(&args.common.predictor)?
        .build(&src, &params)
        .map_err(|e| e.to_string())?;
    let x: BitString = args.input.parse().map_err(|e: nextbit_codec::Error| e.to_string())?;
    let enc = codec::encode(base.as_ref(), &params, &x, args.k, args.common.seed)
        .map_err(|e| e.to_string())?;
    let bytes = container::serialize(&enc);
    eprintln!(
        "encoded {} bits into {} bits ({})",
        x.len() as u32 - (args.k - 1),
        bytes.len() * 8,
        if enc.is_fallback() { "fallback" } else { "arithmetic" },
    );
    match &args.out {
        Some(path) => std::fs::write(path, &bytes).map_err(|e| e.to_string())?,
        None => println!("{}", to_hex(&bytes)),
    }
    Ok(true)
}

fn cmd_decode(args: &DecodeArgs) -> Result<bool, String> {
    let src = load_source(&args.common.source)?;
    let params = PredictorParams::new(src.n(), src.ell(), args.common.q)
        .map_err(|e| e.to_string())?;
    let base = parse_predictor(&args.common.predictor)?
        .build(&src, &params)
        .map_err(|e| e.to_string())?;
    let bytes = match (&args.input, &args.hex) {
        (Some(path), None) => std::fs::read(path).map_err(|e| e.to_string())?,
        (None, Some(hex)) => from_hex(hex)?,
        _ => return Err("give exactly one of --in or --hex".into()),
    };
    let enc = container::deserialize(&bytes).map_err(|e| e.to_string())?;
    let prefix: BitString = args.prefix.parse().map_err(|e: nextbit_codec::Error| e.to_string())?;
    let decoded = codec::decode(base.as_ref(), &params, &enc, prefix.as_bits(), args.common.seed)
        .map_err(|e| e.to_string())?;
    println!("{decoded}");
    Ok(true)
}

fn cmd_bench(args: &BenchArgs) -> Result<bool, String> {
    match args.mode {
        Mode::Avg | Mode::Cond => {
            let cfg = experiment_config(&args.common, args.k, args.trials)?;
            let out = if matches!(args.mode, Mode::Avg) {
                run_average_experiment(&cfg)
            } else {
                run_conditional_experiment(&cfg)
            }
            .map_err(|e| e.to_string())?;
            println!(
                "trials={} mean_len_bits={:.3} success={} fallback={} no_light_frac={}",
                out.reports.len(),
                rational_f64(&out.mean_len_bits),
                out.success_rate,
                out.fallback_count,
                out.frac_no_light,
            );
            if let Some(path) = &args.out {
                emit_report(path, &out.reports, &out.summary_json())
                    .map_err(|e| e.to_string())?;
                eprintln!("report written to {}", path.display());
            }
            Ok(print_checks(&out.checks))
        }
        Mode::Worst => {
            let eps = parse_rational(&args.eps)?;
            let mut cfg = experiment_config(&args.common, 1, 1)?;
            cfg.q = worst_case_q(cfg.source.ell(), &eps).map_err(|e| e.to_string())?;
            eprintln!("worst-case mode: q = {}", cfg.q);
            let out = run_worst_case_enumeration(&cfg, &eps).map_err(|e| e.to_string())?;
            println!(
                "strings={} violations={} max_slack_bits={:.3}",
                out.strings,
                out.violations,
                rational_f64(&out.max_slack_bits)
            );
            Ok(print_checks(&out.checks))
        }
        Mode::Robust => {
            let cfg = experiment_config(&args.common, 1, 1)?;
            let out = run_robustified_experiment(&cfg, &Default::default(), args.reps)
                .map_err(|e| e.to_string())?;
            println!(
                "strings={} reps={} min_rate={} mean_len_bits={:.3}",
                out.strings,
                out.reps_per_string,
                out.min_rate,
                rational_f64(&out.mean_len_bits)
            );
            Ok(print_checks(&out.checks))
        }
    }
}

fn cmd_check(args: &CheckArgs) -> Result<bool, String> {
    match args.property {
        Property::Pseudodet => {
            let cfg = experiment_config(&args.common, 1, args.trials)?;
            let out = check_pseudodeterminism(&cfg).map_err(|e| e.to_string())?;
            println!(
                "trials={} joint_rate={} complement_rate={}",
                out.trials, out.joint_rate, out.complement_rate
            );
            Ok(print_checks(&out.checks))
        }
        Property::Light => {
            let src = load_source(&args.common.source)?;
            let delta = parse_rational(&args.delta)?;
            let out = check_light_bound(&src, &delta).map_err(|e| e.to_string())?;
            println!("light_prob={} bound={}", out.probability, out.bound);
            Ok(print_checks(&out.checks))
        }
        Property::Worstcase => {
            let eps = parse_rational(&args.eps)?;
            let mut cfg = experiment_config(&args.common, 1, 1)?;
            cfg.q = worst_case_q(cfg.source.ell(), &eps).map_err(|e| e.to_string())?;
            let out = run_worst_case_enumeration(&cfg, &eps).map_err(|e| e.to_string())?;
            Ok(print_checks(&out.checks))
        }
        Property::Roundtrip => {
            let src = load_source(&args.common.source)?;
            let params = PredictorParams::new(src.n(), src.ell(), args.common.q)
                .map_err(|e| e.to_string())?;
            let base = parse_predictor(&args.common.predictor)?
                .build(&src, &params)
                .map_err(|e| e.to_string())?;
            let support = src.support().map_err(|e| e.to_string())?;
            let ks = [1u32, src.ell() / 2, src.ell() + 1];
            let mut failures = 0u64;
            let mut total = 0u64;
            for (idx, x) in support.iter().enumerate() {
                for (ki, &k) in ks.iter().enumerate() {
                    let k = k.max(1);
                    total += 1;
                    let seed = args.common.seed ^ ((idx as u64) << 8) ^ ki as u64;
                    let ok = codec::encode(base.as_ref(), &params, x, k, seed)
                        .and_then(|enc| {
                            codec::decode(
                                base.as_ref(),
                                &params,
                                &enc,
                                x.prefix(k as usize - 1),
                                seed.wrapping_add(1),
                            )
                        })
                        .map(|d| d == x.suffix(k as usize))
                        .unwrap_or(false);
                    if !ok {
                        failures += 1;
                    }
                }
            }
            let passed = failures == 0;
            println!(
                "{} round-trip over {} (string, k) pairs, {} failures",
                if passed { "PASS" } else { "FAIL" },
                total,
                failures
            );
            Ok(passed)
        }
    }
}

fn rational_f64(r: &BigRational) -> f64 {
    num_traits_to_f64(r).unwrap_or(f64::NAN)
}

fn num_traits_to_f64(r: &BigRational) -> Option<f64> {
    use std::str::FromStr as _;
    // Good enough for display: quotient of the two parts as f64.
    let num = f64::from_str(&r.numer().to_string()).ok()?;
    let den = f64::from_str(&r.denom().to_string()).ok()?;
    Some(num / den)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Encode(args) => cmd_encode(args),
        Command::Decode(args) => cmd_decode(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Check(args) => cmd_check(args),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
