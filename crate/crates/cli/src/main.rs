//! `nlos` — command-line front end: scenario simulation, coverage and
//! trilateration calculators, and the password-authenticated key agreement.
//!
//! Exit codes: 0 success, 1 configuration/usage error, 2 runtime protocol
//! violation during simulation (e.g. a search-miss), 3 key-agreement
//! authentication mismatch.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;

use nlos_core::key_agreement::{
    key_fingerprint, run_handshake_with_digests, derive_digest, PasswordDigest, PublicParams,
};
use nlos_core::positioning::{trilaterate, Point2D, UltrasonicReceiver};
use nlos_core::sim::{load_config, load_script, run, trace_to_jsonl};

const EXIT_CONFIG: u8 = 1;
const EXIT_PROTOCOL_VIOLATION: u8 = 2;
const EXIT_KEY_MISMATCH: u8 = 3;

#[derive(Parser)]
#[command(
    name = "nlos",
    version,
    about = "Simulator and calculators for a tracked, cell-based indoor optical wireless link"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and emit its event trace as JSON lines.
    Simulate(SimulateArgs),
    /// Gaussian-beam cell coverage calculators.
    Coverage(CoverageArgs),
    /// Solve a position from three anchors and three distances.
    Trilaterate(TrilaterateArgs),
    /// Run the password-authenticated key agreement once.
    Keyagree(KeyagreeArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Number of ticks to simulate.
    #[arg(long)]
    ticks: u64,
    /// Override the seed from the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Scripted data requests (JSON array of {tick, src, dst}).
    #[arg(long)]
    script: Option<PathBuf>,
    /// Write the trace here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CoverageArgs {
    /// Compute the launch power needed to reach sensitivity --ir at cell
    /// radius --r with beam radius --w.
    #[arg(long, conflicts_with = "radius")]
    power: bool,
    /// Compute the maximum cell radius achievable with launch power --p at
    /// sensitivity --ir (beam radius chosen optimally).
    #[arg(long)]
    radius: bool,
    /// Receiver sensitivity I_r, W/m².
    #[arg(long)]
    ir: f64,
    /// Beam radius W at the floor plane, meters (with --power).
    #[arg(long)]
    w: Option<f64>,
    /// Cell radius r, meters (with --power).
    #[arg(long)]
    r: Option<f64>,
    /// Launch power P, watts (with --radius).
    #[arg(long)]
    p: Option<f64>,
}

#[derive(Args)]
struct TrilaterateArgs {
    /// Anchor position as "x,y"; give exactly three.
    #[arg(long = "anchor", value_parser = parse_pair)]
    anchors: Vec<(f64, f64)>,
    /// Distance to the matching anchor; give exactly three.
    #[arg(long = "distance")]
    distances: Vec<f64>,
}

#[derive(Args)]
struct KeyagreeArgs {
    /// Prime modulus (decimal, or 0x-prefixed hex).
    #[arg(long, value_parser = parse_biguint)]
    n: BigUint,
    /// Generator.
    #[arg(long, value_parser = parse_biguint)]
    g: BigUint,
    /// Initiator's password.
    #[arg(long)]
    password_a: String,
    /// Responder's password.
    #[arg(long)]
    password_b: String,
    /// Initiator's secret exponent.
    #[arg(long, value_parser = parse_biguint)]
    a: BigUint,
    /// Responder's secret exponent.
    #[arg(long, value_parser = parse_biguint)]
    b: BigUint,
    /// Force the blinding exponent M to 1 (plain unauthenticated
    /// Diffie-Hellman, for reference comparisons).
    #[arg(long)]
    plain_dh: bool,
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| format!("expected \"x,y\", got \"{s}\""))?;
    let parse = |v: &str| {
        v.trim()
            .parse::<f64>()
            .map_err(|e| format!("bad coordinate \"{v}\": {e}"))
    };
    Ok((parse(x)?, parse(y)?))
}

fn parse_biguint(s: &str) -> Result<BigUint, String> {
    let t = s.trim();
    let parsed = if let Some(hexpart) = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        BigUint::parse_bytes(hexpart.as_bytes(), 16)
    } else {
        BigUint::parse_bytes(t.as_bytes(), 10)
    };
    parsed.ok_or_else(|| format!("not a valid unsigned integer: \"{s}\""))
}

/// Formats with exactly `digits` significant decimal digits, in plain
/// positional notation for the magnitudes the calculators produce.
fn format_significant(x: f64, digits: usize) -> String {
    assert!(digits >= 1);
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return if digits == 1 {
            "0".to_string()
        } else {
            format!("0.{}", "0".repeat(digits - 1))
        };
    }
    let sci = format!("{:.*e}", digits - 1, x.abs());
    let (mantissa, exp_str) = sci.split_once('e').expect("scientific form has an exponent");
    let exp: i64 = exp_str.parse().expect("exponent parses");
    let digits_only: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    debug_assert_eq!(digits_only.len(), digits);
    let sign = if x < 0.0 { "-" } else { "" };
    let body = if exp >= digits as i64 {
        format!("{digits_only}{}", "0".repeat((exp + 1) as usize - digits))
    } else if exp >= 0 {
        let split = (exp + 1) as usize;
        if split == digits {
            digits_only
        } else {
            format!("{}.{}", &digits_only[..split], &digits_only[split..])
        }
    } else {
        format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits_only)
    };
    format!("{sign}{body}")
}

fn cmd_simulate(args: &SimulateArgs) -> ExitCode {
    let text = match fs::read_to_string(&args.config) {
        Ok(text) => text,
        Err(err) => {
            eprintln!("error: cannot read config {}: {err}", args.config.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let mut scenario = match load_config(&text) {
        Ok(s) => s,
        Err(err) => {
            eprintln!("error: {err}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if let Some(seed) = args.seed {
        scenario.room.rng_seed = seed;
    }
    let script = match &args.script {
        None => Vec::new(),
        Some(path) => match fs::read_to_string(path).map_err(|e| e.to_string()).and_then(
            |text| load_script(&text).map_err(|e| e.to_string()),
        ) {
            Ok(script) => script,
            Err(err) => {
                eprintln!("error: cannot load script {}: {err}", path.display());
                return ExitCode::from(EXIT_CONFIG);
            }
        },
    };
    let outcome = match run(
        scenario.room,
        scenario.nodes,
        args.ticks,
        &script,
        &scenario.config_hash,
    ) {
        Ok(outcome) => outcome,
        Err(err) => {
            eprintln!("error: {err}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let text = trace_to_jsonl(&outcome.trace);
    match &args.out {
        Some(path) => {
            if let Err(err) = fs::write(path, &text) {
                eprintln!("error: cannot write trace {}: {err}", path.display());
                return ExitCode::from(EXIT_CONFIG);
            }
        }
        None => print!("{text}"),
    }
    if outcome.protocol_violation {
        eprintln!("protocol violation encountered; see the trace for the failing event");
        return ExitCode::from(EXIT_PROTOCOL_VIOLATION);
    }
    ExitCode::SUCCESS
}

fn cmd_coverage(args: &CoverageArgs) -> ExitCode {
    if args.power == args.radius {
        eprintln!("error: choose exactly one of --power or --radius");
        return ExitCode::from(EXIT_CONFIG);
    }
    let result = if args.power {
        match (args.w, args.r) {
            (Some(w), Some(r)) => nlos_core::coverage::required_launch_power(args.ir, w, r),
            _ => {
                eprintln!("error: --power needs --ir, --w and --r");
                return ExitCode::from(EXIT_CONFIG);
            }
        }
    } else {
        match args.p {
            Some(p) => nlos_core::coverage::max_cell_radius(p, args.ir),
            None => {
                eprintln!("error: --radius needs --p and --ir");
                return ExitCode::from(EXIT_CONFIG);
            }
        }
    };
    match result {
        Ok(value) => {
            println!("{}", format_significant(value, 10));
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

fn cmd_trilaterate(args: &TrilaterateArgs) -> ExitCode {
    if args.anchors.len() != 3 || args.distances.len() != 3 {
        eprintln!(
            "error: exactly three --anchor and three --distance values are required \
             (got {} and {})",
            args.anchors.len(),
            args.distances.len()
        );
        return ExitCode::from(EXIT_CONFIG);
    }
    let receivers = [
        UltrasonicReceiver::new("a1", Point2D::new(args.anchors[0].0, args.anchors[0].1)),
        UltrasonicReceiver::new("a2", Point2D::new(args.anchors[1].0, args.anchors[1].1)),
        UltrasonicReceiver::new("a3", Point2D::new(args.anchors[2].0, args.anchors[2].1)),
    ];
    let distances = [args.distances[0], args.distances[1], args.distances[2]];
    match trilaterate(&receivers, &distances) {
        Ok(point) => {
            println!(
                "({}, {})",
                format_significant(point.x, 10),
                format_significant(point.y, 10)
            );
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

fn cmd_keyagree(args: &KeyagreeArgs) -> ExitCode {
    let params = match PublicParams::new(args.n.clone(), args.g.clone()) {
        Ok(p) => p,
        Err(err) => {
            eprintln!("error: {err}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let digests = if args.plain_dh {
        Ok((PasswordDigest::plain(), PasswordDigest::plain()))
    } else {
        derive_digest(args.password_a.as_bytes(), &params).and_then(|da| {
            derive_digest(args.password_b.as_bytes(), &params).map(|db| (da, db))
        })
    };
    let (digest_a, digest_b) = match digests {
        Ok(pair) => pair,
        Err(err) => {
            eprintln!("error: {err}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let outcome = match run_handshake_with_digests(digest_a, digest_b, &params, &args.a, &args.b)
    {
        Ok(outcome) => outcome,
        Err(err) => {
            eprintln!("error: {err}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    // Demo-scale groups print the actual values; production-scale groups
    // print fingerprints only.
    let demo_scale = args.n.bits() <= 64;
    if demo_scale {
        println!("K1 = {}", outcome.transcript[0]);
        println!("K2 = {}", outcome.transcript[1]);
        println!("key (initiator) = {}", outcome.key_initiator);
        println!("key (responder) = {}", outcome.key_responder);
    } else {
        println!("K1 fingerprint = {}", key_fingerprint(&outcome.transcript[0]));
        println!("K2 fingerprint = {}", key_fingerprint(&outcome.transcript[1]));
    }
    println!(
        "key fingerprint (initiator) = {}",
        key_fingerprint(&outcome.key_initiator)
    );
    println!(
        "key fingerprint (responder) = {}",
        key_fingerprint(&outcome.key_responder)
    );
    if outcome.keys_match {
        println!("keys match");
        ExitCode::SUCCESS
    } else {
        println!("keys differ: authentication failed");
        ExitCode::from(EXIT_KEY_MISMATCH)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // --help/--version land here too; they are not errors.
            let code = if err.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match &cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Coverage(args) => cmd_coverage(args),
        Command::Trilaterate(args) => cmd_trilaterate(args),
        Command::Keyagree(args) => cmd_keyagree(args),
    }
}
