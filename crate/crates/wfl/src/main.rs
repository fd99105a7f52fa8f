//! Command-line front end: generate frames, certify woven-ness, run the
//! identity verification suite, and emit machine-readable reports.
//!
//! Exit codes: 0 success (verify: all records pass), 1 verification failure
//! (woven-check: not woven; verify/sweep: some record failed), 2 bad
//! configuration, I/O trouble, or unmet preconditions.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use wfl::error::Error;
use wfl::generators::{self, GenKind, GenSpec, Generated};
use wfl::io as fio;
use wfl::report::{report_to_json_string, run_verify, sweep_to_csv, SigmaMode, VerifyConfig};
use wfl::weaving::{woven_bounds_bruteforce, DEFAULT_MAX_N};
use wfl::FrameFamily;

#[derive(Parser)]
#[command(name = "wfl", version, about = "Weaving frames lab: build, weave, certify, verify")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a frame (or a certified woven pair) and write it as JSON.
    Gen(GenArgs),
    /// Summarize a frame JSON file: dimensions, bounds, tightness.
    Inspect { path: PathBuf },
    /// Certify woven-ness of two frame files by exhaustive enumeration.
    WovenCheck {
        a: PathBuf,
        b: PathBuf,
        /// Cap on family size for the 2^n partition sweep.
        #[arg(long, default_value_t = DEFAULT_MAX_N)]
        max_n: usize,
    },
    /// Certify a pair, then verify every identity and bound over partitions,
    /// the lambda grid, and seeded random test vectors.
    Verify(VerifyArgs),
    /// Same sweep as verify, reported as a per-lambda slack/residual CSV
    /// (includes the operator-lemma rows).
    SweepLambda {
        #[command(flatten)]
        verify: VerifyArgs,
        /// CSV destination (stdout when omitted).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CliKind {
    Onb,
    Random,
    Dft,
    Mercedes,
    WovenPair,
}

impl From<CliKind> for GenKind {
    fn from(k: CliKind) -> GenKind {
        match k {
            CliKind::Onb => GenKind::Onb,
            CliKind::Random => GenKind::Random,
            CliKind::Dft => GenKind::Dft,
            CliKind::Mercedes => GenKind::Mercedes,
            CliKind::WovenPair => GenKind::WovenPair,
        }
    }
}

#[derive(Args)]
struct GenArgs {
    /// Construction to run (alternative: --spec file).
    #[arg(long, value_enum)]
    kind: Option<CliKind>,
    #[arg(long, default_value_t = 0)]
    dim: usize,
    #[arg(long, default_value_t = 0)]
    count: usize,
    #[arg(long, env = "WFL_SEED", default_value_t = 0)]
    seed: u64,
    /// Perturbation radius for woven-pair generation.
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    /// Generator spec as JSON (overrides the individual flags).
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Output path.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    /// Frame JSON for the first family.
    #[arg(long)]
    phi: Option<PathBuf>,
    /// Frame JSON for the second family.
    #[arg(long)]
    psi: Option<PathBuf>,
    /// Woven-pair JSON produced by `gen --kind woven-pair`.
    #[arg(long, conflicts_with_all = ["phi", "psi"])]
    pair: Option<PathBuf>,
    /// Generate the pair instead of loading it (single-frame kinds weave the
    /// frame with itself).
    #[arg(long, value_enum, conflicts_with_all = ["phi", "psi", "pair"])]
    kind: Option<CliKind>,
    #[arg(long, default_value_t = 0)]
    dim: usize,
    #[arg(long, default_value_t = 0)]
    count: usize,
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    /// Random unit test vectors per (partition, lambda) cell.
    #[arg(long, default_value_t = 20)]
    trials: usize,
    /// Comma-separated lambda grid, e.g. "-1,0,0.5,1,2,3".
    #[arg(long, allow_hyphen_values = true)]
    lambdas: Option<String>,
    /// "all" or "random:K".
    #[arg(long, default_value = "all")]
    sigma_mode: String,
    #[arg(long, default_value_t = DEFAULT_MAX_N)]
    max_n: usize,
    /// Relative tolerance on equality residuals.
    #[arg(long, default_value_t = 1e-9)]
    tol_eq: f64,
    /// Relative tolerance on inequality slacks.
    #[arg(long, default_value_t = 1e-9)]
    tol_ineq: f64,
    #[arg(long, env = "WFL_SEED", default_value_t = 0)]
    seed: u64,
    /// Write the full JSON report here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Negative control: corrupt one dual vector so dual records must fail.
    #[arg(long, hide = true)]
    debug_corrupt_dual: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Inspect { path } => cmd_inspect(&path),
        Command::WovenCheck { a, b, max_n } => cmd_woven_check(&a, &b, max_n),
        Command::Verify(args) => cmd_verify(args, None),
        Command::SweepLambda { verify, output } => cmd_verify(verify, Some(output)),
    };
    ExitCode::from(code)
}

fn fail(e: &Error) -> u8 {
    eprintln!("error: {e}");
    2
}

fn cmd_gen(args: GenArgs) -> u8 {
    let spec = match &args.spec {
        Some(path) => match fio::read_genspec(path) {
            Ok(spec) => spec,
            Err(e) => return fail(&e),
        },
        None => {
            let Some(kind) = args.kind else {
                return fail(&Error::Config("either --kind or --spec is required".into()));
            };
            GenSpec {
                kind: kind.into(),
                dim: args.dim,
                count: args.count,
                seed: args.seed,
                epsilon: args.epsilon,
            }
        }
    };
    let generated = match generators::generate(&spec) {
        Ok(g) => g,
        Err(e) => return fail(&e),
    };
    let result = match &generated {
        Generated::Single(frame) => fio::write_frame(&args.output, frame),
        Generated::Pair { phi, psi, certificate } => {
            fio::write_pair(&args.output, phi, psi, certificate)
        }
    };
    match result {
        Ok(()) => {
            println!("wrote {}", args.output.display());
            0
        }
        Err(e) => fail(&e),
    }
}

fn cmd_inspect(path: &Path) -> u8 {
    let frame = match fio::read_frame(path) {
        Ok(f) => f,
        Err(e) => return fail(&e),
    };
    let summary = match frame.frame_bounds() {
        Ok(b) => serde_json::json!({
            "dim": frame.dim(),
            "count": frame.len(),
            "frame": true,
            "bounds": { "lower": b.lower, "upper": b.upper },
            "tight": b.is_tight(1e-10),
            "parseval": b.is_tight(1e-10) && (b.upper - 1.0).abs() <= 1e-10,
        }),
        Err(_) => serde_json::json!({
            "dim": frame.dim(),
            "count": frame.len(),
            "frame": false,
            "bounds": serde_json::Value::Null,
            "tight": false,
            "parseval": false,
        }),
    };
    println!("{}", serde_json::to_string_pretty(&summary).expect("serializable"));
    0
}

fn cmd_woven_check(a: &Path, b: &Path, max_n: usize) -> u8 {
    let phi = match fio::read_frame(a) {
        Ok(f) => f,
        Err(e) => return fail(&e),
    };
    let psi = match fio::read_frame(b) {
        Ok(f) => f,
        Err(e) => return fail(&e),
    };
    match woven_bounds_bruteforce(&phi, &psi, max_n) {
        Ok(cert) => {
            println!("{}", serde_json::to_string_pretty(&cert).expect("serializable"));
            0
        }
        Err(e @ Error::NotWoven { .. }) => {
            eprintln!("{e}");
            1
        }
        Err(e) => fail(&e),
    }
}

fn load_pair(args: &VerifyArgs) -> Result<(FrameFamily, FrameFamily, String, String), Error> {
    if let Some(path) = &args.pair {
        let (phi, psi, _) = fio::read_pair(path)?;
        let label = path.display().to_string();
        return Ok((phi, psi, format!("{label}#phi"), format!("{label}#psi")));
    }
    if let (Some(a), Some(b)) = (&args.phi, &args.psi) {
        return Ok((
            fio::read_frame(a)?,
            fio::read_frame(b)?,
            a.display().to_string(),
            b.display().to_string(),
        ));
    }
    if let Some(kind) = args.kind {
        let spec = GenSpec {
            kind: kind.into(),
            dim: args.dim,
            count: args.count,
            seed: args.seed,
            epsilon: args.epsilon,
        };
        let label = format!(
            "gen:{:?} dim={} count={} seed={} epsilon={}",
            spec.kind, spec.dim, spec.count, spec.seed, spec.epsilon
        );
        return match generators::generate(&spec)? {
            Generated::Single(frame) => {
                Ok((frame.clone(), frame, format!("{label}#self"), format!("{label}#self")))
            }
            Generated::Pair { phi, psi, .. } => {
                Ok((phi, psi, format!("{label}#phi"), format!("{label}#psi")))
            }
        };
    }
    Err(Error::Config("provide --phi/--psi, --pair, or --kind".into()))
}

fn cmd_verify(args: VerifyArgs, sweep_output: Option<Option<PathBuf>>) -> u8 {
    let (phi, psi, phi_source, psi_source) = match load_pair(&args) {
        Ok(t) => t,
        Err(e) => return fail(&e),
    };
    let lambdas = match &args.lambdas {
        Some(s) => match fio::parse_lambda_list(s) {
            Ok(v) => v,
            Err(e) => return fail(&e),
        },
        None => wfl::identities::DEFAULT_LAMBDA_GRID.to_vec(),
    };
    let sigma_mode = match SigmaMode::parse(&args.sigma_mode) {
        Ok(m) => m,
        Err(e) => return fail(&e),
    };
    let cfg = VerifyConfig {
        phi_source,
        psi_source,
        trials: args.trials,
        lambdas,
        sigma_mode,
        eq_tol: args.tol_eq,
        ineq_tol: args.tol_ineq,
        seed: args.seed,
        max_n: args.max_n,
        include_lemmas: sweep_output.is_some(),
        corrupt_dual: args.debug_corrupt_dual,
    };
    let outcome = match run_verify(&phi, &psi, &cfg) {
        Ok(o) => o,
        Err(e) => return fail(&e),
    };
    let report = &outcome.report;

    if let Some(output) = sweep_output {
        let csv = sweep_to_csv(&outcome.sweep);
        if let Some(path) = output {
            if let Err(e) = std::fs::write(&path, &csv) {
                return fail(&e.into());
            }
            println!("wrote {}", path.display());
        } else {
            print!("{csv}");
        }
    } else {
        println!(
            "certificate: A = {}, B = {}, checked = {}{}",
            report.certificate.universal_lower,
            report.certificate.universal_upper,
            report.certificate.checked,
            if report.certificate_complete { "" } else { " (incomplete sample)" },
        );
        for (name, agg) in &report.theorems {
            println!(
                "{}: {} evaluations, max residual {:.3e}, min slack {}, {}",
                name,
                agg.count,
                agg.max_residual,
                agg.min_slack.map_or("n/a".to_string(), |s| format!("{s:.3e}")),
                if agg.failures.is_empty() {
                    "pass".to_string()
                } else {
                    format!("{} FAILURES", agg.failures.len())
                },
            );
        }
        println!("overall: {}", if report.overall_pass { "PASS" } else { "FAIL" });
    }

    if let Some(path) = &args.report {
        if let Err(e) = std::fs::write(path, report_to_json_string(report) + "\n") {
            return fail(&e.into());
        }
    }
    if report.overall_pass {
        0
    } else {
        1
    }
}
