//! Command-line front end.
//!
//! ```text
//! opclass classify <file> [--k K...] [--p P...] [--tol T]
//! opclass decompose <normal-pure|root|nilpotent2> <file> [--n N] [--k K]
//! opclass generate <kind> [kind flags] --seed S -o <file>
//! opclass verify <theorem_id|all> [--trials N] [--max-dim D] [--seed S] -o <file>
//! opclass report <report.json>
//! ```
//!
//! Exit codes: 0 success, 1 error (or theorem failures), 2 inconclusive.
//! `OPCLASS_SEED` supplies the seed when `--seed` is absent. Matrix formats
//! are chosen by extension (`.mtx`/`.mm` for Matrix Market, otherwise JSON)
//! unless `--format` is given. Every file is written atomically.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::classes::{Classifier, DEFAULT_K_LIST, DEFAULT_P_LIST};
use crate::decomposition::{nilpotent2_canonical, normal_pure_split, root_decompose};
use crate::generators::{GenKind, GenSpec, KQuasiSpec, RrSpec};
use crate::harness::{run_suite, HarnessConfig, SuiteReport, TheoremReport};
use crate::io::{self, Format};
use crate::linalg::TolerancePolicy;
use crate::{Error, Result};

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_INCONCLUSIVE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "opclass", version, about = "Operator-class membership, decompositions and theorem suites")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide membership in every class and print the verdicts as JSON.
    Classify(ClassifyArgs),
    /// Split a matrix into reducing blocks and print the decomposition as JSON.
    Decompose(DecomposeArgs),
    /// Write a seeded instance plus a `<out>.sidecar.json` self-certification.
    Generate(GenerateArgs),
    /// Run theorem suites and write the report.
    Verify(VerifyArgs),
    /// Summarize a report written by `verify`.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Json,
    MatrixMarket,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => Format::Json,
            FormatArg::MatrixMarket => Format::MatrixMarket,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Override every tolerance with this value.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Matrix file format; inferred from the extension when absent.
    #[arg(long, value_enum, global = true)]
    pub format: Option<FormatArg>,
}

impl Common {
    fn tolerances(&self) -> Result<TolerancePolicy> {
        let tol = match self.tol {
            Some(t) => TolerancePolicy {
                tol_psd: t,
                tol_eq: t,
                tol_rank: t,
                tol_recon: t,
                tol_decision: t,
            },
            None => TolerancePolicy::default(),
        };
        tol.validate()?;
        Ok(tol)
    }

    fn format(&self) -> Option<Format> {
        self.format.map(Format::from)
    }
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    pub file: PathBuf,
    /// Values of k for the k-indexed classes.
    #[arg(long, num_args = 1..)]
    pub k: Vec<u32>,
    /// Exponents for the p-hyponormal class, in (0, 1].
    #[arg(long, num_args = 1..)]
    pub p: Vec<f64>,
    /// Seed for the sphere oracle's random restarts.
    #[arg(long, env = "OPCLASS_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Write the JSON here instead of standard output.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DecomposeMode {
    NormalPure,
    Root,
    Nilpotent2,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[arg(value_enum)]
    pub mode: DecomposeMode,
    pub file: PathBuf,
    /// Root order: `T^n` must be normal.
    #[arg(long, default_value_t = 2)]
    pub n: u32,
    /// `T` must be k-quasi-paranormal.
    #[arg(long, default_value_t = 1)]
    pub k: u32,
    #[arg(long, env = "OPCLASS_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Subcommand)]
pub enum GenKindArg {
    /// Haar-random unitary.
    Unitary {
        #[arg(long)]
        dim: usize,
    },
    /// Complex Ginibre matrix scaled by `1/sqrt(dim)`.
    Ginibre {
        #[arg(long)]
        dim: usize,
    },
    /// Normal matrix with random or given eigenvalues (`re,im` pairs).
    Normal {
        #[arg(long)]
        dim: usize,
        #[arg(long, num_args = 1.., value_parser = parse_pair)]
        eigenvalues: Option<Vec<[f64; 2]>>,
    },
    /// Nilpotent with the given nil-index, conjugated by a random unitary.
    Jordan {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        index: usize,
    },
    /// Normaloid, non-normal matrix with normal square.
    Counterexample {
        #[arg(long, default_value_t = 2)]
        dim_m: usize,
        #[arg(long, default_value_t = 2)]
        dim_n: usize,
    },
    /// Normal matrix with `T^n = lambda I`.
    ScalarRoot {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        n: u32,
        #[arg(long, value_parser = parse_pair, default_value = "1,0")]
        lambda: [f64; 2],
    },
    /// Normal ⊕ nilpotent of index at most `k+1`.
    KQuasi {
        #[arg(long)]
        dim_normal: usize,
        #[arg(long)]
        dim_nil: usize,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        max_index: Option<usize>,
        #[arg(long)]
        nil_scale: Option<f64>,
    },
    /// Square root of a normal matrix in Radjavi-Rosenthal block form.
    Rr {
        #[arg(long, default_value_t = RrSpec::default().dim_a)]
        dim_a: usize,
        #[arg(long, default_value_t = RrSpec::default().dim_b)]
        dim_b: usize,
        #[arg(long)]
        zero_b: bool,
    },
    /// Any kind, given as a GenSpec JSON file.
    Spec { file: PathBuf },
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(subcommand)]
    pub kind: GenKindArg,
    #[arg(long, env = "OPCLASS_SEED", global = true)]
    pub seed: Option<u64>,
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Suite id, or `all`.
    pub theorem_id: Vec<String>,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[arg(long, default_value_t = 2)]
    pub min_dim: usize,
    #[arg(long, default_value_t = 8)]
    pub max_dim: usize,
    #[arg(long, env = "OPCLASS_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Zero the wall-clock fields so equal seeds give identical files.
    #[arg(long)]
    pub canonical: bool,
    /// Print the available suite ids and exit.
    #[arg(long)]
    pub list: bool,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    pub file: PathBuf,
}

fn parse_pair(s: &str) -> std::result::Result<[f64; 2], String> {
    let (re, im) = s.split_once(',').unwrap_or((s, "0"));
    let parse = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    Ok([parse(re)?, parse(im)?])
}

fn read_input(path: &Path, format: Option<Format>) -> Result<crate::ComplexMatrix> {
    io::read_matrix(path, format).map_err(|e| match e {
        Error::Io(err) => Error::Io(std::io::Error::new(err.kind(), format!("{}: {err}", path.display()))),
        other => other,
    })
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(p) => io::write_atomic(p, text),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values serialize")
}

/// The JSON document printed by `classify`, also embedded in sidecars.
pub fn classification_json(t: &crate::ComplexMatrix, clf: &Classifier, k: &[u32], p: &[f64]) -> (Value, bool, bool) {
    let cl = clf.classify_all(t, k, p);
    let doc = json!({
        "dim": t.dim(),
        "seed": clf.seed(),
        "k": k,
        "p": p,
        "tolerances": clf.tol,
        "verdicts": cl.records(),
        "chain_violations": cl.chain_violations,
    });
    (doc, cl.any_error(), cl.any_inconclusive())
}

fn classifier(seed: u64, tol: TolerancePolicy) -> Classifier {
    let mut clf = Classifier::with_seed(seed);
    clf.tol = tol;
    clf
}

pub fn cmd_classify(args: &ClassifyArgs) -> Result<u8> {
    let tol = args.common.tolerances()?;
    let k = if args.k.is_empty() { DEFAULT_K_LIST.to_vec() } else { args.k.clone() };
    let p = if args.p.is_empty() { DEFAULT_P_LIST.to_vec() } else { args.p.clone() };
    for &pi in &p {
        crate::OperatorClass::PHyponormal(pi).validate()?;
    }
    let t = read_input(&args.file, args.common.format())?;
    let (doc, error, inconclusive) = classification_json(&t, &classifier(args.seed, tol), &k, &p);
    emit(args.output.as_deref(), &pretty(&doc))?;
    Ok(if error {
        EXIT_ERROR
    } else if inconclusive {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_OK
    })
}

pub fn cmd_decompose(args: &DecomposeArgs) -> Result<u8> {
    let tol = args.common.tolerances()?;
    let t = read_input(&args.file, args.common.format())?;
    let d = match args.mode {
        DecomposeMode::NormalPure => normal_pure_split(&t, &tol),
        DecomposeMode::Root => root_decompose(&t, args.n, args.k, &classifier(args.seed, tol))?,
        DecomposeMode::Nilpotent2 => nilpotent2_canonical(&t, &tol)?,
    };
    emit(args.output.as_deref(), &serde_json::to_string_pretty(&d)?)?;
    Ok(EXIT_OK)
}

fn gen_spec(kind: &GenKindArg, seed: u64) -> Result<GenSpec> {
    let kind = match kind {
        GenKindArg::Unitary { dim } => GenKind::Unitary { dim: *dim },
        GenKindArg::Ginibre { dim } => GenKind::Ginibre { dim: *dim },
        GenKindArg::Normal { dim, eigenvalues } => GenKind::Normal {
            dim: *dim,
            eigenvalues: eigenvalues.clone(),
        },
        GenKindArg::Jordan { dim, index } => GenKind::Jordan { dim: *dim, index: *index },
        GenKindArg::Counterexample { dim_m, dim_n } => GenKind::Counterexample {
            dim_m: *dim_m,
            dim_n: *dim_n,
        },
        GenKindArg::ScalarRoot { dim, n, lambda } => GenKind::ScalarRoot {
            dim: *dim,
            n: *n,
            lambda: *lambda,
        },
        GenKindArg::KQuasi {
            dim_normal,
            dim_nil,
            k,
            max_index,
            nil_scale,
        } => GenKind::KQuasi(KQuasiSpec {
            max_index: *max_index,
            nil_scale: *nil_scale,
            ..KQuasiSpec::new(*dim_normal, *dim_nil, *k)
        }),
        GenKindArg::Rr { dim_a, dim_b, zero_b } => GenKind::Rr(RrSpec {
            dim_a: *dim_a,
            dim_b: *dim_b,
            zero_b: *zero_b,
        }),
        GenKindArg::Spec { file } => {
            let mut spec = GenSpec::from_json(&std::fs::read_to_string(file)?)?;
            spec.seed = seed;
            return Ok(spec);
        }
    };
    Ok(GenSpec { kind, seed })
}

/// `<out>.sidecar.json`
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".sidecar.json");
    PathBuf::from(s)
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<u8> {
    let seed = args
        .seed
        .ok_or_else(|| Error::InvalidSpec("--seed (or OPCLASS_SEED) is required".into()))?;
    let out = args
        .output
        .as_deref()
        .ok_or_else(|| Error::InvalidSpec("-o <file> is required".into()))?;
    let tol = args.common.tolerances()?;
    let spec = gen_spec(&args.kind, seed)?;
    let t = spec.generate()?;
    let clf = classifier(seed, tol);
    let certs = spec.certify(&t, &clf)?;
    let confirmed = certs.iter().all(|c| c.confirmed);
    let (classification, _, _) = classification_json(&t, &clf, &DEFAULT_K_LIST, &DEFAULT_P_LIST);
    let format = args.common.format().unwrap_or_else(|| Format::from_path(out));
    let sidecar = json!({
        "spec": spec,
        "format": match format { Format::Json => "json", Format::MatrixMarket => "matrix-market" },
        "certifications": certs,
        "all_confirmed": confirmed,
        "classification": classification,
    });
    io::write_matrix(out, &t, Some(format))?;
    io::write_atomic(&sidecar_path(out), &pretty(&sidecar))?;
    if !confirmed {
        eprintln!("opclass: some advertised properties were not confirmed, see the sidecar");
        return Ok(EXIT_INCONCLUSIVE);
    }
    Ok(EXIT_OK)
}

fn summary_line(r: &TheoremReport) -> String {
    format!(
        "{:<24} {:>5} trials {:>5} pass {:>5} skip {:>4} fail {:>7} ms{}",
        r.theorem_id,
        r.trials,
        r.passes,
        r.skips,
        r.failures.len(),
        r.wall_time_ms,
        if r.skip_budget_exceeded { "  (skip budget exceeded)" } else { "" }
    )
}

fn suite_exit(report: &SuiteReport) -> u8 {
    if report.total_failures > 0 {
        EXIT_ERROR
    } else if !report.ok() {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_OK
    }
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<u8> {
    if args.list {
        for id in crate::harness::suite_ids() {
            println!("{id}");
        }
        return Ok(EXIT_OK);
    }
    if args.theorem_id.is_empty() {
        return Err(Error::InvalidSpec("a theorem id or `all` is required".into()));
    }
    let cfg = HarnessConfig {
        trials: args.trials,
        min_dim: args.min_dim,
        max_dim: args.max_dim,
        seed: args.seed,
        tol: args.common.tolerances()?,
        ..HarnessConfig::default()
    };
    let reports = run_suite(&args.theorem_id, &cfg)?;
    let mut report = SuiteReport::new(cfg, reports);
    if args.canonical {
        report = report.canonical();
    }
    for r in &report.reports {
        eprintln!("{}", summary_line(r));
    }
    emit(args.output.as_deref(), &report.to_json())?;
    Ok(suite_exit(&report))
}

pub fn cmd_report(args: &ReportArgs) -> Result<u8> {
    let text = std::fs::read_to_string(&args.file)?;
    let report: SuiteReport = match serde_json::from_str(&text) {
        Ok(r) => r,
        Err(_) => {
            let single: TheoremReport = serde_json::from_str(&text)?;
            SuiteReport::new(HarnessConfig::default(), vec![single])
        }
    };
    println!(
        "seed {}  trials {}  dims {}..={}",
        report.config.seed, report.config.trials, report.config.min_dim, report.config.max_dim
    );
    for r in &report.reports {
        println!("{}", summary_line(r));
        for f in &r.failures {
            let reason = f.reason.as_deref().unwrap_or("");
            println!("    trial {} seed {}: {} {}", f.trial, f.seed, f.instance_ref, reason);
        }
        for o in &r.observations {
            println!("    observed {} (trial {})", o.kind, o.trial);
        }
    }
    println!("total failures {}", report.total_failures);
    Ok(suite_exit(&report))
}

pub fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Classify(a) => cmd_classify(a),
        Command::Decompose(a) => cmd_decompose(a),
        Command::Generate(a) => cmd_generate(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Report(a) => cmd_report(a),
    }
}

/// Parses the process arguments and runs the command; usage errors exit 1.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR } else { EXIT_OK });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("opclass: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
