use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use stabilcert_core::certifier::{
    certify_condition_iii, diagonal_dominance_certify, stability_scan, StabilityCertificate, Verdict,
};
use stabilcert_core::operator::OperatorSpec;
use stabilcert_core::oracle::{certified_symbol_analysis, finite_section_trend, SymbolAnalysis, SymbolVerdict};
use stabilcert_core::report::{Params, RunReport, RunResult};
use stabilcert_core::scalar::PNorm;
use stabilcert_core::spec_io::{parse_operator_spec, spec_to_value};
use stabilcert_core::worked_example::reproduce_worked_examples;
use stabilcert_core::Error;

const EXIT_STABLE: u8 = 0;
const EXIT_UNSTABLE: u8 = 1;
const EXIT_UNDECIDED: u8 = 2;
const EXIT_INPUT: u8 = 3;
const EXIT_METHOD: u8 = 4;
const EXIT_INTERNAL: u8 = 5;

/// Section sizes for the finite-section trend printed by `oracle`.
const TREND_SIZES: [u64; 4] = [4, 8, 16, 32];

#[derive(Parser)]
#[command(name = "stabilcert", version, about = "Stability certificates for convolution-dominated matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the block criterion at one block size.
    Certify {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_parser = parse_p)]
        p: PNorm,
        #[arg(long)]
        n0: u64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Check the block criterion for every block size in a range.
    Scan {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_parser = parse_p)]
        p: PNorm,
        #[arg(long)]
        nmin: u64,
        #[arg(long)]
        nmax: u64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Symbol analysis (Toeplitz specs) and the finite-section trend at p = 2.
    Oracle {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Reproduce the backward-difference example.
    PaperExamples {
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn parse_p(s: &str) -> Result<PNorm, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug)]
enum Failure {
    Io(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Io(_) => EXIT_INPUT,
            Failure::Core(e) => match e {
                Error::Input(_) | Error::Domain(_) | Error::Parse { .. } => EXIT_INPUT,
                Error::Unsupported(_) | Error::Resource(_) | Error::Precondition(_) => EXIT_METHOD,
                Error::Internal(_) => EXIT_INTERNAL,
            },
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Io(m) => f.write_str(m),
            Failure::Core(e) => write!(f, "{e}"),
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("STABILCERT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| Failure::Io(format!("STABILCERT_THREADS must be a non-negative integer (got {raw:?})")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Io(format!("thread pool: {e}")))
}

fn load_spec(path: &Path) -> Result<OperatorSpec, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
    Ok(parse_operator_spec(&text)?)
}

fn toeplitz_symbol(spec: &OperatorSpec) -> Option<SymbolAnalysis> {
    match spec {
        OperatorSpec::Toeplitz { coeffs } => Some(certified_symbol_analysis(coeffs)),
        _ => None,
    }
}

fn zero_found(symbol: &Option<SymbolAnalysis>) -> bool {
    symbol.as_ref().is_some_and(|s| s.verdict == SymbolVerdict::ZeroFound)
}

fn emit(report: &mut RunReport, started: Instant, path: Option<&Path>) -> Result<(), Failure> {
    report.elapsed_seconds = started.elapsed().as_secs_f64();
    let text = report.to_json()?;
    match path {
        Some(p) => fs::write(p, text + "\n").map_err(|e| Failure::Io(format!("cannot write {}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn certify(spec_path: &Path, p: PNorm, n0: u64, report: Option<&Path>) -> Result<u8, Failure> {
    let started = Instant::now();
    let spec = load_spec(spec_path)?;
    let mut certificates: Vec<StabilityCertificate> = Vec::new();
    if p == PNorm::Inf {
        match diagonal_dominance_certify(&spec) {
            Ok(c) => certificates.push(c),
            Err(Error::Unsupported(_)) => {}
            Err(e) => return Err(e.into()),
        }
    }
    if !certificates.iter().any(|c| c.verdict == Verdict::CertifiedStable) {
        certificates.push(certify_condition_iii(&spec, p, n0)?);
    }
    let symbol = toeplitz_symbol(&spec);
    let stable = certificates.iter().any(|c| c.verdict == Verdict::CertifiedStable);
    let unstable = zero_found(&symbol);
    if stable && unstable {
        return Err(Error::Internal("a stability certificate conflicts with a zero of the symbol".into()).into());
    }
    if unstable {
        for c in &mut certificates {
            c.verdict = Verdict::CertifiedUnstable;
        }
    }
    let (verdict, code) = if stable {
        (Verdict::CertifiedStable, EXIT_STABLE)
    } else if unstable {
        (Verdict::CertifiedUnstable, EXIT_UNSTABLE)
    } else {
        (certificates.last().map_or(Verdict::NotCertified, |c| c.verdict), EXIT_UNDECIDED)
    };
    let params = Params {
        p: Some(p),
        n0: Some(n0),
        ..Params::default()
    };
    let mut r = RunReport::new(
        "certify",
        Some(spec_to_value(&spec)),
        params,
        RunResult::Certify { certificates, symbol },
        verdict.as_str(),
    );
    emit(&mut r, started, report)?;
    eprintln!("certify: {}", verdict.as_str());
    Ok(code)
}

fn scan(spec_path: &Path, p: PNorm, nmin: u64, nmax: u64, report: Option<&Path>) -> Result<u8, Failure> {
    let started = Instant::now();
    let spec = load_spec(spec_path)?;
    let table = stability_scan(&spec, p, nmin, nmax)?;
    let symbol = toeplitz_symbol(&spec);
    let stable = table.first_certified.is_some();
    let unstable = zero_found(&symbol);
    if stable && unstable {
        return Err(Error::Internal("a certified block size conflicts with a zero of the symbol".into()).into());
    }
    let (verdict, code) = if stable {
        (Verdict::CertifiedStable, EXIT_STABLE)
    } else if unstable {
        (Verdict::CertifiedUnstable, EXIT_UNSTABLE)
    } else {
        (Verdict::NotCertified, EXIT_UNDECIDED)
    };
    let params = Params {
        p: Some(p),
        nmin: Some(nmin),
        nmax: Some(nmax),
        ..Params::default()
    };
    let first = table.first_certified;
    let mut r = RunReport::new(
        "scan",
        Some(spec_to_value(&spec)),
        params,
        RunResult::Scan { table, symbol },
        verdict.as_str(),
    );
    emit(&mut r, started, report)?;
    match first {
        Some(n) => eprintln!("scan: {} (first at N0 = {n})", verdict.as_str()),
        None => eprintln!("scan: {}", verdict.as_str()),
    }
    Ok(code)
}

fn oracle(spec_path: &Path, report: Option<&Path>) -> Result<u8, Failure> {
    let started = Instant::now();
    let spec = load_spec(spec_path)?;
    let symbol = toeplitz_symbol(&spec);
    let trend = finite_section_trend(&spec, PNorm::Two, &TREND_SIZES)?;
    let verdict = symbol.as_ref().map_or(SymbolVerdict::Inconclusive, |s| s.verdict);
    let code = match verdict {
        SymbolVerdict::CertifiedStable => EXIT_STABLE,
        SymbolVerdict::ZeroFound => EXIT_UNSTABLE,
        SymbolVerdict::Inconclusive => EXIT_UNDECIDED,
    };
    let mut r = RunReport::new(
        "oracle",
        Some(spec_to_value(&spec)),
        Params::default(),
        RunResult::Oracle { symbol, trend },
        verdict.as_str(),
    );
    emit(&mut r, started, report)?;
    eprintln!("oracle: {}", verdict.as_str());
    Ok(code)
}

fn paper_examples(report: Option<&Path>) -> Result<u8, Failure> {
    let started = Instant::now();
    let example = reproduce_worked_examples()?;
    let holds = example.all_hold;
    let verdict = if holds { "Reproduced" } else { "Mismatch" };
    let mut r = RunReport::new("paper-examples", None, Params::default(), RunResult::PaperExamples(example), verdict);
    emit(&mut r, started, report)?;
    eprintln!("paper-examples: {verdict}");
    Ok(if holds { EXIT_STABLE } else { EXIT_INTERNAL })
}

fn run(cli: Cli) -> Result<u8, Failure> {
    configure_threads()?;
    match cli.command {
        Command::Certify { spec, p, n0, report } => certify(&spec, p, n0, report.as_deref()),
        Command::Scan {
            spec,
            p,
            nmin,
            nmax,
            report,
        } => scan(&spec, p, nmin, nmax, report.as_deref()),
        Command::Oracle { spec, report } => oracle(&spec, report.as_deref()),
        Command::PaperExamples { report } => paper_examples(report.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("stabilcert: error: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
