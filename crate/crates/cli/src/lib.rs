//! The `fairdiv` command line. Exit codes: 0 success, 1 predicate failure,
//! 2 usage error, 3 protocol failure.

// Errors carry exact rationals for diagnostics.
#![allow(clippy::result_large_err)]

pub mod bench;
pub mod error;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use fairdiv_core::hierarchy::{Case, ValueMatrix};
use fairdiv_core::predicates::{FairnessReport, ValueTable};
use fairdiv_core::protocols::{self, ProtocolKind, RunOptions};
use fairdiv_core::{generate, hardness, hierarchy, io, rational, scaling, Instance, Rational};

use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(
    name = "fairdiv",
    version,
    about = "Exact cake cutting in the Robertson-Webb query model"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write an instance file.
    Gen {
        #[arg(long, value_enum)]
        kind: GenKind,
        #[arg(long)]
        n: usize,
        /// `identity`, `uniform` or a JSON file holding rows of "p/q" strings.
        #[arg(long)]
        matrix: Option<String>,
        #[arg(long, env = "FAIRDIV_SEED", default_value_t = 0)]
        seed: u64,
        /// Defaults to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a protocol and write allocation, ledger and trace JSON.
    Run {
        #[arg(long, value_parser = parse_protocol)]
        protocol: ProtocolKind,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_parser = parse_rational)]
        eps: Option<Rational>,
        #[arg(long, env = "FAIRDIV_SEED", default_value_t = 0)]
        seed: u64,
        /// Check every tracked value against the instance as it is recorded.
        #[arg(long)]
        audit: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check an allocation against a fairness notion.
    Check {
        #[arg(long)]
        allocation: PathBuf,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum)]
        notion: NotionArg,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_parser = parse_rational)]
        eps: Option<Rational>,
        #[arg(long, value_parser = parse_rational)]
        delta: Option<Rational>,
        /// Report file; the report is always printed.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a separating example and check its claimed verdicts.
    Hierarchy {
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = parse_case)]
        case: Case,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Adversary partition-growth audit or the size-two hard instance corpus.
    Hardness {
        #[arg(long, value_enum)]
        demo: Demo,
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = parse_protocol)]
        protocol: ProtocolKind,
        #[arg(long, default_value_t = 5)]
        seeds: u64,
        #[arg(long, value_parser = parse_rational)]
        eps: Option<Rational>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Query counts over a ladder of `n`, as CSV with an optional SVG plot.
    Bench {
        #[arg(long, value_parser = parse_protocol)]
        protocol: ProtocolKind,
        #[arg(long, value_delimiter = ',', required = true)]
        ns: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        seeds: u64,
        #[arg(long, value_parser = parse_rational)]
        eps: Option<Rational>,
        #[arg(long, value_enum, default_value_t = BenchInstances::Random)]
        instances: BenchInstances,
        /// First seed of the run.
        #[arg(long, env = "FAIRDIV_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Uniform,
    RandomPiecewise,
    Matrix,
    Clb2Hard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NotionArg {
    Proportional,
    EnvyFree,
    SuperEnvyFree,
    EpsPerfect,
    Chb,
    Clb,
    DeltaClb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Demo {
    Adversary,
    Clb2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BenchInstances {
    Uniform,
    Random,
}

fn parse_rational(s: &str) -> std::result::Result<Rational, String> {
    rational::parse(s).map_err(|e| e.to_string())
}

fn parse_protocol(s: &str) -> std::result::Result<ProtocolKind, String> {
    s.parse().map_err(|e: fairdiv_core::Error| e.to_string())
}

fn parse_case(s: &str) -> std::result::Result<Case, String> {
    s.parse().map_err(|e: fairdiv_core::Error| e.to_string())
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code() as u8;
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Runs one command; `Ok(1)` means a predicate or claim failed.
pub fn execute(command: Command) -> Result<u8> {
    match command {
        Command::Gen {
            kind,
            n,
            matrix,
            seed,
            out,
        } => gen(kind, n, matrix.as_deref(), seed, out.as_deref()),
        Command::Run {
            protocol,
            instance,
            eps,
            seed,
            audit,
            out,
        } => run(protocol, &instance, eps, seed, audit, &out),
        Command::Check {
            allocation,
            instance,
            notion,
            k,
            eps,
            delta,
            out,
        } => check(
            &allocation,
            &instance,
            notion,
            k,
            eps.as_ref(),
            delta.as_ref(),
            out.as_deref(),
        ),
        Command::Hierarchy { n, case, k, out } => hierarchy_cmd(n, case, k, &out),
        Command::Hardness {
            demo,
            n,
            protocol,
            seeds,
            eps,
            out,
        } => hardness_cmd(demo, n, protocol, seeds, eps, &out),
        Command::Bench {
            protocol,
            ns,
            seeds,
            eps,
            instances,
            seed,
            out,
            svg,
        } => bench_cmd(
            protocol,
            &ns,
            seeds,
            eps,
            instances,
            seed,
            &out,
            svg.as_deref(),
        ),
    }
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn gen(kind: GenKind, n: usize, matrix: Option<&str>, seed: u64, out: Option<&Path>) -> Result<u8> {
    if n == 0 {
        return Err(CliError::Usage("n must be positive".into()));
    }
    let instance = match kind {
        GenKind::Uniform => Instance::uniform(n),
        GenKind::RandomPiecewise => generate::random_instance(n, &mut generate::rng(seed)),
        GenKind::Matrix => {
            let m = match matrix {
                None => return Err(CliError::Usage("--kind matrix needs --matrix".into())),
                Some("identity") => ValueMatrix::identity(n),
                Some("uniform") => ValueMatrix::uniform(n),
                Some(path) => read_matrix(Path::new(path))?,
            };
            if m.n() != n {
                return Err(CliError::Usage(format!(
                    "matrix is {0}x{0}, expected n = {n}",
                    m.n()
                )));
            }
            hierarchy::realize_value_matrix(&m)?.0
        }
        GenKind::Clb2Hard => hardness::random_clb2_hard_instance(n, seed)?,
    };
    let json = io::instance_json(&instance);
    match out {
        Some(path) => write(path, &json)?,
        None => println!("{json}"),
    }
    Ok(0)
}

fn read_matrix(path: &Path) -> Result<ValueMatrix> {
    let rows: Vec<Vec<String>> = serde_json::from_str(&read(path)?)?;
    let rows = rows
        .iter()
        .map(|row| {
            row.iter()
                .map(|x| rational::parse(x))
                .collect::<fairdiv_core::Result<Vec<_>>>()
        })
        .collect::<fairdiv_core::Result<Vec<_>>>()?;
    Ok(ValueMatrix::new(rows)?)
}

fn run(
    kind: ProtocolKind,
    instance: &Path,
    eps: Option<Rational>,
    seed: u64,
    audit: bool,
    out: &Path,
) -> Result<u8> {
    let instance = io::read_instance(instance)?;
    if !kind.accepts(instance.n()) {
        return Err(CliError::Usage(format!(
            "{kind} is not defined for {} agents",
            instance.n()
        )));
    }
    if let Some(e) = &eps {
        if e <= &rational::zero() || e >= &rational::one() {
            return Err(CliError::Usage(format!(
                "--eps must lie in (0, 1), got {e}"
            )));
        }
    }
    let options = RunOptions { eps, seed, audit };
    let result = protocols::run(kind, &instance, &options).map_err(CliError::Protocol)?;
    write(
        &out.join("allocation.json"),
        &io::allocation_json(&result.allocation),
    )?;
    write(
        &out.join("ledger.json"),
        &io::to_json(&result.ledger.export()),
    )?;
    write(&out.join("trace.json"), &io::to_json(&result.trace))?;
    println!(
        "{kind}: {} agents, {} queries, wrote {}",
        instance.n(),
        result.ledger.total_queries(),
        out.display()
    );
    Ok(0)
}

fn need<T: Clone>(value: Option<&T>, flag: &str, notion: NotionArg) -> Result<T> {
    value
        .cloned()
        .ok_or_else(|| CliError::Usage(format!("{notion:?} needs --{flag}")))
}

fn check(
    allocation: &Path,
    instance: &Path,
    notion: NotionArg,
    k: Option<usize>,
    eps: Option<&Rational>,
    delta: Option<&Rational>,
    out: Option<&Path>,
) -> Result<u8> {
    let instance = io::read_instance(instance)?;
    let allocation = io::read_allocation(allocation)?;
    let table = ValueTable::new(&instance, &allocation)?;
    let k = k.unwrap_or(instance.n());
    let report = match notion {
        NotionArg::Proportional => table.proportional(),
        NotionArg::EnvyFree => table.envy_free(),
        NotionArg::SuperEnvyFree => table.super_envy_free(),
        NotionArg::EpsPerfect => table.eps_perfect(&need(eps, "eps", notion)?),
        NotionArg::Chb => table.chb(k)?,
        NotionArg::Clb => table.clb(k)?,
        NotionArg::DeltaClb => table.delta_clb(k, &need(delta, "delta", notion)?)?,
    };
    let json = io::to_json(&report);
    if let Some(path) = out {
        write(path, &json)?;
    }
    println!("{json}");
    Ok(if report.passed() { 0 } else { 1 })
}

#[derive(Debug, Serialize)]
struct ClaimCheck {
    expected_pass: bool,
    holds: bool,
    report: FairnessReport,
}

#[derive(Debug, Serialize)]
struct HierarchyReport {
    case: Case,
    n: usize,
    k: Option<usize>,
    claims: Vec<ClaimCheck>,
    all_hold: bool,
}

fn hierarchy_cmd(n: usize, case: Case, k: Option<usize>, out: &Path) -> Result<u8> {
    let k = match (case.takes_k(), k) {
        (true, None) => return Err(CliError::Usage(format!("{case} needs --k"))),
        (true, k) => k,
        (false, _) => None,
    };
    let (instance, allocation) = case.build(n, k.unwrap_or(0))?;
    let t = ValueTable::new(&instance, &allocation)?;
    let mut expected: Vec<(bool, FairnessReport)> = Vec::new();
    match case {
        Case::ChbStrict => {
            let k = k.expect("checked above");
            expected.push((true, t.chb(k)?));
            if k < n {
                expected.push((k + 1 == n, t.chb(k + 1)?));
            }
        }
        Case::ChbNotEf => {
            expected.push((true, t.chb(n)?));
            expected.push((false, t.envy_free()));
        }
        Case::ClbStrict => {
            let k = k.expect("checked above");
            expected.push((true, t.clb(k)?));
            expected.push((false, t.clb(k + 1)?));
        }
        Case::ClbNotEf => {
            expected.push((true, t.clb(n.div_ceil(2) - 1)?));
            expected.push((false, t.envy_free()));
        }
        Case::EfNotClb2 => {
            expected.push((true, t.envy_free()));
            expected.push((false, t.clb(2)?));
        }
    }
    let claims: Vec<ClaimCheck> = expected
        .into_iter()
        .map(|(expected_pass, report)| ClaimCheck {
            expected_pass,
            holds: report.passed() == expected_pass,
            report,
        })
        .collect();
    let all_hold = claims.iter().all(|c| c.holds);
    let report = HierarchyReport {
        case,
        n,
        k,
        claims,
        all_hold,
    };
    write(&out.join("instance.json"), &io::instance_json(&instance))?;
    write(
        &out.join("allocation.json"),
        &io::allocation_json(&allocation),
    )?;
    write(&out.join("report.json"), &io::to_json(&report))?;
    println!(
        "{case} n={n}: claims {}",
        if all_hold { "hold" } else { "FAIL" }
    );
    Ok(if all_hold { 0 } else { 1 })
}

#[derive(Debug, Serialize)]
struct AdversaryReport {
    protocol: ProtocolKind,
    n: usize,
    growth: hardness::GrowthAudit,
    ledger: fairdiv_core::oracle::LedgerExport,
}

fn hardness_cmd(
    demo: Demo,
    n: usize,
    kind: ProtocolKind,
    seeds: u64,
    eps: Option<Rational>,
    out: &Path,
) -> Result<u8> {
    if !kind.accepts(n) {
        return Err(CliError::Usage(format!(
            "{kind} is not defined for {n} agents"
        )));
    }
    match demo {
        Demo::Adversary => {
            let options = RunOptions {
                eps,
                ..RunOptions::default()
            };
            let session =
                hardness::adversary_session(n, kind, &options).map_err(CliError::Protocol)?;
            let growth = hardness::audit_partition_growth(n, &session.history);
            let passed = growth.passed;
            write(
                &out.join("allocation.json"),
                &io::allocation_json(&session.allocation),
            )?;
            write(&out.join("history.json"), &io::to_json(&session.history))?;
            write(
                &out.join("report.json"),
                &io::to_json(&AdversaryReport {
                    protocol: kind,
                    n,
                    growth,
                    ledger: session.ledger.export(),
                }),
            )?;
            println!(
                "{kind} n={n}: growth audit {}",
                if passed { "passed" } else { "FAILED" }
            );
            Ok(if passed { 0 } else { 1 })
        }
        Demo::Clb2 => {
            if n < 3 {
                return Err(CliError::Usage("the hard instance needs n >= 3".into()));
            }
            let eps = eps.unwrap_or_else(protocols::default_eps);
            let seeds: Vec<u64> = (0..seeds).collect();
            let rows: Vec<_> = hardness::clb2_corpus(&[n], &seeds, &eps)
                .map_err(CliError::Protocol)?
                .into_iter()
                .filter(|r| r.protocol == kind)
                .collect();
            write(
                &out.join("instance.json"),
                &io::instance_json(&hardness::random_clb2_hard_instance(n, 0)?),
            )?;
            write(&out.join("corpus.json"), &io::to_json(&rows))?;
            let passing = rows.iter().filter(|r| r.clb2_pass).count();
            let worst = rows
                .iter()
                .map(|r| rational::to_f64(&r.max_deviation))
                .fold(0.0f64, f64::max);
            println!(
                "{kind} n={n}: {passing}/{} runs meet the exact size-two bound, max equality deviation {worst:.4}",
                rows.len()
            );
            Ok(0)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn bench_cmd(
    kind: ProtocolKind,
    ns: &[usize],
    seeds: u64,
    eps: Option<Rational>,
    instances: BenchInstances,
    first_seed: u64,
    out: &Path,
    svg: Option<&Path>,
) -> Result<u8> {
    if let Some(&n) = ns.iter().find(|&&n| !kind.accepts(n)) {
        return Err(CliError::Usage(format!(
            "{kind} is not defined for {n} agents"
        )));
    }
    let eps = match kind {
        ProtocolKind::Algorithm2 => Some(eps.unwrap_or_else(protocols::default_eps)),
        _ => eps,
    };
    let mut records = Vec::new();
    for &n in ns {
        for seed in first_seed..first_seed + seeds {
            let instance = match instances {
                BenchInstances::Uniform => Instance::uniform(n),
                BenchInstances::Random => generate::random_instance(n, &mut generate::rng(seed)),
            };
            records.push(bench::record(kind, &instance, eps.as_ref(), seed));
        }
    }
    let mut buf = Vec::new();
    bench::write_csv(&mut buf, &records)?;
    write(out, &String::from_utf8(buf).expect("csv output is utf-8"))?;
    let medians = bench::medians(&records);
    if let Some(path) = svg {
        write(path, &bench::svg_plot(kind.name(), &medians))?;
    }
    let failed = records.iter().filter(|r| r.error.is_some()).count();
    match scaling::loglog_slope(&medians) {
        Some(slope) => println!(
            "{kind}: {} runs, {failed} failed, log-log slope {slope:.3}",
            records.len()
        ),
        None => println!("{kind}: {} runs, {failed} failed", records.len()),
    }
    Ok(0)
}
