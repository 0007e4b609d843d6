//! The `cgeom` command line.
//!
//! Exit codes: 0 success, 1 input error, 2 infeasible budget, 3 invariant
//! violation. Output files are written through a temporary file and renamed,
//! so nothing partial is left behind on failure.

use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bounds::{
    diameter_lowerbound_state, diameter_lowerbound_unitary, gate_bound_killing, gate_bound_op,
    op_vs_complexity_sandwich, BoundQuery, DiameterBound, Sandwich,
};
use crate::compile::{
    compile, leading_error_sq, trotter_order_greedy, trotter_order_naive, trotter_product_dense, Budget, ErrorKind,
    TrotterOrder, DEFAULT_MAX_GATES,
};
use crate::error::{Error, Result};
use crate::hamiltonian::{Hamiltonian, HamiltonianJson};
use crate::json::{to_canonical_string, write_atomic};
use crate::linalg::{dense_hamiltonian, expm_hermitian, killing_distance, op_distance};
use crate::path::{integrate_geodesic, GeodesicStats, Path, PathJson};
use crate::random::{random_full_hamiltonian, random_path, random_sparse_hamiltonian, trial_rng};
use crate::schedule::{PenaltySchedule, ScheduleDescriptor};
use crate::verify::{run_verify, VerifyConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "cgeom",
    version,
    about = "Complexity geometry: distances, path compilation, and gate-count bounds"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compile a path into a two-local circuit within an error budget.
    Compile(CompileArgs),
    /// Run the randomized inequality suite.
    Verify(VerifyArgs),
    /// Tabulate gate-count and diameter bounds.
    Bounds(BoundsArgs),
    /// Integrate the geodesic equation from an initial Hamiltonian.
    Geodesic(GeodesicArgs),
    /// Compare greedy and naive Trotter orderings on random Hamiltonians.
    TrotterOrder(TrotterArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Killing,
    Op,
}

impl From<KindArg> for ErrorKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Killing => ErrorKind::Killing,
            KindArg::Op => ErrorKind::Op,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OrderArg {
    Greedy,
    Naive,
}

#[derive(Debug, Args)]
pub struct CompileArgs {
    /// Path JSON. Without it a random path is generated from --seed and --n.
    #[arg(long)]
    pub path: Option<PathBuf>,
    /// Schedule descriptor: a JSON file or inline JSON.
    #[arg(long)]
    pub schedule: String,
    #[arg(long)]
    pub error: f64,
    #[arg(long, value_enum, default_value = "killing")]
    pub error_kind: KindArg,
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Complexity length of a generated random path.
    #[arg(long, default_value_t = 1.0)]
    pub length: f64,
    /// Segments in a generated random path.
    #[arg(long, default_value_t = 3)]
    pub segments: usize,
    #[arg(long, value_enum, default_value = "greedy")]
    pub trotter: OrderArg,
    #[arg(long, default_value_t = DEFAULT_MAX_GATES)]
    pub max_gates: u64,
    /// Circuit JSON output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report JSON output (stdout when absent).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, hide = true)]
    pub corrupt_norm: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    /// Schedule descriptors (file or inline JSON); repeat for several rows.
    #[arg(long, required = true)]
    pub schedule: Vec<String>,
    #[arg(long)]
    pub n: usize,
    /// Complexity length L.
    #[arg(long, default_value_t = 10.0)]
    pub length: f64,
    #[arg(long, default_value_t = 0.1)]
    pub error: f64,
    #[arg(long, value_enum, default_value = "killing")]
    pub error_kind: KindArg,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GeodesicArgs {
    #[arg(long)]
    pub schedule: String,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Initial Hamiltonian JSON; random (from --seed) when absent.
    #[arg(long)]
    pub hamiltonian: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0)]
    pub time: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// Path JSON output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Drift statistics JSON (stdout when absent).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrotterArgs {
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long, default_value_t = 50)]
    pub terms: usize,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Step used for the full measured Trotter error.
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses arguments, runs the command, and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Compile(a) => cmd_compile(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::Bounds(a) => cmd_bounds(&a),
        Command::Geodesic(a) => cmd_geodesic(&a),
        Command::TrotterOrder(a) => cmd_trotter_order(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Infeasible(_) => EXIT_INFEASIBLE,
                _ => EXIT_INPUT,
            }
        }
    }
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn read_schedule(arg: &str, n_qubits: usize) -> Result<PenaltySchedule> {
    ScheduleDescriptor::parse_arg(arg)?.build(n_qubits)
}

pub fn cmd_compile(a: &CompileArgs) -> Result<i32> {
    let path = match &a.path {
        Some(file) => {
            let j: PathJson = serde_json::from_str(&std::fs::read_to_string(file)?)?;
            Path::from_json(&j)?
        }
        None => {
            let s = read_schedule(&a.schedule, a.n)?;
            random_path(&s, a.segments, a.length, &mut trial_rng(a.seed, 0))?
        }
    };
    let s = read_schedule(&a.schedule, path.n_qubits())?;
    let path = path.normalize()?;
    let mut budget = Budget::new(a.error, a.error_kind.into());
    budget.trotter = match a.trotter {
        OrderArg::Greedy => TrotterOrder::Greedy,
        OrderArg::Naive => TrotterOrder::Naive,
    };
    budget.max_gates = a.max_gates;
    let (circuit, report) = compile(&path, &s, &budget)?;
    let report_text = to_canonical_string(&report)?;
    if let Some(out) = &a.out {
        write_atomic(out, to_canonical_string(&circuit.to_json())?.as_bytes())?;
    }
    emit(a.report.as_ref(), &report_text)?;
    Ok(EXIT_OK)
}

pub fn cmd_verify(a: &VerifyArgs) -> Result<i32> {
    if a.n == 0 || a.n > crate::linalg::MAX_DENSE_QUBITS {
        return Err(Error::QubitCap {
            what: "verify",
            n: a.n,
            cap: crate::linalg::MAX_DENSE_QUBITS,
        });
    }
    let report = run_verify(&VerifyConfig {
        n_qubits: a.n,
        trials: a.trials,
        seed: a.seed,
        corrupt_norm: a.corrupt_norm,
    })?;
    emit(a.out.as_ref(), &to_canonical_string(&report)?)?;
    if report.all_passed {
        Ok(EXIT_OK)
    } else {
        for f in &report.failures {
            eprintln!("violation: {}", serde_json::to_string(f)?);
        }
        Ok(EXIT_VIOLATION)
    }
}

#[derive(Debug, Serialize)]
struct BoundRow {
    schedule: String,
    n_qubits: usize,
    length: f64,
    error: f64,
    kind: ErrorKind,
    threshold: f64,
    n_cheap: u128,
    bound: f64,
    reported: f64,
    trivial_cap: f64,
    /// Whether the bound beats `N²·4^N` at these parameters.
    beats_trivial: bool,
    variant: Option<String>,
    sandwich: Sandwich,
    diameter_unitary: DiameterBound,
    diameter_state: DiameterBound,
}

pub fn cmd_bounds(a: &BoundsArgs) -> Result<i32> {
    let kind: ErrorKind = a.error_kind.into();
    let mut rows = Vec::new();
    for arg in &a.schedule {
        let s = read_schedule(arg, a.n)?;
        let q = BoundQuery::new(&s, a.length, a.error, kind)?;
        let (threshold, n_cheap, bound, reported, trivial_cap, variant) = match kind {
            ErrorKind::Killing => {
                let b = gate_bound_killing(&q)?;
                (b.threshold, b.n_cheap, b.bound, b.reported, b.trivial_cap, None)
            }
            ErrorKind::Op => {
                let b = gate_bound_op(&q)?;
                (
                    b.threshold,
                    b.n_cheap,
                    b.bound,
                    b.reported,
                    b.trivial_cap,
                    Some(b.variant.to_string()),
                )
            }
        };
        rows.push(BoundRow {
            schedule: s.label(),
            n_qubits: a.n,
            length: a.length,
            error: a.error,
            kind,
            threshold,
            n_cheap,
            bound,
            reported,
            trivial_cap,
            beats_trivial: bound < trivial_cap,
            variant,
            sandwich: op_vs_complexity_sandwich(&s),
            diameter_unitary: diameter_lowerbound_unitary(&s),
            diameter_state: diameter_lowerbound_state(&s),
        });
    }
    let text = match a.format {
        Format::Json => to_canonical_string(&rows)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record([
                "schedule",
                "N",
                "L",
                "error",
                "kind",
                "threshold",
                "n_cheap",
                "bound",
                "variant",
            ])
            .map_err(csv_err)?;
            for r in &rows {
                w.write_record([
                    r.schedule.clone(),
                    r.n_qubits.to_string(),
                    format!("{:.16e}", r.length),
                    format!("{:.16e}", r.error),
                    match r.kind {
                        ErrorKind::Killing => "killing".to_string(),
                        ErrorKind::Op => "op".to_string(),
                    },
                    format!("{:.16e}", r.threshold),
                    r.n_cheap.to_string(),
                    format!("{:.16e}", r.reported),
                    r.variant.clone().unwrap_or_default(),
                ])
                .map_err(csv_err)?;
            }
            String::from_utf8(w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))?)
                .expect("csv output is utf-8")
        }
    };
    emit(a.out.as_ref(), &text)?;
    Ok(EXIT_OK)
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidArgument(format!("csv: {e}"))
}

#[derive(Debug, Serialize)]
struct GeodesicReport {
    schedule: String,
    n_qubits: usize,
    time: f64,
    dt: f64,
    stats: GeodesicStats,
}

pub fn cmd_geodesic(a: &GeodesicArgs) -> Result<i32> {
    let h0 = match &a.hamiltonian {
        Some(file) => {
            let j: HamiltonianJson = serde_json::from_str(&std::fs::read_to_string(file)?)?;
            Hamiltonian::from_json(&j)?
        }
        None => random_full_hamiltonian(a.n, &mut trial_rng(a.seed, 0))?.without_identity(),
    };
    let h0 = h0.without_identity();
    let norm = h0.fbar_norm();
    if norm == 0.0 {
        return Err(Error::ZeroHamiltonian(0));
    }
    let h0 = h0.scaled(1.0 / norm);
    let s = read_schedule(&a.schedule, h0.n_qubits())?;
    let (path, stats) = integrate_geodesic(&h0, &s, a.time, a.dt)?;
    if let Some(out) = &a.out {
        write_atomic(out, to_canonical_string(&path.to_json())?.as_bytes())?;
    }
    let report = GeodesicReport {
        schedule: s.label(),
        n_qubits: h0.n_qubits(),
        time: a.time,
        dt: a.dt,
        stats,
    };
    emit(a.report.as_ref(), &to_canonical_string(&report)?)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
pub struct TrotterTrial {
    pub trial: usize,
    pub sum_h4: f64,
    pub half_sum_h2_sq: f64,
    pub greedy_leading_sq: f64,
    pub naive_leading_sq: f64,
    pub greedy_killing: f64,
    pub naive_killing: f64,
    pub greedy_op: f64,
    pub naive_op: f64,
    pub within_guarantee: bool,
}

/// One greedy-vs-naive comparison on a random Hamiltonian.
pub fn trotter_trial(n: usize, terms: usize, seed: u64, trial: usize, delta: f64) -> Result<TrotterTrial> {
    let h = random_sparse_hamiltonian(n, terms, &mut trial_rng(seed, trial as u64))?;
    let sq: Vec<f64> = h.iter().map(|(_, c)| c * c).collect();
    let total: f64 = sq.iter().sum();
    let sum_h4 = (total * total - sq.iter().map(|x| x * x).sum::<f64>()) / 2.0;
    let greedy = trotter_order_greedy(&h);
    let naive = trotter_order_naive(&h);
    let greedy_leading_sq = leading_error_sq(&greedy);
    let exact = expm_hermitian(&dense_hamiltonian(&h)?, delta)?;
    let ug = trotter_product_dense(n, &greedy, delta)?;
    let un = trotter_product_dense(n, &naive, delta)?;
    Ok(TrotterTrial {
        trial,
        sum_h4,
        half_sum_h2_sq: 0.5 * total * total,
        greedy_leading_sq,
        naive_leading_sq: leading_error_sq(&naive),
        greedy_killing: killing_distance(&exact, &ug)?,
        naive_killing: killing_distance(&exact, &un)?,
        greedy_op: op_distance(&exact, &ug)?,
        naive_op: op_distance(&exact, &un)?,
        within_guarantee: greedy_leading_sq <= sum_h4 * (1.0 + 1e-12),
    })
}

pub fn cmd_trotter_order(a: &TrotterArgs) -> Result<i32> {
    let rows = (0..a.trials)
        .map(|t| trotter_trial(a.n, a.terms, a.seed, t, a.delta))
        .collect::<Result<Vec<_>>>()?;
    let text = match a.format {
        Format::Json => to_canonical_string(&rows)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in &rows {
                w.serialize(r).map_err(csv_err)?;
            }
            String::from_utf8(w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))?)
                .expect("csv output is utf-8")
        }
    };
    emit(a.out.as_ref(), &text)?;
    if rows.iter().all(|r| r.within_guarantee) {
        Ok(EXIT_OK)
    } else {
        Ok(EXIT_VIOLATION)
    }
}
