//! Command-line front end: `solve`, `analyze`, `coeffs` and `verify`.
//!
//! Exit codes: 0 success, 1 verification residual exceeded, 2 singular
//! system, 3 invalid input.

pub mod schema;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::coeff::{
    build_a, build_gamma, degeneracy_report, det_factors3, matrix_report, reduce_symmetric, CoeffVector, DET_SIGN,
};
use crate::error::Error;
use crate::linalg;
use crate::perm::{canonical_order, factorial, MAX_TABLE_RANK};
use crate::scalar::{Rational, Scalar};
use crate::solver::{brute_force, residual_inf, PlainSolver, ReducedSolver, Solution, TracedSolver};
use crate::tensor::{DenseTensor, Symmetry};
use schema::{
    from_json_str, report_json, solution_json, Arithmetic, Mode, Problem, ProblemFile, SchemaError, SolutionFile,
    SymmetryFile,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_RESIDUAL: u8 = 1;
pub const EXIT_SINGULAR: u8 = 2;
pub const EXIT_INVALID: u8 = 3;

/// Relative residual accepted by `verify`.
pub const VERIFY_TOL: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(name = "lintensor", version, about = "Solve linear tensor equations built from index permutations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a problem file and write the solution JSON.
    Solve {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Print the degeneracy report of the coefficient matrix.
    Analyze {
        #[arg(short, long)]
        input: PathBuf,
    },
    /// Print the first row of the inverse coefficient matrix.
    Coeffs {
        #[arg(long)]
        rank: usize,
        /// Comma-separated, canonical order; fractions like 1/2 are accepted.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        coefficients: Vec<String>,
        /// Slot pair and sign, e.g. `2,3,+1`.
        #[arg(long, allow_hyphen_values = true)]
        symmetry: Option<String>,
        #[arg(long)]
        rational: bool,
        #[arg(long)]
        full_inverse: bool,
    },
    /// Check a solution against its problem.
    Verify {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        solution: PathBuf,
    },
}

#[derive(Debug)]
enum Failure {
    Invalid(String),
    /// Degenerate system; the payload is written where the result would go.
    Singular { message: String, payload: Value },
}

impl From<SchemaError> for Failure {
    fn from(e: SchemaError) -> Self {
        Failure::Invalid(e.to_string())
    }
}

type CmdResult = std::result::Result<u8, Failure>;

pub fn run(cli: Cli) -> u8 {
    let result = match cli.command {
        Command::Solve { input, output } => cmd_solve(&input, &output),
        Command::Analyze { input } => cmd_analyze(&input),
        Command::Coeffs { rank, coefficients, symmetry, rational, full_inverse } => {
            cmd_coeffs(rank, &coefficients, symmetry.as_deref(), rational, full_inverse)
        }
        Command::Verify { input, solution } => cmd_verify(&input, &solution),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            EXIT_INVALID
        }
        Err(Failure::Singular { message, .. }) => {
            eprintln!("error: {message}");
            EXIT_SINGULAR
        }
    }
}

fn read_text(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

fn write_json(path: &Path, value: &Value) -> std::result::Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).expect("values serialize");
    text.push('\n');
    fs::write(path, text).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

fn print_json(value: &Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("values serialize"));
}

fn read_problem(path: &Path) -> std::result::Result<ProblemFile, Failure> {
    let text = read_text(path)?;
    from_json_str(&text).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

fn lib_failure(e: Error) -> Failure {
    Failure::Invalid(e.to_string())
}

enum Prepared<T> {
    Plain(PlainSolver<T>),
    Reduced(ReducedSolver<T>),
    Traced(TracedSolver<T>),
    Oracle,
}

/// Degenerate-system payload: which matrix failed and its report.
fn singular_payload<T: Scalar>(problem: &Problem<T>, err: &Error) -> Value {
    let (kind, report) = match err {
        Error::GammaSingular { .. } => {
            let tc = problem.trace_coeffs.as_ref().expect("traced mode");
            let gamma = build_gamma(&problem.coeffs, tc, problem.dim).expect("built during preparation");
            ("gamma-singular", report_json(&matrix_report(&gamma.entries)))
        }
        Error::SingularReduced { .. } => {
            let sym = problem.symmetry.expect("reduced path");
            let r = reduce_symmetric(&problem.coeffs, sym).expect("built during preparation");
            ("singular-reduced", report_json(&matrix_report(&r.matrix)))
        }
        _ => {
            let report = degeneracy_report(&problem.coeffs).expect("built during preparation");
            ("singular-system", report_json(&report))
        }
    };
    json!({
        "error": kind,
        "message": err.to_string(),
        "degeneracy": report,
        "canonical_order": order_json(problem.rank),
    })
}

fn order_json(rank: usize) -> Value {
    let order = canonical_order(rank).expect("rank validated");
    Value::Array(order.iter().map(|p| json!(p.one_based())).collect())
}

fn prepare<T: Scalar>(problem: &Problem<T>) -> std::result::Result<Prepared<T>, Failure> {
    let prepared = if problem.oracle {
        if problem.symmetry.is_some() {
            return Err(Failure::Invalid("symmetry: not supported together with oracle".into()));
        }
        Ok(Prepared::Oracle)
    } else {
        match (problem.mode, problem.symmetry) {
            (Mode::Traced, _) => TracedSolver::new(
                &problem.coeffs,
                problem.trace_coeffs.as_ref().expect("validated"),
                problem.metric.as_ref().expect("validated"),
            )
            .map(Prepared::Traced),
            (Mode::Plain, Some(sym)) => ReducedSolver::new(&problem.coeffs, sym).map(Prepared::Reduced),
            (Mode::Plain, None) => PlainSolver::new(&problem.coeffs).map(Prepared::Plain),
        }
    };
    prepared.map_err(|e| {
        if e.is_degenerate() {
            Failure::Singular { message: e.to_string(), payload: singular_payload(problem, &e) }
        } else {
            lib_failure(e)
        }
    })
}

fn solve_one<T: Scalar>(prepared: &Prepared<T>, problem: &Problem<T>, b: &DenseTensor<T>) -> crate::Result<Solution<T>> {
    match prepared {
        Prepared::Plain(s) => s.solve(b),
        Prepared::Reduced(s) => s.solve(b),
        Prepared::Traced(s) => s.solve(b),
        Prepared::Oracle => {
            let traced = problem.mode == Mode::Traced;
            brute_force(
                &problem.coeffs,
                problem.trace_coeffs.as_ref().filter(|_| traced),
                problem.metric.as_ref().filter(|_| traced),
                b,
            )
        }
    }
}

fn solve_problem<T: Scalar>(file: &ProblemFile, output: &Path) -> CmdResult {
    let problem = file.validate::<T>()?;
    if problem.sources.is_empty() {
        return Err(Failure::Invalid("B: required by solve (or give batch)".into()));
    }
    let prepared = match prepare(&problem) {
        Ok(p) => p,
        Err(Failure::Singular { message, payload }) => {
            write_json(output, &payload)?;
            return Err(Failure::Singular { message, payload });
        }
        Err(e) => return Err(e),
    };
    // Order-preserving parallel map; the prepared factorization is shared
    // read-only.
    let results: Vec<crate::Result<Solution<T>>> =
        problem.sources.par_iter().map(|b| solve_one(&prepared, &problem, b)).collect();
    let mut solutions = Vec::with_capacity(results.len());
    for (i, r) in results.into_iter().enumerate() {
        let s = r.map_err(|e| {
            let at = if problem.batched { format!("batch[{i}]") } else { "B".to_string() };
            Failure::Invalid(format!("{at}: {e}"))
        })?;
        solutions.push(s);
    }

    let mut code = EXIT_OK;
    for (i, s) in solutions.iter().enumerate() {
        let label = if problem.batched { format!("[{i}] ") } else { String::new() };
        eprintln!(
            "{label}path={} residual_inf={:.3e} det={}",
            s.path.as_str(),
            s.residual_inf.to_f64_lossy(),
            s.degeneracy.det
        );
        if s.degeneracy.singular {
            // Only the oracle returns a solution for a singular operator.
            eprintln!("{label}operator is singular (nullity {}); least-squares representative written", s.degeneracy.nullity);
            code = EXIT_SINGULAR;
        }
    }
    let body = if problem.batched {
        json!({ "solutions": solutions.iter().map(solution_json).collect::<Vec<_>>() })
    } else {
        solution_json(&solutions[0])
    };
    write_json(output, &body)?;
    Ok(code)
}

fn cmd_solve(input: &Path, output: &Path) -> CmdResult {
    let file = read_problem(input)?;
    log::info!("solving {} ({:?}, {:?})", input.display(), file.mode, file.arithmetic);
    match file.arithmetic {
        Arithmetic::Float => solve_problem::<f64>(&file, output),
        Arithmetic::Rational => solve_problem::<Rational>(&file, output),
    }
}

/// `det = DET_SIGN·σ₁σ₂σ₃²`, exactly or to floating tolerance.
fn det_matches_sigma<T: Scalar>(coeffs: &CoeffVector<T>, det: &T) -> bool {
    let [s1, s2, s3] = det_factors3(coeffs).expect("rank 3");
    let product = T::from_i64(DET_SIGN) * s1 * s2 * s3.clone() * s3;
    if T::EXACT {
        product == *det
    } else {
        let diff = (product - det.clone()).to_f64_lossy().abs();
        diff <= 1e-9 * det.to_f64_lossy().abs().max(1.0)
    }
}

fn analyze_problem<T: Scalar>(file: &ProblemFile) -> CmdResult {
    let problem = file.validate::<T>()?;
    let report = degeneracy_report(&problem.coeffs).map_err(lib_failure)?;
    let mut out = serde_json::Map::new();
    out.insert("rank".into(), problem.rank.into());
    out.insert("dim".into(), problem.dim.into());
    out.insert("canonical_order".into(), order_json(problem.rank));
    out.insert("rank_within_dimension".into(), (problem.rank <= problem.dim).into());
    if problem.rank == 3 {
        out.insert("det_matches_sigma".into(), det_matches_sigma(&problem.coeffs, &report.det).into());
    }
    out.insert("coefficient_matrix".into(), report_json(&report));
    if let Some(sym) = problem.symmetry {
        let r = reduce_symmetric(&problem.coeffs, sym).map_err(lib_failure)?;
        out.insert("reduced".into(), report_json(&matrix_report(&r.matrix)));
    }
    if let (Mode::Traced, Some(tc)) = (problem.mode, &problem.trace_coeffs) {
        let gamma = build_gamma(&problem.coeffs, tc, problem.dim).map_err(lib_failure)?;
        out.insert("gamma".into(), report_json(&matrix_report(&gamma.entries)));
    }
    print_json(&Value::Object(out));
    eprintln!("{}", report.summary());
    Ok(EXIT_OK)
}

fn cmd_analyze(input: &Path) -> CmdResult {
    let file = read_problem(input)?;
    match file.arithmetic {
        Arithmetic::Float => analyze_problem::<f64>(&file),
        Arithmetic::Rational => analyze_problem::<Rational>(&file),
    }
}

fn parse_symmetry_flag(text: &str) -> std::result::Result<Symmetry, Failure> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let bad = || Failure::Invalid(format!("--symmetry: expected p1,p2,+1|-1, got {text:?}"));
    let [p1, p2, sign] = parts.as_slice() else { return Err(bad()) };
    let file = SymmetryFile {
        pair: [p1.parse().map_err(|_| bad())?, p2.parse().map_err(|_| bad())?],
        sign: sign.trim_start_matches('+').parse().map_err(|_| bad())?,
    };
    file.parse("--symmetry").map_err(Failure::from)
}

fn coeffs_in<T: Scalar>(rank: usize, raw: &[String], symmetry: Option<Symmetry>, full_inverse: bool) -> CmdResult {
    if rank == 0 || rank > MAX_TABLE_RANK {
        return Err(Failure::Invalid(format!("--rank: must be between 1 and {MAX_TABLE_RANK}, got {rank}")));
    }
    let m = factorial(rank);
    if raw.len() != m {
        return Err(Failure::Invalid(format!("--coefficients: expected {m} entries ({rank}!), got {}", raw.len())));
    }
    let values = raw
        .iter()
        .enumerate()
        .map(|(i, s)| {
            T::parse_text(s).ok_or_else(|| Failure::Invalid(format!("--coefficients[{i}]: not a scalar: {s:?}")))
        })
        .collect::<std::result::Result<Vec<T>, _>>()?;
    let coeffs = CoeffVector::new(rank, values).map_err(lib_failure)?;
    let (matrix, report, basis) = match symmetry {
        Some(sym) => {
            if rank != 3 {
                return Err(Failure::Invalid("--symmetry: only supported at rank 3".into()));
            }
            let r = reduce_symmetric(&coeffs, sym).map_err(lib_failure)?;
            let report = matrix_report(&r.matrix);
            (r.matrix, report, "reduced")
        }
        None => {
            let report = degeneracy_report(&coeffs).map_err(lib_failure)?;
            (build_a(&coeffs).map_err(lib_failure)?.matrix, report, "full")
        }
    };
    if report.singular {
        print_json(&json!({ "error": "singular-system", "degeneracy": report_json(&report) }));
        return Err(Failure::Singular { message: report.summary(), payload: Value::Null });
    }
    let first_row = linalg::inverse_first_row(&matrix).map_err(lib_failure)?;
    let mut out = serde_json::Map::new();
    out.insert("rank".into(), rank.into());
    out.insert("basis".into(), basis.into());
    out.insert("inverse_first_row".into(), Value::Array(first_row.iter().map(Scalar::to_json).collect()));
    if full_inverse {
        let inv = linalg::inverse(&matrix).map_err(lib_failure)?;
        let rows = inv.rows().iter().map(|r| Value::Array(r.iter().map(Scalar::to_json).collect())).collect();
        out.insert("inverse".into(), Value::Array(rows));
    }
    print_json(&Value::Object(out));
    Ok(EXIT_OK)
}

fn cmd_coeffs(rank: usize, raw: &[String], symmetry: Option<&str>, rational: bool, full_inverse: bool) -> CmdResult {
    let symmetry = symmetry.map(parse_symmetry_flag).transpose()?;
    if rational {
        coeffs_in::<Rational>(rank, raw, symmetry, full_inverse)
    } else {
        coeffs_in::<f64>(rank, raw, symmetry, full_inverse)
    }
}

fn verify_problem<T: Scalar>(file: &ProblemFile, solution: &SolutionFile) -> CmdResult {
    let problem = file.validate::<T>()?;
    if problem.sources.is_empty() {
        return Err(Failure::Invalid("B: required by verify (or give batch)".into()));
    }
    let tensors = solution.tensors::<T>(problem.rank, problem.dim)?;
    if tensors.len() != problem.sources.len() {
        return Err(Failure::Invalid(format!(
            "solution has {} tensors for {} sources",
            tensors.len(),
            problem.sources.len()
        )));
    }
    let traced = problem.mode == Mode::Traced;
    let tc = problem.trace_coeffs.as_ref().filter(|_| traced);
    let g = problem.metric.as_ref().filter(|_| traced);
    let mut code = EXIT_OK;
    for (i, (n, b)) in tensors.iter().zip(&problem.sources).enumerate() {
        let residual = residual_inf(&problem.coeffs, tc, g, n, b).map_err(lib_failure)?.to_f64_lossy();
        let bound = VERIFY_TOL * b.norm_inf().max(1.0);
        let ok = residual <= bound;
        let label = if problem.batched { format!("[{i}] ") } else { String::new() };
        println!("{label}residual_inf = {residual:e} (tolerance {bound:e}) {}", if ok { "ok" } else { "FAILED" });
        if !ok {
            code = EXIT_RESIDUAL;
        }
    }
    Ok(code)
}

fn cmd_verify(input: &Path, solution: &Path) -> CmdResult {
    let file = read_problem(input)?;
    let text = read_text(solution)?;
    let sol: SolutionFile = from_json_str(&text).map_err(|e| Failure::Invalid(format!("{}: {e}", solution.display())))?;
    match file.arithmetic {
        Arithmetic::Float => verify_problem::<f64>(&file, &sol),
        Arithmetic::Rational => verify_problem::<Rational>(&file, &sol),
    }
}
