//! Command-line front end: configuration ingestion, grid scans,
//! eigenvalue search, verification reports and plot-ready data emission.
//!
//! Exit codes: 0 success, 1 validation failure, 2 degenerate input,
//! 3 numerical non-convergence, 4 internal invariant violation.

mod verify;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use euler_spectra::config::{load_config, Mode, ProblemConfig, DEFAULT_WINDOW};
use euler_spectra::flow::{validate_pair, CoefficientSequence};
use euler_spectra::params::EvalParams;
use euler_spectra::spectrum::{
    evaluate_five, find_real_eigenvalue, finite_section_oracle, refine_zero, winding_number,
    FiveFunctionRecord, Rect,
};
use euler_spectra::{SpectraError, C64};

#[derive(Parser)]
#[command(
    name = "euler-spectra",
    version,
    about = "Five cross-validating spectral functions for the Euler-flow Jacobi operator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the admissibility of a lattice pair (p, q).
    Validate(ValidateArgs),
    /// Evaluate all five spectral functions at one lambda.
    Eval(EvalArgs),
    /// Evaluate the functions over a lambda grid and emit CSV/JSON rows.
    Scan(ScanArgs),
    /// Locate the positive eigenvalue and cross-validate it three ways.
    Find(FindArgs),
    /// Run the full invariant suite against a configuration.
    Verify(VerifyArgs),
    /// Real eigenvalue approximations from finite sections of the operator.
    Oracle(OracleArgs),
}

/// Problem selection: either an explicit flow pair or a config file.
#[derive(Args, Clone)]
struct InputArgs {
    /// Lattice mode "p1,p2" (flow mode).
    #[arg(long, value_name = "P1,P2", allow_hyphen_values = true)]
    p: Option<String>,
    /// Slice offset "q1,q2" (flow mode).
    #[arg(long, value_name = "Q1,Q2", allow_hyphen_values = true)]
    q: Option<String>,
    /// TOML or JSON configuration file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Coefficient window half-width.
    #[arg(long)]
    window: Option<i64>,
}

/// Numerical tuning shared by the evaluating commands.
#[derive(Args, Clone)]
struct TuningArgs {
    /// Finite-section half-width for the pencil determinants.
    #[arg(long = "N", value_name = "N")]
    n_section: Option<usize>,
    /// Jost tail index (default: automatic from the coupling tail).
    #[arg(long = "n-tail", value_name = "N_TAIL")]
    n_tail: Option<i64>,
    /// Cross-validation tolerance on the five-function gap.
    #[arg(long)]
    tol: Option<f64>,
}

impl TuningArgs {
    fn params(&self) -> EvalParams {
        let mut params = EvalParams::default();
        if let Some(n) = self.n_section {
            params.n_section = n;
        }
        params.n_tail = self.n_tail;
        if let Some(t) = self.tol {
            params.cross_tol = t;
        }
        params
    }
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Emit the report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    tuning: TuningArgs,
    /// Spectral parameter "re,im" (or just "re").
    #[arg(long, value_name = "RE,IM", allow_hyphen_values = true)]
    lambda: String,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ScanArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    tuning: TuningArgs,
    /// Grid "re_min,re_max,re_steps,im_min,im_max,im_steps".
    #[arg(long, value_name = "SPEC", allow_hyphen_values = true)]
    grid: String,
    /// Emit JSON instead of CSV.
    #[arg(long)]
    json: bool,
    /// Output path (stdout when omitted).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FindArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    tuning: TuningArgs,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    tuning: TuningArgs,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Section half-widths, comma separated.
    #[arg(long = "N", value_name = "N1,N2,...", default_value = "32,64,128")]
    sections: String,
    /// Upper end of the real scan interval.
    #[arg(long, default_value_t = 10.0)]
    lambda_max: f64,
    #[arg(long)]
    json: bool,
}

fn main() -> ExitCode {
    init_thread_pool();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate(args) => cmd_validate(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Scan(args) => cmd_scan(args),
        Command::Find(args) => cmd_find(args),
        Command::Verify(args) => verify::cmd_verify(args),
        Command::Oracle(args) => cmd_oracle(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

/// EULER_SPECTRA_THREADS caps the worker pool used by grid scans.
fn init_thread_pool() {
    if let Ok(v) = std::env::var("EULER_SPECTRA_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }
}

fn exit_code(err: &SpectraError) -> u8 {
    use SpectraError::*;
    match err {
        InvalidInput(_) => 1,
        DegenerateSlice
        | EssentialSpectrum { .. }
        | Precondition(_)
        | RhoUnavailable(_)
        | SectorViolation { .. }
        | IndexOutOfWindow { .. } => 2,
        ContractionFailure { .. }
        | NonConvergence { .. }
        | BracketFailure(_)
        | BoundaryZero { .. }
        | EssentialSpectrumIntersection { .. }
        | SingularFactorization { .. } => 3,
        BlockMismatch { .. } | IdentityViolation { .. } | LargeResidual { .. } => 4,
    }
}

fn parse_ivec(text: &str, what: &str) -> Result<[i64; 2], SpectraError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(SpectraError::InvalidInput(format!(
            "{what} must be two comma-separated integers, got {text:?}"
        )));
    }
    let a = parts[0]
        .trim()
        .parse()
        .map_err(|_| SpectraError::InvalidInput(format!("{what}: bad integer {:?}", parts[0])))?;
    let b = parts[1]
        .trim()
        .parse()
        .map_err(|_| SpectraError::InvalidInput(format!("{what}: bad integer {:?}", parts[1])))?;
    Ok([a, b])
}

fn parse_lambda(text: &str) -> Result<C64, SpectraError> {
    let parts: Vec<&str> = text.split(',').collect();
    let bad = || SpectraError::InvalidInput(format!("bad lambda {text:?}, expected RE or RE,IM"));
    match parts.len() {
        1 => Ok(C64::new(parts[0].trim().parse().map_err(|_| bad())?, 0.0)),
        2 => Ok(C64::new(
            parts[0].trim().parse().map_err(|_| bad())?,
            parts[1].trim().parse().map_err(|_| bad())?,
        )),
        _ => Err(bad()),
    }
}

impl InputArgs {
    fn problem(&self) -> Result<ProblemConfig, SpectraError> {
        if let Some(path) = &self.config {
            let mut cfg = load_config(path)?;
            if let Some(w) = self.window {
                cfg.window = Some(w);
            }
            return Ok(cfg);
        }
        match (&self.p, &self.q) {
            (Some(p), Some(q)) => Ok(ProblemConfig::flow(
                parse_ivec(p, "--p")?,
                parse_ivec(q, "--q")?,
                self.window.unwrap_or(DEFAULT_WINDOW),
            )),
            _ => Err(SpectraError::InvalidInput(
                "provide either --config or both --p and --q".into(),
            )),
        }
    }

    fn coefficients(&self) -> Result<CoefficientSequence, SpectraError> {
        self.problem()?.coefficients()
    }
}

/// 17 significant digits: enough for bit-exact f64 round trips.
fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

fn cmd_validate(args: ValidateArgs) -> Result<u8, SpectraError> {
    let problem = args.input.problem()?;
    if problem.mode != Mode::Flow {
        return Err(SpectraError::InvalidInput(
            "validate applies to flow-mode configurations".into(),
        ));
    }
    let p = problem
        .p
        .ok_or_else(|| SpectraError::InvalidInput("flow mode requires p".into()))?;
    let q = problem
        .q
        .ok_or_else(|| SpectraError::InvalidInput("flow mode requires q".into()))?;
    let report = validate_pair(p, q)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report).unwrap());
    } else {
        println!("p = ({}, {}), q = ({}, {})", p[0], p[1], q[0], q[1]);
        println!(
            "  ||q|| < ||p||            : {}",
            if report.norm_ok { "pass" } else { "FAIL" }
        );
        for rc in &report.ring_checks {
            println!(
                "  ||q + ({:+})p||^2 = {:<6} : {}",
                rc.n,
                rc.norm_sq,
                if rc.pass { "pass" } else { "FAIL" }
            );
        }
        println!(
            "  |n| >= 3 tail bound      : {}",
            if report.tail_ok { "pass" } else { "FAIL" }
        );
        if let Some(n) = report.first_violation {
            println!("  first violating n        : {n}");
        }
        println!("admissible: {}", report.admissible);
    }
    Ok(if report.admissible { 0 } else { 1 })
}

fn complex_cell(v: C64) -> String {
    format!("{:>24} {:>24}", fmt_f(v.re), fmt_f(v.im))
}

fn cmd_eval(args: EvalArgs) -> Result<u8, SpectraError> {
    let coeffs = args.input.coefficients()?;
    let params = args.tuning.params();
    let lambda = parse_lambda(&args.lambda)?;
    let rec = evaluate_five(&coeffs, lambda, &params)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&rec).unwrap());
    } else {
        println!("lambda = {} + {}i", fmt_f(lambda.re), fmt_f(lambda.im));
        println!("  det(I-K) {}", complex_cell(rec.det_k));
        println!("  det(I-T) {}", complex_cell(rec.det_t));
        println!("  evans    {}", complex_cell(rec.evans));
        println!("  jost     {}", complex_cell(rec.jost));
        match rec.g_fun {
            Some(g) => println!("  g        {}", complex_cell(g)),
            None => println!("  g        undefined (Re lambda <= 0, sector, or no rho)"),
        }
        println!(
            "  max pairwise gap = {} (tolerance {})",
            fmt_f(rec.max_pairwise_gap),
            fmt_f(params.cross_tol)
        );
        println!(
            "  N = {} (doubled to {}), T sections = {} (doubled), N_tail = {}, depth = {}",
            rec.n_used,
            2 * rec.n_used,
            rec.t_section_used,
            rec.n_tail_used,
            rec.depth_used.map_or("-".into(), |d| d.to_string()),
        );
    }
    Ok(if rec.max_pairwise_gap <= params.cross_tol {
        0
    } else {
        3
    })
}

#[derive(Serialize)]
struct ScanRow {
    lambda_re: f64,
    lambda_im: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    record: Option<FiveFunctionRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

const SCAN_HEADER: &str = "lambda_re,lambda_im,detK_re,detK_im,detT_re,detT_im,evans_re,evans_im,jost_re,jost_im,g_re,g_im,gap,N,N_tail,depth,error";

fn scan_csv_row(row: &ScanRow) -> String {
    let mut cells: Vec<String> = vec![fmt_f(row.lambda_re), fmt_f(row.lambda_im)];
    match &row.record {
        Some(rec) => {
            for v in [rec.det_k, rec.det_t, rec.evans, rec.jost] {
                cells.push(fmt_f(v.re));
                cells.push(fmt_f(v.im));
            }
            match rec.g_fun {
                Some(g) => {
                    cells.push(fmt_f(g.re));
                    cells.push(fmt_f(g.im));
                }
                None => {
                    cells.push(String::new());
                    cells.push(String::new());
                }
            }
            cells.push(fmt_f(rec.max_pairwise_gap));
            cells.push(rec.n_used.to_string());
            cells.push(rec.n_tail_used.to_string());
            cells.push(rec.depth_used.map_or(String::new(), |d| d.to_string()));
            cells.push(String::new());
        }
        None => {
            for _ in 0..14 {
                cells.push(String::new());
            }
            cells.push(row.error.clone().unwrap_or_default().replace(',', ";"));
        }
    }
    cells.join(",")
}

fn cmd_scan(args: ScanArgs) -> Result<u8, SpectraError> {
    use rayon::prelude::*;
    let coeffs = args.input.coefficients()?;
    let params = args.tuning.params();
    let g: Vec<&str> = args.grid.split(',').collect();
    if g.len() != 6 {
        return Err(SpectraError::InvalidInput(
            "grid spec is re_min,re_max,re_steps,im_min,im_max,im_steps".into(),
        ));
    }
    let parse = |s: &str| -> Result<f64, SpectraError> {
        s.trim()
            .parse()
            .map_err(|_| SpectraError::InvalidInput(format!("bad grid number {s:?}")))
    };
    let (re_min, re_max) = (parse(g[0])?, parse(g[1])?);
    let re_steps = parse(g[2])? as usize;
    let (im_min, im_max) = (parse(g[3])?, parse(g[4])?);
    let im_steps = parse(g[5])? as usize;
    if re_steps == 0 || im_steps == 0 {
        return Err(SpectraError::InvalidInput("grid steps must be >= 1".into()));
    }
    let coord = |lo: f64, hi: f64, steps: usize, i: usize| {
        if steps == 1 {
            lo
        } else {
            lo + (hi - lo) * i as f64 / (steps - 1) as f64
        }
    };
    // row-major, re fastest
    let mut points = Vec::with_capacity(re_steps * im_steps);
    for j in 0..im_steps {
        for i in 0..re_steps {
            points.push(C64::new(
                coord(re_min, re_max, re_steps, i),
                coord(im_min, im_max, im_steps, j),
            ));
        }
    }
    let rows: Vec<ScanRow> = points
        .par_iter()
        .map(|&lambda| match evaluate_five(&coeffs, lambda, &params) {
            Ok(rec) => ScanRow {
                lambda_re: lambda.re,
                lambda_im: lambda.im,
                record: Some(rec),
                error: None,
            },
            Err(err) => {
                eprintln!("skipping lambda = {lambda}: {err}");
                ScanRow {
                    lambda_re: lambda.re,
                    lambda_im: lambda.im,
                    record: None,
                    error: Some(err.to_string()),
                }
            }
        })
        .collect();
    let body = if args.json {
        serde_json::to_string_pretty(&rows).unwrap() + "\n"
    } else {
        let mut text = String::from(SCAN_HEADER);
        text.push('\n');
        for row in &rows {
            text.push_str(&scan_csv_row(row));
            text.push('\n');
        }
        text
    };
    match &args.out {
        Some(path) => {
            let mut file = std::fs::File::create(path).map_err(|e| {
                SpectraError::InvalidInput(format!("cannot write {}: {e}", path.display()))
            })?;
            file.write_all(body.as_bytes())
                .map_err(|e| SpectraError::InvalidInput(format!("write failed: {e}")))?;
        }
        None => print!("{body}"),
    }
    Ok(0)
}

#[derive(Serialize)]
struct OracleEntry {
    n: usize,
    roots: Vec<f64>,
    gap_to_lambda_star: Option<f64>,
}

#[derive(Serialize)]
struct FindReport {
    lambda_star: C64,
    residual: f64,
    refined_lambda: C64,
    refine_moved: f64,
    winding: i64,
    oracle: Vec<OracleEntry>,
    five_values: FiveFunctionRecord,
}

fn cmd_find(args: FindArgs) -> Result<u8, SpectraError> {
    let coeffs = args.input.coefficients()?;
    let params = args.tuning.params();
    let found = find_real_eigenvalue(&coeffs, &params)?;
    let ls = found.lambda_star;
    let refined = refine_zero(&coeffs, ls, 1.0, &params)?;
    let rect = Rect {
        re_lo: 0.1,
        re_hi: 5.0,
        im_lo: -1.0,
        im_hi: 1.0,
    };
    let winding = winding_number(&coeffs, rect, 32, &params)?;
    let mut oracle = Vec::new();
    for n in [32usize, 64, 128] {
        let roots = finite_section_oracle(&coeffs, n, 5.0, 4000)?;
        let gap = roots
            .iter()
            .map(|r| (r - ls.re).abs())
            .fold(f64::INFINITY, f64::min);
        oracle.push(OracleEntry {
            n,
            roots,
            gap_to_lambda_star: if gap.is_finite() { Some(gap) } else { None },
        });
    }
    let report = FindReport {
        lambda_star: ls,
        residual: found.residual,
        refined_lambda: refined.lambda,
        refine_moved: (refined.lambda - ls).norm(),
        winding,
        oracle,
        five_values: found.five_values,
    };
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report).unwrap());
    } else {
        println!("lambda* = {}", fmt_f(report.lambda_star.re));
        println!("eigensequence residual = {}", fmt_f(report.residual));
        println!(
            "evans refinement moved {} (to {})",
            fmt_f(report.refine_moved),
            fmt_f(report.refined_lambda.re)
        );
        println!(
            "winding number over [0.1, 5] x [-1, 1]i = {}",
            report.winding
        );
        println!("finite-section oracle:");
        for entry in &report.oracle {
            println!(
                "  N = {:>4}: roots {:?} (gap to lambda* = {})",
                entry.n,
                entry.roots,
                entry.gap_to_lambda_star.map_or("-".into(), fmt_f)
            );
        }
        println!(
            "five-function record at lambda*: |values| <= {}",
            fmt_f(
                [
                    report.five_values.det_k,
                    report.five_values.det_t,
                    report.five_values.evans,
                    report.five_values.jost
                ]
                .iter()
                .map(|v| v.norm())
                .fold(0.0, f64::max)
            )
        );
    }
    Ok(0)
}

fn cmd_oracle(args: OracleArgs) -> Result<u8, SpectraError> {
    let coeffs = args.input.coefficients()?;
    let mut entries = Vec::new();
    for part in args.sections.split(',') {
        let n: usize = part
            .trim()
            .parse()
            .map_err(|_| SpectraError::InvalidInput(format!("bad section size {part:?}")))?;
        let roots = finite_section_oracle(&coeffs, n, args.lambda_max, 4000)?;
        entries.push(OracleEntry {
            n,
            roots,
            gap_to_lambda_star: None,
        });
    }
    if args.json {
        println!("{}", serde_json::to_string_pretty(&entries).unwrap());
    } else {
        for entry in &entries {
            let roots: Vec<String> = entry.roots.iter().map(|r| fmt_f(*r)).collect();
            println!("N = {:>4}: [{}]", entry.n, roots.join(", "));
        }
    }
    Ok(0)
}
