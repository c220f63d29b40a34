//! Command-line frontend for the rotation-optimization library: best-fit
//! rotation alignment, trace optimization under one linear constraint,
//! diagonal and strict-upper-triangle feasibility, and planar image
//! sampling.
//!
//! Solver commands print a single-line JSON report to stdout (command
//! name, SHA-256 digest of the inputs, values, residuals, wall time) and
//! optionally write produced matrices or point lists to `--out`.  Exit
//! codes: 0 success, 2 usage or parse error, 3 infeasible, 4 numerical
//! failure.

mod io;
mod report;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::{DMatrix, DVector};
use rotopt::diag::{
    construct_with_diagonal, decide_diag_feasibility, DiagFeasibility, PolyhedralSet,
};
use rotopt::linalg::{inner, orth_residual, special_trace, trace_norm};
use rotopt::one_constraint::{image_boundary_polygon, round_certificate, solve_one_constraint};
use rotopt::parity::pp_separate;
use rotopt::sut::{
    construct_x_rho, diag_bounds, project_sut, sut_opt_orth, sut_opt_special, SignPattern,
    SutVector,
};
use rotopt::Error;
use std::path::PathBuf;
use std::time::Instant;

use report::{digest_inputs, CertificateReport, CutReport, Residuals, RunReport};

// ── Failure handling ─────────────────────────────────────────────────────────

/// Everything that can go wrong in a command: usage problems detected by
/// the frontend itself, or errors reported by the library.
pub enum Failure {
    Usage(String),
    Lib(Error),
}

impl Failure {
    pub fn usage(msg: impl Into<String>) -> Self {
        Failure::Usage(msg.into())
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

/// Map library errors to the exit-code contract: malformed or oversized
/// inputs are usage errors (2), provably unsatisfiable constraints are
/// infeasibility (3), and numerical breakdowns are failures (4).
fn lib_exit_code(e: &Error) -> i32 {
    match e {
        Error::NonFinite { .. }
        | Error::DimensionMismatch { .. }
        | Error::TooManyVectors { .. }
        | Error::DimensionTooLarge { .. } => 2,
        Error::NotInParityPolytope { .. }
        | Error::NotMajorized { .. }
        | Error::Infeasible { .. }
        | Error::NotFound { .. } => 3,
        Error::SvdFailed
        | Error::NotInterior { .. }
        | Error::SingularBlock { .. }
        | Error::RankDeficient { .. } => 4,
    }
}

// ── Command-line surface ─────────────────────────────────────────────────────

#[derive(Parser)]
#[command(
    name = "rotopt",
    version,
    about = "Feasibility and linear optimization over rotation matrices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Best-fit rotation aligning paired vectors (rows of two files).
    Wahba(WahbaArgs),
    /// Maximize ⟨A,X⟩ over rotations with ⟨B,X⟩ confined to an interval.
    Opt1(Opt1Args),
    /// Build a rotation with a prescribed diagonal, or decide whether any
    /// rotation diagonal satisfies a system of linear inequalities.
    Diag(DiagArgs),
    /// Complete fixed strict-upper-triangle entries to a full orthogonal
    /// matrix, or optimize a diagonal objective over all completions.
    Sut(SutArgs),
    /// Sample boundary support points of the planar image (⟨A,X⟩, ⟨B,X⟩).
    Image(ImageArgs),
}

#[derive(Args)]
struct WahbaArgs {
    /// Observed vectors, one per row.
    obs: PathBuf,
    /// Reference vectors, one per row (same shape as OBS).
    reference: PathBuf,
    /// Write the aligning rotation to this file (CSV, or JSON for `.json`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Opt1Args {
    /// Objective matrix A (square).
    a: PathBuf,
    /// Constraint matrix B (square, same size as A); requires --lo/--hi.
    b: Option<PathBuf>,
    /// Lower constraint bound on ⟨B,X⟩.
    #[arg(long)]
    lo: Option<f64>,
    /// Upper constraint bound on ⟨B,X⟩.
    #[arg(long)]
    hi: Option<f64>,
    /// Rotation-distance preset: constrain ⟨X0,X⟩ ≥ 1 + 2·cos(ANGLE),
    /// keeping X within the given angle of X0 for n = 3.  Requires --x0.
    #[arg(long, conflicts_with_all = ["b", "lo", "hi"])]
    angle: Option<f64>,
    /// Anchor rotation for --angle.
    #[arg(long, requires = "angle")]
    x0: Option<PathBuf>,
    /// Solution accuracy.
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    /// Write the rounded rotation to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DiagArgs {
    /// Target diagonal d: construct a rotation with diag(X) = d.
    #[arg(long, conflicts_with = "ineq")]
    target: Option<PathBuf>,
    /// Inequality rows `a₁,…,aₙ,b` meaning ⟨a, diag(X)⟩ ≤ b: decide
    /// feasibility of the system over rotation diagonals.
    #[arg(long)]
    ineq: Option<PathBuf>,
    /// Feasibility tolerance.
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    /// Write the constructed rotation to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SutArgs {
    /// Strict upper triangle, row-major: σ₁₂,…,σ₁ₙ,σ₂₃,…  (length n(n−1)/2).
    #[arg(long)]
    sigma: PathBuf,
    /// Sign pattern like "+-+": construct the completion X_ρ(σ).
    #[arg(long, conflicts_with = "opt")]
    rho: Option<String>,
    /// Diagonal objective a: maximize Σ aᵢ·Xᵢᵢ over all completions.
    #[arg(long)]
    opt: Option<PathBuf>,
    /// Group to optimize over: rotations (so) or all orthogonal matrices (o).
    #[arg(long, value_enum, default_value_t = GroupArg::So)]
    group: GroupArg,
    /// Write the completion to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ImageArgs {
    /// First coordinate matrix A (square).
    a: PathBuf,
    /// Second coordinate matrix B (square, same size as A).
    b: PathBuf,
    /// Number of boundary support points to sample.
    #[arg(long, default_value_t = 64)]
    k: usize,
    /// Output file: `.svg` draws the polygon, anything else gets CSV
    /// lines `x1,x2`.  Without --out the CSV goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GroupArg {
    /// Rotations only (determinant +1).
    So,
    /// The full orthogonal group.
    O,
}

// ── Shared helpers ───────────────────────────────────────────────────────────

fn wall_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn write_out(out: &Option<PathBuf>, x: &DMatrix<f64>) -> Result<(), Failure> {
    if let Some(path) = out {
        io::write_matrix(path, x)?;
    }
    Ok(())
}

/// Largest absolute difference between the strict upper triangle of `x`
/// and the requested entries.
fn sut_residual(x: &DMatrix<f64>, sigma: &SutVector) -> f64 {
    project_sut(x)
        .values()
        .iter()
        .zip(sigma.values())
        .map(|(got, want)| (got - want).abs())
        .fold(0.0, f64::max)
}

// ── Commands ─────────────────────────────────────────────────────────────────

/// Rows of `obs` and `reference` are paired vectors `uᵢ ↦ vᵢ`; the best
/// aligning rotation maximizes `⟨Σᵢ vᵢuᵢᵀ, X⟩`, equivalently minimizes
/// `Σᵢ ‖Xuᵢ − vᵢ‖²`.  The report carries that misfit before (X = I) and
/// after alignment; the constraint residual is the remaining misfit.
fn cmd_wahba(args: WahbaArgs) -> Result<i32, Failure> {
    let start = Instant::now();
    let obs = io::read_matrix(&args.obs)?;
    let reference = io::read_matrix(&args.reference)?;
    if obs.shape() != reference.shape() {
        return Err(Failure::usage(format!(
            "observation and reference lists must have the same shape, got {}×{} and {}×{}",
            obs.nrows(),
            obs.ncols(),
            reference.nrows(),
            reference.ncols()
        )));
    }
    let m = reference.transpose() * &obs;
    let (value, x) = special_trace(&m)?;
    // Σᵢ ‖Xuᵢ − vᵢ‖² over rows = ‖obs·Xᵀ − reference‖²_F.
    let misfit = |r: &DMatrix<f64>| (&obs * r.transpose() - &reference).norm_squared();
    let fit_after = misfit(&x);

    let mut rep = RunReport::new("wahba", digest_inputs(&[&args.obs, &args.reference])?);
    rep.value = Some(value);
    rep.fit_before = Some(misfit(&DMatrix::identity(m.nrows(), m.ncols())));
    rep.fit_after = Some(fit_after);
    rep.residuals = Some(Residuals {
        orth: orth_residual(&x),
        constraint: fit_after,
    });
    rep.matrix = Some(io::matrix_rows(&x));
    write_out(&args.out, &x)?;
    rep.wall_ms = wall_ms(start);
    rep.emit();
    Ok(0)
}

/// Maximize `⟨A,X⟩` over rotations subject to `lo ≤ ⟨B,X⟩ ≤ hi`.  The
/// `--angle`/`--x0` preset sets `B = X0`, `lo = 1 + 2·cos(angle)` and
/// `hi` to the unconstrained maximum of `⟨X0,·⟩`, i.e. keeps `X` within
/// the given rotation angle of `X0` when n = 3.  The reported matrix is
/// the support rounding of the certificate direction, with its distance
/// from the constraint interval as the constraint residual.
fn cmd_opt1(args: Opt1Args) -> Result<i32, Failure> {
    let start = Instant::now();
    let a = io::read_square_matrix(&args.a)?;
    let (b, lo, hi, digest) = match (&args.b, args.lo, args.hi, args.angle, &args.x0) {
        (Some(b_path), Some(lo), Some(hi), None, None) => {
            let b = io::read_square_matrix(b_path)?;
            (b, lo, hi, digest_inputs(&[&args.a, b_path])?)
        }
        (None, None, None, Some(angle), Some(x0_path)) => {
            let b = io::read_square_matrix(x0_path)?;
            let lo = 1.0 + 2.0 * angle.cos();
            let hi = trace_norm(&b)?;
            (b, lo, hi, digest_inputs(&[&args.a, x0_path])?)
        }
        _ => {
            return Err(Failure::usage(
                "provide either B with --lo and --hi, or --angle with --x0".to_string(),
            ));
        }
    };
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(Failure::usage(format!(
            "constraint interval must be finite with lo ≤ hi, got [{lo}, {hi}]"
        )));
    }
    if !(args.eps > 0.0 && args.eps.is_finite()) {
        return Err(Failure::usage("--eps must be positive".to_string()));
    }
    if a.shape() != b.shape() {
        return Err(Failure::usage(format!(
            "A and B must have the same size, got {}×{} and {}×{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }

    let mut rep = RunReport::new("opt1", digest);
    let sol = match solve_one_constraint(&a, &b, (lo, hi), args.eps) {
        Ok(sol) => sol,
        Err(Error::Infeasible { margin }) => {
            rep.infeasible = Some(true);
            rep.margin = Some(margin);
            rep.wall_ms = wall_ms(start);
            rep.emit();
            return Ok(3);
        }
        Err(e) => return Err(e.into()),
    };
    let x = round_certificate(&a, &b, &sol.certificate)?;
    let constraint_value = inner(&b, &x);
    let interval_distance = (lo - constraint_value)
        .max(constraint_value - hi)
        .max(0.0);

    rep.value = Some(sol.value);
    rep.point = Some([sol.point.x, sol.point.y]);
    rep.certificate = Some(CertificateReport {
        alpha: sol.certificate.alpha,
        beta: sol.certificate.beta,
        slack: sol.certificate.slack,
    });
    rep.oracle_calls = Some(sol.oracle_calls);
    rep.residuals = Some(Residuals {
        orth: orth_residual(&x),
        constraint: interval_distance,
    });
    rep.matrix = Some(io::matrix_rows(&x));
    write_out(&args.out, &x)?;
    rep.wall_ms = wall_ms(start);
    rep.emit();
    Ok(0)
}

/// `--target d`: construct a rotation with diagonal exactly `d`, or report
/// the violated facet of the attainable-diagonal polytope and exit 3.
/// `--ineq rows`: decide whether any rotation diagonal satisfies all
/// inequalities `⟨a, diag(X)⟩ ≤ b` within `eps`.
fn cmd_diag(args: DiagArgs) -> Result<i32, Failure> {
    let start = Instant::now();
    if !(args.eps > 0.0 && args.eps.is_finite()) {
        return Err(Failure::usage("--eps must be positive".to_string()));
    }
    match (&args.target, &args.ineq) {
        (Some(target_path), None) => {
            let d = DVector::from_vec(io::read_vector(target_path)?);
            let mut rep = RunReport::new("diag", digest_inputs(&[target_path])?);
            match construct_with_diagonal(&d) {
                Ok(x) => {
                    let diag_err = (0..d.len())
                        .map(|i| (x[(i, i)] - d[i]).abs())
                        .fold(0.0, f64::max);
                    rep.residuals = Some(Residuals {
                        orth: orth_residual(&x),
                        constraint: diag_err,
                    });
                    rep.matrix = Some(io::matrix_rows(&x));
                    write_out(&args.out, &x)?;
                    rep.wall_ms = wall_ms(start);
                    rep.emit();
                    Ok(0)
                }
                Err(Error::NotInParityPolytope { violation }) => {
                    rep.infeasible = Some(true);
                    rep.margin = Some(violation);
                    rep.cut = pp_separate(&d)?.map(|cut| CutReport {
                        normal: cut.normal(d.len()).iter().copied().collect(),
                        rhs: cut.rhs(d.len()),
                        violation: cut.violation(&d),
                    });
                    rep.wall_ms = wall_ms(start);
                    rep.emit();
                    Ok(3)
                }
                Err(e) => Err(e.into()),
            }
        }
        (None, Some(ineq_path)) => {
            let rows_matrix = io::read_matrix(ineq_path)?;
            if rows_matrix.ncols() < 2 {
                return Err(Failure::usage(format!(
                    "{}: inequality rows need at least one coefficient and a bound",
                    ineq_path.display()
                )));
            }
            let n = rows_matrix.ncols() - 1;
            let rows = (0..rows_matrix.nrows())
                .map(|i| {
                    let normal = DVector::from_fn(n, |j, _| rows_matrix[(i, j)]);
                    (normal, rows_matrix[(i, n)])
                })
                .collect();
            let set = PolyhedralSet::new(n, rows)?;
            let mut rep = RunReport::new("diag", digest_inputs(&[ineq_path])?);
            match decide_diag_feasibility(&set, args.eps)? {
                DiagFeasibility::Found(x) => {
                    let worst_violation = set
                        .rows()
                        .iter()
                        .map(|(normal, bound)| {
                            let d = DVector::from_fn(n, |i, _| x[(i, i)]);
                            (normal.dot(&d) - bound).max(0.0)
                        })
                        .fold(0.0, f64::max);
                    rep.residuals = Some(Residuals {
                        orth: orth_residual(&x),
                        constraint: worst_violation,
                    });
                    rep.matrix = Some(io::matrix_rows(&x));
                    write_out(&args.out, &x)?;
                    rep.wall_ms = wall_ms(start);
                    rep.emit();
                    Ok(0)
                }
                DiagFeasibility::InfeasibleUpTo(margin) => {
                    rep.infeasible = Some(true);
                    rep.margin = Some(margin);
                    rep.wall_ms = wall_ms(start);
                    rep.emit();
                    Ok(3)
                }
            }
        }
        _ => Err(Failure::usage(
            "provide exactly one of --target or --ineq".to_string(),
        )),
    }
}

/// Completions of a fixed strict upper triangle: `--rho` picks one sign
/// pattern and constructs it; `--opt` maximizes a diagonal objective over
/// all completions in the chosen group.  Both report the per-coordinate
/// diagonal value pair (alpha/beta) and the reconstruction residual of
/// the requested upper triangle.
fn cmd_sut(args: SutArgs) -> Result<i32, Failure> {
    let start = Instant::now();
    let values = io::read_vector(&args.sigma)?;
    let len = values.len();
    let n = ((1.0 + (1.0 + 8.0 * len as f64).sqrt()) / 2.0).round() as usize;
    if n < 2 || n * (n - 1) / 2 != len {
        return Err(Failure::usage(format!(
            "{}: length {len} is not n(n−1)/2 for any n ≥ 2",
            args.sigma.display()
        )));
    }
    let sigma = SutVector::new(n, values)?;
    let bounds = diag_bounds(&sigma)?;

    let mut rep = RunReport::new("sut", digest_inputs(&[&args.sigma])?);
    rep.diag_alpha = Some(bounds.alpha.iter().copied().collect());
    rep.diag_beta = Some(bounds.beta.iter().copied().collect());

    let x = match (&args.rho, &args.opt) {
        (Some(pattern), None) => {
            if pattern.chars().count() != n || pattern.chars().any(|c| c != '+' && c != '-') {
                return Err(Failure::usage(format!(
                    "--rho must be {n} characters of '+' or '-', got `{pattern}`"
                )));
            }
            let rho = SignPattern::new(
                pattern
                    .chars()
                    .map(|c| if c == '+' { 1.0 } else { -1.0 })
                    .collect(),
            );
            construct_x_rho(&sigma, &rho)?
        }
        (None, Some(opt_path)) => {
            let objective = io::read_vector(opt_path)?;
            if objective.len() != n {
                return Err(Failure::usage(format!(
                    "{}: objective length {} does not match n = {n}",
                    opt_path.display(),
                    objective.len()
                )));
            }
            let a_diag = DVector::from_vec(objective);
            rep.inputs_digest = digest_inputs(&[&args.sigma, opt_path])?;
            match args.group {
                GroupArg::So => {
                    let opt = sut_opt_special(&sigma, &a_diag)?;
                    rep.value = Some(opt.value);
                    rep.gap_bound = Some(opt.gap_bound);
                    opt.x
                }
                GroupArg::O => {
                    let (x, value) = sut_opt_orth(&sigma, &a_diag)?;
                    rep.value = Some(value);
                    rep.gap_bound = Some(0.0);
                    x
                }
            }
        }
        _ => {
            return Err(Failure::usage(
                "provide exactly one of --rho or --opt".to_string(),
            ));
        }
    };

    rep.residuals = Some(Residuals {
        orth: orth_residual(&x),
        constraint: sut_residual(&x, &sigma),
    });
    rep.matrix = Some(io::matrix_rows(&x));
    write_out(&args.out, &x)?;
    rep.wall_ms = wall_ms(start);
    rep.emit();
    Ok(0)
}

/// Sample `k` boundary support points of `{(⟨A,X⟩, ⟨B,X⟩) : X rotation}`.
/// With `--out` the points go to the file (SVG polygon for `.svg`, CSV
/// otherwise) and the JSON report to stdout; without it the CSV itself is
/// the stdout output.
fn cmd_image(args: ImageArgs) -> Result<i32, Failure> {
    let start = Instant::now();
    let a = io::read_square_matrix(&args.a)?;
    let b = io::read_square_matrix(&args.b)?;
    if a.shape() != b.shape() {
        return Err(Failure::usage(format!(
            "A and B must have the same size, got {}×{} and {}×{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    if args.k == 0 {
        return Err(Failure::usage("--k must be at least 1".to_string()));
    }
    let points: Vec<(f64, f64)> = image_boundary_polygon(&a, &b, args.k)?
        .into_iter()
        .map(|p| (p.x, p.y))
        .collect();

    match &args.out {
        None => {
            print!("{}", io::points_csv(&points));
        }
        Some(path) => {
            let text = if path.extension().is_some_and(|e| e == "svg") {
                io::points_svg(&points)
            } else {
                io::points_csv(&points)
            };
            std::fs::write(path, text)
                .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            let mut rep = RunReport::new("image", digest_inputs(&[&args.a, &args.b])?);
            rep.wall_ms = wall_ms(start);
            rep.emit();
        }
    }
    Ok(0)
}

// ── Entry point ──────────────────────────────────────────────────────────────

fn run(cli: Cli) -> Result<i32, Failure> {
    match cli.command {
        Command::Wahba(args) => cmd_wahba(args),
        Command::Opt1(args) => cmd_opt1(args),
        Command::Diag(args) => cmd_diag(args),
        Command::Sut(args) => cmd_sut(args),
        Command::Image(args) => cmd_image(args),
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            lib_exit_code(&e)
        }
    };
    std::process::exit(code);
}
