//! The `project`, `solve` and `analyze` commands.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subproj_core::analysis::{
    dist_bound_check, fd_sproj_jacobian, lipschitz_bound, monotonicity_probe, seq_lab, sproj_jacobian,
};
use subproj_core::feasibility::solve as run_solver;
use subproj_core::projector::sproj;
use subproj_core::{AffinePiece, Error, FunctionKind, FunctionSpec, SelectionStrategy, SolveStatus, Vector, FD_STEP};

use crate::error::{CliError, CliResult};
use crate::file::ProblemFile;
use crate::trace::write_trace;

fn numeric(e: Error) -> CliError {
    CliError::Numeric(e)
}

fn fmt_vec(v: &Vector) -> String {
    let parts: Vec<String> = v.as_slice().iter().map(|x| x.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

/// Parses `0.5`, `1,2` or `[1, 2]`.
pub fn parse_point(text: &str) -> CliResult<Vector> {
    let inner = text.trim().trim_start_matches('[').trim_end_matches(']');
    let coords: Result<Vec<f64>, _> = inner.split(',').map(|c| c.trim().parse::<f64>()).collect();
    let coords = coords.map_err(|e| CliError::Schema(format!("bad point {text:?}: {e}")))?;
    Vector::new(coords).map_err(|e| CliError::Schema(format!("bad point {text:?}: {e}")))
}

/// Parses `least-index`, `centroid` or `endpoint:K`.
pub fn parse_strategy(text: &str) -> Result<SelectionStrategy, String> {
    match text {
        "least-index" => Ok(SelectionStrategy::LeastIndexActive),
        "centroid" => Ok(SelectionStrategy::CentroidActive),
        other => other
            .strip_prefix("endpoint:")
            .and_then(|k| k.parse().ok())
            .map(|k| SelectionStrategy::EndpointK { k })
            .ok_or_else(|| format!("unknown strategy {other:?}; use least-index, centroid or endpoint:K")),
    }
}

fn checked_point(file: &ProblemFile, point: &Vector) -> CliResult<()> {
    if point.dim() != file.dimension {
        return Err(CliError::Schema(format!("point has dimension {}, file has {}", point.dim(), file.dimension)));
    }
    Ok(())
}

pub fn project(file: &ProblemFile, point: &Vector, s: SelectionStrategy) -> CliResult<String> {
    let f = file.single_function()?;
    checked_point(file, point)?;
    let out = sproj(f, point, s).map_err(numeric)?;
    let mut text = String::new();
    writeln!(text, "point: {}", fmt_vec(&out.point)).unwrap();
    writeln!(text, "status: {:?}", out.status).unwrap();
    writeln!(text, "f_value: {}", out.f_value).unwrap();
    let u = out.subgradient_used.as_ref().map_or_else(|| "none".to_string(), fmt_vec);
    writeln!(text, "subgradient: {u}").unwrap();
    Ok(text)
}

pub struct SolveReport {
    pub text: String,
    pub status: SolveStatus,
}

pub fn solve(file: &ProblemFile, trace_path: Option<&Path>, s: SelectionStrategy) -> CliResult<SolveReport> {
    let p = file.to_problem(s);
    p.validate().map_err(CliError::Invalid)?;
    let (x, trace) = run_solver(&p).map_err(numeric)?;
    if let Some(path) = trace_path {
        let io = |source| CliError::Io { path: path.to_path_buf(), source };
        let out = std::fs::File::create(path).map_err(io)?;
        let mut buf = std::io::BufWriter::new(out);
        write_trace(&trace, p.feasible_witness.is_some(), &mut buf).map_err(io)?;
        std::io::Write::flush(&mut buf).map_err(io)?;
    }
    let mut text = String::new();
    writeln!(text, "status: {:?}", trace.status).unwrap();
    writeln!(text, "final_residual: {:.16e}", trace.final_residual).unwrap();
    writeln!(text, "iterations: {}", trace.records.len()).unwrap();
    writeln!(text, "x: {}", fmt_vec(&x)).unwrap();
    Ok(SolveReport { text, status: trace.status })
}

/// Approximating sequences offered by `analyze seqlab`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Family {
    /// `(1 + 1/n)·f`.
    Scale,
    /// `f − 1/n`.
    Shift,
    /// `f − 2f(x)` for even `n`, `f` for odd `n`.
    Alternating,
}

/// `f − a` for affine `f`.
fn shifted(f: &FunctionSpec, a: f64) -> subproj_core::Result<FunctionSpec> {
    match f.kind() {
        FunctionKind::Linear { u } => FunctionSpec::affine_max(vec![AffinePiece::new(u.clone(), -a)]),
        FunctionKind::AffineMax { pieces } => {
            FunctionSpec::affine_max(pieces.iter().map(|p| AffinePiece::new(p.a.clone(), p.b - a)).collect())
        }
        _ => Err(Error::UnsupportedAtom(format!("shifted families need an affine function, got {}", f.label()))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Analysis {
    Jacobian,
    Lipschitz,
    Monotone,
    Seqlab,
    Distbound,
}

/// Parameters shared by the diagnostics.
#[derive(Debug, Clone)]
pub struct AnalyzeParams {
    pub point: Vector,
    pub strategy: SelectionStrategy,
    pub seed: u64,
    pub pairs: usize,
    pub samples: usize,
    pub radius: f64,
    pub beta: f64,
    pub horizon: usize,
    pub family: Family,
}

fn around(rng: &mut ChaCha8Rng, center: &Vector, radius: f64) -> Vector {
    let offset: Vec<f64> = (0..center.dim()).map(|_| rng.random_range(-radius..=radius)).collect();
    center + &Vector::new(offset).expect("finite sample")
}

pub fn analyze(file: &ProblemFile, what: Analysis, a: &AnalyzeParams) -> CliResult<String> {
    let f = file.single_function()?;
    checked_point(file, &a.point)?;
    let x = &a.point;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut t = String::new();
    match what {
        Analysis::Jacobian => {
            let j = sproj_jacobian(f, x).map_err(numeric)?;
            let fd = fd_sproj_jacobian(f, x, FD_STEP).map_err(numeric)?;
            writeln!(t, "row\tentries\tfd_deviation").unwrap();
            for i in 0..j.nrows() {
                let entries: Vec<String> = j.row(i).iter().map(|v| format!("{v:.16e}")).collect();
                let dev = (j.row(i) - fd.row(i)).norm();
                writeln!(t, "{i}\t{}\t{dev:.3e}", entries.join(" ")).unwrap();
            }
            writeln!(t, "relative_deviation: {:.3e}", (&fd - &j).norm() / j.norm().max(f64::MIN_POSITIVE)).unwrap();
        }
        Analysis::Lipschitz => {
            let omega: Vec<Vector> = (0..a.samples).map(|_| around(&mut rng, x, a.radius)).collect();
            let r = lipschitz_bound(f, &omega, a.beta).map_err(numeric)?;
            writeln!(t, "bound: {:.16e}", r.bound).unwrap();
            writeln!(t, "max_quotient: {:.16e}", r.max_quotient).unwrap();
            writeln!(t, "sup_abs_f: {:.16e}", r.sup_abs_f).unwrap();
            writeln!(t, "inf_grad_sq: {:.16e}", r.inf_grad_sq).unwrap();
            writeln!(t, "holds: {}", if r.holds() { "OK" } else { "VIOLATED" }).unwrap();
        }
        Analysis::Monotone => {
            let pairs: Vec<(Vector, Vector)> =
                (0..a.pairs).map(|_| (around(&mut rng, x, a.radius), around(&mut rng, x, a.radius))).collect();
            let r = monotonicity_probe(f, &pairs, a.strategy).map_err(numeric)?;
            writeln!(t, "pairs: {}", pairs.len()).unwrap();
            writeln!(t, "worst: {:.16e}", r.worst).unwrap();
            match r.worst_positive_form {
                Some(w) => writeln!(t, "worst_positive_form: {w:.16e}").unwrap(),
                None => writeln!(t, "worst_positive_form: none").unwrap(),
            }
            writeln!(t, "form_discrepancy: {:.3e}", r.form_discrepancy).unwrap();
        }
        Analysis::Seqlab => {
            let fx = f.eval_finite(x).map_err(numeric)?;
            let family = |n: usize| match a.family {
                Family::Scale => FunctionSpec::scale(1.0 + 1.0 / n as f64, f.clone()),
                Family::Shift => shifted(f, 1.0 / n as f64),
                Family::Alternating => shifted(f, if n % 2 == 0 { 2.0 * fx.abs() } else { 0.0 }),
            };
            let r = seq_lab(family, f, x, a.horizon, a.strategy).map_err(numeric)?;
            writeln!(t, "verdict: {:?}", r.verdict).unwrap();
            writeln!(t, "tail_deviation: {:.16e}", r.tail_deviation).unwrap();
            let opt = |o: Option<f64>| o.map_or_else(|| "none".to_string(), |v| format!("{v:.16e}"));
            writeln!(t, "recurring_gap: {}", opt(r.recurring_gap)).unwrap();
            writeln!(t, "predicted_gap: {}", opt(r.predicted_gap)).unwrap();
        }
        Analysis::Distbound => {
            let b = dist_bound_check(f, x, a.strategy).map_err(numeric)?;
            writeln!(t, "lhs: {:.16e}", b.lhs).unwrap();
            writeln!(t, "rhs: {:.16e}", b.rhs).unwrap();
            writeln!(t, "holds: {}", if b.holds() { "OK" } else { "VIOLATED" }).unwrap();
        }
    }
    Ok(t)
}
