//! Regularity diagnostics: derivatives of the projector, Lipschitz bounds,
//! monotonicity probes and the sequential-convergence lab.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::functions::{FunctionSpec, SelectionStrategy};
use crate::projector::sproj;
use crate::vector::{fd_jacobian, inv, Matrix, Vector, EPS_NORM};

fn positive_value(f: &FunctionSpec, x: &Vector) -> Result<f64> {
    let fx = f.eval_finite(x)?;
    if fx <= 0.0 {
        return Err(Error::NotPositiveHere { value: fx });
    }
    Ok(fx)
}

fn smooth_gradient(f: &FunctionSpec, x: &Vector) -> Result<Vector> {
    f.gradient(x).map_err(|e| match e {
        Error::NotDifferentiableHere(m) => Error::NotTwiceDifferentiable(m),
        other => other,
    })
}

/// Jacobian of `x ↦ G_f x` on `{f > 0}`:
/// `I − ggᵀ/‖g‖² − (f/‖g‖²)H + (2f/‖g‖⁴)·g(Hg)ᵀ`.
pub fn sproj_jacobian(f: &FunctionSpec, x: &Vector) -> Result<Matrix> {
    let fx = positive_value(f, x)?;
    let g = smooth_gradient(f, x)?;
    let h = f.hessian(x)?;
    let n2 = g.norm_sq();
    if n2.sqrt() <= EPS_NORM {
        return Err(Error::ZeroSubgradient { value: fx });
    }
    let n = x.dim();
    let hg = g.transform(&h);
    Ok(Matrix::identity(n, n) - g.outer(&g) / n2 - h * (fx / n2) + g.outer(&hg) * (2.0 * fx / (n2 * n2)))
}

/// Central-difference Jacobian of `x ↦ G_f x` (least-index selection).
pub fn fd_sproj_jacobian(f: &FunctionSpec, x: &Vector, h: f64) -> Result<Matrix> {
    fd_jacobian(|y: &Vector| sproj(f, y, SelectionStrategy::LeastIndexActive).map(|o| o.point), x, h)
}

/// `(G_f)′(x)` in one dimension: `1` where `f < 0`, `f″f/f′²` where `f > 0`.
pub fn sproj_deriv_1d(f: &FunctionSpec, x: f64) -> Result<f64> {
    if f.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: f.dim() });
    }
    let xv = Vector::scalar(x)?;
    let fx = f.eval_finite(&xv)?;
    if fx == 0.0 {
        return Err(Error::ZeroFunctionValue);
    }
    if fx < 0.0 {
        return Ok(1.0);
    }
    let d1 = smooth_gradient(f, &xv)?.first();
    let d2 = f.hessian(&xv)?[(0, 0)];
    if d1.abs() <= EPS_NORM {
        return Err(Error::ZeroSubgradient { value: fx });
    }
    Ok(d2 * fx / (d1 * d1))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipschitzReport {
    /// Bound from the formula matching the dimension.
    pub bound: f64,
    /// Largest sampled `‖Gx − Gy‖/‖x − y‖` over pairs of distinct samples.
    pub max_quotient: f64,
    pub sup_abs_f: f64,
    pub inf_grad_sq: f64,
}

impl LipschitzReport {
    pub fn holds(&self) -> bool {
        self.max_quotient <= self.bound + 1e-9
    }
}

/// Lipschitz bound of `G_f` on a convex region sampled by `omega ⊂ {f > 0}`,
/// given a Lipschitz constant `beta` of `∇f` there.
///
/// Multi-dimensional: `2 + 3·sup|f|/inf‖∇f‖²·β`; one-dimensional:
/// `max{1, sup f/inf f′²·β}`.
pub fn lipschitz_bound(f: &FunctionSpec, omega: &[Vector], beta: f64) -> Result<LipschitzReport> {
    if omega.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut sup_abs_f: f64 = 0.0;
    let mut inf_grad_sq = f64::INFINITY;
    let mut images = Vec::with_capacity(omega.len());
    for x in omega {
        let fx = positive_value(f, x)?;
        sup_abs_f = sup_abs_f.max(fx.abs());
        inf_grad_sq = inf_grad_sq.min(f.gradient(x)?.norm_sq());
        images.push(sproj(f, x, SelectionStrategy::LeastIndexActive)?.point);
    }
    let ratio = sup_abs_f / inf_grad_sq * beta;
    let bound = if f.dim() == 1 { ratio.max(1.0) } else { 2.0 + 3.0 * ratio };
    let mut max_quotient: f64 = 0.0;
    for i in 0..omega.len() {
        for j in i + 1..omega.len() {
            let d = omega[i].dist(&omega[j]);
            if d > 0.0 {
                max_quotient = max_quotient.max(images[i].dist(&images[j]) / d);
            }
        }
    }
    Ok(LipschitzReport { bound, max_quotient, sup_abs_f, inf_grad_sq })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityReport {
    /// `min ⟨Gx − Gy, x − y⟩` over all pairs.
    pub worst: f64,
    /// Minimum of `‖x−y‖² − ⟨x−y, f(x)·Inv u − f(y)·Inv v⟩` over pairs with
    /// `f(x) > 0` and `f(y) > 0`.
    pub worst_positive_form: Option<f64>,
    /// Largest disagreement between the two forms on those pairs.
    pub form_discrepancy: f64,
}

/// Monotonicity witness of `G_f` on the given pairs.
pub fn monotonicity_probe(
    f: &FunctionSpec,
    pairs: &[(Vector, Vector)],
    s: SelectionStrategy,
) -> Result<MonotonicityReport> {
    if pairs.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut worst = f64::INFINITY;
    let mut worst_positive_form: Option<f64> = None;
    let mut form_discrepancy: f64 = 0.0;
    for (x, y) in pairs {
        let (gx, gy) = (sproj(f, x, s)?, sproj(f, y, s)?);
        let diff = x - y;
        let raw = (&gx.point - &gy.point).dot(&diff);
        worst = worst.min(raw);
        if let (Some(u), Some(v)) = (&gx.subgradient_used, &gy.subgradient_used) {
            let shift = inv(u)?.scale(gx.f_value).add_scaled(-gy.f_value, &inv(v)?);
            let form = diff.norm_sq() - diff.dot(&shift);
            worst_positive_form = Some(worst_positive_form.map_or(form, |w| w.min(form)));
            form_discrepancy = form_discrepancy.max((form - raw).abs());
        }
    }
    Ok(MonotonicityReport { worst, worst_positive_form, form_discrepancy })
}

/// Outcome of the sequential lab.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SeqVerdict {
    /// `f(x) ≤ 0` and `fₙ(x) ≤ 0` eventually: convergence.
    FeasibleLimit,
    /// `f(x) > 0` and `fₙ(x) ≤ 0` infinitely often: a persistent gap.
    RecurringFeasibility,
    /// `f(x) > 0`, `fₙ(x) → f(x)` and `Uₙx → Ux`: convergence.
    ConvergentData,
    Undetermined,
}

impl SeqVerdict {
    pub fn converges(self) -> bool {
        matches!(self, SeqVerdict::FeasibleLimit | SeqVerdict::ConvergentData)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeqReport {
    pub verdict: SeqVerdict,
    /// `max ‖G_{fₙ}x − G_f x‖` over the last `N/4` indices.
    pub tail_deviation: f64,
    /// Smallest deviation at tail indices with `fₙ(x) ≤ 0`.
    pub recurring_gap: Option<f64>,
    /// `f(x)/‖Ux‖`, when `f(x) > 0`.
    pub predicted_gap: Option<f64>,
    /// `‖G_{fₙ}x − G_f x‖` for `n = 1..=N`.
    pub deviations: Vec<f64>,
}

/// Window length used to detect "infinitely often".
pub const RECURRENCE_WINDOW: usize = 4;
/// Data error below which the approximating sequence counts as converged.
pub const DATA_TOL: f64 = 1e-8;

/// Runs `fₙ` for `n = 1..=N` at `x` and classifies the behaviour of
/// `G_{fₙ}x` against `G_f x`.
pub fn seq_lab<F>(family: F, f: &FunctionSpec, x: &Vector, horizon: usize, s: SelectionStrategy) -> Result<SeqReport>
where
    F: Fn(usize) -> Result<FunctionSpec>,
{
    if horizon < RECURRENCE_WINDOW {
        return Err(Error::InvalidParameter(format!("horizon must be ≥ {RECURRENCE_WINDOW}")));
    }
    let limit = sproj(f, x, s)?;
    let fx = limit.f_value;
    let u = limit.subgradient_used.clone();
    let mut values = Vec::with_capacity(horizon);
    let mut deviations = Vec::with_capacity(horizon);
    let mut errors = Vec::with_capacity(horizon);
    for n in 1..=horizon {
        let fn_ = family(n)?;
        let out = sproj(&fn_, x, s)?;
        values.push(out.f_value);
        deviations.push(out.point.dist(&limit.point));
        let un = if out.f_value > 0.0 {
            out.subgradient_used.clone()
        } else {
            fn_.subgradient(x, s).ok()
        };
        let data_error = match (&u, un) {
            (Some(u), Some(un)) => (out.f_value - fx).abs() + u.dist(&un),
            _ => f64::INFINITY,
        };
        errors.push(data_error);
    }
    let tail_start = horizon - (horizon / 4).max(1);
    let tail_deviation = deviations[tail_start..].iter().copied().fold(0.0, f64::max);
    let feasible_at = |n: usize| values[n] <= 0.0;
    let recurring = (0..=horizon - RECURRENCE_WINDOW).all(|s| (s..s + RECURRENCE_WINDOW).any(feasible_at));
    let recurring_gap = (tail_start..horizon)
        .filter(|&n| feasible_at(n))
        .map(|n| deviations[n])
        .fold(None, |acc: Option<f64>, d| Some(acc.map_or(d, |a| a.min(d))));
    let predicted_gap = u.as_ref().map(|u| fx / u.norm());
    let verdict = if fx <= 0.0 {
        if (tail_start..horizon).all(feasible_at) {
            SeqVerdict::FeasibleLimit
        } else {
            SeqVerdict::Undetermined
        }
    } else if recurring {
        SeqVerdict::RecurringFeasibility
    } else {
        let tail_errors = &errors[tail_start..];
        let small = tail_errors.iter().all(|e| *e <= DATA_TOL);
        let half = horizon / 2;
        let decaying = errors[half..].windows(2).all(|w| w[1] <= w[0]) && errors[horizon - 1] <= 0.75 * errors[half - 1];
        if (tail_start..horizon).all(|n| !feasible_at(n)) && (small || decaying) {
            SeqVerdict::ConvergentData
        } else {
            SeqVerdict::Undetermined
        }
    };
    Ok(SeqReport { verdict, tail_deviation, recurring_gap, predicted_gap, deviations })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistBound {
    /// `f(x)/‖u‖`.
    pub lhs: f64,
    /// Distance from `x` to `{f ≤ 0}`.
    pub rhs: f64,
}

impl DistBound {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs + 1e-9
    }
}

/// Compares the step length `f(x)/‖u‖` with the distance to the level set.
pub fn dist_bound_check(f: &FunctionSpec, x: &Vector, s: SelectionStrategy) -> Result<DistBound> {
    let fx = positive_value(f, x)?;
    let u = f.subgradient(x, s)?;
    let un = u.norm();
    if un <= EPS_NORM {
        return Err(Error::ZeroSubgradient { value: fx });
    }
    Ok(DistBound { lhs: fx / un, rhs: f.level_set_distance(x)? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::SetSpec;
    use crate::vector::{max_abs, FD_STEP};

    fn v(c: &[f64]) -> Vector {
        Vector::from_slice(c).unwrap()
    }

    const LIA: SelectionStrategy = SelectionStrategy::LeastIndexActive;

    #[test]
    fn jacobian_examples() {
        let j = sproj_jacobian(&FunctionSpec::neg_log(), &v(&[0.5])).unwrap();
        assert!((j[(0, 0)] - 2f64.ln()).abs() < 1e-15);
        let u = v(&[1.0, 2.0]);
        let j = sproj_jacobian(&FunctionSpec::linear(u.clone()), &v(&[3.0, 3.0])).unwrap();
        let expected = Matrix::identity(2, 2) - u.outer(&u) / 5.0;
        assert!(max_abs(&(j - expected)) < 1e-15);
        assert!(matches!(
            sproj_jacobian(&FunctionSpec::neg_log(), &v(&[2.0])),
            Err(Error::NotPositiveHere { .. })
        ));
    }

    #[test]
    fn jacobian_matches_fd_for_sq_dist() {
        let f = FunctionSpec::sq_dist(SetSpec::ball(v(&[0.0, 0.0]), 1.0).unwrap()).unwrap();
        let x = v(&[2.0, -1.5]);
        let exact = sproj_jacobian(&f, &x).unwrap();
        let fd = fd_sproj_jacobian(&f, &x, FD_STEP).unwrap();
        assert!((&fd - &exact).norm() <= 1e-6 * exact.norm());
    }

    #[test]
    fn hyperbolic_derivative_closed_form() {
        let f = FunctionSpec::hyperbolic(2.0).unwrap();
        let d = sproj_deriv_1d(&f, 2.0).unwrap();
        let expected = (1.0 - 2.0 / 5f64.sqrt()) / 4.0;
        assert!((d - expected).abs() < 1e-15);
    }

    #[test]
    fn deriv_1d_examples() {
        let nl = FunctionSpec::neg_log();
        assert_eq!(sproj_deriv_1d(&nl, 2.0).unwrap(), 1.0);
        assert!((sproj_deriv_1d(&nl, 0.5).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert_eq!(sproj_deriv_1d(&nl, 1.0), Err(Error::ZeroFunctionValue));
        assert_eq!(sproj_deriv_1d(&FunctionSpec::linear(v(&[2.0])), 3.0).unwrap(), 0.0);
    }

    #[test]
    fn lipschitz_examples() {
        let lin = FunctionSpec::linear(v(&[0.0, 1.0]));
        let omega: Vec<Vector> = (1..10).map(|i| v(&[i as f64 * 0.3, i as f64 * 0.7])).collect();
        let r = lipschitz_bound(&lin, &omega, 0.0).unwrap();
        assert_eq!(r.bound, 2.0);
        assert!(r.max_quotient <= 1.0 + 1e-12 && r.holds());
        assert!(matches!(lipschitz_bound(&lin, &[], 1.0), Err(Error::EmptySample)));
        assert!(matches!(lipschitz_bound(&lin, &[v(&[0.0, -1.0])], 1.0), Err(Error::NotPositiveHere { .. })));
    }

    #[test]
    fn monotone_examples() {
        let d = FunctionSpec::dist(SetSpec::ball(v(&[0.0, 0.0]), 1.0).unwrap()).unwrap();
        let pairs = vec![(v(&[2.0, 0.0]), v(&[0.0, 3.0])), (v(&[0.5, 0.0]), v(&[-4.0, 1.0]))];
        let r = monotonicity_probe(&d, &pairs, LIA).unwrap();
        assert!(r.worst >= -1e-12);
        assert!(r.form_discrepancy < 1e-12);
        let same = monotonicity_probe(&d, &[(v(&[2.0, 1.0]), v(&[2.0, 1.0]))], LIA).unwrap();
        assert_eq!(same.worst, 0.0);
    }

    #[test]
    fn seq_lab_families() {
        let u = v(&[3.0, 4.0]);
        let f = FunctionSpec::linear(u.clone());
        let x = v(&[1.0, 1.0]);
        let shifted = |n: usize| {
            FunctionSpec::affine_max(vec![crate::functions::AffinePiece::new(u.clone(), -1.0 / n as f64)])
        };
        let r = seq_lab(shifted, &f, &x, 1000, LIA).unwrap();
        assert_eq!(r.verdict, SeqVerdict::ConvergentData);
        assert!((r.tail_deviation - 1.0 / (751.0 * 5.0)).abs() < 1e-12);
        let fx = 7.0;
        let alternating = |n: usize| {
            let shift = if n % 2 == 0 { 2.0 * fx } else { 0.0 };
            FunctionSpec::affine_max(vec![crate::functions::AffinePiece::new(u.clone(), -shift)])
        };
        let r = seq_lab(alternating, &f, &x, 1000, LIA).unwrap();
        assert_eq!(r.verdict, SeqVerdict::RecurringFeasibility);
        assert!((r.recurring_gap.unwrap() - fx / 5.0).abs() < 1e-12);
        let scaled = |n: usize| FunctionSpec::scale(1.0 + 1.0 / n as f64, f.clone());
        let r = seq_lab(scaled, &f, &v(&[-1.0, -1.0]), 1000, LIA).unwrap();
        assert_eq!(r.verdict, SeqVerdict::FeasibleLimit);
        assert_eq!(r.tail_deviation, 0.0);
    }

    #[test]
    fn dist_bound_examples() {
        let b = dist_bound_check(&FunctionSpec::neg_log(), &v(&[0.5]), LIA).unwrap();
        assert!((b.lhs - 0.5 * 2f64.ln()).abs() < 1e-15 && b.rhs == 0.5 && b.holds());
        let lin = FunctionSpec::linear(v(&[0.0, 1.0]));
        assert_eq!(dist_bound_check(&lin, &v(&[0.0, 3.0]), LIA).unwrap(), DistBound { lhs: 3.0, rhs: 3.0 });
        let d = FunctionSpec::dist(SetSpec::ball(v(&[0.0, 0.0]), 1.0).unwrap()).unwrap();
        let b = dist_bound_check(&d, &v(&[3.0, 4.0]), LIA).unwrap();
        assert_eq!(b.lhs, b.rhs);
    }
}
