//! Projector calculus: closed-form rules for scaled, composed, combined and
//! inf-convolved functions.

use crate::error::{Error, Result};
use crate::functions::{scaled_orthogonal_factor, FunctionSpec, JointSelection, ScalarMap, SelectionStrategy};
use crate::projector::{sproj, ProjOutcome};
use crate::vector::{Matrix, Vector, EPS_NORM};

const LIA: SelectionStrategy = SelectionStrategy::LeastIndexActive;

/// Row of the sign table for a pair `(f, g)` and their combination `h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseRow {
    /// `f ≤ 0` and `g ≤ 0`.
    BothFeasible,
    /// `f ≤ 0 < g`, with the sign of `h`.
    SecondViolated { combined_positive: bool },
    /// `g ≤ 0 < f`, with the sign of `h`.
    FirstViolated { combined_positive: bool },
    /// `f > 0` and `g > 0`.
    BothViolated,
}

/// Output of a case-table rule.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseOutcome {
    pub point: Vector,
    pub row: CaseRow,
    /// The uncorrected combination of the partial projections.
    pub combination: Vector,
    /// `f·g ≥ 0` at the relevant points; then `point == combination`.
    pub splits: bool,
}

fn unit_step(u: &Vector) -> Result<f64> {
    let n2 = u.norm_sq();
    if n2.sqrt() <= EPS_NORM {
        return Err(Error::ZeroSubgradient { value: f64::NAN });
    }
    Ok(1.0 / n2)
}

/// `z − [v]⁺/‖u‖²·u`.
fn partial(z: &Vector, v: f64, u: &Vector, inv_n2: f64) -> Vector {
    z.add_scaled(-v.max(0.0) * inv_n2, u)
}

/// `G_{λf}` computed through the spec `λf`, whose selection is `λU`.
pub fn sproj_scale(lambda: f64, f: &FunctionSpec, x: &Vector, s: SelectionStrategy) -> Result<ProjOutcome> {
    sproj(&FunctionSpec::scale(lambda, f.clone())?, x, s)
}

/// `x + φ(f)/(f·φ′(f))·(G_f x − x)` for a differentiable `f`.
pub fn sproj_leftcompose(phi: &ScalarMap, f: &FunctionSpec, x: &Vector) -> Result<Vector> {
    let fx = f.eval_finite(x)?;
    if fx <= 0.0 {
        return Ok(x.clone());
    }
    let d = phi.derivative(fx);
    if !phi.in_range(fx) || !(d > 0.0) {
        return Err(Error::NonMonotonePhi { t: fx, derivative: d });
    }
    f.gradient(x)?;
    let g = sproj(f, x, LIA)?.point;
    let ratio = phi.value(fx) / (fx * d);
    Ok(x.add_scaled(ratio, &(&g - x)))
}

/// `G_{f^{1/α}} = (1−α)x + α·G_f x`.
pub fn sproj_power(alpha: f64, f: &FunctionSpec, x: &Vector, s: SelectionStrategy) -> Result<Vector> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    let fx = f.eval_finite(x)?;
    if !f.certified_nonnegative() && fx < -1e-12 {
        return Err(Error::NegativeBaseError { value: fx });
    }
    let g = sproj(f, x, s)?.point;
    Ok(x.scale(1.0 - alpha).add_scaled(alpha, &g))
}

/// `α⁻¹·Lᵀ G_f(Ly)` for `LᵀL = LLᵀ = αI`.
pub fn sproj_rightlinear(l: &Matrix, f: &FunctionSpec, y: &Vector, s: SelectionStrategy) -> Result<Vector> {
    let alpha = scaled_orthogonal_factor(l)?;
    if l.nrows() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: l.nrows() });
    }
    y.check_dim(f.dim())?;
    let g = sproj(f, &y.transform(l), s)?.point;
    Ok(g.transform_transpose(l).scale(1.0 / alpha))
}

/// `Lᵀ G_f(Ly)` for an arbitrary square `L`, via
/// `LᵀLy − ‖LᵀULy‖²/‖ULy‖²·(y − G_{f∘L}y)`; `U` is the least-index selection.
pub fn general_linear_identity(l: &Matrix, f: &FunctionSpec, y: &Vector) -> Result<Vector> {
    let ly = y.transform(l);
    let fx = f.eval_finite(&ly)?;
    let lt_l_y = ly.transform_transpose(l);
    if fx <= 0.0 {
        return Ok(lt_l_y);
    }
    let u = f.subgradient(&ly, LIA)?;
    let lu = u.transform_transpose(l);
    let lu_n2 = lu.norm_sq();
    if lu_n2.sqrt() <= EPS_NORM {
        return Err(Error::ZeroSubgradient { value: fx });
    }
    let composed = y.add_scaled(-fx / lu_n2, &lu);
    Ok(lt_l_y.add_scaled(-lu_n2 / u.norm_sq(), &(y - &composed)))
}

fn sign_row(f: f64, g: f64, h: f64) -> CaseRow {
    match (f > 0.0, g > 0.0) {
        (false, false) => CaseRow::BothFeasible,
        (false, true) => CaseRow::SecondViolated { combined_positive: h > 0.0 },
        (true, false) => CaseRow::FirstViolated { combined_positive: h > 0.0 },
        (true, true) => CaseRow::BothViolated,
    }
}

/// Projector of `αf + (1−α)g` under a joint selection, by the sign table.
pub fn sproj_convexcomb(
    alpha: f64,
    f: &FunctionSpec,
    g: &FunctionSpec,
    joint: &JointSelection,
    x: &Vector,
) -> Result<CaseOutcome> {
    let h = FunctionSpec::convex_comb(alpha, f.clone(), g.clone(), joint.clone())?;
    let (fx, gx) = (f.eval_finite(x)?, g.eval_finite(x)?);
    let hx = alpha * fx + (1.0 - alpha) * gx;
    let row = sign_row(fx, gx, hx);
    if row == CaseRow::BothFeasible {
        return Ok(CaseOutcome { point: x.clone(), row, combination: x.clone(), splits: true });
    }
    let u = h.subgradient(x, LIA)?;
    let inv = unit_step(&u)?;
    let combination = partial(x, fx, &u, inv).scale(alpha).add_scaled(1.0 - alpha, &partial(x, gx, &u, inv));
    let correction = match row {
        CaseRow::SecondViolated { combined_positive: false } => (1.0 - alpha) * gx * inv,
        CaseRow::SecondViolated { combined_positive: true } => -alpha * fx * inv,
        CaseRow::FirstViolated { combined_positive: false } => alpha * fx * inv,
        CaseRow::FirstViolated { combined_positive: true } => -(1.0 - alpha) * gx * inv,
        CaseRow::BothViolated | CaseRow::BothFeasible => 0.0,
    };
    let point = combination.add_scaled(correction, &u);
    Ok(CaseOutcome { point, row, combination, splits: fx * gx >= 0.0 })
}

/// Projector of `f + g` under the selection `2U`: the mean of the partial
/// projections plus `min(|f|,|g|)/(2‖u‖²)·u` when the signs differ.
pub fn sproj_sum(f: &FunctionSpec, g: &FunctionSpec, joint: &JointSelection, x: &Vector) -> Result<CaseOutcome> {
    let h = FunctionSpec::sum_pair(f.clone(), g.clone(), joint.clone())?;
    let (fx, gx) = (f.eval_finite(x)?, g.eval_finite(x)?);
    let row = sign_row(fx, gx, fx + gx);
    if row == CaseRow::BothFeasible {
        return Ok(CaseOutcome { point: x.clone(), row, combination: x.clone(), splits: true });
    }
    let u = h.subgradient(x, LIA)?.scale(0.5);
    let inv = unit_step(&u)?;
    let combination = partial(x, fx, &u, inv).scale(0.5).add_scaled(0.5, &partial(x, gx, &u, inv));
    let splits = fx * gx >= 0.0;
    let point = if splits {
        combination.clone()
    } else {
        combination.add_scaled(fx.abs().min(gx.abs()) * inv / 2.0, &u)
    };
    Ok(CaseOutcome { point, row, combination, splits })
}

/// Projector of the exact inf-convolution `f □ g` at `x`, from the split
/// `y = Mx` and the sign table on `(f(y), g(x−y))`.
pub fn sproj_infconv(h: &FunctionSpec, x: &Vector) -> Result<CaseOutcome> {
    let (f, g) = match h.kind() {
        crate::functions::FunctionKind::InfConv { f, g, .. } => (f, g),
        _ => return Err(Error::InvalidParameter(format!("{} is not an inf-convolution", h.label()))),
    };
    let y = h.inf_conv_split(x)?;
    let rest = x - &y;
    let (fy, gr) = (f.eval_finite(&y)?, g.eval_finite(&rest)?);
    let row = sign_row(fy, gr, fy + gr);
    if row == CaseRow::BothFeasible {
        return Ok(CaseOutcome { point: x.clone(), row, combination: x.clone(), splits: true });
    }
    let u = h.subgradient(x, LIA)?;
    let inv = unit_step(&u)?;
    let combination = &partial(&y, fy, &u, inv) + &partial(&rest, gr, &u, inv);
    let correction = match row {
        CaseRow::SecondViolated { combined_positive: false } => gr * inv,
        CaseRow::SecondViolated { combined_positive: true } => -fy * inv,
        CaseRow::FirstViolated { combined_positive: false } => fy * inv,
        CaseRow::FirstViolated { combined_positive: true } => -gr * inv,
        CaseRow::BothViolated | CaseRow::BothFeasible => 0.0,
    };
    let point = combination.add_scaled(correction, &u);
    Ok(CaseOutcome { point, row, combination, splits: fy * gr >= 0.0 })
}

/// Distances compared by the acceleration lemma for `φ = |·|^α`.
#[derive(Debug, Clone, PartialEq)]
pub struct AccelerationReport {
    /// `‖x − G_f x‖ − ‖x − G_{f^α} x‖`.
    pub gap: f64,
    /// `f(x)/‖∇f(x)‖·(1 − 1/α)`.
    pub predicted: f64,
    /// `‖G_f x − P x‖` and `‖G_{f^α} x − P x‖` with `P` the projection onto
    /// `{f ≤ 0}`, when it is computable.
    pub level_distances: Option<(f64, f64)>,
}

/// Compares `G_f` with the projector of `f^α`, `α ∈ (0,1]`.
pub fn acceleration_gap(f: &FunctionSpec, alpha: f64, x: &Vector) -> Result<AccelerationReport> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0,1], got {alpha}")));
    }
    let fx = f.eval_finite(x)?;
    if fx <= 0.0 {
        return Err(Error::NotPositiveHere { value: fx });
    }
    if !f.certified_nonnegative() {
        return Err(Error::InvalidParameter("acceleration needs a certified nonnegative function".into()));
    }
    let grad = f.gradient(x)?;
    let plain = sproj(f, x, LIA)?.point;
    let accelerated = sproj(&FunctionSpec::power_comp(1.0 / alpha, f.clone())?, x, LIA)?.point;
    let gap = x.dist(&plain) - x.dist(&accelerated);
    let predicted = fx / grad.norm() * (1.0 - 1.0 / alpha);
    let level_distances = match f.level_set_projection(x) {
        Ok(p) => Some((plain.dist(&p), accelerated.dist(&p))),
        Err(Error::NoLevelSetOracle(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(AccelerationReport { gap, predicted, level_distances })
}
