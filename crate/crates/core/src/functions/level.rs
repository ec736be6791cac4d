use super::{AffinePiece, FunctionKind, FunctionSpec};
use crate::error::{Error, Result};
use crate::vector::Vector;

/// Sublevel interval `{x : maxᵢ aᵢx + bᵢ ≤ 0}` of a one-dimensional max-affine
/// function; `lo > hi` signals emptiness.
pub(crate) fn affine_interval(pieces: &[AffinePiece]) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for p in pieces {
        let (a, b) = (p.a.first(), p.b);
        if a > 0.0 {
            hi = hi.min(-b / a);
        } else if a < 0.0 {
            lo = lo.max(-b / a);
        } else if b > 0.0 {
            return (f64::INFINITY, f64::NEG_INFINITY);
        }
    }
    (lo, hi)
}

fn clamp1(x: &Vector, lo: f64, hi: f64) -> Result<Vector> {
    Vector::scalar(x.first().clamp(lo, hi))
}

fn halfspace(x: &Vector, u: &Vector, offset: f64) -> Vector {
    let s = x.dot(u) - offset;
    let n2 = u.norm_sq();
    if s <= 0.0 || n2 == 0.0 {
        x.clone()
    } else {
        x.add_scaled(-s / n2, u)
    }
}

impl FunctionSpec {
    /// Metric projection onto `{f ≤ 0}` for functions whose level set has a
    /// closed form.
    pub fn level_set_projection(&self, x: &Vector) -> Result<Vector> {
        x.check_dim(self.dim())?;
        let unsupported = || Error::NoLevelSetOracle(self.label().to_string());
        match self.kind() {
            FunctionKind::Linear { u } => Ok(halfspace(x, u, 0.0)),
            FunctionKind::Dist { set } | FunctionKind::SqDist { set } | FunctionKind::Indicator { set } => {
                set.project(x)
            }
            FunctionKind::NormPow { dim, .. } => Ok(Vector::zeros(*dim)),
            FunctionKind::NegLog => clamp1(x, 1.0, f64::INFINITY),
            FunctionKind::SqrtShift { eta } => clamp1(x, eta * eta, f64::INFINITY),
            FunctionKind::Hyperbolic { eta } => {
                let r = (eta * eta - 1.0).sqrt();
                clamp1(x, -r, r)
            }
            FunctionKind::AffineMax { pieces } => {
                if self.dim() == 1 {
                    let (lo, hi) = affine_interval(pieces);
                    clamp1(x, lo, hi)
                } else if let [piece] = pieces.as_slice() {
                    Ok(halfspace(x, &piece.a, -piece.b))
                } else {
                    Err(unsupported())
                }
            }
            FunctionKind::Scale { f, .. } | FunctionKind::PowerComp { f, .. } | FunctionKind::LeftCompose { f, .. } => {
                f.level_set_projection(x)
            }
            FunctionKind::RightLinear { l, alpha, f } => {
                Ok(f.level_set_projection(&x.transform(l))?.transform_transpose(l).scale(1.0 / alpha))
            }
            FunctionKind::MoreauEnv { gamma, f } => moreau_level_projection(f, *gamma, x).ok_or_else(unsupported),
            _ => Err(unsupported()),
        }
    }

    /// Distance from `x` to `{f ≤ 0}`.
    pub fn level_set_distance(&self, x: &Vector) -> Result<f64> {
        Ok(x.dist(&self.level_set_projection(x)?))
    }
}

fn moreau_level_projection(f: &FunctionSpec, gamma: f64, x: &Vector) -> Option<Vector> {
    match f.kind() {
        FunctionKind::Indicator { set } => set.project(x).ok(),
        FunctionKind::NormPow { dim, .. } => Some(Vector::zeros(*dim)),
        // env(x) = ⟨x,u⟩ − γ‖u‖²/2
        FunctionKind::Linear { u } => Some(halfspace(x, u, 0.5 * gamma * u.norm_sq())),
        FunctionKind::Scale { lambda, f } => moreau_level_projection(f, gamma * lambda, x),
        _ => None,
    }
}
