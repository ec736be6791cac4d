//! Proximity operators with closed forms and the Moreau-envelope projector.

use crate::error::{Error, Result};
use crate::functions::{FunctionKind, FunctionSpec};
use crate::util::competitors;
use crate::vector::{Vector, EPS_NORM};

const AUDIT_COMPETITORS: usize = 8;

/// Whether [`prox`] has a closed form for `f`: indicators, `‖·‖`, `‖·‖²`,
/// linear forms, and positive multiples of these.
pub fn is_prox_friendly(f: &FunctionSpec) -> bool {
    match f.kind() {
        FunctionKind::Indicator { .. } | FunctionKind::Linear { .. } => true,
        FunctionKind::NormPow { p, .. } => *p == 1.0 || *p == 2.0,
        FunctionKind::Scale { f, .. } => is_prox_friendly(f),
        _ => false,
    }
}

fn closed_form(f: &FunctionSpec, gamma: f64, x: &Vector) -> Result<Vector> {
    match f.kind() {
        FunctionKind::Indicator { set } => set.project(x),
        FunctionKind::Linear { u } => Ok(x.add_scaled(-gamma, u)),
        FunctionKind::NormPow { p, .. } if *p == 2.0 => Ok(x.scale(1.0 / (1.0 + 2.0 * gamma))),
        FunctionKind::NormPow { p, .. } if *p == 1.0 => {
            let n = x.norm();
            if n <= gamma {
                Ok(Vector::zeros(x.dim()))
            } else {
                Ok(x.scale(1.0 - gamma / n))
            }
        }
        FunctionKind::Scale { lambda, f } => closed_form(f, gamma * lambda, x),
        _ => Err(Error::UnsupportedAtom(format!("no closed-form prox for {}", f.label()))),
    }
}

fn objective(f: &FunctionSpec, gamma: f64, x: &Vector, y: &Vector) -> Result<f64> {
    Ok(f.eval(y)?.to_f64() + x.dist(y).powi(2) / (2.0 * gamma))
}

/// `prox_{γf}(x)`, the minimizer of `f(y) + ‖x−y‖²/(2γ)`.
///
/// The closed form is audited against random competitors; a failed audit is
/// reported as `InconsistentMinimizer`.
pub fn prox(f: &FunctionSpec, gamma: f64, x: &Vector) -> Result<Vector> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::InvalidParameter(format!("gamma must be positive, got {gamma}")));
    }
    x.check_dim(f.dim())?;
    let p = closed_form(f, gamma, x)?.ensure_finite("prox")?;
    let best = objective(f, gamma, x, &p)?;
    if !best.is_finite() {
        return Err(Error::InconsistentMinimizer { gap: f64::INFINITY });
    }
    let slack = 1e-12 * (1.0 + best.abs());
    for c in competitors(&p, 1.0 + x.norm(), AUDIT_COMPETITORS, 0x7e0) {
        let other = objective(f, gamma, x, &c)?;
        if best > other + slack {
            return Err(Error::InconsistentMinimizer { gap: best - other });
        }
    }
    Ok(p)
}

/// Moreau envelope `f(p) + ‖x−p‖²/(2γ)` with `p = prox_{γf}(x)`.
pub fn moreau_value(f: &FunctionSpec, gamma: f64, x: &Vector) -> Result<f64> {
    let p = prox(f, gamma, x)?;
    objective(f, gamma, x, &p)
}

/// `∇(envelope)(x) = (x − prox_{γf}x)/γ`.
pub fn moreau_gradient(f: &FunctionSpec, gamma: f64, x: &Vector) -> Result<Vector> {
    Ok((x - &prox(f, gamma, x)?).scale(1.0 / gamma))
}

/// Subgradient projector of the Moreau envelope:
/// `x − γ·env(x)/‖x−p‖²·(x−p)` where the envelope is positive.
pub fn sproj_moreau(f: &FunctionSpec, gamma: f64, x: &Vector) -> Result<Vector> {
    let p = prox(f, gamma, x)?;
    let env = objective(f, gamma, x, &p)?;
    if env <= 0.0 {
        return Ok(x.clone());
    }
    let r = x - &p;
    let n2 = r.norm_sq();
    if n2.sqrt() <= EPS_NORM {
        return Err(Error::DegenerateMoreau);
    }
    x.add_scaled(-gamma * env / n2, &r).ensure_finite("Moreau projection")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::SetSpec;
    use crate::vector::{fd_gradient, FD_STEP};

    fn v(c: &[f64]) -> Vector {
        Vector::from_slice(c).unwrap()
    }

    fn unit_ball_indicator() -> FunctionSpec {
        FunctionSpec::indicator(SetSpec::ball(v(&[0.0, 0.0]), 1.0).unwrap()).unwrap()
    }

    #[test]
    fn prox_examples() {
        assert_eq!(prox(&unit_ball_indicator(), 1.0, &v(&[3.0, 0.0])).unwrap(), v(&[1.0, 0.0]));
        let half_sq = FunctionSpec::quadratic_kernel(1.0, 2).unwrap();
        assert_eq!(prox(&half_sq, 1.0, &v(&[4.0, 2.0])).unwrap(), v(&[2.0, 1.0]));
        let u = v(&[1.0, -2.0]);
        assert_eq!(prox(&FunctionSpec::linear(u), 0.5, &v(&[0.0, 0.0])).unwrap(), v(&[-0.5, 1.0]));
        assert!(matches!(prox(&FunctionSpec::neg_log(), 1.0, &v(&[1.0])), Err(Error::UnsupportedAtom(_))));
    }

    #[test]
    fn soft_threshold() {
        let abs = FunctionSpec::norm_pow(1.0, 1).unwrap();
        assert_eq!(prox(&abs, 1.0, &v(&[0.5])).unwrap(), v(&[0.0]));
        assert_eq!(prox(&abs, 1.0, &v(&[-3.0])).unwrap(), v(&[-2.0]));
    }

    #[test]
    fn stationarity_residuals() {
        let x = v(&[1.7, -0.4]);
        let gamma = 0.8;
        let sq = FunctionSpec::norm_pow(2.0, 2).unwrap();
        let p = prox(&sq, gamma, &x).unwrap();
        let residual = p.scale(2.0).add_scaled(1.0 / gamma, &(&p - &x));
        assert!(residual.norm() <= 1e-9);
        let nrm = FunctionSpec::norm_pow(1.0, 2).unwrap();
        let p = prox(&nrm, gamma, &x).unwrap();
        let residual = p.scale(1.0 / p.norm()).add_scaled(1.0 / gamma, &(&p - &x));
        assert!(residual.norm() <= 1e-9);
    }

    #[test]
    fn moreau_examples() {
        let f = unit_ball_indicator();
        assert_eq!(moreau_value(&f, 1.0, &v(&[3.0, 0.0])).unwrap(), 2.0);
        assert_eq!(moreau_value(&f, 1.0, &v(&[0.3, 0.1])).unwrap(), 0.0);
        assert_eq!(sproj_moreau(&f, 1.0, &v(&[3.0, 0.0])).unwrap(), v(&[2.0, 0.0]));
        assert_eq!(sproj_moreau(&f, 1.0, &v(&[0.3, 0.1])).unwrap(), v(&[0.3, 0.1]));
    }

    #[test]
    fn moreau_gradient_matches_fd() {
        let f = unit_ball_indicator();
        let x = v(&[2.5, -1.5]);
        let g = moreau_gradient(&f, 0.6, &x).unwrap();
        let fd = fd_gradient(|y: &Vector| moreau_value(&f, 0.6, y), &x, FD_STEP).unwrap();
        assert!(g.dist(&fd) <= 1e-6 * (1.0 + g.norm()));
    }

    #[test]
    fn degenerate_moreau_is_unreachable_for_linear_envelope_at_level() {
        // env(x) = ⟨x,u⟩ − γ‖u‖²/2 has x − prox = γu ≠ 0 everywhere.
        let f = FunctionSpec::linear(v(&[0.0, 1.0]));
        let p = sproj_moreau(&f, 2.0, &v(&[0.0, 3.0])).unwrap();
        assert!((p.get(1) - 1.0).abs() < 1e-15);
    }
}
