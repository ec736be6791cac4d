//! The subgradient projection operator.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::functions::{FunctionSpec, SelectionStrategy};
use crate::vector::{Vector, EPS_NORM};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    /// `f(x) ≤ 0`; the point is returned unchanged.
    Fixed,
    /// `f(x) > 0`; the point is projected onto the cutting halfspace.
    Projected,
}

/// Result of one subgradient projection.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjOutcome {
    pub point: Vector,
    pub status: Status,
    pub f_value: f64,
    /// Present iff `status == Projected`.
    pub subgradient_used: Option<Vector>,
}

/// Projection of `x` onto `{y : ⟨y−x, u⟩ + fx ≤ 0}`.
pub fn halfspace_project(x: &Vector, u: &Vector, fx: f64) -> Result<Vector> {
    u.check_dim(x.dim())?;
    if fx.is_nan() {
        return Err(Error::NonFinite("function value".into()));
    }
    if fx <= 0.0 {
        return Ok(x.clone());
    }
    let n2 = u.norm_sq();
    if n2.sqrt() <= EPS_NORM {
        return Err(Error::ZeroSubgradient { value: fx });
    }
    x.add_scaled(-fx / n2, u).ensure_finite("halfspace projection")
}

fn check_projectable(f: &FunctionSpec) -> Result<()> {
    if f.has_bare_indicator() {
        return Err(Error::UnsupportedAtom(
            "indicator has no subgradient projector off its set; wrap it in a Moreau envelope".into(),
        ));
    }
    Ok(())
}

/// `G_f x` under the selection `s`.
pub fn sproj(f: &FunctionSpec, x: &Vector, s: SelectionStrategy) -> Result<ProjOutcome> {
    check_projectable(f)?;
    let fx = f.eval_finite(x)?;
    if fx <= 0.0 {
        return Ok(ProjOutcome { point: x.clone(), status: Status::Fixed, f_value: fx, subgradient_used: None });
    }
    let u = f.subgradient(x, s)?;
    let point = halfspace_project(x, &u, fx)?;
    Ok(ProjOutcome { point, status: Status::Projected, f_value: fx, subgradient_used: Some(u) })
}

/// Images of `x` under the projections through `k` sampled subgradients.
pub fn sproj_set(f: &FunctionSpec, x: &Vector, k: usize) -> Result<Vec<Vector>> {
    check_projectable(f)?;
    let fx = f.eval_finite(x)?;
    if fx <= 0.0 {
        return Ok(vec![x.clone()]);
    }
    f.subdifferential_sample(x, k)?
        .iter()
        .map(|u| halfspace_project(x, u, fx))
        .collect()
}

/// `(1−λ)x + λp` for `λ ∈ [0, 2]`.
pub fn relax(x: &Vector, p: &Vector, lambda: f64) -> Result<Vector> {
    if !(0.0..=2.0).contains(&lambda) {
        return Err(Error::RelaxationOutOfRange { lambda, lo: 0.0, hi: 2.0 });
    }
    p.check_dim(x.dim())?;
    Ok(x.scale(1.0 - lambda).add_scaled(lambda, p))
}

/// `⟨y − Gx, x − Gx⟩` for a feasible `y`; nonpositive for operators of
/// class T.
pub fn class_t_witness(f: &FunctionSpec, x: &Vector, y: &Vector, s: SelectionStrategy) -> Result<f64> {
    let fy = f.eval(y)?.to_f64();
    if fy > 0.0 {
        return Err(Error::InfeasibleWitness { value: fy });
    }
    let g = sproj(f, x, s)?.point;
    Ok((y - &g).dot(&(x - &g)))
}

/// `‖x−y‖² − ‖x−p‖² − ‖p−y‖²`.
pub fn fejer_gap(x: &Vector, p: &Vector, y: &Vector) -> f64 {
    x.dist(y).powi(2) - x.dist(p).powi(2) - p.dist(y).powi(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{AffinePiece, SetSpec};

    fn v(c: &[f64]) -> Vector {
        Vector::from_slice(c).unwrap()
    }

    const LIA: SelectionStrategy = SelectionStrategy::LeastIndexActive;

    fn close(a: &Vector, b: &Vector, tol: f64) -> bool {
        a.dist(b) <= tol
    }

    #[test]
    fn halfspace_examples() {
        assert_eq!(halfspace_project(&v(&[1.0, 2.0]), &v(&[0.0, 1.0]), 2.0).unwrap(), v(&[1.0, 0.0]));
        assert_eq!(halfspace_project(&v(&[1.0, 2.0]), &v(&[0.0, 1.0]), -3.0).unwrap(), v(&[1.0, 2.0]));
        let p = halfspace_project(&v(&[0.5]), &v(&[-2.0]), 0.693147).unwrap();
        assert!((p.first() - 0.8465735).abs() < 1e-12);
        assert!(matches!(
            halfspace_project(&v(&[1.0]), &v(&[0.0]), 1.0),
            Err(Error::ZeroSubgradient { .. })
        ));
    }

    #[test]
    fn sproj_examples() {
        let nl = sproj(&FunctionSpec::neg_log(), &v(&[0.5]), LIA).unwrap();
        assert!((nl.point.first() - (0.5 - 0.5 * 0.5f64.ln())).abs() < 1e-15);
        assert_eq!(nl.status, Status::Projected);
        let max = FunctionSpec::affine_max(vec![AffinePiece::new(v(&[1.0]), 1.0), AffinePiece::new(v(&[2.0]), 1.0)])
            .unwrap();
        assert_eq!(sproj(&max, &v(&[0.7]), LIA).unwrap().point, v(&[-0.5]));
        let d = FunctionSpec::dist(SetSpec::ball(v(&[0.0, 0.0]), 1.0).unwrap()).unwrap();
        assert_eq!(sproj(&d, &v(&[2.0, 0.0]), LIA).unwrap().point, v(&[1.0, 0.0]));
        let sq = FunctionSpec::norm_pow(2.0, 2).unwrap();
        assert_eq!(sproj(&sq, &v(&[3.0, 4.0]), LIA).unwrap().point, v(&[1.5, 2.0]));
    }

    #[test]
    fn fixed_outcome_keeps_point() {
        let out = sproj(&FunctionSpec::neg_log(), &v(&[2.0]), LIA).unwrap();
        assert_eq!(out.status, Status::Fixed);
        assert_eq!(out.point, v(&[2.0]));
        assert!(out.subgradient_used.is_none());
    }

    #[test]
    fn bare_indicator_is_rejected() {
        let ind = FunctionSpec::indicator(SetSpec::ball(v(&[0.0]), 1.0).unwrap()).unwrap();
        assert!(matches!(sproj(&ind, &v(&[0.0]), LIA), Err(Error::UnsupportedAtom(_))));
    }

    #[test]
    fn domain_error_outside_domain() {
        assert!(matches!(sproj(&FunctionSpec::neg_log(), &v(&[-1.0]), LIA), Err(Error::DomainError(_))));
    }

    #[test]
    fn sproj_set_examples() {
        let f = FunctionSpec::affine_max(vec![
            AffinePiece::new(v(&[1.0, 0.0]), 1.0),
            AffinePiece::new(v(&[0.0, 1.0]), 1.0),
        ])
        .unwrap();
        let images = sproj_set(&f, &v(&[0.0, 0.0]), 3).unwrap();
        assert_eq!(images, vec![v(&[-1.0, 0.0]), v(&[-1.0, -1.0]), v(&[0.0, -1.0])]);
        let max = FunctionSpec::affine_max(vec![AffinePiece::new(v(&[1.0]), 1.0), AffinePiece::new(v(&[2.0]), 1.0)])
            .unwrap();
        assert_eq!(sproj_set(&max, &v(&[0.0]), 2).unwrap(), vec![v(&[-1.0]), v(&[-0.5])]);
        assert_eq!(sproj_set(&FunctionSpec::neg_log(), &v(&[2.0]), 5).unwrap(), vec![v(&[2.0])]);
    }

    #[test]
    fn relax_examples() {
        let (x, p) = (v(&[2.0, 0.0]), v(&[1.0, 0.0]));
        assert_eq!(relax(&x, &p, 1.0).unwrap(), p);
        assert_eq!(relax(&x, &p, 0.0).unwrap(), x);
        assert_eq!(relax(&x, &p, 1.5).unwrap(), v(&[0.5, 0.0]));
        assert!(matches!(relax(&x, &p, 2.5), Err(Error::RelaxationOutOfRange { .. })));
    }

    #[test]
    fn class_t_examples() {
        let lin = FunctionSpec::linear(v(&[0.0, 1.0]));
        assert_eq!(class_t_witness(&lin, &v(&[1.0, 2.0]), &v(&[5.0, -1.0]), LIA).unwrap(), -2.0);
        assert_eq!(class_t_witness(&lin, &v(&[1.0, -2.0]), &v(&[5.0, -1.0]), LIA).unwrap(), 0.0);
        let w = class_t_witness(&FunctionSpec::neg_log(), &v(&[0.5]), &v(&[1.0]), LIA).unwrap();
        assert!((w + 0.0531).abs() < 1e-4);
        assert!(matches!(
            class_t_witness(&lin, &v(&[1.0, 2.0]), &v(&[0.0, 1.0]), LIA),
            Err(Error::InfeasibleWitness { .. })
        ));
    }

    #[test]
    fn fejer_examples() {
        let x = v(&[2.0, 0.0]);
        assert_eq!(fejer_gap(&x, &x, &v(&[0.0, 0.0])), 0.0);
        assert_eq!(fejer_gap(&x, &v(&[1.0, 0.0]), &v(&[0.0, 0.0])), 2.0);
        let gap = fejer_gap(&v(&[0.5]), &v(&[0.846574]), &v(&[1.0]));
        assert!((gap - 0.1063).abs() < 1e-4);
    }

    #[test]
    fn step_length_recovers_value() {
        let d = FunctionSpec::sq_dist(SetSpec::ball(v(&[1.0, 1.0]), 0.5).unwrap()).unwrap();
        let x = v(&[3.0, -2.0]);
        let out = sproj(&d, &x, LIA).unwrap();
        let u = out.subgradient_used.unwrap();
        assert!(((&x - &out.point).dot(&u) - out.f_value).abs() <= 1e-10 * out.f_value);
        assert!(close(&out.point, &x.scale(0.5).add_scaled(0.5, &SetSpec::ball(v(&[1.0, 1.0]), 0.5).unwrap().project(&x).unwrap()), 1e-12));
    }
}
