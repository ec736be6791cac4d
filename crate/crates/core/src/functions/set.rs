use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::{Matrix, Vector, EPS_NORM};

/// Nonempty closed convex set with an exact metric projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetSpec {
    Ball { center: Vector, radius: f64 },
    /// `{x : ⟨x, normal⟩ ≤ offset}`.
    Halfspace { normal: Vector, offset: f64 },
    Box { lo: Vector, hi: Vector },
    Point { c: Vector },
}

impl SetSpec {
    pub fn ball(center: Vector, radius: f64) -> Result<Self> {
        let s = SetSpec::Ball { center, radius };
        s.validate()?;
        Ok(s)
    }

    pub fn halfspace(normal: Vector, offset: f64) -> Result<Self> {
        let s = SetSpec::Halfspace { normal, offset };
        s.validate()?;
        Ok(s)
    }

    pub fn boxed(lo: Vector, hi: Vector) -> Result<Self> {
        let s = SetSpec::Box { lo, hi };
        s.validate()?;
        Ok(s)
    }

    pub fn point(c: Vector) -> Self {
        SetSpec::Point { c }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SetSpec::Ball { radius, .. } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::InvalidParameter(format!("ball radius {radius} must be positive")));
                }
            }
            SetSpec::Halfspace { normal, offset } => {
                if normal.norm() <= EPS_NORM {
                    return Err(Error::InvalidParameter("halfspace normal must be nonzero".into()));
                }
                if !offset.is_finite() {
                    return Err(Error::NonFinite("halfspace offset".into()));
                }
            }
            SetSpec::Box { lo, hi } => {
                lo_hi_dims(lo, hi)?;
                if lo.as_slice().iter().zip(hi.as_slice()).any(|(l, h)| l > h) {
                    return Err(Error::InvalidParameter("box requires lo ≤ hi componentwise".into()));
                }
            }
            SetSpec::Point { .. } => {}
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            SetSpec::Ball { center, .. } => center.dim(),
            SetSpec::Halfspace { normal, .. } => normal.dim(),
            SetSpec::Box { lo, .. } => lo.dim(),
            SetSpec::Point { c } => c.dim(),
        }
    }

    /// Nearest point of the set.
    pub fn project(&self, x: &Vector) -> Result<Vector> {
        x.check_dim(self.dim())?;
        Ok(match self {
            SetSpec::Ball { center, radius } => {
                let y = x - center;
                let n = y.norm();
                if n <= *radius {
                    x.clone()
                } else {
                    center.add_scaled(radius / n, &y)
                }
            }
            SetSpec::Halfspace { normal, offset } => {
                let s = x.dot(normal) - offset;
                if s <= 0.0 {
                    x.clone()
                } else {
                    x.add_scaled(-s / normal.norm_sq(), normal)
                }
            }
            SetSpec::Box { lo, hi } => {
                let clamped: Vec<f64> = x
                    .as_slice()
                    .iter()
                    .zip(lo.as_slice().iter().zip(hi.as_slice()))
                    .map(|(v, (l, h))| v.clamp(*l, *h))
                    .collect();
                Vector::new(clamped)?
            }
            SetSpec::Point { c } => c.clone(),
        })
    }

    pub fn distance(&self, x: &Vector) -> Result<f64> {
        Ok(x.dist(&self.project(x)?))
    }

    /// Membership up to a relative rounding tolerance.
    pub fn contains(&self, x: &Vector) -> Result<bool> {
        Ok(self.distance(x)? <= 1e-12 * (1.0 + x.norm()))
    }

    /// Strict interior membership (empty for points).
    pub fn interior_contains(&self, x: &Vector) -> Result<bool> {
        x.check_dim(self.dim())?;
        Ok(match self {
            SetSpec::Ball { center, radius } => x.dist(center) < *radius,
            SetSpec::Halfspace { normal, offset } => x.dot(normal) < *offset,
            SetSpec::Box { lo, hi } => x
                .as_slice()
                .iter()
                .zip(lo.as_slice().iter().zip(hi.as_slice()))
                .all(|(v, (l, h))| l < v && v < h),
            SetSpec::Point { .. } => false,
        })
    }

    /// Outward unit normal at a boundary point of a ball or halfspace.
    ///
    /// Returns `None` off the boundary and for boxes and points, whose normal
    /// cones at boundary points are not rays in general.
    pub fn boundary_normal(&self, x: &Vector) -> Result<Option<Vector>> {
        x.check_dim(self.dim())?;
        Ok(match self {
            SetSpec::Ball { center, radius } => {
                let y = x - center;
                let n = y.norm();
                if (n - radius).abs() <= 1e-12 * (1.0 + radius) {
                    Some(y.scale(1.0 / n))
                } else {
                    None
                }
            }
            SetSpec::Halfspace { normal, offset } => {
                let s = x.dot(normal) - offset;
                if s.abs() <= 1e-12 * (1.0 + offset.abs()) {
                    Some(normal.scale(1.0 / normal.norm()))
                } else {
                    None
                }
            }
            SetSpec::Box { .. } | SetSpec::Point { .. } => None,
        })
    }

    /// Derivative of the projection; fails on the boundary where it jumps.
    pub fn projection_jacobian(&self, x: &Vector) -> Result<Matrix> {
        x.check_dim(self.dim())?;
        let n = self.dim();
        let id = Matrix::identity(n, n);
        let kink = || Error::NotTwiceDifferentiable("projection is not differentiable on the set boundary".into());
        match self {
            SetSpec::Ball { center, radius } => {
                let y = x - center;
                let r = y.norm();
                if r < *radius {
                    Ok(id)
                } else if r > *radius {
                    let yhat = y.scale(1.0 / r);
                    Ok((id - yhat.outer(&yhat)) * (radius / r))
                } else {
                    Err(kink())
                }
            }
            SetSpec::Halfspace { normal, offset } => {
                let s = x.dot(normal) - offset;
                if s < 0.0 {
                    Ok(id)
                } else if s > 0.0 {
                    Ok(id - normal.outer(normal) / normal.norm_sq())
                } else {
                    Err(kink())
                }
            }
            SetSpec::Box { lo, hi } => {
                let mut diag = Vec::with_capacity(n);
                for i in 0..n {
                    let (v, l, h) = (x.get(i), lo.get(i), hi.get(i));
                    if l < v && v < h {
                        diag.push(1.0);
                    } else if v < l || v > h {
                        diag.push(0.0);
                    } else {
                        return Err(kink());
                    }
                }
                Ok(Matrix::from_diagonal(&nalgebra::DVector::from_vec(diag)))
            }
            SetSpec::Point { .. } => Ok(Matrix::zeros(n, n)),
        }
    }
}

fn lo_hi_dims(lo: &Vector, hi: &Vector) -> Result<()> {
    if lo.dim() != hi.dim() {
        return Err(Error::DimensionMismatch { expected: lo.dim(), got: hi.dim() });
    }
    Ok(())
}
