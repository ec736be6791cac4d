use super::{FunctionKind, FunctionSpec, JointSelection, Minimizer, SelectionStrategy};
use crate::error::{Error, Result};
use crate::prox;
use crate::util::competitors;
use crate::vector::{ExtReal, Matrix, Vector};

/// Relative tolerance for calling an affine piece active.
const ACTIVE_TOL: f64 = 1e-12;
/// Slack below zero tolerated before an uncertified power base is rejected.
const NEGATIVE_BASE_TOL: f64 = 1e-12;
const JOINT_TOL: f64 = 1e-10;
const MINIMIZER_AUDIT_TOL: f64 = 1e-8;
const MINIMIZER_COMPETITORS: usize = 8;

fn pick(vertices: &[Vector], s: SelectionStrategy) -> Vector {
    match s {
        SelectionStrategy::LeastIndexActive => vertices[0].clone(),
        SelectionStrategy::CentroidActive => {
            let sum = vertices.iter().skip(1).fold(vertices[0].clone(), |acc, v| &acc + v);
            sum.scale(1.0 / vertices.len() as f64)
        }
        SelectionStrategy::EndpointK { k } => vertices[k % vertices.len()].clone(),
    }
}

fn dedup(vs: Vec<Vector>) -> Vec<Vector> {
    let mut out: Vec<Vector> = Vec::with_capacity(vs.len());
    for v in vs {
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

/// `k` members of the convex hull of `vertices`, vertices first, then edge
/// points on successively finer dyadic grids. Two vertices give a segment
/// sampled in order from the first vertex to the second.
fn sample_hull(vertices: &[Vector], k: usize) -> Vec<Vector> {
    if let [a, b] = vertices {
        let mut ts = vec![0.0, 1.0];
        let mut level = 1;
        while ts.len() < k && level <= 60 {
            let denom = (1u64 << level) as f64;
            let mut j = 1u64;
            while (j as f64) < denom && ts.len() < k {
                ts.push(j as f64 / denom);
                j += 2;
            }
            level += 1;
        }
        ts.truncate(k);
        ts.sort_by(f64::total_cmp);
        return ts.into_iter().map(|t| a.scale(1.0 - t).add_scaled(t, b)).collect();
    }
    let m = vertices.len();
    let mut out: Vec<Vector> = vertices.iter().take(k).cloned().collect();
    let edge = |i: usize, j: usize, t: f64| vertices[i].scale(1.0 - t).add_scaled(t, &vertices[j]);
    let mut level = 1;
    while out.len() < k && level <= 60 {
        let denom = (1u64 << level) as f64;
        let mut odd = 1u64;
        while (odd as f64) < denom && out.len() < k {
            for i in 0..m {
                for j in i + 1..m {
                    if out.len() < k {
                        out.push(edge(i, j, odd as f64 / denom));
                    }
                }
            }
            odd += 2;
        }
        if level == 1 && out.len() < k {
            let c = vertices.iter().skip(1).fold(vertices[0].clone(), |acc, v| &acc + v);
            out.push(c.scale(1.0 / m as f64));
        }
        level += 1;
    }
    out
}

impl FunctionSpec {
    /// Function value, `+∞` outside the domain.
    pub fn eval(&self, x: &Vector) -> Result<ExtReal> {
        x.check_dim(self.dim())?;
        let fin = ExtReal::Finite;
        let value = match self.kind() {
            FunctionKind::Linear { u } => fin(x.dot(u)),
            FunctionKind::Dist { set } => fin(set.distance(x)?),
            FunctionKind::SqDist { set } => {
                let d = set.distance(x)?;
                fin(d * d)
            }
            FunctionKind::NormPow { p, .. } => fin(norm_pow(x, *p)),
            FunctionKind::NegLog => {
                let t = x.first();
                if t > 0.0 {
                    fin(-t.ln())
                } else {
                    ExtReal::PlusInfinity
                }
            }
            FunctionKind::SqrtShift { eta } => {
                let t = x.first();
                if t > 0.0 {
                    fin(eta - t.sqrt())
                } else {
                    ExtReal::PlusInfinity
                }
            }
            FunctionKind::Hyperbolic { eta } => fin(1f64.hypot(x.first()) - eta),
            FunctionKind::AffineMax { pieces } => {
                fin(pieces.iter().map(|p| p.value(x)).fold(f64::NEG_INFINITY, f64::max))
            }
            FunctionKind::Indicator { set } => {
                if set.contains(x)? {
                    fin(0.0)
                } else {
                    ExtReal::PlusInfinity
                }
            }
            FunctionKind::Scale { lambda, f } => match f.eval(x)? {
                ExtReal::Finite(v) => fin(lambda * v),
                inf => inf,
            },
            FunctionKind::PowerComp { alpha, f } => match f.eval(x)? {
                ExtReal::Finite(v) => fin(power_base(f, v)?.powf(1.0 / alpha)),
                inf => inf,
            },
            FunctionKind::LeftCompose { phi, f } => match f.eval(x)? {
                ExtReal::Finite(t) => {
                    if !phi.in_range(t) {
                        return Err(Error::NonMonotonePhi { t, derivative: phi.derivative(t) });
                    }
                    fin(phi.value(t))
                }
                inf => inf,
            },
            FunctionKind::RightLinear { l, f, .. } => f.eval(&x.transform(l))?,
            FunctionKind::ConvexComb { alpha, f, g, .. } => match (f.eval(x)?, g.eval(x)?) {
                (ExtReal::Finite(a), ExtReal::Finite(b)) => fin(alpha * a + (1.0 - alpha) * b),
                _ => ExtReal::PlusInfinity,
            },
            FunctionKind::SumPair { f, g, .. } => match (f.eval(x)?, g.eval(x)?) {
                (ExtReal::Finite(a), ExtReal::Finite(b)) => fin(a + b),
                _ => ExtReal::PlusInfinity,
            },
            FunctionKind::MoreauEnv { gamma, f } => fin(prox::moreau_value(f, *gamma, x)?),
            FunctionKind::InfConv { f, g, minimizer, .. } => {
                let y = self.inf_conv_split_with(f, g, minimizer, x)?;
                split_value(f, g, &y, x)?
            }
        };
        ExtReal::new(value.to_f64())
    }

    /// Function value, with `DomainError` outside the domain.
    pub fn eval_finite(&self, x: &Vector) -> Result<f64> {
        self.eval(x)?
            .finite()
            .ok_or_else(|| Error::DomainError(format!("{} is +∞ at {x}", self.label())))
    }

    /// A member of `∂f(x)` chosen by `s`.
    pub fn subgradient(&self, x: &Vector, s: SelectionStrategy) -> Result<Vector> {
        self.eval_finite(x)?;
        let u = match self.kind() {
            FunctionKind::Linear { u } => u.clone(),
            FunctionKind::SqDist { set } => (x - &set.project(x)?).scale(2.0),
            FunctionKind::NegLog => Vector::scalar(-1.0 / x.first())?,
            FunctionKind::SqrtShift { .. } => Vector::scalar(-0.5 / x.first().sqrt())?,
            FunctionKind::Hyperbolic { .. } => {
                let t = x.first();
                Vector::scalar(t / 1f64.hypot(t))?
            }
            FunctionKind::NormPow { p, .. } if x.norm() > 0.0 => {
                let n = x.norm();
                x.scale(p * n.powf(p - 1.0) / n)
            }
            FunctionKind::Dist { .. }
            | FunctionKind::NormPow { .. }
            | FunctionKind::AffineMax { .. }
            | FunctionKind::Indicator { .. } => pick(&self.subdiff_vertices(x)?, s),
            FunctionKind::Scale { lambda, f } => f.subgradient(x, s)?.scale(*lambda),
            FunctionKind::PowerComp { alpha, f } => {
                let v = power_base(f, f.eval_finite(x)?)?;
                let q = 1.0 / alpha;
                if v > 0.0 {
                    f.subgradient(x, s)?.scale(q * v.powf(q - 1.0))
                } else if q == 1.0 {
                    f.subgradient(x, s)?
                } else {
                    Vector::zeros(self.dim())
                }
            }
            FunctionKind::LeftCompose { phi, f } => {
                let t = f.eval_finite(x)?;
                let d = phi.derivative(t);
                if !phi.in_range(t) || !(d >= 0.0) || (t > 0.0 && d <= 0.0) {
                    return Err(Error::NonMonotonePhi { t, derivative: d });
                }
                f.subgradient(x, s)?.scale(d)
            }
            FunctionKind::RightLinear { l, f, .. } => f.subgradient(&x.transform(l), s)?.transform_transpose(l),
            FunctionKind::ConvexComb { f, g, joint, .. } => joint_pair(joint, f, g, x)?,
            FunctionKind::SumPair { f, g, joint } => joint_pair(joint, f, g, x)?.scale(2.0),
            FunctionKind::MoreauEnv { gamma, f } => (x - &prox::prox(f, *gamma, x)?).scale(1.0 / gamma),
            FunctionKind::InfConv { f, g, minimizer, joint } => {
                let y = self.inf_conv_split_with(f, g, minimizer, x)?;
                joint_split(joint, f, g, &y, x)?
            }
        };
        u.check_dim(self.dim())?;
        u.ensure_finite("subgradient")
    }

    /// Generators of `∂f(x)`: the subdifferential contains their convex hull,
    /// and equals it for max-affine functions and distances to balls or
    /// halfspaces.
    pub(crate) fn subdiff_vertices(&self, x: &Vector) -> Result<Vec<Vector>> {
        self.eval_finite(x)?;
        let n = self.dim();
        let zero = || Vector::zeros(n);
        let axes = || (0..n).flat_map(|i| [Vector::basis(n, i), Vector::basis(n, i).scale(-1.0)]);
        Ok(match self.kind() {
            FunctionKind::Dist { set } => {
                let p = set.project(x)?;
                let d = x.dist(&p);
                if d > 0.0 {
                    vec![(x - &p).scale(1.0 / d)]
                } else if set.interior_contains(x)? {
                    vec![zero()]
                } else if let Some(normal) = set.boundary_normal(x)? {
                    vec![zero(), normal]
                } else {
                    let mut vs = vec![zero()];
                    match set {
                        super::SetSpec::Box { lo, hi } => {
                            for i in 0..n {
                                if x.get(i) == lo.get(i) {
                                    vs.push(Vector::basis(n, i).scale(-1.0));
                                }
                                if x.get(i) == hi.get(i) {
                                    vs.push(Vector::basis(n, i));
                                }
                            }
                        }
                        _ => vs.extend(axes()),
                    }
                    vs
                }
            }
            FunctionKind::NormPow { p, .. } if x.norm() == 0.0 => {
                if *p == 1.0 {
                    axes().collect()
                } else {
                    vec![zero()]
                }
            }
            FunctionKind::AffineMax { pieces } => {
                let values: Vec<f64> = pieces.iter().map(|p| p.value(x)).collect();
                let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let cut = max - ACTIVE_TOL * (1.0 + max.abs());
                pieces.iter().zip(&values).filter(|(_, v)| **v >= cut).map(|(p, _)| p.a.clone()).collect()
            }
            FunctionKind::Indicator { set } => {
                if set.interior_contains(x)? {
                    vec![zero()]
                } else if let Some(normal) = set.boundary_normal(x)? {
                    vec![zero(), normal]
                } else {
                    vec![zero()]
                }
            }
            FunctionKind::Scale { lambda, f } => f.subdiff_vertices(x)?.into_iter().map(|v| v.scale(*lambda)).collect(),
            FunctionKind::PowerComp { alpha, f } => {
                let v = power_base(f, f.eval_finite(x)?)?;
                let q = 1.0 / alpha;
                if v > 0.0 {
                    let c = q * v.powf(q - 1.0);
                    f.subdiff_vertices(x)?.into_iter().map(|u| u.scale(c)).collect()
                } else if q == 1.0 {
                    f.subdiff_vertices(x)?
                } else {
                    vec![zero()]
                }
            }
            FunctionKind::LeftCompose { phi, f } => {
                let d = phi.derivative(f.eval_finite(x)?);
                f.subdiff_vertices(x)?.into_iter().map(|u| u.scale(d)).collect()
            }
            FunctionKind::RightLinear { l, f, .. } => f
                .subdiff_vertices(&x.transform(l))?
                .into_iter()
                .map(|u| u.transform_transpose(l))
                .collect(),
            _ => vec![self.subgradient(x, SelectionStrategy::LeastIndexActive)?],
        })
    }

    /// `k` members of `∂f(x)`; `k` distinct ones when it is not a singleton.
    pub fn subdifferential_sample(&self, x: &Vector, k: usize) -> Result<Vec<Vector>> {
        if k == 0 {
            return Err(Error::InvalidParameter("sample size must be positive".into()));
        }
        let vertices = dedup(self.subdiff_vertices(x)?);
        if vertices.len() == 1 {
            return Ok(vec![vertices[0].clone(); k]);
        }
        Ok(sample_hull(&vertices, k))
    }

    /// Whether `∂f(x)` is a singleton.
    pub fn is_differentiable(&self, x: &Vector) -> Result<bool> {
        self.eval_finite(x)?;
        Ok(match self.kind() {
            FunctionKind::Linear { .. }
            | FunctionKind::SqDist { .. }
            | FunctionKind::NegLog
            | FunctionKind::SqrtShift { .. }
            | FunctionKind::Hyperbolic { .. }
            | FunctionKind::MoreauEnv { .. } => true,
            FunctionKind::Dist { .. } | FunctionKind::NormPow { .. } | FunctionKind::AffineMax { .. } => {
                dedup(self.subdiff_vertices(x)?).len() == 1
            }
            FunctionKind::Indicator { set } => set.interior_contains(x)?,
            FunctionKind::Scale { f, .. } | FunctionKind::LeftCompose { f, .. } => f.is_differentiable(x)?,
            FunctionKind::RightLinear { l, f, .. } => f.is_differentiable(&x.transform(l))?,
            FunctionKind::PowerComp { alpha, f } => {
                let v = power_base(f, f.eval_finite(x)?)?;
                let q = 1.0 / alpha;
                if v > 0.0 || q == 1.0 {
                    f.is_differentiable(x)?
                } else {
                    q > 1.0
                }
            }
            FunctionKind::ConvexComb { f, g, .. } | FunctionKind::SumPair { f, g, .. } => {
                f.is_differentiable(x)? && g.is_differentiable(x)?
            }
            FunctionKind::InfConv { f, g, minimizer, .. } => {
                let y = self.inf_conv_split_with(f, g, minimizer, x)?;
                g.is_differentiable(&(x - &y))? || f.is_differentiable(&y)?
            }
        })
    }

    /// `∇f(x)`; `NotDifferentiableHere` at kinks.
    pub fn gradient(&self, x: &Vector) -> Result<Vector> {
        if !self.is_differentiable(x)? {
            return Err(Error::NotDifferentiableHere(format!("{} at {x}", self.label())));
        }
        self.subgradient(x, SelectionStrategy::LeastIndexActive)
    }

    /// `∇²f(x)`.
    pub fn hessian(&self, x: &Vector) -> Result<Matrix> {
        self.eval_finite(x)?;
        let n = self.dim();
        let kink = || Error::NotTwiceDifferentiable(format!("{} at {x}", self.label()));
        let scalar = |v: f64| Matrix::from_element(1, 1, v);
        match self.kind() {
            FunctionKind::Linear { .. } => Ok(Matrix::zeros(n, n)),
            FunctionKind::Dist { set } => {
                let p = set.project(x)?;
                let w = x - &p;
                let d = w.norm();
                if d > 0.0 {
                    let j = Matrix::identity(n, n) - set.projection_jacobian(x)?;
                    Ok((j - w.outer(&w) / (d * d)) / d)
                } else if set.interior_contains(x)? {
                    Ok(Matrix::zeros(n, n))
                } else {
                    Err(kink())
                }
            }
            FunctionKind::SqDist { set } => Ok((Matrix::identity(n, n) - set.projection_jacobian(x)?) * 2.0),
            FunctionKind::NormPow { p, .. } => {
                let r = x.norm();
                if *p == 2.0 {
                    Ok(Matrix::identity(n, n) * 2.0)
                } else if r > 0.0 {
                    let xh = x.scale(1.0 / r);
                    Ok((Matrix::identity(n, n) + xh.outer(&xh) * (p - 2.0)) * (p * r.powf(p - 2.0)))
                } else if *p > 2.0 {
                    Ok(Matrix::zeros(n, n))
                } else {
                    Err(kink())
                }
            }
            FunctionKind::NegLog => {
                let t = x.first();
                Ok(scalar(1.0 / (t * t)))
            }
            FunctionKind::SqrtShift { .. } => Ok(scalar(0.25 * x.first().powf(-1.5))),
            FunctionKind::Hyperbolic { .. } => Ok(scalar((1.0 + x.first().powi(2)).powf(-1.5))),
            FunctionKind::AffineMax { .. } => {
                if self.is_differentiable(x)? {
                    Ok(Matrix::zeros(n, n))
                } else {
                    Err(kink())
                }
            }
            FunctionKind::Indicator { set } => {
                if set.interior_contains(x)? {
                    Ok(Matrix::zeros(n, n))
                } else {
                    Err(kink())
                }
            }
            FunctionKind::Scale { lambda, f } => Ok(f.hessian(x)? * *lambda),
            FunctionKind::PowerComp { alpha, f } => {
                let v = power_base(f, f.eval_finite(x)?)?;
                if v <= 0.0 {
                    return Err(kink());
                }
                let q = 1.0 / alpha;
                let g = f.gradient(x)?;
                Ok(f.hessian(x)? * (q * v.powf(q - 1.0)) + g.outer(&g) * (q * (q - 1.0) * v.powf(q - 2.0)))
            }
            FunctionKind::LeftCompose { phi, f } => {
                let t = f.eval_finite(x)?;
                let d2 = phi.second_derivative(t).ok_or_else(kink)?;
                let g = f.gradient(x)?;
                Ok(g.outer(&g) * d2 + f.hessian(x)? * phi.derivative(t))
            }
            FunctionKind::RightLinear { l, f, .. } => Ok(l.transpose() * f.hessian(&x.transform(l))? * l),
            FunctionKind::ConvexComb { alpha, f, g, .. } => Ok(f.hessian(x)? * *alpha + g.hessian(x)? * (1.0 - alpha)),
            FunctionKind::SumPair { f, g, .. } => Ok(f.hessian(x)? + g.hessian(x)?),
            FunctionKind::MoreauEnv { .. } | FunctionKind::InfConv { .. } => Err(kink()),
        }
    }

    /// The audited minimizing split `Mx` of an inf-convolution.
    pub fn inf_conv_split(&self, x: &Vector) -> Result<Vector> {
        match self.kind() {
            FunctionKind::InfConv { f, g, minimizer, .. } => self.inf_conv_split_with(f, g, minimizer, x),
            _ => Err(Error::InvalidParameter(format!("{} is not an inf-convolution", self.label()))),
        }
    }

    fn inf_conv_split_with(&self, f: &FunctionSpec, g: &FunctionSpec, m: &Minimizer, x: &Vector) -> Result<Vector> {
        x.check_dim(self.dim())?;
        let y = match m {
            Minimizer::Prox { gamma } => prox::prox(f, *gamma, x)?,
            Minimizer::Custom { argmin, .. } => argmin(x)?,
        };
        y.check_dim(self.dim())?;
        let y = y.ensure_finite("inf-convolution minimizer")?;
        let best = split_value(f, g, &y, x)?.to_f64();
        if !best.is_finite() {
            return Err(Error::InconsistentMinimizer { gap: f64::INFINITY });
        }
        for c in competitors(&y, 1.0 + x.norm(), MINIMIZER_COMPETITORS, 0x1c0) {
            let other = split_value(f, g, &c, x)?.to_f64();
            if best > other + MINIMIZER_AUDIT_TOL {
                return Err(Error::InconsistentMinimizer { gap: best - other });
            }
        }
        Ok(y)
    }
}

fn norm_pow(x: &Vector, p: f64) -> f64 {
    if p == 2.0 {
        x.norm_sq()
    } else if p == 1.0 {
        x.norm()
    } else {
        x.norm().powf(p)
    }
}

/// Clamps a tiny negative base to zero; rejects clearly negative ones.
fn power_base(f: &FunctionSpec, v: f64) -> Result<f64> {
    if f.certified_nonnegative() || v >= -NEGATIVE_BASE_TOL {
        Ok(v.max(0.0))
    } else {
        Err(Error::NegativeBaseError { value: v })
    }
}

fn split_value(f: &FunctionSpec, g: &FunctionSpec, y: &Vector, x: &Vector) -> Result<ExtReal> {
    Ok(match (f.eval(y)?, g.eval(&(x - y))?) {
        (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
        _ => ExtReal::PlusInfinity,
    })
}

fn checked_custom(select: &dyn Fn(&Vector) -> Result<Vector>, x: &Vector) -> Result<Vector> {
    let u = select(x)?;
    u.check_dim(x.dim())?;
    u.ensure_finite("joint selection")
}

fn agree(uf: Vector, ug: &Vector) -> Result<Vector> {
    if uf.dist(ug) <= JOINT_TOL * (1.0 + uf.norm()) {
        Ok(uf)
    } else {
        Err(Error::JointSelectionUnavailable)
    }
}

/// `u ∈ ∂f(x) ∩ ∂g(x)`.
pub(crate) fn joint_pair(joint: &JointSelection, f: &FunctionSpec, g: &FunctionSpec, x: &Vector) -> Result<Vector> {
    let lia = SelectionStrategy::LeastIndexActive;
    match joint {
        JointSelection::Agreeing => agree(f.subgradient(x, lia)?, &g.subgradient(x, lia)?),
        JointSelection::SecondGradient => g.gradient(x),
        JointSelection::Custom { select, .. } => checked_custom(select.as_ref(), x),
    }
}

/// `u ∈ ∂f(y) ∩ ∂g(x − y)`.
pub(crate) fn joint_split(
    joint: &JointSelection,
    f: &FunctionSpec,
    g: &FunctionSpec,
    y: &Vector,
    x: &Vector,
) -> Result<Vector> {
    let lia = SelectionStrategy::LeastIndexActive;
    let rest = x - y;
    match joint {
        JointSelection::Agreeing => agree(f.subgradient(y, lia)?, &g.subgradient(&rest, lia)?),
        JointSelection::SecondGradient => g.gradient(&rest),
        JointSelection::Custom { select, .. } => checked_custom(select.as_ref(), x),
    }
}
