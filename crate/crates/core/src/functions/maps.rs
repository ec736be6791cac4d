use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::vector::Vector;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type VectorFn = Arc<dyn Fn(&Vector) -> Result<Vector> + Send + Sync>;

#[derive(Clone)]
enum PhiKind {
    Identity,
    Cube,
    Power(f64),
    ExpMinusOne,
    Custom { name: String, phi: ScalarFn, dphi: ScalarFn, d2phi: Option<ScalarFn> },
}

/// Increasing scalar map `φ` with `φ(0) = 0`, used on the left of a function.
///
/// `range` is the interval of arguments on which `φ` is declared strictly
/// increasing; evaluations outside it are rejected.
#[derive(Clone)]
pub struct ScalarMap {
    kind: PhiKind,
    lo: f64,
    hi: f64,
}

impl ScalarMap {
    pub fn identity() -> Self {
        ScalarMap { kind: PhiKind::Identity, lo: f64::NEG_INFINITY, hi: f64::INFINITY }
    }

    pub fn cube() -> Self {
        ScalarMap { kind: PhiKind::Cube, lo: f64::NEG_INFINITY, hi: f64::INFINITY }
    }

    /// `t ↦ t^p` on `[0, ∞)`, `p ≥ 1`.
    pub fn power(p: f64) -> Result<Self> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::InvalidParameter(format!("power map needs p ≥ 1, got {p}")));
        }
        Ok(ScalarMap { kind: PhiKind::Power(p), lo: 0.0, hi: f64::INFINITY })
    }

    /// `t ↦ eᵗ − 1`.
    pub fn exp_minus_one() -> Self {
        ScalarMap { kind: PhiKind::ExpMinusOne, lo: f64::NEG_INFINITY, hi: f64::INFINITY }
    }

    /// User-supplied pair `(φ, φ′)` with optional `φ″`, increasing on `[lo, hi]`.
    pub fn custom<P, D>(name: &str, phi: P, dphi: D, lo: f64, hi: f64) -> Result<Self>
    where
        P: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::InvalidParameter(format!("empty monotone range [{lo}, {hi}]")));
        }
        let map = ScalarMap {
            kind: PhiKind::Custom { name: name.to_string(), phi: Arc::new(phi), dphi: Arc::new(dphi), d2phi: None },
            lo,
            hi,
        };
        map.check_origin()?;
        Ok(map)
    }

    /// Attaches a second derivative, enabling Hessians of the composition.
    pub fn with_second_derivative<S>(mut self, d2: S) -> Self
    where
        S: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if let PhiKind::Custom { d2phi, .. } = &mut self.kind {
            *d2phi = Some(Arc::new(d2));
        }
        self
    }

    pub(crate) fn check_origin(&self) -> Result<()> {
        let at_zero = self.value(0.0);
        if !(at_zero.abs() <= 1e-12) {
            return Err(Error::InvalidParameter(format!("scalar map must vanish at 0, got {at_zero:e}")));
        }
        Ok(())
    }

    pub fn name(&self) -> String {
        match &self.kind {
            PhiKind::Identity => "identity".into(),
            PhiKind::Cube => "cube".into(),
            PhiKind::Power(p) => format!("power({p})"),
            PhiKind::ExpMinusOne => "exp_minus_one".into(),
            PhiKind::Custom { name, .. } => name.clone(),
        }
    }

    pub fn range(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn in_range(&self, t: f64) -> bool {
        self.lo <= t && t <= self.hi
    }

    pub fn value(&self, t: f64) -> f64 {
        match &self.kind {
            PhiKind::Identity => t,
            PhiKind::Cube => t * t * t,
            PhiKind::Power(p) => t.max(0.0).powf(*p),
            PhiKind::ExpMinusOne => t.exp_m1(),
            PhiKind::Custom { phi, .. } => phi(t),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match &self.kind {
            PhiKind::Identity => 1.0,
            PhiKind::Cube => 3.0 * t * t,
            PhiKind::Power(p) => {
                if *p == 1.0 {
                    1.0
                } else {
                    p * t.max(0.0).powf(p - 1.0)
                }
            }
            PhiKind::ExpMinusOne => t.exp(),
            PhiKind::Custom { dphi, .. } => dphi(t),
        }
    }

    pub fn second_derivative(&self, t: f64) -> Option<f64> {
        match &self.kind {
            PhiKind::Identity => Some(0.0),
            PhiKind::Cube => Some(6.0 * t),
            PhiKind::Power(p) => Some(if *p == 1.0 { 0.0 } else { p * (p - 1.0) * t.max(0.0).powf(p - 2.0) }),
            PhiKind::ExpMinusOne => Some(t.exp()),
            PhiKind::Custom { d2phi, .. } => d2phi.as_ref().map(|d| d(t)),
        }
    }

    /// Built-in parameters for serialization; `None` for custom maps.
    pub(crate) fn builtin(&self) -> Option<BuiltinPhi> {
        match &self.kind {
            PhiKind::Identity => Some(BuiltinPhi::Identity),
            PhiKind::Cube => Some(BuiltinPhi::Cube),
            PhiKind::Power(p) => Some(BuiltinPhi::Power(*p)),
            PhiKind::ExpMinusOne => Some(BuiltinPhi::ExpMinusOne),
            PhiKind::Custom { .. } => None,
        }
    }
}

pub(crate) enum BuiltinPhi {
    Identity,
    Cube,
    Power(f64),
    ExpMinusOne,
}

impl PartialEq for ScalarMap {
    fn eq(&self, other: &Self) -> bool {
        let same_kind = match (&self.kind, &other.kind) {
            (PhiKind::Identity, PhiKind::Identity)
            | (PhiKind::Cube, PhiKind::Cube)
            | (PhiKind::ExpMinusOne, PhiKind::ExpMinusOne) => true,
            (PhiKind::Power(a), PhiKind::Power(b)) => a == b,
            (PhiKind::Custom { phi: a, .. }, PhiKind::Custom { phi: b, .. }) => Arc::ptr_eq(a, b),
            _ => false,
        };
        same_kind && self.lo == other.lo && self.hi == other.hi
    }
}

impl fmt::Debug for ScalarMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarMap({} on [{}, {}])", self.name(), self.lo, self.hi)
    }
}

/// Selection of a common subgradient `u ∈ ∂f(x) ∩ ∂g(x)` for sums and
/// convex combinations, or of `u ∈ ∂f(Mx) ∩ ∂g(x − Mx)` for
/// inf-convolutions.
#[derive(Clone)]
pub enum JointSelection {
    /// Use the least-index subgradients of `f` and `g` when they coincide
    /// (within `1e−10·(1+‖u‖)`); undefined elsewhere. For distances to two
    /// concentric balls of radii `r < r′` the domain is `rB ∪ {‖x‖ > r′}`.
    Agreeing,
    /// `∇g` at the second argument. Intended for inf-convolutions with a
    /// smooth `g`, where this gradient is the unique common subgradient.
    SecondGradient,
    /// User oracle evaluated at `x`.
    Custom { name: String, select: VectorFn },
}

impl JointSelection {
    pub fn custom<F>(name: &str, select: F) -> Self
    where
        F: Fn(&Vector) -> Result<Vector> + Send + Sync + 'static,
    {
        JointSelection::Custom { name: name.to_string(), select: Arc::new(select) }
    }
}

impl PartialEq for JointSelection {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (JointSelection::Agreeing, JointSelection::Agreeing) => true,
            (JointSelection::SecondGradient, JointSelection::SecondGradient) => true,
            (JointSelection::Custom { select: a, .. }, JointSelection::Custom { select: b, .. }) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl fmt::Debug for JointSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JointSelection::Agreeing => write!(f, "Agreeing"),
            JointSelection::SecondGradient => write!(f, "SecondGradient"),
            JointSelection::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

/// Oracle returning the minimizing split `y = Mx` of an inf-convolution.
#[derive(Clone)]
pub enum Minimizer {
    /// `M = prox_{γf}`, exact when `g = ‖·‖²/(2γ)`.
    Prox { gamma: f64 },
    Custom { name: String, argmin: VectorFn },
}

impl Minimizer {
    pub fn custom<F>(name: &str, argmin: F) -> Self
    where
        F: Fn(&Vector) -> Result<Vector> + Send + Sync + 'static,
    {
        Minimizer::Custom { name: name.to_string(), argmin: Arc::new(argmin) }
    }
}

impl PartialEq for Minimizer {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Minimizer::Prox { gamma: a }, Minimizer::Prox { gamma: b }) => a == b,
            (Minimizer::Custom { argmin: a, .. }, Minimizer::Custom { argmin: b, .. }) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl fmt::Debug for Minimizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Minimizer::Prox { gamma } => write!(f, "Prox {{ gamma: {gamma} }}"),
            Minimizer::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}
