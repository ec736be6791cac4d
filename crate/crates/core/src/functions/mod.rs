//! Catalog of convex functions and combinators with their oracles.

mod level;
mod maps;
mod oracle;
mod record;
mod set;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::{max_abs, Matrix, Vector, EPS_NORM};

pub use maps::{JointSelection, Minimizer, ScalarMap};
pub use record::{FunctionRecord, JointRecord, MinimizerRecord, PhiRecord};
pub use set::SetSpec;

/// Rule for picking a subgradient where `∂f(x)` is not a singleton.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionStrategy {
    /// Gradient of the lowest-index active piece.
    #[default]
    LeastIndexActive,
    /// Mean of the active-piece gradients.
    CentroidActive,
    /// Active piece number `k` (modulo the number of active pieces).
    EndpointK { k: usize },
}

/// One affine piece `x ↦ ⟨x, a⟩ + b` of a max-affine function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffinePiece {
    pub a: Vector,
    pub b: f64,
}

impl AffinePiece {
    pub fn new(a: Vector, b: f64) -> Self {
        AffinePiece { a, b }
    }

    pub fn value(&self, x: &Vector) -> f64 {
        x.dot(&self.a) + self.b
    }
}

/// The node of a function expression. Read through [`FunctionSpec::kind`];
/// build through the validated constructors on [`FunctionSpec`].
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionKind {
    Linear { u: Vector },
    Dist { set: SetSpec },
    SqDist { set: SetSpec },
    NormPow { p: f64, dim: usize },
    NegLog,
    SqrtShift { eta: f64 },
    Hyperbolic { eta: f64 },
    AffineMax { pieces: Vec<AffinePiece> },
    Indicator { set: SetSpec },
    Scale { lambda: f64, f: FunctionSpec },
    /// `f^{1/α}`.
    PowerComp { alpha: f64, f: FunctionSpec },
    LeftCompose { phi: ScalarMap, f: FunctionSpec },
    /// `f ∘ L` with `LᵀL = LLᵀ = αI`.
    RightLinear { l: Matrix, alpha: f64, f: FunctionSpec },
    ConvexComb { alpha: f64, f: FunctionSpec, g: FunctionSpec, joint: JointSelection },
    SumPair { f: FunctionSpec, g: FunctionSpec, joint: JointSelection },
    MoreauEnv { gamma: f64, f: FunctionSpec },
    InfConv { f: FunctionSpec, g: FunctionSpec, minimizer: Minimizer, joint: JointSelection },
}

/// Immutable, cheaply clonable convex function on `ℝ^dim`.
#[derive(Clone, PartialEq)]
pub struct FunctionSpec {
    node: Arc<FunctionKind>,
    dim: usize,
}

impl fmt::Debug for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.node.fmt(f)
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")))
    }
}

fn same_dim(f: &FunctionSpec, g: &FunctionSpec) -> Result<()> {
    if f.dim != g.dim {
        return Err(Error::DimensionMismatch { expected: f.dim, got: g.dim });
    }
    Ok(())
}

/// Returns `α` when `LᵀL = LLᵀ = αI` within `1e−10·max(1, α)`.
pub fn scaled_orthogonal_factor(l: &Matrix) -> Result<f64> {
    if !l.is_square() || l.nrows() == 0 {
        return Err(Error::NotScaledOrthogonal { residual: f64::INFINITY });
    }
    if l.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("linear map entries".into()));
    }
    let n = l.nrows();
    let ltl = l.transpose() * l;
    let alpha = ltl.trace() / n as f64;
    let id = Matrix::identity(n, n) * alpha;
    let residual = max_abs(&(&ltl - &id)).max(max_abs(&(l * l.transpose() - &id)));
    if alpha <= EPS_NORM || residual > 1e-10 * alpha.max(1.0) {
        return Err(Error::NotScaledOrthogonal { residual });
    }
    Ok(alpha)
}

impl FunctionSpec {
    fn wrap(kind: FunctionKind, dim: usize) -> Self {
        FunctionSpec { node: Arc::new(kind), dim }
    }

    pub fn kind(&self) -> &FunctionKind {
        &self.node
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `x ↦ ⟨x, u⟩`.
    pub fn linear(u: Vector) -> Self {
        let dim = u.dim();
        Self::wrap(FunctionKind::Linear { u }, dim)
    }

    /// Distance to a set.
    pub fn dist(set: SetSpec) -> Result<Self> {
        set.validate()?;
        let dim = set.dim();
        Ok(Self::wrap(FunctionKind::Dist { set }, dim))
    }

    /// Squared distance to a set.
    pub fn sq_dist(set: SetSpec) -> Result<Self> {
        set.validate()?;
        let dim = set.dim();
        Ok(Self::wrap(FunctionKind::SqDist { set }, dim))
    }

    /// `‖x‖^p` for `p ≥ 1`.
    pub fn norm_pow(p: f64, dim: usize) -> Result<Self> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::InvalidParameter(format!("norm power needs p ≥ 1 for convexity, got {p}")));
        }
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be ≥ 1".into()));
        }
        Ok(Self::wrap(FunctionKind::NormPow { p, dim }, dim))
    }

    /// `−ln x` on `x > 0`.
    pub fn neg_log() -> Self {
        Self::wrap(FunctionKind::NegLog, 1)
    }

    /// `η − √x` on `x > 0`.
    pub fn sqrt_shift(eta: f64) -> Result<Self> {
        positive("eta", eta)?;
        Ok(Self::wrap(FunctionKind::SqrtShift { eta }, 1))
    }

    /// `√(1+x²) − η` with `η > 1`.
    pub fn hyperbolic(eta: f64) -> Result<Self> {
        if !(eta.is_finite() && eta > 1.0) {
            return Err(Error::InvalidParameter(format!("hyperbolic needs η > 1, got {eta}")));
        }
        Ok(Self::wrap(FunctionKind::Hyperbolic { eta }, 1))
    }

    /// `x ↦ maxᵢ ⟨x, aᵢ⟩ + bᵢ`.
    pub fn affine_max(pieces: Vec<AffinePiece>) -> Result<Self> {
        let first = pieces
            .first()
            .ok_or_else(|| Error::InvalidParameter("affine max needs at least one piece".into()))?;
        let dim = first.a.dim();
        for p in &pieces {
            p.a.check_dim(dim)?;
            if !p.b.is_finite() {
                return Err(Error::NonFinite("affine piece offset".into()));
            }
            if p.a.norm() <= EPS_NORM && p.b > 0.0 {
                return Err(Error::InvalidParameter("a constant positive piece empties the level set".into()));
            }
        }
        if dim == 1 {
            let (lo, hi) = level::affine_interval(&pieces);
            if lo > hi {
                return Err(Error::InvalidParameter(format!("level set is empty: [{lo}, {hi}]")));
            }
        }
        Ok(Self::wrap(FunctionKind::AffineMax { pieces }, dim))
    }

    /// `ι_S`; only meaningful below a Moreau envelope or an inf-convolution.
    pub fn indicator(set: SetSpec) -> Result<Self> {
        set.validate()?;
        let dim = set.dim();
        Ok(Self::wrap(FunctionKind::Indicator { set }, dim))
    }

    /// `λ·f`.
    pub fn scale(lambda: f64, f: FunctionSpec) -> Result<Self> {
        positive("lambda", lambda)?;
        let dim = f.dim;
        Ok(Self::wrap(FunctionKind::Scale { lambda, f }, dim))
    }

    /// `f^{1/α}` for a nonnegative `f`.
    pub fn power_comp(alpha: f64, f: FunctionSpec) -> Result<Self> {
        positive("alpha", alpha)?;
        let dim = f.dim;
        Ok(Self::wrap(FunctionKind::PowerComp { alpha, f }, dim))
    }

    /// `φ ∘ f`.
    pub fn left_compose(phi: ScalarMap, f: FunctionSpec) -> Result<Self> {
        phi.check_origin()?;
        let dim = f.dim;
        Ok(Self::wrap(FunctionKind::LeftCompose { phi, f }, dim))
    }

    /// `f ∘ L` for a scaled orthogonal `L`.
    pub fn right_linear(l: Matrix, f: FunctionSpec) -> Result<Self> {
        let alpha = scaled_orthogonal_factor(&l)?;
        if l.nrows() != f.dim {
            return Err(Error::DimensionMismatch { expected: f.dim, got: l.nrows() });
        }
        let dim = f.dim;
        Ok(Self::wrap(FunctionKind::RightLinear { l, alpha, f }, dim))
    }

    /// `αf + (1−α)g` for `α ∈ (0,1)`.
    pub fn convex_comb(alpha: f64, f: FunctionSpec, g: FunctionSpec, joint: JointSelection) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!("convex weight must lie in (0,1), got {alpha}")));
        }
        same_dim(&f, &g)?;
        let dim = f.dim;
        Ok(Self::wrap(FunctionKind::ConvexComb { alpha, f, g, joint }, dim))
    }

    /// `f + g`; its subgradient is twice the joint selection.
    pub fn sum_pair(f: FunctionSpec, g: FunctionSpec, joint: JointSelection) -> Result<Self> {
        same_dim(&f, &g)?;
        let dim = f.dim;
        Ok(Self::wrap(FunctionKind::SumPair { f, g, joint }, dim))
    }

    /// Moreau envelope with parameter `γ` of a prox-friendly `f`.
    pub fn moreau_env(gamma: f64, f: FunctionSpec) -> Result<Self> {
        positive("gamma", gamma)?;
        if !crate::prox::is_prox_friendly(&f) {
            return Err(Error::UnsupportedAtom(format!("no closed-form prox for {}", f.label())));
        }
        let dim = f.dim;
        Ok(Self::wrap(FunctionKind::MoreauEnv { gamma, f }, dim))
    }

    /// Exact inf-convolution `x ↦ f(Mx) + g(x − Mx)`.
    pub fn inf_conv(f: FunctionSpec, g: FunctionSpec, minimizer: Minimizer, joint: JointSelection) -> Result<Self> {
        same_dim(&f, &g)?;
        if let Minimizer::Prox { gamma } = &minimizer {
            positive("gamma", *gamma)?;
            if !crate::prox::is_prox_friendly(&f) {
                return Err(Error::UnsupportedAtom(format!("no closed-form prox for {}", f.label())));
            }
            if !is_quadratic_kernel(&g, *gamma) {
                return Err(Error::InvalidParameter("prox minimizer requires g = ‖·‖²/(2γ)".into()));
            }
        }
        let dim = f.dim;
        Ok(Self::wrap(FunctionKind::InfConv { f, g, minimizer, joint }, dim))
    }

    /// `‖·‖²/(2γ)` as a spec.
    pub fn quadratic_kernel(gamma: f64, dim: usize) -> Result<Self> {
        positive("gamma", gamma)?;
        Self::scale(0.5 / gamma, Self::norm_pow(2.0, dim)?)
    }

    /// Short name of the outermost node.
    pub fn label(&self) -> &'static str {
        match self.kind() {
            FunctionKind::Linear { .. } => "linear",
            FunctionKind::Dist { .. } => "dist",
            FunctionKind::SqDist { .. } => "sq_dist",
            FunctionKind::NormPow { .. } => "norm_pow",
            FunctionKind::NegLog => "neg_log",
            FunctionKind::SqrtShift { .. } => "sqrt_shift",
            FunctionKind::Hyperbolic { .. } => "hyperbolic",
            FunctionKind::AffineMax { .. } => "affine_max",
            FunctionKind::Indicator { .. } => "indicator",
            FunctionKind::Scale { .. } => "scale",
            FunctionKind::PowerComp { .. } => "power_comp",
            FunctionKind::LeftCompose { .. } => "left_compose",
            FunctionKind::RightLinear { .. } => "right_linear",
            FunctionKind::ConvexComb { .. } => "convex_comb",
            FunctionKind::SumPair { .. } => "sum_pair",
            FunctionKind::MoreauEnv { .. } => "moreau_env",
            FunctionKind::InfConv { .. } => "inf_conv",
        }
    }

    /// True when `f ≥ 0` holds by construction.
    pub fn certified_nonnegative(&self) -> bool {
        match self.kind() {
            FunctionKind::Dist { .. }
            | FunctionKind::SqDist { .. }
            | FunctionKind::NormPow { .. }
            | FunctionKind::Indicator { .. } => true,
            FunctionKind::Scale { f, .. }
            | FunctionKind::PowerComp { f, .. }
            | FunctionKind::RightLinear { f, .. }
            | FunctionKind::LeftCompose { f, .. }
            | FunctionKind::MoreauEnv { f, .. } => f.certified_nonnegative(),
            FunctionKind::ConvexComb { f, g, .. }
            | FunctionKind::SumPair { f, g, .. }
            | FunctionKind::InfConv { f, g, .. } => f.certified_nonnegative() && g.certified_nonnegative(),
            FunctionKind::Linear { .. }
            | FunctionKind::NegLog
            | FunctionKind::SqrtShift { .. }
            | FunctionKind::Hyperbolic { .. }
            | FunctionKind::AffineMax { .. } => false,
        }
    }

    /// True when an indicator appears outside a Moreau envelope or
    /// inf-convolution, where the raw projector is undefined off the set.
    pub fn has_bare_indicator(&self) -> bool {
        match self.kind() {
            FunctionKind::Indicator { .. } => true,
            FunctionKind::MoreauEnv { .. } | FunctionKind::InfConv { .. } => false,
            FunctionKind::Scale { f, .. }
            | FunctionKind::PowerComp { f, .. }
            | FunctionKind::RightLinear { f, .. }
            | FunctionKind::LeftCompose { f, .. } => f.has_bare_indicator(),
            FunctionKind::ConvexComb { f, g, .. } | FunctionKind::SumPair { f, g, .. } => {
                f.has_bare_indicator() || g.has_bare_indicator()
            }
            _ => false,
        }
    }

    /// Structural check that the function is finite on the whole space.
    pub fn is_real_valued(&self) -> bool {
        match self.kind() {
            FunctionKind::NegLog | FunctionKind::SqrtShift { .. } | FunctionKind::Indicator { .. } => false,
            FunctionKind::MoreauEnv { .. } => true,
            FunctionKind::InfConv { f, g, .. } => f.is_real_valued() || g.is_real_valued(),
            FunctionKind::Scale { f, .. }
            | FunctionKind::PowerComp { f, .. }
            | FunctionKind::RightLinear { f, .. }
            | FunctionKind::LeftCompose { f, .. } => f.is_real_valued(),
            FunctionKind::ConvexComb { f, g, .. } | FunctionKind::SumPair { f, g, .. } => {
                f.is_real_valued() && g.is_real_valued()
            }
            _ => true,
        }
    }
}

fn is_quadratic_kernel(g: &FunctionSpec, gamma: f64) -> bool {
    match g.kind() {
        FunctionKind::Scale { lambda, f } => {
            matches!(f.kind(), FunctionKind::NormPow { p, .. } if *p == 2.0)
                && (lambda * 2.0 * gamma - 1.0).abs() <= 1e-12
        }
        _ => false,
    }
}

impl Serialize for FunctionSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_record().map_err(serde::ser::Error::custom)?.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FunctionSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let record = FunctionRecord::deserialize(deserializer)?;
        FunctionSpec::from_record(&record).map_err(serde::de::Error::custom)
    }
}
