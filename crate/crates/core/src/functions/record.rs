//! Tagged structured-text form of function expressions.

use serde::{Deserialize, Serialize};

use super::maps::BuiltinPhi;
use super::{AffinePiece, FunctionKind, FunctionSpec, JointSelection, Minimizer, ScalarMap, SetSpec};
use crate::error::{Error, Result};
use crate::vector::{Matrix, Vector};

/// Serializable mirror of [`FunctionSpec`], e.g.
/// `{"type":"dist","set":{"type":"ball","center":[0,0],"radius":1}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionRecord {
    Linear { u: Vector },
    Dist { set: SetSpec },
    SqDist { set: SetSpec },
    NormPow { p: f64, dim: usize },
    NegLog {},
    SqrtShift { eta: f64 },
    Hyperbolic { eta: f64 },
    AffineMax { pieces: Vec<AffinePiece> },
    Indicator { set: SetSpec },
    Scale { lambda: f64, f: Box<FunctionRecord> },
    PowerComp { alpha: f64, f: Box<FunctionRecord> },
    LeftCompose { phi: PhiRecord, f: Box<FunctionRecord> },
    /// Row-major matrix.
    RightLinear { l: Vec<Vec<f64>>, f: Box<FunctionRecord> },
    ConvexComb { alpha: f64, f: Box<FunctionRecord>, g: Box<FunctionRecord>, joint: JointRecord },
    SumPair { f: Box<FunctionRecord>, g: Box<FunctionRecord>, joint: JointRecord },
    MoreauEnv { gamma: f64, f: Box<FunctionRecord> },
    InfConv { f: Box<FunctionRecord>, g: Box<FunctionRecord>, minimizer: MinimizerRecord, joint: JointRecord },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhiRecord {
    Identity {},
    Cube {},
    Power { p: f64 },
    ExpMinusOne {},
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JointRecord {
    Agreeing,
    SecondGradient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MinimizerRecord {
    Prox { gamma: f64 },
}

fn not_serializable(what: &str) -> Error {
    Error::InvalidParameter(format!("custom {what} has no structured-text form"))
}

fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<Matrix> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidParameter("linear map must be a nonempty square matrix".into()));
    }
    Ok(Matrix::from_fn(n, n, |i, j| rows[i][j]))
}

impl JointRecord {
    fn to_joint(self) -> JointSelection {
        match self {
            JointRecord::Agreeing => JointSelection::Agreeing,
            JointRecord::SecondGradient => JointSelection::SecondGradient,
        }
    }

    fn from_joint(j: &JointSelection) -> Result<Self> {
        match j {
            JointSelection::Agreeing => Ok(JointRecord::Agreeing),
            JointSelection::SecondGradient => Ok(JointRecord::SecondGradient),
            JointSelection::Custom { .. } => Err(not_serializable("joint selection")),
        }
    }
}

impl FunctionSpec {
    pub fn from_record(r: &FunctionRecord) -> Result<Self> {
        let sub = |b: &FunctionRecord| FunctionSpec::from_record(b);
        match r {
            FunctionRecord::Linear { u } => Ok(FunctionSpec::linear(u.clone())),
            FunctionRecord::Dist { set } => FunctionSpec::dist(set.clone()),
            FunctionRecord::SqDist { set } => FunctionSpec::sq_dist(set.clone()),
            FunctionRecord::NormPow { p, dim } => FunctionSpec::norm_pow(*p, *dim),
            FunctionRecord::NegLog {} => Ok(FunctionSpec::neg_log()),
            FunctionRecord::SqrtShift { eta } => FunctionSpec::sqrt_shift(*eta),
            FunctionRecord::Hyperbolic { eta } => FunctionSpec::hyperbolic(*eta),
            FunctionRecord::AffineMax { pieces } => FunctionSpec::affine_max(pieces.clone()),
            FunctionRecord::Indicator { set } => FunctionSpec::indicator(set.clone()),
            FunctionRecord::Scale { lambda, f } => FunctionSpec::scale(*lambda, sub(f)?),
            FunctionRecord::PowerComp { alpha, f } => FunctionSpec::power_comp(*alpha, sub(f)?),
            FunctionRecord::LeftCompose { phi, f } => {
                let map = match phi {
                    PhiRecord::Identity {} => ScalarMap::identity(),
                    PhiRecord::Cube {} => ScalarMap::cube(),
                    PhiRecord::Power { p } => ScalarMap::power(*p)?,
                    PhiRecord::ExpMinusOne {} => ScalarMap::exp_minus_one(),
                };
                FunctionSpec::left_compose(map, sub(f)?)
            }
            FunctionRecord::RightLinear { l, f } => FunctionSpec::right_linear(matrix_from_rows(l)?, sub(f)?),
            FunctionRecord::ConvexComb { alpha, f, g, joint } => {
                FunctionSpec::convex_comb(*alpha, sub(f)?, sub(g)?, joint.to_joint())
            }
            FunctionRecord::SumPair { f, g, joint } => FunctionSpec::sum_pair(sub(f)?, sub(g)?, joint.to_joint()),
            FunctionRecord::MoreauEnv { gamma, f } => FunctionSpec::moreau_env(*gamma, sub(f)?),
            FunctionRecord::InfConv { f, g, minimizer: MinimizerRecord::Prox { gamma }, joint } => {
                FunctionSpec::inf_conv(sub(f)?, sub(g)?, Minimizer::Prox { gamma: *gamma }, joint.to_joint())
            }
        }
    }

    /// Fails for expressions holding user callables.
    pub fn to_record(&self) -> Result<FunctionRecord> {
        let sub = |f: &FunctionSpec| f.to_record().map(Box::new);
        Ok(match self.kind() {
            FunctionKind::Linear { u } => FunctionRecord::Linear { u: u.clone() },
            FunctionKind::Dist { set } => FunctionRecord::Dist { set: set.clone() },
            FunctionKind::SqDist { set } => FunctionRecord::SqDist { set: set.clone() },
            FunctionKind::NormPow { p, dim } => FunctionRecord::NormPow { p: *p, dim: *dim },
            FunctionKind::NegLog => FunctionRecord::NegLog {},
            FunctionKind::SqrtShift { eta } => FunctionRecord::SqrtShift { eta: *eta },
            FunctionKind::Hyperbolic { eta } => FunctionRecord::Hyperbolic { eta: *eta },
            FunctionKind::AffineMax { pieces } => FunctionRecord::AffineMax { pieces: pieces.clone() },
            FunctionKind::Indicator { set } => FunctionRecord::Indicator { set: set.clone() },
            FunctionKind::Scale { lambda, f } => FunctionRecord::Scale { lambda: *lambda, f: sub(f)? },
            FunctionKind::PowerComp { alpha, f } => FunctionRecord::PowerComp { alpha: *alpha, f: sub(f)? },
            FunctionKind::LeftCompose { phi, f } => {
                let phi = match phi.builtin().ok_or_else(|| not_serializable("scalar map"))? {
                    BuiltinPhi::Identity => PhiRecord::Identity {},
                    BuiltinPhi::Cube => PhiRecord::Cube {},
                    BuiltinPhi::Power(p) => PhiRecord::Power { p },
                    BuiltinPhi::ExpMinusOne => PhiRecord::ExpMinusOne {},
                };
                FunctionRecord::LeftCompose { phi, f: sub(f)? }
            }
            FunctionKind::RightLinear { l, f, .. } => {
                let rows = (0..l.nrows()).map(|i| l.row(i).iter().copied().collect()).collect();
                FunctionRecord::RightLinear { l: rows, f: sub(f)? }
            }
            FunctionKind::ConvexComb { alpha, f, g, joint } => FunctionRecord::ConvexComb {
                alpha: *alpha,
                f: sub(f)?,
                g: sub(g)?,
                joint: JointRecord::from_joint(joint)?,
            },
            FunctionKind::SumPair { f, g, joint } => {
                FunctionRecord::SumPair { f: sub(f)?, g: sub(g)?, joint: JointRecord::from_joint(joint)? }
            }
            FunctionKind::MoreauEnv { gamma, f } => FunctionRecord::MoreauEnv { gamma: *gamma, f: sub(f)? },
            FunctionKind::InfConv { f, g, minimizer, joint } => {
                let minimizer = match minimizer {
                    Minimizer::Prox { gamma } => MinimizerRecord::Prox { gamma: *gamma },
                    Minimizer::Custom { .. } => return Err(not_serializable("minimizer")),
                };
                FunctionRecord::InfConv { f: sub(f)?, g: sub(g)?, minimizer, joint: JointRecord::from_joint(joint)? }
            }
        })
    }
}
