#![allow(dead_code)]

use proptest::prelude::*;
use subproj_core::{
    AffinePiece, FunctionSpec, JointSelection, Matrix, Minimizer, ScalarMap, SelectionStrategy, SetSpec, Vector,
};

pub fn v(c: &[f64]) -> Vector {
    Vector::from_slice(c).unwrap()
}

pub const STRATEGIES: [SelectionStrategy; 4] = [
    SelectionStrategy::LeastIndexActive,
    SelectionStrategy::CentroidActive,
    SelectionStrategy::EndpointK { k: 0 },
    SelectionStrategy::EndpointK { k: 1 },
];

/// Where the sampled points of a catalog entry live.
#[derive(Clone, Copy, Debug)]
pub enum Domain {
    Whole,
    /// `x > 0`, one-dimensional.
    Positive,
    /// `‖x‖ > r`, where a joint selection is defined off the inner set.
    Outside(f64),
}

impl Domain {
    /// Maps a raw point of `[-5, 5]ⁿ` into the domain.
    pub fn place(self, raw: &Vector) -> Vector {
        match self {
            Domain::Whole => raw.clone(),
            Domain::Positive => raw.map(|t| t.abs() + 1e-2),
            Domain::Outside(r) => {
                let n = raw.norm().max(1e-3);
                raw.scale((r + 0.05 + n) / n)
            }
        }
    }
}

pub struct Entry {
    pub name: &'static str,
    pub f: FunctionSpec,
    pub domain: Domain,
}

fn entry(name: &'static str, f: FunctionSpec, domain: Domain) -> Entry {
    Entry { name, f, domain }
}

pub fn unit_ball() -> SetSpec {
    SetSpec::ball(v(&[0.0, 0.0]), 1.0).unwrap()
}

pub fn rotation(theta: f64) -> Matrix {
    let (s, c) = theta.sin_cos();
    Matrix::from_row_slice(2, 2, &[c, -s, s, c])
}

/// Atoms and combinators, each with the region it is sampled on.
pub fn catalog() -> Vec<Entry> {
    let ball = SetSpec::ball(v(&[0.5, -0.5]), 1.0).unwrap();
    let half = SetSpec::halfspace(v(&[1.0, 2.0]), 1.0).unwrap();
    let boxed = SetSpec::boxed(v(&[-1.0, 0.0]), v(&[1.0, 2.0])).unwrap();
    let point = SetSpec::point(v(&[1.0, -1.0]));
    let pieces = vec![
        AffinePiece::new(v(&[1.0, 0.0]), 1.0),
        AffinePiece::new(v(&[0.0, 1.0]), 1.0),
        AffinePiece::new(v(&[-1.0, -1.0]), -2.0),
    ];
    let small = FunctionSpec::dist(unit_ball()).unwrap();
    let large = FunctionSpec::dist(SetSpec::ball(v(&[0.0, 0.0]), 2.0).unwrap()).unwrap();
    let shifted_a = FunctionSpec::affine_max(vec![AffinePiece::new(v(&[1.0, 1.0]), -1.0)]).unwrap();
    let shifted_b = FunctionSpec::affine_max(vec![AffinePiece::new(v(&[1.0, 1.0]), 2.0)]).unwrap();
    vec![
        entry("linear", FunctionSpec::linear(v(&[1.0, -2.0])), Domain::Whole),
        entry("dist_ball", FunctionSpec::dist(ball.clone()).unwrap(), Domain::Whole),
        entry("dist_halfspace", FunctionSpec::dist(half.clone()).unwrap(), Domain::Whole),
        entry("dist_box", FunctionSpec::dist(boxed.clone()).unwrap(), Domain::Whole),
        entry("dist_point", FunctionSpec::dist(point).unwrap(), Domain::Whole),
        entry("sq_dist_ball", FunctionSpec::sq_dist(ball.clone()).unwrap(), Domain::Whole),
        entry("sq_dist_box", FunctionSpec::sq_dist(boxed).unwrap(), Domain::Whole),
        entry("norm", FunctionSpec::norm_pow(1.0, 2).unwrap(), Domain::Whole),
        entry("norm_sq", FunctionSpec::norm_pow(2.0, 2).unwrap(), Domain::Whole),
        entry("norm_cube", FunctionSpec::norm_pow(3.0, 2).unwrap(), Domain::Whole),
        entry("neg_log", FunctionSpec::neg_log(), Domain::Positive),
        entry("sqrt_shift", FunctionSpec::sqrt_shift(2.0).unwrap(), Domain::Positive),
        entry("hyperbolic", FunctionSpec::hyperbolic(2.0).unwrap(), Domain::Whole),
        entry("affine_max", FunctionSpec::affine_max(pieces).unwrap(), Domain::Whole),
        entry("scale", FunctionSpec::scale(3.0, FunctionSpec::dist(ball.clone()).unwrap()).unwrap(), Domain::Whole),
        entry(
            "power_comp",
            FunctionSpec::power_comp(0.5, FunctionSpec::dist(ball.clone()).unwrap()).unwrap(),
            Domain::Whole,
        ),
        entry(
            "left_compose",
            FunctionSpec::left_compose(ScalarMap::exp_minus_one(), FunctionSpec::dist(half).unwrap()).unwrap(),
            Domain::Whole,
        ),
        entry(
            "right_linear",
            FunctionSpec::right_linear(rotation(0.7).scale(2.0), FunctionSpec::dist(ball).unwrap()).unwrap(),
            Domain::Whole,
        ),
        entry(
            "convex_comb",
            FunctionSpec::convex_comb(0.3, small.clone(), large.clone(), JointSelection::Agreeing).unwrap(),
            Domain::Outside(2.0),
        ),
        entry("sum_pair", FunctionSpec::sum_pair(small, large, JointSelection::Agreeing).unwrap(), Domain::Outside(2.0)),
        entry(
            "convex_comb_affine",
            FunctionSpec::convex_comb(0.4, shifted_a, shifted_b, JointSelection::Agreeing).unwrap(),
            Domain::Whole,
        ),
        entry("moreau_ball", FunctionSpec::moreau_env(1.0, FunctionSpec::indicator(unit_ball()).unwrap()).unwrap(), Domain::Whole),
        entry(
            "inf_conv",
            FunctionSpec::inf_conv(
                FunctionSpec::indicator(unit_ball()).unwrap(),
                FunctionSpec::quadratic_kernel(0.5, 2).unwrap(),
                Minimizer::Prox { gamma: 0.5 },
                JointSelection::SecondGradient,
            )
            .unwrap(),
            Domain::Whole,
        ),
    ]
}

/// Catalog entries whose level set has a projection oracle.
pub fn with_level_oracle() -> Vec<Entry> {
    catalog()
        .into_iter()
        .filter(|e| e.f.level_set_projection(&v(&vec![0.3; e.f.dim()])).is_ok())
        .collect()
}

pub fn raw_point(dim: usize) -> impl Strategy<Value = Vector> {
    prop::collection::vec(-5.0..5.0f64, dim).prop_map(|c| Vector::new(c).unwrap())
}

/// A raw point in `[-5,5]²`; one-dimensional entries use the first coordinate.
pub fn raw_pair() -> impl Strategy<Value = (f64, f64)> {
    (-5.0..5.0f64, -5.0..5.0f64)
}

pub fn point_for(e: &Entry, raw: (f64, f64)) -> Vector {
    let r = if e.f.dim() == 1 { v(&[raw.0]) } else { v(&[raw.0, raw.1]) };
    e.domain.place(&r)
}
