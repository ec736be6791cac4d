mod common;

use common::{rotation, unit_ball, v};
use proptest::prelude::*;
use subproj_core::calculus::{acceleration_gap, sproj_convexcomb, sproj_power, sproj_rightlinear, sproj_scale};
use subproj_core::projector::sproj;
use subproj_core::{AffinePiece, FunctionSpec, JointSelection, Matrix, SelectionStrategy, SetSpec, Vector};

const LIA: SelectionStrategy = SelectionStrategy::LeastIndexActive;

fn point() -> impl Strategy<Value = Vector> {
    (-5.0..5.0f64, -5.0..5.0f64).prop_map(|(a, b)| v(&[a, b]))
}

fn bases() -> Vec<FunctionSpec> {
    vec![
        FunctionSpec::dist(SetSpec::ball(v(&[0.5, -0.5]), 1.0).unwrap()).unwrap(),
        FunctionSpec::sq_dist(SetSpec::boxed(v(&[-1.0, 0.0]), v(&[1.0, 2.0])).unwrap()).unwrap(),
        FunctionSpec::norm_pow(1.0, 2).unwrap(),
    ]
}

fn scaled_orthogonal() -> impl Strategy<Value = Matrix> {
    (0.0..std::f64::consts::TAU, 0.2..3.0f64, any::<bool>(), any::<bool>()).prop_map(|(t, c, swap, flip)| {
        let mut m = rotation(t).scale(c);
        if swap {
            m.swap_columns(0, 1);
        }
        if flip {
            m.column_mut(0).neg_mut();
        }
        m
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn scale_invariance(log_lambda in (1e-3f64).ln()..(1e3f64).ln(), x in point()) {
        let lambda = log_lambda.exp();
        for f in bases().into_iter().chain([FunctionSpec::linear(v(&[1.0, -2.0]))]) {
            let scaled = sproj_scale(lambda, &f, &x, LIA).unwrap().point;
            let plain = sproj(&f, &x, LIA).unwrap().point;
            prop_assert!(scaled.dist(&plain) <= 1e-10 * (1.0 + x.norm()));
        }
    }

    #[test]
    fn power_rule(x in point()) {
        for f in bases() {
            if f.eval_finite(&x).unwrap() <= 1e-2 {
                continue;
            }
            for alpha in [0.25, 0.5, 1.0, 2.0, 4.0] {
                let composed = sproj(&FunctionSpec::power_comp(alpha, f.clone()).unwrap(), &x, LIA).unwrap().point;
                let rule = sproj_power(alpha, &f, &x, LIA).unwrap();
                let expected = x.scale(1.0 - alpha).add_scaled(alpha, &sproj(&f, &x, LIA).unwrap().point);
                prop_assert!(composed.dist(&expected) <= 1e-10 * (1.0 + x.norm()));
                prop_assert!(rule.dist(&expected) <= 1e-12 * (1.0 + x.norm()));
            }
        }
    }

    #[test]
    fn right_linear_identity(l in scaled_orthogonal(), y in point()) {
        let alpha = (l.transpose() * &l)[(0, 0)];
        for f in bases() {
            let composed = FunctionSpec::right_linear(l.clone(), f.clone()).unwrap();
            let lhs = sproj(&composed, &y, LIA).unwrap().point.scale(alpha);
            let rhs = sproj(&f, &y.transform(&l), LIA).unwrap().point.transform_transpose(&l);
            prop_assert!(lhs.dist(&rhs) <= 1e-9 * (1.0 + rhs.norm()));
            let rule = sproj_rightlinear(&l, &f, &y, LIA).unwrap().scale(alpha);
            prop_assert!(rule.dist(&rhs) <= 1e-9 * (1.0 + rhs.norm()));
        }
    }

    #[test]
    fn convex_combination_splits_iff_signs_agree(x in point(), alpha in 0.05..0.95f64, a in -3.0..3.0f64, b in -3.0..3.0f64) {
        let u = v(&[1.0, 1.0]);
        let f = FunctionSpec::affine_max(vec![AffinePiece::new(u.clone(), a)]).unwrap();
        let g = FunctionSpec::affine_max(vec![AffinePiece::new(u, b)]).unwrap();
        let out = sproj_convexcomb(alpha, &f, &g, &JointSelection::Agreeing, &x).unwrap();
        let (fx, gx) = (f.eval_finite(&x).unwrap(), g.eval_finite(&x).unwrap());
        let mix = sproj(&f, &x, LIA).unwrap().point.scale(alpha)
            .add_scaled(1.0 - alpha, &sproj(&g, &x, LIA).unwrap().point);
        let equal = out.point.dist(&mix) <= 1e-10 * (1.0 + x.norm());
        prop_assert_eq!(equal, fx * gx >= 0.0, "f={} g={}", fx, gx);
        let h = FunctionSpec::convex_comb(alpha, f, g, JointSelection::Agreeing).unwrap();
        prop_assert!(out.point.dist(&sproj(&h, &x, LIA).unwrap().point) <= 1e-10 * (1.0 + x.norm()));
    }

    #[test]
    fn acceleration_never_helps(x in point(), alpha in 0.01..=1.0f64) {
        let f = FunctionSpec::dist(unit_ball()).unwrap();
        prop_assume!(x.norm() > 1.0 + 1e-6);
        let r = acceleration_gap(&f, alpha, &x).unwrap();
        prop_assert!(r.gap <= 1e-12);
        let (plain, accelerated) = r.level_distances.unwrap();
        prop_assert!(plain <= accelerated + 1e-12);
    }
}
