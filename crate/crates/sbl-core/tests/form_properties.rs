//! Property tests of the exterior-calculus layer: graded commutativity,
//! nilpotency of d, the Leibniz rule and the star involution on randomized
//! forms, plus a restriction-commutes-with-d check against an intrinsic
//! parametrization of the bundle.

use proptest::prelude::*;
use std::sync::Arc;

use sbl_core::bundle::{adapted_frame, BundlePoint, TPoint, TVec};
use sbl_core::forms::{
    binom, frame_components, hodge_star, index_tuples, restricted_residual, star_frame_components,
    FormField, Pivot,
};
use sbl_core::ChartMetric;

/// Polynomial-coefficient form: component `i` is a low-degree polynomial in
/// the chart coordinates with the supplied coefficients.
fn poly_form(dim: usize, degree: usize, coeffs: Vec<[f64; 4]>) -> FormField {
    FormField::new(
        degree,
        dim,
        "poly",
        Arc::new(move |p: &TPoint| {
            Ok(coeffs
                .iter()
                .map(|c| {
                    c[0] + c[1] * p.x[0] + c[2] * p.u[1] + c[3] * p.x[2] * p.u[0]
                })
                .collect())
        }),
    )
}

fn coeff_vec(len: usize) -> impl Strategy<Value = Vec<[f64; 4]>> {
    prop::collection::vec(
        [-1.0f64..1.0, -1.0..1.0, -1.0..1.0, -1.0..1.0],
        len..=len,
    )
}

fn test_point() -> impl Strategy<Value = TPoint> {
    (
        [-0.5f64..0.5, -0.5..0.5, -0.5..0.5],
        [-1.0f64..1.0, -1.0..1.0, 0.3f64..1.0],
    )
        .prop_map(|(x, u)| TPoint::new(x, u, 3))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn wedge_is_graded_commutative(
        ca in coeff_vec(6),
        cb in coeff_vec(15),
        p in test_point(),
    ) {
        // 1-form against 2-form: a ^ b = (+1)^{1*2} b ^ a
        let a = poly_form(6, 1, ca);
        let b = poly_form(6, 2, cb);
        let ab = a.wedge(&b).unwrap().components(&p).unwrap();
        let ba = b.wedge(&a).unwrap().components(&p).unwrap();
        for (x, y) in ab.iter().zip(ba.iter()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
        // 1-form against itself: a ^ a = 0
        let a2 = a.wedge(&a).unwrap().components(&p).unwrap();
        for v in a2 {
            prop_assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn d_squared_vanishes(c in coeff_vec(15), p in test_point()) {
        let a = poly_form(6, 2, c);
        let dda = a.ext_derivative().ext_derivative().components(&p).unwrap();
        for v in dda {
            prop_assert!(v.abs() < 1e-6, "dd component {v}");
        }
    }

    #[test]
    fn graded_leibniz(ca in coeff_vec(6), cb in coeff_vec(6), p in test_point()) {
        let a = poly_form(6, 1, ca);
        let b = poly_form(6, 1, cb);
        let lhs = a.wedge(&b).unwrap().ext_derivative().components(&p).unwrap();
        let rhs = a
            .ext_derivative()
            .wedge(&b)
            .unwrap()
            .sub(&a.wedge(&b.ext_derivative()).unwrap())
            .components(&p)
            .unwrap();
        for (x, y) in lhs.iter().zip(rhs.iter()) {
            prop_assert!((x - y).abs() < 1e-6, "{x} vs {y}");
        }
    }

    #[test]
    fn star_involution_on_random_frame_components(
        k in 0usize..=5,
        seed in 0u64..1000,
    ) {
        let n = binom(5, k);
        let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state as f64 / u64::MAX as f64) * 2.0 - 1.0
        };
        let fc: Vec<f64> = (0..n).map(|_| next()).collect();
        let ss = star_frame_components(&star_frame_components(&fc, 5, k), 5, 5 - k);
        for (a, b) in fc.iter().zip(ss.iter()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}

/// Pulling a form back to an intrinsic parametrization of the bundle and
/// differentiating there agrees with differentiating on the tangent manifold
/// and restricting: the justification for checking bundle identities upstairs.
#[test]
fn restriction_commutes_with_exterior_derivative() {
    let m = ChartMetric::heisenberg();
    let s = 1.0;
    let sys = sbl_core::eds::build_system(&m, s).unwrap();
    let p = BundlePoint::from_direction(&m, [0.2, -0.3, 0.4], [0.5, 0.9, -0.4], s).unwrap();
    let frame = adapted_frame(&m, &p).unwrap();

    // intrinsic parametrization around p: x free, fiber re-normalized along
    // two tangent directions of the fiber sphere
    let t1 = [frame.b[1], frame.b[2]];
    let chart = |y: &[f64; 5]| -> TPoint {
        let x = [p.x[0] + y[0], p.x[1] + y[1], p.x[2] + y[2]];
        let mut dir = [0.0; 3];
        for i in 0..3 {
            dir[i] = p.u[i] + y[3] * t1[0][i] + y[4] * t1[1][i];
        }
        let nrm = m.norm(&x, &dir);
        for d in dir.iter_mut() {
            *d *= s / nrm;
        }
        TPoint::new(x, dir, 3)
    };
    // tangent vectors of the parametrization by finite differences
    let h = 1e-5;
    let push = |y: &[f64; 5], dir: usize| -> TVec {
        let mut yp = *y;
        let mut ym = *y;
        yp[dir] += h;
        ym[dir] -= h;
        let (a, b) = (chart(&yp), chart(&ym));
        let mut out = TVec::zero();
        for i in 0..3 {
            out.b[i] = (a.x[i] - b.x[i]) / (2.0 * h);
            out.f[i] = (a.u[i] - b.u[i]) / (2.0 * h);
        }
        out
    };

    let omega = &sys.alpha[1];
    // intrinsic d of the pullback: stencil the pulled-back components
    let pulled = |y: &[f64; 5], i: usize, j: usize| -> f64 {
        let q = chart(y);
        omega.eval(&q, &[push(y, i), push(y, j)]).unwrap()
    };
    // (d pullback)(0, 1, 3) via the coordinate formula at y = 0
    let idx = [0usize, 1, 3];
    let mut intrinsic = 0.0;
    for (m_pos, &c) in idx.iter().enumerate() {
        let rest: Vec<usize> = idx
            .iter()
            .enumerate()
            .filter(|&(q, _)| q != m_pos)
            .map(|(_, &v)| v)
            .collect();
        let mut yp = [0.0; 5];
        let mut ym = [0.0; 5];
        yp[c] += h;
        ym[c] -= h;
        let dcomp = (pulled(&yp, rest[0], rest[1]) - pulled(&ym, rest[0], rest[1])) / (2.0 * h);
        intrinsic += if m_pos % 2 == 0 { dcomp } else { -dcomp };
    }

    // upstairs d restricted to the same tangent vectors
    let domega = omega.ext_derivative();
    let y0 = [0.0; 5];
    let vs = [push(&y0, 0), push(&y0, 1), push(&y0, 3)];
    let upstairs = domega.eval(&p.tpoint(), &vs).unwrap();
    assert!(
        (intrinsic - upstairs).abs() < 1e-5,
        "intrinsic {intrinsic} vs upstairs {upstairs}"
    );
}

/// The evaluation-on-frames residual machinery agrees with direct frame
/// component comparison (sanity of the restriction convention).
#[test]
fn frame_residual_consistency() {
    let m = ChartMetric::perturbed(0.05);
    let sys = sbl_core::eds::build_system(&m, 1.0).unwrap();
    let p = BundlePoint::from_direction(&m, [0.1, 0.3, -0.2], [0.7, -0.2, 0.6], 1.0).unwrap();
    let frame = adapted_frame(&m, &p).unwrap();
    let a = sys.alpha[1].clone();
    let b = hodge_star(&m, &hodge_star(&m, &a, Pivot::Auto), Pivot::Auto);
    let r = restricted_residual(&a, &b, &frame).unwrap();
    assert!(r < 1e-10, "double star residual {r}");
    let fa = frame_components(&a, &frame).unwrap();
    assert_eq!(fa.len(), index_tuples(5, 2).len());
}
