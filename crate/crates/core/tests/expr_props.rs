use foam_core::bump::{make_eta, shrinking_plateau};
use foam_core::simplify::{germ_at, is_structural_zero, structurally_equal};
use foam_core::{MultiIndex, Node, Scalar, SmoothExpr};
use proptest::prelude::*;

fn leaf() -> impl Strategy<Value = SmoothExpr> {
    prop_oneof![
        (-3i64..=3).prop_map(SmoothExpr::int),
        (-4i64..=4, 1i64..=4).prop_map(|(n, d)| SmoothExpr::constant(Scalar::ratio(n, d))),
        (0usize..2).prop_map(SmoothExpr::coord),
    ]
}

fn expr(depth: u32) -> impl Strategy<Value = SmoothExpr> {
    leaf().prop_recursive(depth, 24, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(SmoothExpr::sum),
            prop::collection::vec(inner.clone(), 2..3).prop_map(SmoothExpr::product),
            inner.clone().prop_map(|e| -e),
            (inner.clone(), 0i32..4).prop_map(|(e, n)| e.pow(n)),
            inner.clone().prop_map(|e| e.sin()),
            inner.clone().prop_map(|e| e.cos()),
            inner.clone().prop_map(|e| (e.sin()).exp()),
            inner.prop_map(|e| e.glue_unit()),
        ]
    })
}

fn point() -> impl Strategy<Value = [f64; 2]> {
    [-0.9f64..0.9, -0.9f64..0.9]
}

fn central_difference(e: &SmoothExpr, x: [f64; 2], axis: usize) -> f64 {
    let h = 1e-4;
    let mut lo = x;
    let mut hi = x;
    lo[axis] -= h;
    hi[axis] += h;
    (e.eval(&hi).unwrap() - e.eval(&lo).unwrap()) / (2.0 * h)
}

fn uses_only_declared_nodes(e: &SmoothExpr) -> bool {
    let ok = match e.node() {
        Node::Const(_) | Node::Coord(_) | Node::Add(_) | Node::Mul(_) | Node::Neg(_) => true,
        Node::Pow(_, _) | Node::Apply(_, _) | Node::Glue(_, _) => true,
    };
    ok && e.children().into_iter().all(uses_only_declared_nodes)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn derivative_matches_finite_differences(e in expr(6), xs in prop::collection::vec(point(), 20), axis in 0usize..2) {
        let d = e.derive_axis(axis);
        for x in xs {
            let exact = d.eval(&x).unwrap();
            let fd = central_difference(&e, x, axis);
            prop_assume!(exact.is_finite() && fd.is_finite() && exact.abs() < 1e6);
            let tol = 1e-5 * exact.abs().max(1.0);
            prop_assert!((exact - fd).abs() <= tol, "{e:?} at {x:?}: {exact} vs {fd}");
        }
    }

    #[test]
    fn derivative_stays_in_language(e in expr(5), axis in 0usize..2) {
        let d = e.derive_axis(axis);
        prop_assert!(uses_only_declared_nodes(&d));
        prop_assert!(d.min_dimension() <= e.min_dimension());
    }

    #[test]
    fn linearity(a in expr(3), b in expr(3), axis in 0usize..2) {
        let p = MultiIndex::unit(2, axis);
        let lhs = (a.clone() + b.clone()).derive(&p);
        let rhs = a.derive(&p) + b.derive(&p);
        prop_assert!(structurally_equal(&lhs, &rhs));
    }

    #[test]
    fn leibniz(a in expr(3), b in expr(3), axis in 0usize..2) {
        let lhs = (a.clone() * b.clone()).derive_axis(axis);
        let rhs = a.derive_axis(axis) * b.clone() + a * b.derive_axis(axis);
        prop_assert!(is_structural_zero(&(lhs - rhs)));
    }

    #[test]
    fn eta_plateaus(t in -0.5f64..=0.5, far in 1.0f64..3.0, sign in prop::bool::ANY) {
        let eta = make_eta();
        let far = if sign { far } else { -far };
        let mut e = eta.expr().clone();
        for _ in 0..=4 {
            prop_assert!(germ_at(&e, &[t]).is_const_zero(), "{t}");
            e = e.derive_axis(0);
        }
        let mut e = eta.expr().clone() - SmoothExpr::one();
        for _ in 0..=4 {
            prop_assert!(germ_at(&e, &[far]).is_const_zero(), "{far}");
            e = e.derive_axis(0);
        }
    }

    #[test]
    fn shrinking_plateau_support(l in 0u64..=8, u in 0.0f64..1.0, sign in prop::bool::ANY) {
        let edge = 1.0 / (l + 1) as f64;
        let x0 = (edge + u * (1.0 - edge)) * if sign { 1.0 } else { -1.0 };
        prop_assume!(x0.abs() < 1.0);
        let mut e = shrinking_plateau(&SmoothExpr::coord(0), l);
        for _ in 0..=4 {
            let g = germ_at(&e, &[x0]);
            prop_assert!(g.is_const_zero() || g.eval(&[x0]).unwrap() == 0.0, "l={l} x={x0}");
            e = e.derive_axis(0);
        }
    }
}
