use foam_core::algebra::{embed_smooth, eq_mod_ideal, nontrivial_nd};
use foam_core::bump::partition_of_unity;
use foam_core::sheaf::{glue, restrict, separated_check, unit_partition_identity, SectionAssignment};
use foam_core::{
    Bound, GenFunction, IdealDescriptor, Index, IndexOrder, MembershipConfig, OpenSet, Point, Scalar, SingularSet,
    SmoothExpr,
};
use proptest::prelude::*;

fn v() -> OpenSet {
    OpenSet::interval_i(-1, 1).unwrap()
}

fn ideal() -> IdealDescriptor {
    let s = SingularSet::points(v(), vec![Point(vec![0.0])]).unwrap();
    IdealDescriptor::single(IndexOrder::Nat, s).unwrap()
}

fn iv(lo: i64, hi: i64) -> OpenSet {
    OpenSet::interval(Bound::finite(lo, 8), Bound::finite(hi, 8)).unwrap()
}

/// Overlapping intervals covering (-1, 1), cut at the given eighths.
fn cover(cuts: &[i64]) -> Vec<OpenSet> {
    let mut pts: Vec<i64> = cuts.to_vec();
    pts.sort();
    pts.dedup();
    let mut edges = vec![-8];
    edges.extend(pts);
    edges.push(8);
    edges.windows(2).map(|w| iv((w[0] - 2).max(-8), (w[1] + 2).min(8))).collect()
}

fn psi() -> impl Strategy<Value = SmoothExpr> {
    let x = SmoothExpr::coord(0);
    prop_oneof![
        Just(x.clone().sin()),
        Just(x.clone().exp()),
        Just(x.clone() * x.clone() + SmoothExpr::int(2)),
        (1i64..4).prop_map(move |k| (x.clone() * SmoothExpr::int(k)).cos()),
    ]
}

fn cuts() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-5i64..=5, 1..3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn presheaf_laws(p in psi(), a in -7i64..0, b in 1i64..8) {
        let t = embed_smooth(p, &ideal()).unwrap();
        let vv = iv(a, b);
        let w = iv(a.max(-4), b.min(4));
        let twice = restrict(&restrict(&t, &vv).unwrap(), &w).unwrap();
        let once = restrict(&t, &w).unwrap();
        prop_assert_eq!(twice.ideal(), once.ideal());
        for l in 0..4 {
            prop_assert_eq!(twice.representative().term(&Index::Nat(l)), once.representative().term(&Index::Nat(l)));
        }
        let full = restrict(&t, &v()).unwrap();
        prop_assert_eq!(full.representative().term(&Index::Nat(3)), t.representative().term(&Index::Nat(3)));
    }

    #[test]
    fn gluing_round_trip(p in psi(), c in cuts()) {
        let cfg = MembershipConfig::default();
        let t = embed_smooth(p, &ideal()).unwrap();
        let cov = cover(&c);
        let pou = partition_of_unity(&v(), &cov, 0.1).unwrap();
        let s = SectionAssignment::from_global(&t, cov).unwrap();
        let g = glue(&s, &pou, &cfg).unwrap();
        prop_assert!(g.all_verified());
        prop_assert!(eq_mod_ideal(&g.section, &t, &cfg).unwrap().is_verified());
    }

    #[test]
    fn separatedness(p in psi(), c in cuts(), q in -6i64..6) {
        let cfg = MembershipConfig::default();
        let t = embed_smooth(p, &ideal()).unwrap();
        let sigma = SmoothExpr::coord(0) * (SmoothExpr::coord(0) - SmoothExpr::constant(Scalar::ratio(q, 8)));
        let d = if q == 0 {
            ideal()
        } else {
            let pts = vec![Point(vec![0.0]), Point(vec![q as f64 / 8.0])];
            IdealDescriptor::single(IndexOrder::Nat, SingularSet::points(v(), pts).unwrap()).unwrap()
        };
        let t = GenFunction::new(t.representative().clone(), d.clone()).unwrap();
        let t2 = GenFunction::new(t.representative().add(&nontrivial_nd(&sigma, &v()).unwrap()).unwrap(), d).unwrap();
        let pou = partition_of_unity(&v(), &cover(&c), 0.1).unwrap();
        let r = separated_check(&t, &t2, &pou, &cfg).unwrap();
        prop_assert!(r.is_verified());
        prop_assert!(eq_mod_ideal(&t, &t2, &cfg).unwrap().is_verified());
    }

    #[test]
    fn fineness(c in cuts()) {
        let pou = partition_of_unity(&v(), &cover(&c), 0.1).unwrap();
        prop_assert!(pou.max_sum_deviation <= 1e-12);
        prop_assert!(unit_partition_identity(&pou, &ideal(), &MembershipConfig::default()).unwrap().is_verified());
    }
}
