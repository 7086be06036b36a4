use foam_core::{CofinalEmbedding, FoamSequence, Index, IndexOrder, OpenSet, SmoothExpr};
use proptest::prelude::*;

fn index(order: IndexOrder) -> BoxedStrategy<Index> {
    match order {
        IndexOrder::Nat => (0u64..1000).prop_map(Index::Nat).boxed(),
        IndexOrder::NatPair => (0u64..40, 0u64..40).prop_map(|(a, b)| Index::Pair(a, b)).boxed(),
    }
}

fn order() -> impl Strategy<Value = IndexOrder> {
    prop_oneof![Just(IndexOrder::Nat), Just(IndexOrder::NatPair)]
}

fn triple() -> impl Strategy<Value = (IndexOrder, Index, Index, Index)> {
    order().prop_flat_map(|o| (Just(o), index(o), index(o), index(o)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn partial_order_axioms((o, a, b, c) in triple()) {
        prop_assert!(o.leq(&a, &a));
        if o.leq(&a, &b) && o.leq(&b, &a) {
            prop_assert_eq!(a, b);
        }
        if o.leq(&a, &b) && o.leq(&b, &c) {
            prop_assert!(o.leq(&a, &c));
        }
    }

    #[test]
    fn join_is_least_upper_bound((o, a, b, c) in triple()) {
        let j = o.join(&a, &b);
        prop_assert!(o.leq(&a, &j) && o.leq(&b, &j));
        if o.leq(&a, &c) && o.leq(&b, &c) {
            prop_assert!(o.leq(&j, &c));
        }
    }

    #[test]
    fn probes_sit_above_their_base((o, a, _, _) in triple(), n in 1usize..12) {
        let probes = o.probes_above(&a, n);
        prop_assert_eq!(probes.len(), n);
        prop_assert_eq!(probes[0], a);
        prop_assert!(probes.iter().all(|p| o.leq(&a, p)));
    }

    #[test]
    fn embeddings_are_monotone_and_cofinal(l in 0u64..500, m in 0u64..500, k in 0u64..60, j in 0u64..60) {
        let e = CofinalEmbedding::Diagonal;
        let (a, b) = (Index::Nat(l), Index::Nat(m));
        if l <= m {
            prop_assert!(IndexOrder::NatPair.leq(&e.map(&a), &e.map(&b)));
        }
        let target = Index::Pair(k, j);
        prop_assert!(IndexOrder::NatPair.leq(&target, &e.map(&e.dominate(&target))));
    }

    #[test]
    fn rho_is_a_homomorphism(p in 1i64..5, q in 1i64..5, l in 0u64..20) {
        let d = OpenSet::interval_i(-1, 1).unwrap();
        let x = SmoothExpr::coord(0);
        let s = FoamSequence::baire_plateau(d.clone(), vec![x.clone() - SmoothExpr::constant(foam_core::Scalar::ratio(1, p + 1))]).unwrap();
        let t = FoamSequence::diagonal(IndexOrder::NatPair, d, (x * SmoothExpr::int(q)).sin()).unwrap();
        let e = CofinalEmbedding::Diagonal;
        let idx = Index::Nat(l);
        let sum = s.add(&t).unwrap().rho_restrict(&e).unwrap();
        let sum2 = s.rho_restrict(&e).unwrap().add(&t.rho_restrict(&e).unwrap()).unwrap();
        prop_assert_eq!(sum.term(&idx), sum2.term(&idx));
        let prod = s.mul(&t).unwrap().rho_restrict(&e).unwrap();
        let prod2 = s.rho_restrict(&e).unwrap().mul(&t.rho_restrict(&e).unwrap()).unwrap();
        prop_assert_eq!(prod.term(&idx), prod2.term(&idx));
    }
}
