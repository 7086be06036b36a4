use foam::corpus::Corpus;
use foam::dto::{DomainDto, SetDto};
use foam::runner::{run_scenario, without_timings, RunOptions};
use foam::sexpr::{parse, print};
use foam::Scenario;
use foam_core::{IdealDescriptor, IndexOrder, OpenSet, Point, Scalar, SingularSet, SmoothExpr};
use proptest::prelude::*;

fn expr() -> impl Strategy<Value = SmoothExpr> {
    let leaf = prop_oneof![
        (0usize..3).prop_map(SmoothExpr::coord),
        (-9i64..9, 1i64..7).prop_map(|(n, d)| SmoothExpr::constant(Scalar::ratio(n, d))),
        (-4.0f64..4.0).prop_map(|v| SmoothExpr::constant(Scalar::real(v))),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            inner.clone().prop_map(|a| -a),
            (inner.clone(), -3i32..4).prop_map(|(a, n)| a.pow(n)),
            inner.clone().prop_map(|a| a.sin()),
            inner.clone().prop_map(|a| a.cos()),
            inner.clone().prop_map(|a| a.exp()),
            inner.prop_map(|a| a.glue_unit()),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn sexpr_round_trip(e in expr()) {
        prop_assert_eq!(parse(&print(&e)).unwrap(), e.clone());
        let s = e.simplified();
        prop_assert_eq!(parse(&print(&s)).unwrap(), s);
    }

    #[test]
    fn domain_round_trip(a in -20i64..20, w in 1i64..20, d in 1i64..5) {
        let v = OpenSet::interval(foam_core::Bound::finite(a, d), foam_core::Bound::finite(a + w, d)).unwrap();
        let dto = DomainDto::from_open_set(&v);
        let text = serde_json::to_string(&dto).unwrap();
        let back: DomainDto = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back.to_open_set().unwrap(), v);
    }

    #[test]
    fn set_round_trip(ps in proptest::collection::vec(-0.9f64..0.9, 1..5)) {
        let d = OpenSet::interval_i(-1, 1).unwrap();
        let s = SingularSet::points(d.clone(), ps.into_iter().map(|p| Point(vec![p])).collect()).unwrap();
        let text = serde_json::to_string(&SetDto::from_set(&s)).unwrap();
        let back: SetDto = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back.to_set(&d).unwrap(), s);
    }

    #[test]
    fn corpora_depend_only_on_the_seed(seed in any::<u64>()) {
        let d = OpenSet::interval_i(-1, 1).unwrap();
        let id = IdealDescriptor::single(IndexOrder::Nat, SingularSet::points(d, vec![Point(vec![0.0])]).unwrap()).unwrap();
        let (mut a, mut b) = (Corpus::new(seed, &id), Corpus::new(seed, &id));
        for _ in 0..5 {
            prop_assert_eq!(a.smooth(), b.smooth());
            prop_assert_eq!(a.point(), b.point());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn reports_depend_only_on_scenario_and_seed(seed in any::<u64>(), jobs in 1usize..4) {
        let s = Scenario::from_json(r#"{
            "name": "p", "domain": {"boxes": [[[-1, 1]]]}, "order": "nat",
            "ideal": {"sigma": {"kind": "points", "points": [[0.0]]}},
            "checks": [
                {"name": "ring", "generator": "ring_laws", "params": {"triples": 1}},
                {"name": "zero", "generator": "zero"}
            ]
        }"#).unwrap();
        let opts = |jobs| RunOptions { seed: Some(seed), jobs: Some(jobs), ..Default::default() };
        let a = serde_json::to_value(run_scenario(&s, &opts(1)).unwrap()).unwrap();
        let b = serde_json::to_value(run_scenario(&s, &opts(jobs)).unwrap()).unwrap();
        prop_assert_eq!(without_timings(a), without_timings(b));
    }
}
