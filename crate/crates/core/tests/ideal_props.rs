use foam_core::algebra::{embed_smooth, eq_mod_ideal, foam_to_multifoam, nontrivial_baire, nontrivial_nd};
use foam_core::membership::{revalidate, verify_witnesses};
use foam_core::{
    check_membership, CofinalEmbedding, FamilyLabel, FoamSequence, GenFunction, IdealDescriptor, IndexOrder,
    MembershipConfig, MultiIndex, OpenSet, Point, Scalar, SingularSet, SingularityFamily, SmoothExpr,
};
use proptest::prelude::*;

fn domain() -> OpenSet {
    OpenSet::interval_i(-1, 1).unwrap()
}

fn x() -> SmoothExpr {
    SmoothExpr::coord(0)
}

fn shift(q: i64) -> SmoothExpr {
    x() - SmoothExpr::constant(Scalar::ratio(q, 8))
}

/// Σ = {a, b} and the two plateau members it carries.
fn pair(a: i64, b: i64) -> (SingularSet, FoamSequence, FoamSequence) {
    let pts = vec![Point(vec![a as f64 / 8.0]), Point(vec![b as f64 / 8.0])];
    let sigma = SingularSet::points(domain(), pts).unwrap();
    let w = nontrivial_nd(&shift(a), &domain()).unwrap();
    let w2 = nontrivial_nd(&shift(b), &domain()).unwrap();
    (sigma, w, w2)
}

fn smooth() -> impl Strategy<Value = SmoothExpr> {
    prop_oneof![
        (-3i64..=3).prop_map(|c| x() * SmoothExpr::int(c) + SmoothExpr::one()),
        (1i64..4).prop_map(|k| (x() * SmoothExpr::int(k)).sin()),
        (1i64..4).prop_map(|k| (x() * SmoothExpr::int(k)).cos() * x()),
        Just(x().exp()),
    ]
}

fn cfg() -> MembershipConfig {
    MembershipConfig::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn closure_under_addition(a in -7i64..7, b in -7i64..7) {
        let (sigma, w, w2) = pair(a, b);
        let d = IdealDescriptor::single(IndexOrder::Nat, sigma.clone()).unwrap();
        let c = check_membership(&w, &d, &cfg()).unwrap();
        let c2 = check_membership(&w2, &d, &cfg()).unwrap();
        let joined = c.certificate().unwrap().joined_witnesses(c2.certificate().unwrap()).unwrap();
        let sum = w.add(&w2).unwrap();
        prop_assert!(verify_witnesses(&sum, &sigma, &joined, &cfg()).unwrap().is_verified());
    }

    #[test]
    fn absorption(a in -7i64..7, psi in smooth()) {
        let (sigma, w, _) = pair(a, a);
        let d = IdealDescriptor::single(IndexOrder::Nat, sigma.clone()).unwrap();
        let c = check_membership(&w, &d, &cfg()).unwrap();
        let s = FoamSequence::diagonal(IndexOrder::Nat, domain(), psi).unwrap();
        let prod = s.mul(&w).unwrap();
        let m = verify_witnesses(&prod, &sigma, &c.certificate().unwrap().witnesses(), &cfg()).unwrap();
        prop_assert!(m.is_verified());
    }

    #[test]
    fn certificates_survive_enlarging_sigma(a in -7i64..7, b in -7i64..7) {
        let (small, w, _) = pair(a, a);
        let (large, _, _) = pair(a, b);
        prop_assert!(small.is_subset_of(&large));
        let d = IdealDescriptor::single(IndexOrder::Nat, small).unwrap();
        let c = check_membership(&w, &d, &cfg()).unwrap();
        prop_assert!(revalidate(&w, c.certificate().unwrap(), &large, &cfg()).unwrap().is_verified());
    }

    #[test]
    fn derivatives_keep_witnesses(a in -7i64..7, order in 1u32..=2) {
        let (sigma, w, _) = pair(a, a);
        let d = IdealDescriptor::single(IndexOrder::Nat, sigma.clone()).unwrap();
        let c = check_membership(&w, &d, &cfg()).unwrap();
        let p = MultiIndex::new(vec![order]);
        let dw = w.derive(&p).unwrap();
        let reduced = cfg().with_deriv_cap(4 - order);
        let m = verify_witnesses(&dw, &sigma, &c.certificate().unwrap().witnesses(), &reduced).unwrap();
        prop_assert!(m.is_verified());
    }

    #[test]
    fn rho_maps_members_to_members(n in 1usize..5) {
        let d = OpenSet::interval_i(0, 1).unwrap();
        let qs: Vec<SingularSet> = (1..=n)
            .map(|k| SingularSet::points(d.clone(), vec![Point(vec![k as f64 / (n + 1) as f64])]).unwrap())
            .collect();
        let c = nontrivial_baire(qs, &d).unwrap();
        let w = c.sequence.rho_restrict(&CofinalEmbedding::Diagonal).unwrap();
        let id = IdealDescriptor::single(IndexOrder::Nat, c.sigma.clone()).unwrap();
        prop_assert!(check_membership(&w, &id, &cfg()).unwrap().is_verified());
    }

    #[test]
    fn quotient_ring_laws(p in smooth(), q in smooth(), r in smooth(), a in -7i64..7) {
        let (sigma, w, _) = pair(a, a);
        let d = IdealDescriptor::single(IndexOrder::Nat, sigma).unwrap();
        let t = |e: SmoothExpr| embed_smooth(e, &d).unwrap();
        let tp = GenFunction::new(t(p.clone()).representative().add(&w).unwrap(), d.clone()).unwrap();
        let (tq, tr) = (t(q), t(r));
        let one = t(SmoothExpr::one());
        let eq = |a: &GenFunction, b: &GenFunction| eq_mod_ideal(a, b, &cfg()).unwrap().is_verified();
        prop_assert!(eq(&tp.mul(&tq).unwrap(), &tq.mul(&tp).unwrap()));
        prop_assert!(eq(&tp.add(&tq).unwrap(), &tq.add(&tp).unwrap()));
        prop_assert!(eq(&tp.mul(&tq).unwrap().mul(&tr).unwrap(), &tp.mul(&tq.mul(&tr).unwrap()).unwrap()));
        prop_assert!(eq(&tp.mul(&tq.add(&tr).unwrap()).unwrap(), &tp.mul(&tq).unwrap().add(&tp.mul(&tr).unwrap()).unwrap()));
        prop_assert!(eq(&tp.mul(&one).unwrap(), &tp));
        prop_assert!(eq(&tp, &t(p)));
    }

    #[test]
    fn leibniz_mod_ideal(p in smooth(), q in smooth(), a in -7i64..7) {
        let (sigma, w, _) = pair(a, a);
        let d = IdealDescriptor::single(IndexOrder::Nat, sigma).unwrap();
        let tp = GenFunction::new(embed_smooth(p, &d).unwrap().representative().add(&w).unwrap(), d.clone()).unwrap();
        let tq = embed_smooth(q, &d).unwrap();
        let e = MultiIndex::new(vec![1]);
        let lhs = tp.mul(&tq).unwrap().dp(&e).unwrap();
        let rhs = tp.dp(&e).unwrap().mul(&tq).unwrap().add(&tp.mul(&tq.dp(&e).unwrap()).unwrap()).unwrap();
        let diff = lhs.sub(&rhs).unwrap();
        for l in 0..8 {
            prop_assert!(diff.representative().term(&foam_core::Index::Nat(l)).is_structural_zero());
        }
    }

    #[test]
    fn multifoam_morphism_commutes(p in smooth(), q in smooth(), a in -7i64..7) {
        let (sigma, w, _) = pair(a, a);
        let d = IdealDescriptor::single(IndexOrder::Nat, sigma.clone()).unwrap();
        let fam = SingularityFamily::new(FamilyLabel::Snd, vec![sigma], domain()).unwrap();
        let tp = GenFunction::new(embed_smooth(p, &d).unwrap().representative().add(&w).unwrap(), d.clone()).unwrap();
        let tq = embed_smooth(q, &d).unwrap();
        let f = |t: &GenFunction| foam_to_multifoam(t, &fam, 4).unwrap();
        let eq = |a: &GenFunction, b: &GenFunction| eq_mod_ideal(a, b, &cfg()).unwrap().is_verified();
        prop_assert!(eq(&f(&tp.add(&tq).unwrap()), &f(&tp).add(&f(&tq)).unwrap()));
        prop_assert!(eq(&f(&tp.mul(&tq).unwrap()), &f(&tp).mul(&f(&tq)).unwrap()));
        let e = MultiIndex::new(vec![1]);
        prop_assert!(eq(&f(&tp.dp(&e).unwrap()), &f(&tp).dp(&e).unwrap()));
    }
}
