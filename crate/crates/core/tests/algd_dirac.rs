//! Algebroid and Dirac checks against independent formulas.

use conred::algd::{self, AlgebroidData};
use conred::cartan::{de_rham, schouten, Co, Contra, EndField, KForm, MultiVector};
use conred::cgeo::{ClassedSection, ConSpace, TrivBundle};
use conred::cindex::{increasing_tuples, Flavor, SlotClass};
use conred::dirac::{self, DiracGraph, PNData, PoissonData, PresymplecticData};
use conred::gen;
use conred::poly::Poly;
use proptest::prelude::*;
use rand::Rng as _;

fn bivector(seed: u64, space: &ConSpace) -> PoissonData {
    PoissonData::new(gen::any_alt::<Contra>(&mut gen::rng(seed), space, 2, Flavor::Strong, 2)).unwrap()
}

/// `f ∂_i∧∂_j` with `f` arbitrary: always Poisson.
fn rank_two_poisson(seed: u64, space: &ConSpace) -> PoissonData {
    let mut rng = gen::rng(seed);
    let n = space.nvars();
    let t = increasing_tuples(n, 2);
    let pick = t[rng.gen_range(0..t.len())].clone();
    let mut pi = MultiVector::zero(*space, 2, Flavor::Strong);
    pi.add_term(&pick, gen::poly(&mut rng, n, 2, 3));
    PoissonData::new(pi).unwrap()
}

fn exact_one_form(p: &Poly, space: &ConSpace) -> ClassedSection {
    let comps = (0..space.nvars()).map(|i| p.partial(i)).collect();
    ClassedSection::new(TrivBundle::cotangent(*space), comps).unwrap()
}

fn as_form(s: &ClassedSection) -> KForm {
    let mut w = KForm::zero(s.bundle.base, 1, Flavor::Strong);
    for (i, f) in s.components.iter().enumerate() {
        w.add_term(&[i], f.clone());
    }
    w
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cotangent_bracket_of_exact_forms(seed in any::<u64>(), s1 in any::<u64>(), s2 in any::<u64>()) {
        let m = ConSpace::plain(3);
        let p = bivector(seed, &m);
        let a = dirac::cotangent_algebroid_unchecked(&p);
        let f = gen::poly(&mut gen::rng(s1), 3, 2, 3);
        let g = gen::poly(&mut gen::rng(s2), 3, 2, 3);
        let pm = p.matrix();
        let mut pb = Poly::zero(3);
        for i in 0..3 {
            for j in 0..3 {
                pb = &pb + &(&(&pm[i][j] * &f.partial(i)) * &g.partial(j));
            }
        }
        let lhs = a.bracket(&exact_one_form(&f, &m), &exact_one_form(&g, &m)).unwrap();
        prop_assert_eq!(lhs.components, exact_one_form(&pb, &m).components);
    }

    #[test]
    fn cotangent_bracket_matches_koszul_formula(seed in any::<u64>(), s1 in any::<u64>(), s2 in any::<u64>()) {
        let m = ConSpace::plain(3);
        let p = bivector(seed, &m);
        let a = dirac::cotangent_algebroid_unchecked(&p);
        let bundle = TrivBundle::cotangent(m);
        let x = gen::section(&mut gen::rng(s1), &bundle, 2, false);
        let y = gen::section(&mut gen::rng(s2), &bundle, 2, false);
        let lhs = as_form(&a.bracket(&x, &y).unwrap());
        prop_assert_eq!(lhs, dirac::koszul_bracket_direct(&p, &as_form(&x), &as_form(&y)).unwrap());
    }

    #[test]
    fn poisson_check_agrees_with_schouten(seed in any::<u64>()) {
        let m = ConSpace::plain(3);
        let p = bivector(seed, &m);
        let involutive = schouten(&p.pi, &p.pi).unwrap().is_zero();
        prop_assert_eq!(dirac::check_poisson(&p).get("schouten").unwrap().pass, involutive);
        let a = dirac::cotangent_algebroid_unchecked(&p);
        prop_assert_eq!(algd::check_classical(&a).pass(), involutive);
    }

    #[test]
    fn rank_two_bivectors_give_algebroids(seed in any::<u64>()) {
        let m = ConSpace::plain(3);
        let p = rank_two_poisson(seed, &m);
        prop_assert!(dirac::check_poisson(&p).pass());
        let a = dirac::cotangent_algebroid(&p).unwrap();
        prop_assert_eq!(algd::koszul_square_witness(&a), None);
    }

    #[test]
    fn koszul_is_a_graded_derivation(s1 in any::<u64>(), s2 in any::<u64>(), k in 0usize..=1) {
        let a = AlgebroidData::bundle_of_lie_algebras(
            TrivBundle::new(ConSpace::plain(2), vec![SlotClass::Null; 3]),
            &algd::so3_constants(),
        ).unwrap();
        let mut rng = gen::rng(s1);
        let mut alpha = a.zero_form(k, Flavor::Strong);
        for t in increasing_tuples(3, k) {
            alpha.add_term(&t, gen::poly(&mut rng, 2, 2, 2));
        }
        let mut beta = a.zero_form(1, Flavor::Strong);
        let mut rng = gen::rng(s2);
        for i in 0..3 {
            beta.add_term(&[i], gen::poly(&mut rng, 2, 2, 2));
        }
        let lhs = algd::koszul(&a, &alpha.wedge(&beta).unwrap()).unwrap();
        let da = algd::koszul(&a, &alpha).unwrap().wedge(&beta).unwrap();
        let db = alpha.wedge(&algd::koszul(&a, &beta).unwrap()).unwrap();
        let rhs = if k % 2 == 0 { da.add(&db) } else { da.sub(&db) }.unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn tangent_gerstenhaber_is_schouten(s1 in any::<u64>(), s2 in any::<u64>(), k1 in 0usize..=2, k2 in 0usize..=2) {
        let m = ConSpace::plain(3);
        let a = AlgebroidData::tangent(m);
        let p: MultiVector = gen::any_alt::<Contra>(&mut gen::rng(s1), &m, k1, Flavor::Strong, 2);
        let q: MultiVector = gen::any_alt::<Contra>(&mut gen::rng(s2), &m, k2, Flavor::Strong, 2);
        prop_assert_eq!(algd::gerstenhaber(&a, &p, &q).unwrap(), schouten(&p, &q).unwrap());
    }

    #[test]
    fn two_form_graphs_follow_closedness(seed in any::<u64>(), exact in any::<bool>()) {
        let m = ConSpace::plain(3);
        let mut rng = gen::rng(seed);
        let w = if exact {
            de_rham(&gen::any_alt::<Co>(&mut rng, &m, 1, Flavor::Strong, 2)).unwrap()
        } else {
            gen::any_alt::<Co>(&mut rng, &m, 2, Flavor::Strong, 2)
        };
        let closed = de_rham(&w).unwrap().is_zero();
        let g = DiracGraph::TwoForm(PresymplecticData::new(w).unwrap());
        let rep = dirac::dirac_check(&g);
        prop_assert!(rep.get("isotropic").unwrap().pass && rep.get("rank").unwrap().pass);
        prop_assert_eq!(rep.get("involutive").unwrap().pass, closed);
        prop_assert!(!exact || closed);
    }

    #[test]
    fn identity_recursion_operator_is_compatible(seed in any::<u64>()) {
        let m = ConSpace::plain(3);
        let p = rank_two_poisson(seed, &m);
        let s = PNData::new(p, EndField::identity(m)).unwrap();
        prop_assert!(dirac::check_pn(&s).pass());
    }
}

#[test]
fn canonical_example_reduces_through_every_route() {
    let p = dirac::canonical_example();
    let red = dirac::reduce_poisson(&p).unwrap();
    let g = dirac::dirac_reduce(&DiracGraph::Bivector(p)).unwrap();
    match g {
        DiracGraph::Bivector(q) => assert_eq!(q, red),
        other => panic!("unexpected reduced graph {other:?}"),
    }
}
