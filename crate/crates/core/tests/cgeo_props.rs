use conred::cgeo::{sample_points_on_c, BundleMorphism, ClassedSection, ConSpace, TrivBundle};
use conred::cindex::SlotClass;
use conred::exact::Rational;
use conred::gen;
use proptest::prelude::*;

fn space() -> impl Strategy<Value = ConSpace> {
    (1usize..=4).prop_flat_map(|t| (Just(t), 0..=t)).prop_flat_map(|(t, w)| (Just(t), Just(w), 0..=w))
        .prop_map(|(t, w, n)| ConSpace::new(t, w, n).unwrap())
}

proptest! {
    #[test]
    fn reduction_of_functions_is_a_ring_map(m in space(), seed in any::<u64>()) {
        let mut rng = gen::rng(seed);
        let f = gen::fn_of_class(&mut rng, &m, SlotClass::WobsOnly, 3);
        let g = gen::fn_of_class(&mut rng, &m, SlotClass::WobsOnly, 3);
        let (fr, gr) = (m.fn_reduce(&f).unwrap(), m.fn_reduce(&g).unwrap());
        prop_assert_eq!(m.fn_reduce(&(&f * &g)).unwrap(), &fr * &gr);
        prop_assert_eq!(m.fn_reduce(&(&f + &g)).unwrap(), &fr + &gr);
    }

    #[test]
    fn null_functions_reduce_to_zero(m in space(), seed in any::<u64>()) {
        let f = gen::null_fn(&mut gen::rng(seed), &m, 3);
        let c = m.fn_class(&f).unwrap();
        prop_assert!(c.in_n && c.in_w);
        prop_assert!(m.fn_reduce(&f).unwrap().is_zero());
    }

    #[test]
    fn lift_then_reduce_is_identity(m in space(), seed in any::<u64>()) {
        let g = gen::poly(&mut gen::rng(seed), m.red_dim(), 3, 4);
        prop_assert_eq!(m.fn_reduce(&m.fn_lift(&g).unwrap()).unwrap(), g);
    }

    #[test]
    fn reduced_function_agrees_on_constraint_points(m in space(), seed in any::<u64>()) {
        let f = gen::fn_of_class(&mut gen::rng(seed), &m, SlotClass::WobsOnly, 3);
        let fr = m.fn_reduce(&f).unwrap();
        for p in sample_points_on_c(&m, 6) {
            let red: Vec<Rational> = m.reduced_vars().iter().map(|&i| p[i].clone()).collect();
            prop_assert_eq!(f.eval(&p).unwrap(), fr.eval(&red).unwrap());
        }
    }

    #[test]
    fn bundle_reduction_keeps_observable_rank(m in space(), seed in any::<u64>(), k in 1usize..=4) {
        let mut rng = gen::rng(seed);
        let e = TrivBundle::new(m, gen::slot_classes(&mut rng, k));
        prop_assert_eq!(e.reduce().rank(), e.ranks().red());
        prop_assert_eq!(e.dual().reduce(), e.reduce().dual());
    }

    #[test]
    fn null_sections_reduce_to_zero(m in space(), seed in any::<u64>(), k in 1usize..=4) {
        let mut rng = gen::rng(seed);
        let e = TrivBundle::new(m, gen::slot_classes(&mut rng, k));
        let s = gen::section(&mut rng, &e, 2, true);
        prop_assert!(s.class().in_n);
        prop_assert_eq!(s.reduce().unwrap(), ClassedSection::zero(&e.reduce()));
    }

    #[test]
    fn identity_morphism_checks_and_reduces(m in space(), seed in any::<u64>(), k in 1usize..=4) {
        let mut rng = gen::rng(seed);
        let e = TrivBundle::new(m, gen::slot_classes(&mut rng, k));
        let id = BundleMorphism::identity(&e);
        prop_assert!(id.check().all());
        prop_assert_eq!(id.reduce().unwrap(), BundleMorphism::identity(&e.reduce()));
        let s = gen::section(&mut rng, &e, 2, false);
        prop_assert_eq!(id.apply(&s).unwrap(), s);
    }
}
