//! Independent formulas for the brackets and torsion.

use std::collections::BTreeMap;

use conred::cartan::{
    de_rham, insertion, lie_derivative, nijenhuis, nijenhuis_on, schouten, vf_bracket, Co, Contra, EndField, MultiVector,
    VectorField,
};
use conred::cgeo::ConSpace;
use conred::cindex::Flavor;
use conred::gen;
use conred::poly::Poly;
use proptest::prelude::*;

/// Polynomial in `x` with coefficients in the Grassmann algebra on `θ_1..θ_n`;
/// keys are increasing index lists.
type Super = BTreeMap<Vec<usize>, Poly>;

fn add_to(out: &mut Super, key: Vec<usize>, f: Poly) {
    let e = out.entry(key).or_insert_with(|| Poly::zero(f.nvars()));
    *e = &*e + &f;
}

/// `θ_I θ_J` as a sign and a sorted key, or `None` if they share an index.
fn merge(a: &[usize], b: &[usize]) -> Option<(i64, Vec<usize>)> {
    let mut sign = 1;
    for &y in b {
        if a.contains(&y) {
            return None;
        }
        if a.iter().filter(|&&x| x > y).count() % 2 == 1 {
            sign = -sign;
        }
    }
    let mut key: Vec<usize> = a.iter().chain(b).copied().collect();
    key.sort();
    Some((sign, key))
}

fn mul(p: &Super, q: &Super) -> Super {
    let mut out = Super::new();
    for (a, f) in p {
        for (b, g) in q {
            if let Some((s, key)) = merge(a, b) {
                add_to(&mut out, key, (f * g).scale(&conred::exact::q(s)));
            }
        }
    }
    out
}

/// Right derivative in `θ_i`: move `θ_i` to the end, then drop it.
fn right_odd(p: &Super, i: usize) -> Super {
    let mut out = Super::new();
    for (a, f) in p {
        if let Some(pos) = a.iter().position(|&x| x == i) {
            let sign = if (a.len() - 1 - pos) % 2 == 0 { 1 } else { -1 };
            let key = a.iter().copied().filter(|&x| x != i).collect();
            add_to(&mut out, key, f.scale(&conred::exact::q(sign)));
        }
    }
    out
}

fn even(p: &Super, i: usize) -> Super {
    p.iter().map(|(a, f)| (a.clone(), f.partial(i))).collect()
}

fn clean(p: Super) -> Super {
    p.into_iter().filter(|(_, f)| !f.is_zero()).collect()
}

/// `⟦P, Q⟧ = Σ_i ∂^R_{θ_i}P ∂_{x_i}Q − (−1)^{(p−1)(q−1)} ∂^R_{θ_i}Q ∂_{x_i}P`.
fn super_schouten(p: &Super, dp: usize, q: &Super, dq: usize, n: usize) -> Super {
    let flip = dp.is_multiple_of(2) && dq.is_multiple_of(2);
    let mut out = Super::new();
    for i in 0..n {
        for (k, f) in mul(&right_odd(p, i), &even(q, i)) {
            add_to(&mut out, k, f);
        }
        for (k, f) in mul(&right_odd(q, i), &even(p, i)) {
            add_to(&mut out, k, if flip { f } else { -f });
        }
    }
    clean(out)
}

fn to_super(m: &MultiVector) -> Super {
    clean(m.comps().clone())
}

fn random_mv(seed: u64, space: &ConSpace, k: usize) -> MultiVector {
    gen::any_alt::<Contra>(&mut gen::rng(seed), space, k, Flavor::Strong, 2)
}

fn space(t: usize) -> ConSpace {
    ConSpace::plain(t)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn schouten_matches_superformula(s1 in any::<u64>(), s2 in any::<u64>(), t in 1usize..=4, k1 in 0usize..=3, k2 in 0usize..=3) {
        let m = space(t);
        let (k1, k2) = (k1.min(t), k2.min(t));
        let (p, q) = (random_mv(s1, &m, k1), random_mv(s2, &m, k2));
        let lhs = schouten(&p, &q).unwrap();
        let rhs = super_schouten(&to_super(&p), k1, &to_super(&q), k2, t);
        prop_assert_eq!(to_super(&lhs), rhs);
    }

    #[test]
    fn schouten_graded_antisymmetry(s1 in any::<u64>(), s2 in any::<u64>(), k1 in 0usize..=3, k2 in 0usize..=3) {
        let m = space(3);
        let (p, q) = (random_mv(s1, &m, k1), random_mv(s2, &m, k2));
        let sign = if (k1 as i64 - 1) * (k2 as i64 - 1) % 2 == 0 { 1 } else { -1 };
        let lhs = schouten(&p, &q).unwrap();
        let rhs = schouten(&q, &p).unwrap();
        prop_assert_eq!(lhs, if sign == 1 { rhs.neg() } else { rhs });
    }

    #[test]
    fn schouten_on_vector_fields_is_the_lie_bracket(s1 in any::<u64>(), s2 in any::<u64>()) {
        let m = space(3);
        let mut rng = gen::rng(s1);
        let x = gen::vector_field(&mut rng, &m, 2, false);
        let y = gen::vector_field(&mut gen::rng(s2), &m, 2, false);
        let br = schouten(&x.to_mv(Flavor::Strong), &y.to_mv(Flavor::Strong)).unwrap();
        prop_assert_eq!(VectorField::from_mv(&br).unwrap(), vf_bracket(&x, &y).unwrap());
    }

    #[test]
    fn cartan_calculus_relations(s1 in any::<u64>(), s2 in any::<u64>(), k in 1usize..=3) {
        let m = space(3);
        let mut rng = gen::rng(s1);
        let w = gen::any_alt::<Co>(&mut rng, &m, k, Flavor::Strong, 2);
        let x = gen::vector_field(&mut rng, &m, 2, false);
        let y = gen::vector_field(&mut gen::rng(s2), &m, 2, false);
        // [L_X, i_Y] = i_[X,Y]
        let lhs = lie_derivative(&x, &insertion(&y, &w).unwrap()).unwrap()
            .sub(&insertion(&y, &lie_derivative(&x, &w).unwrap()).unwrap()).unwrap();
        prop_assert_eq!(lhs, insertion(&vf_bracket(&x, &y).unwrap(), &w).unwrap());
        // [L_X, d] = 0
        prop_assert_eq!(lie_derivative(&x, &de_rham(&w).unwrap()).unwrap(), de_rham(&lie_derivative(&x, &w).unwrap()).unwrap());
    }

    #[test]
    fn nijenhuis_matches_components(seed in any::<u64>()) {
        let m = space(3);
        let a = gen::end_field(&mut gen::rng(seed), &m, 2);
        let n = m.nvars();
        let mm = &a.matrix;
        for ((i, j), v) in nijenhuis(&a) {
            for k in 0..n {
                let mut e = Poly::zero(n);
                for l in 0..n {
                    e = &e + &(&mm[l][i] * &mm[k][j].partial(l));
                    e = &e - &(&mm[l][j] * &mm[k][i].partial(l));
                    e = &e + &(&mm[k][l] * &mm[l][i].partial(j));
                    e = &e - &(&mm[k][l] * &mm[l][j].partial(i));
                }
                prop_assert_eq!(&v.comps[k], &e);
            }
        }
    }

    #[test]
    fn nijenhuis_is_tensorial(s1 in any::<u64>(), s2 in any::<u64>()) {
        let m = space(2);
        let mut rng = gen::rng(s1);
        let a = gen::end_field(&mut rng, &m, 1);
        let x = gen::vector_field(&mut rng, &m, 1, false);
        let y = gen::vector_field(&mut gen::rng(s2), &m, 1, false);
        let f = gen::poly(&mut rng, 2, 1, 2);
        prop_assert_eq!(nijenhuis_on(&a, &x.scale_fn(&f), &y).unwrap(), nijenhuis_on(&a, &x, &y).unwrap().scale_fn(&f));
    }
}

#[test]
fn constant_endomorphisms_are_nijenhuis() {
    let m = space(2);
    let j = EndField::new(m, vec![vec![Poly::int(2, 0), Poly::int(2, -1)], vec![Poly::int(2, 1), Poly::int(2, 0)]]).unwrap();
    assert!(conred::cartan::is_nijenhuis(&j));
    assert!(conred::cartan::is_almost_complex(&j));
}
