//! Seeded generators of random test objects.

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::calg::ConVectorSpace;
use crate::cartan::{Alt, EndField, Variance, VectorField};
use crate::cgeo::{ClassedSection, ConSpace, TrivBundle};
use crate::cindex::{increasing_tuples, tuple_class, Flavor, SlotClass};
use crate::exact::{q, qf, Rational, Subspace};
use crate::poly::Poly;

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Small integer, occasionally halved.
pub fn rational(rng: &mut Rng) -> Rational {
    let n = rng.gen_range(-3..=3);
    if rng.gen_bool(0.2) {
        qf(n, 2)
    } else {
        q(n)
    }
}

pub fn nonzero_rational(rng: &mut Rng) -> Rational {
    loop {
        let r = rational(rng);
        if r != q(0) {
            return r;
        }
    }
}

/// Random polynomial in the listed variables of total degree ≤ `max_deg`.
pub fn poly_in(rng: &mut Rng, nvars: usize, vars: &[usize], max_deg: u32, max_terms: usize) -> Poly {
    let terms = rng.gen_range(0..=max_terms);
    let mut out = Poly::zero(nvars);
    for _ in 0..terms {
        let mut e = vec![0u32; nvars];
        if !vars.is_empty() {
            let deg = rng.gen_range(0..=max_deg);
            for _ in 0..deg {
                e[vars[rng.gen_range(0..vars.len())]] += 1;
            }
        }
        out = &out + &Poly::monomial(e, rational(rng));
    }
    out
}

pub fn poly(rng: &mut Rng, nvars: usize, max_deg: u32, max_terms: usize) -> Poly {
    let vars: Vec<usize> = (0..nvars).collect();
    poly_in(rng, nvars, &vars, max_deg, max_terms)
}

/// Random element of the ideal of `C`: `Σ x_j h_j` over normal variables.
pub fn null_fn(rng: &mut Rng, space: &ConSpace, max_deg: u32) -> Poly {
    let n = space.nvars();
    let mut out = Poly::zero(n);
    if max_deg == 0 {
        return out;
    }
    for j in space.normal_vars() {
        if rng.gen_bool(0.6) {
            out = &out + &(&Poly::var(n, j) * &poly(rng, n, max_deg - 1, 2));
        }
    }
    out
}

/// Random function of the class required by a slot of class `c`.
pub fn fn_of_class(rng: &mut Rng, space: &ConSpace, c: SlotClass, max_deg: u32) -> Poly {
    let n = space.nvars();
    match c {
        SlotClass::Null => poly(rng, n, max_deg, 3),
        SlotClass::WobsOnly => &poly_in(rng, n, &space.reduced_vars(), max_deg, 3) + &null_fn(rng, space, max_deg),
        SlotClass::TotalOnly => null_fn(rng, space, max_deg),
    }
}

/// Random section in the W-component (`null = true`: in the N-component).
pub fn section(rng: &mut Rng, bundle: &TrivBundle, max_deg: u32, null: bool) -> ClassedSection {
    let components = bundle
        .classes
        .iter()
        .map(|&c| {
            let c = if null && c == SlotClass::WobsOnly { SlotClass::TotalOnly } else { c };
            fn_of_class(rng, &bundle.base, c, max_deg)
        })
        .collect();
    ClassedSection::new(bundle.clone(), components).expect("shapes match")
}

/// Random W-classed vector field (`null = true`: N-classed).
pub fn vector_field(rng: &mut Rng, space: &ConSpace, max_deg: u32, null: bool) -> VectorField {
    let s = section(rng, &TrivBundle::tangent(*space), max_deg, null);
    VectorField { space: *space, comps: s.components }
}

/// Random W-classed endomorphism field.
pub fn end_field(rng: &mut Rng, space: &ConSpace, max_deg: u32) -> EndField {
    let tm = TrivBundle::tangent(*space);
    let s = section(rng, &tm.hom(&tm).expect("same base"), max_deg, false);
    let n = space.nvars();
    let matrix = s.components.chunks(n.max(1)).take(n).map(|r| r.to_vec()).collect();
    EndField { space: *space, matrix }
}

/// Random element of degree `k` on the default (co)tangent slots, each
/// coefficient drawn for its tuple class (W-classed, or N-classed if `null`).
pub fn classed_alt<V: Variance>(rng: &mut Rng, space: &ConSpace, k: usize, flavor: Flavor, max_deg: u32, null: bool) -> Alt<V> {
    let mut a = Alt::<V>::zero(*space, k, flavor);
    let slots = a.slots.clone();
    for t in increasing_tuples(slots.len(), k) {
        if !rng.gen_bool(0.6) {
            continue;
        }
        let mut c = tuple_class(&slots, &t, flavor);
        if null && c == SlotClass::WobsOnly {
            c = SlotClass::TotalOnly;
        }
        let f = fn_of_class(rng, space, c, max_deg);
        a.add_term(&t, f);
    }
    a
}

/// Random element of degree `k` with unrestricted coefficients.
pub fn any_alt<V: Variance>(rng: &mut Rng, space: &ConSpace, k: usize, flavor: Flavor, max_deg: u32) -> Alt<V> {
    let mut a = Alt::<V>::zero(*space, k, flavor);
    for t in increasing_tuples(a.slots.len(), k) {
        if rng.gen_bool(0.6) {
            let f = poly(rng, space.nvars(), max_deg, 3);
            a.add_term(&t, f);
        }
    }
    a
}

pub fn slot_classes(rng: &mut Rng, k: usize) -> Vec<SlotClass> {
    (0..k)
        .map(|_| match rng.gen_range(0..3) {
            0 => SlotClass::Null,
            1 => SlotClass::WobsOnly,
            _ => SlotClass::TotalOnly,
        })
        .collect()
}

pub fn con_space(rng: &mut Rng, max_t: usize) -> ConSpace {
    let t = rng.gen_range(1..=max_t);
    let w = rng.gen_range(0..=t);
    let n = rng.gen_range(0..=w);
    ConSpace::new(t, w, n).expect("nested")
}

fn random_vec(rng: &mut Rng, n: usize) -> Vec<Rational> {
    (0..n).map(|_| q(rng.gen_range(-2..=2))).collect()
}

/// Random flag on `ℚ^dim`, not necessarily coordinate-aligned.
pub fn flag(rng: &mut Rng, dim: usize) -> ConVectorSpace {
    let kn = rng.gen_range(0..=dim);
    let null_vecs: Vec<Vec<Rational>> = (0..kn).map(|_| random_vec(rng, dim)).collect();
    let null = Subspace::span(dim, &null_vecs);
    let extra = rng.gen_range(0..=dim);
    let mut w = null_vecs;
    w.extend((0..extra).map(|_| random_vec(rng, dim)));
    let wobs = Subspace::span(dim, &w);
    ConVectorSpace::new(dim, wobs, null).expect("nested by construction")
}
