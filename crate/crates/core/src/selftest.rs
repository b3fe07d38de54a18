//! The invariant suite: exhaustive index-set laws, randomized sweeps over the
//! calculus and reductions, and the fixed examples they are anchored to.

use rand::Rng as _;

use crate::algd::{self, AlgebroidData};
use crate::calg::{
    canonical_iso, classify_morphism, tensor_over_algebra, CanonicalIso, ConAlgebraFD, ConLinearMap, ConModuleFD,
    ConVectorSpace,
};
use crate::cartan::{
    de_rham, insertion, lie_derivative, schouten, vf_bracket, Co, Contra, KForm, MultiVector, VectorField,
};
use crate::cgeo::{BundleKind, BundleMorphism, ClassedSection, ConSpace, TrivBundle};
use crate::cindex::{all_index_sets, Flavor, Label, LabelSet, SlotClass};
use crate::dirac::{self, DiracGraph, PoissonData, PresymplecticData};
use crate::exact::{Mat, Subspace};
use crate::gen::{self, Rng};
use crate::par;
use crate::poly::Poly;
use crate::report::{Report, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Parallel,
    Sequential,
}

fn run<T: Sync, R: Send>(mode: Mode, items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    match mode {
        Mode::Parallel => par::map(items, f),
        Mode::Sequential => par::map_seq(items, f),
    }
}

fn first_failure(results: Vec<Option<String>>) -> Option<String> {
    results.into_iter().flatten().next()
}

fn verdict(name: &str, failure: Option<String>) -> Verdict {
    Verdict { name: name.into(), pass: failure.is_none(), witness: failure }
}

/// Per-case seeds derived from one suite seed.
fn seeds(seed: u64, count: usize) -> Vec<u64> {
    (0..count as u64).map(|i| seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i)).collect()
}

fn product(a: &LabelSet, b: &LabelSet) -> LabelSet {
    a.iter().flat_map(|x| b.iter().map(move |y| Label::pair(x, y))).collect()
}

/// Reduction of products and duals, duality of the two tensor products and
/// involutivity of the dual, exhaustively on small index sets.
pub fn index_set_laws() -> Verdict {
    let mut fail = None;
    for t in 0..=5 {
        for m in all_index_sets(t) {
            let d = m.dual();
            if d.reduce() != m.reduce() {
                fail.get_or_insert(format!("reduce(dual M) ≠ reduce M for {m:?}"));
            }
            if d.dual() != m {
                fail.get_or_insert(format!("dual(dual M) ≠ M for {m:?}"));
            }
            let (md, dd) = (m.dims(), d.dims());
            if (dd.t, dd.w, dd.n) != (md.t, md.t - md.n, md.t - md.w) {
                fail.get_or_insert(format!("dual cardinalities wrong for {m:?}"));
            }
        }
    }
    let small: Vec<_> = (0..=3).flat_map(all_index_sets).collect();
    for m in &small {
        for n in &small {
            let red = product(&m.reduce(), &n.reduce());
            if m.tensor(n).reduce() != red {
                fail.get_or_insert(format!("reduce(M ⊗ N) ≠ red M × red N for {m:?}, {n:?}"));
            }
            if m.strong_tensor(n).reduce() != red {
                fail.get_or_insert(format!("reduce(M ⊠ N) ≠ red M × red N for {m:?}, {n:?}"));
            }
            if m.tensor(n).dual() != m.dual().strong_tensor(&n.dual()) {
                fail.get_or_insert(format!("(M ⊗ N)* ≠ M* ⊠ N* for {m:?}, {n:?}"));
            }
            if m.strong_tensor(n).dual() != m.dual().tensor(&n.dual()) {
                fail.get_or_insert(format!("(M ⊠ N)* ≠ M* ⊗ N* for {m:?}, {n:?}"));
            }
        }
    }
    verdict("index_set_laws", fail)
}

/// Random constraint map out of `e`: the target flags contain the images.
fn random_map_from(rng: &mut Rng, e: &ConVectorSpace) -> ConLinearMap {
    let fdim = rng.gen_range(1..=4);
    let rows: Vec<Vec<_>> = (0..fdim).map(|_| (0..e.dim()).map(|_| gen::rational(rng)).collect()).collect();
    let m = Mat::from_rows(rows, e.dim());
    let extra = |rng: &mut Rng, k: usize| -> Vec<Vec<_>> { (0..k).map(|_| (0..fdim).map(|_| gen::rational(rng)).collect()).collect() };
    let mut null = e.null().image(&m).basis_vecs();
    let k = rng.gen_range(0..=1);
    null.extend(extra(rng, k));
    let mut wobs = e.wobs().image(&m).basis_vecs();
    wobs.extend(null.clone());
    let k = rng.gen_range(0..=1);
    wobs.extend(extra(rng, k));
    let f = ConVectorSpace::new(fdim, Subspace::span(fdim, &wobs), Subspace::span(fdim, &null)).expect("nested");
    ConLinearMap::new(e.clone(), f, m).expect("shapes")
}

/// The four canonical maps are constraint isomorphisms on random flags, and
/// `iso ⇔ mono ∧ regular epi ⇔ regular mono ∧ epi` holds for them and for
/// random constraint maps.
pub fn canonical_isos(seed: u64, count: usize, mode: Mode) -> Verdict {
    let cases = seeds(seed, count);
    let fails = run(mode, &cases, |&s| {
        let mut rng = gen::rng(s);
        let (de, df) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
        let dg = rng.gen_range(1..=if de * df > 8 { 2 } else { 4 });
        let e = gen::flag(&mut rng, de);
        let f = gen::flag(&mut rng, df);
        let g = gen::flag(&mut rng, dg);
        for which in [CanonicalIso::HomAsStrongTensor, CanonicalIso::DualOfTensor, CanonicalIso::DualOfStrongTensor, CanonicalIso::HomAdjunction] {
            let phi = match canonical_iso(which, &e, &f, Some(&g)) {
                Ok(p) => p,
                Err(err) => return Some(format!("seed {s}: {which:?} failed: {err}")),
            };
            match classify_morphism(&phi) {
                Ok(c) if c.iso && c.consistent() => {}
                Ok(c) => return Some(format!("seed {s}: {which:?} classified as {c:?}")),
                Err(err) => return Some(format!("seed {s}: {which:?} is not a constraint map: {err}")),
            }
        }
        for _ in 0..3 {
            let phi = random_map_from(&mut rng, &e);
            match classify_morphism(&phi) {
                Ok(c) if c.consistent() => {}
                Ok(c) => return Some(format!("seed {s}: inconsistent classification {c:?}")),
                Err(err) => return Some(format!("seed {s}: generated map rejected: {err}")),
            }
        }
        None
    });
    verdict("canonical_isos", first_failure(fails))
}

/// `(dim reduce(E ⊗_A E), dim(reduce E ⊗_{reduce A} reduce E))` for
/// `A = (ℚ(i), ℚ, 0)` and `E = (ℚ(i), ℚ(i), 0)`.
pub fn tensor_counterexample() -> (usize, usize) {
    let line = Subspace::coordinate(2, [0]);
    let a = ConAlgebraFD::gaussian(ConVectorSpace::new(2, line, Subspace::zero(2)).expect("nested")).expect("algebra");
    let regular = ConModuleFD::regular(&a);
    let e = ConModuleFD::new(a, ConVectorSpace::new(2, Subspace::full(2), Subspace::zero(2)).expect("nested"), regular.action_matrices().to_vec())
        .expect("module");
    let lhs = tensor_over_algebra(&e, &e, Flavor::Tensor).and_then(|t| t.reduce()).expect("reducible").dim();
    let red = e.reduce().expect("reducible");
    let rhs = tensor_over_algebra(&red, &red, Flavor::Tensor).and_then(|t| t.reduce()).expect("reducible").dim();
    (lhs, rhs)
}

/// Reduction does not commute with `⊗_A` in the ℚ(i) example.
pub fn tensor_not_preserved() -> Verdict {
    let (lhs, rhs) = tensor_counterexample();
    verdict("tensor_not_preserved", (lhs != 2 || lhs == rhs).then(|| format!("dims {lhs} and {rhs}")))
}

fn random_vf(rng: &mut Rng, space: &ConSpace, max_deg: u32) -> VectorField {
    VectorField { space: *space, comps: (0..space.nvars()).map(|_| gen::poly(rng, space.nvars(), max_deg, 3)).collect() }
}

/// `d² = 0`, the magic formula, preservation of the W- and N-components by `d`
/// in the strong flavor, and the tensor-flavor witness `x1 dx2` on `ℝ^(2,1,1)`.
pub fn cartan_identities(seed: u64, count: usize, mode: Mode) -> Verdict {
    let cases = seeds(seed, count);
    let fails = run(mode, &cases, |&s| {
        let mut rng = gen::rng(s);
        let space = gen::con_space(&mut rng, 4);
        let k = rng.gen_range(0..=space.nvars().min(3));
        let w: KForm = gen::any_alt::<Co>(&mut rng, &space, k, Flavor::Strong, 3);
        let dw = de_rham(&w).expect("cotangent");
        if !de_rham(&dw).expect("cotangent").is_zero() {
            return Some(format!("seed {s}: d² ≠ 0"));
        }
        let x = random_vf(&mut rng, &space, 2);
        let lie = lie_derivative(&x, &w).expect("same space");
        let magic = if k == 0 {
            insertion(&x, &dw).expect("degree 1")
        } else {
            insertion(&x, &dw).expect("degree ≥ 1").add(&de_rham(&insertion(&x, &w).expect("degree ≥ 1")).expect("cotangent")).expect("same degree")
        };
        if lie != magic {
            return Some(format!("seed {s}: L_X ≠ i_X d + d i_X"));
        }
        let kk = rng.gen_range(0..space.nvars().clamp(1, 3));
        let wc: KForm = gen::classed_alt::<Co>(&mut rng, &space, kk, Flavor::Strong, 3, false);
        if !wc.class().in_w || !de_rham(&wc).expect("cotangent").class().in_w {
            return Some(format!("seed {s}: d leaves the W-component"));
        }
        let nc: KForm = gen::classed_alt::<Co>(&mut rng, &space, kk, Flavor::Strong, 3, true);
        if !nc.class().in_n || !de_rham(&nc).expect("cotangent").class().in_n {
            return Some(format!("seed {s}: d leaves the N-component"));
        }
        None
    });
    let mut fail = first_failure(fails);
    let m = ConSpace::new(2, 1, 1).expect("nested");
    let mut a = KForm::zero(m, 1, Flavor::Tensor);
    a.add_term(&[1], Poly::var(2, 0));
    let da = de_rham(&a).expect("cotangent");
    if !a.class().in_n || da.class().in_n {
        fail.get_or_insert("x1 dx2 on ℝ^(2,1,1): expected in_N with d(α) outside N in the tensor flavor".into());
    }
    verdict("cartan_identities", fail)
}

/// The canonical `π` on `ℝ^(4,3,1)` reduces to `∂1∧∂2` on `ℝ²`; `x1 ∂2∧∂3` fails the class check.
pub fn poisson_reduction() -> Verdict {
    let c = dirac::canonical_example();
    let mut fail = None;
    if !dirac::check_poisson(&c).pass() {
        fail = Some("canonical π fails check_poisson".to_string());
    }
    match dirac::reduce_poisson(&c) {
        Ok(r) => {
            let mut expect = MultiVector::zero(ConSpace::plain(2), 2, Flavor::Strong);
            expect.add_term(&[0, 1], Poly::one(2));
            if r.pi != expect {
                fail.get_or_insert(format!("reduced π has components {:?}", r.pi.comps()));
            }
            if !schouten(&r.pi, &r.pi).expect("bivector").is_zero() {
                fail.get_or_insert("[[π_red, π_red]] ≠ 0".into());
            }
        }
        Err(e) => {
            fail.get_or_insert(format!("reduction failed: {e}"));
        }
    }
    let mut bad = MultiVector::zero(c.space(), 2, Flavor::Strong);
    bad.add_term(&[1, 2], Poly::var(4, 0));
    let rep = dirac::check_poisson(&PoissonData::new(bad).expect("bivector"));
    if rep.get("class").map(|v| v.pass) != Some(false) {
        fail.get_or_insert("x1 ∂2∧∂3 passed the class check".into());
    }
    verdict("poisson_reduction", fail)
}

/// `d² = 0` for the tangent algebroid and so(3), `d² ≠ 0` with a witness for
/// the broken variant, and Koszul = de Rham on a spanning set of forms of
/// degree ≤ 2 with coefficients of degree ≤ 2.
pub fn algebroid_equivalences(mode: Mode) -> (Verdict, Option<String>) {
    let mut fail = None;
    let tangent = AlgebroidData::tangent(ConSpace::new(4, 3, 1).expect("nested"));
    if let Some(w) = algd::koszul_square_witness(&tangent) {
        fail = Some(format!("tangent algebroid: {w}"));
    }
    let so3 = AlgebroidData::point(vec![SlotClass::WobsOnly; 3], &algd::so3_constants()).expect("antisymmetric");
    if let Some(w) = algd::koszul_square_witness(&so3) {
        fail.get_or_insert(format!("so(3): {w}"));
    }
    let broken = AlgebroidData::point(vec![SlotClass::WobsOnly; 3], &algd::broken_so3_constants()).expect("antisymmetric");
    let witness = algd::koszul_square_witness(&broken);
    if witness.is_none() {
        fail.get_or_insert("broken so(3): d² = 0".into());
    }
    let n = tangent.base.nvars();
    let monomials: Vec<Poly> = (0..=2u32)
        .flat_map(|deg| exponents(n, deg))
        .map(|e| Poly::monomial(e, crate::exact::q(1)))
        .collect();
    let mut basis = Vec::new();
    for k in 0..=2 {
        for t in crate::cindex::increasing_tuples(n, k) {
            for m in &monomials {
                basis.push((t.clone(), m.clone()));
            }
        }
    }
    let fails = run(mode, &basis, |(t, m)| {
        let mut w = tangent.zero_form(t.len(), Flavor::Strong);
        w.add_term(t, m.clone());
        let lhs = algd::koszul(&tangent, &w).expect("own form");
        let rhs = de_rham(&w).expect("cotangent");
        (lhs != rhs).then(|| format!("koszul ≠ d on ({m}) dx{t:?}"))
    });
    if let Some(f) = first_failure(fails) {
        fail.get_or_insert(f);
    }
    (verdict("algebroid_equivalences", fail), witness)
}

fn exponents(n: usize, deg: u32) -> Vec<Vec<u32>> {
    if n == 0 {
        return if deg == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 0..=deg {
        for mut rest in exponents(n - 1, deg - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn check_eq<T: PartialEq>(what: &str, a: T, b: T) -> Result<(), String> {
    if a == b {
        Ok(())
    } else {
        Err(format!("reduction does not commute with {what}"))
    }
}

fn random_bundle(rng: &mut Rng, space: &ConSpace) -> TrivBundle {
    let k = rng.gen_range(1..=3);
    TrivBundle::new(*space, gen::slot_classes(rng, k))
}

fn functoriality_case(s: u64) -> Result<(), String> {
    let mut rng = gen::rng(s);
    let space = gen::con_space(&mut rng, 4);
    let n = space.nvars();
    let red = |e: crate::cartan::CartanError| format!("seed {s}: reduce failed: {e}");

    let k = rng.gen_range(0..=n.min(2));
    let w: KForm = gen::classed_alt::<Co>(&mut rng, &space, k, Flavor::Strong, 2, false);
    let ke = rng.gen_range(0..=1);
    let eta: KForm = gen::classed_alt::<Co>(&mut rng, &space, ke, Flavor::Strong, 2, false);
    let x = gen::vector_field(&mut rng, &space, 2, false);
    let y = gen::vector_field(&mut rng, &space, 2, false);
    let (wr, xr, yr) = (w.reduce().map_err(red)?, x.reduce().map_err(red)?, y.reduce().map_err(red)?);

    check_eq("d", de_rham(&w).unwrap().reduce().map_err(red)?, de_rham(&wr).unwrap())?;
    if k > 0 {
        check_eq("i_X", insertion(&x, &w).unwrap().reduce().map_err(red)?, insertion(&xr, &wr).unwrap())?;
    }
    check_eq("L_X", lie_derivative(&x, &w).unwrap().reduce().map_err(red)?, lie_derivative(&xr, &wr).unwrap())?;
    check_eq("wedge", w.wedge(&eta).unwrap().reduce().map_err(red)?, wr.wedge(&eta.reduce().map_err(red)?).unwrap())?;
    check_eq("vf_bracket", vf_bracket(&x, &y).unwrap().reduce().map_err(red)?, vf_bracket(&xr, &yr).unwrap())?;

    let (kp, kq) = (rng.gen_range(0..=2), rng.gen_range(0..=2));
    let p: MultiVector = gen::classed_alt::<Contra>(&mut rng, &space, kp, Flavor::Strong, 2, false);
    let q: MultiVector = gen::classed_alt::<Contra>(&mut rng, &space, kq, Flavor::Strong, 2, false);
    check_eq(
        "schouten",
        schouten(&p, &q).unwrap().reduce().map_err(red)?,
        schouten(&p.reduce().map_err(red)?, &q.reduce().map_err(red)?).unwrap(),
    )?;

    let geo = |e: crate::cgeo::GeoError| format!("seed {s}: {e}");
    let e = random_bundle(&mut rng, &space);
    let f = random_bundle(&mut rng, &space);
    for kind in [BundleKind::Dsum, BundleKind::Tensor, BundleKind::StrongTensor, BundleKind::Hom] {
        let lhs = e.construct(kind, Some(&f)).map_err(geo)?.reduce();
        let rhs = e.reduce().construct(kind, Some(&f.reduce())).map_err(geo)?;
        check_eq(&format!("{kind:?}"), lhs, rhs)?;
    }
    check_eq("Dual", e.dual().reduce(), e.reduce().dual())?;

    let se = gen::section(&mut rng, &e, 2, false);
    let te = gen::section(&mut rng, &e, 2, false);
    let sf = gen::section(&mut rng, &f, 2, false);
    let alpha = gen::section(&mut rng, &e.dual(), 2, false);
    let g = gen::fn_of_class(&mut rng, &space, SlotClass::WobsOnly, 2);
    let gr = space.fn_reduce(&g).map_err(geo)?;
    let (ser, ter, sfr) = (se.reduce().map_err(geo)?, te.reduce().map_err(geo)?, sf.reduce().map_err(geo)?);
    check_eq("section sum", se.add(&te).map_err(geo)?.reduce().map_err(geo)?, ser.add(&ter).map_err(geo)?)?;
    check_eq("function action", se.scale_fn(&g).reduce().map_err(geo)?, ser.scale_fn(&gr))?;
    for flavor in [Flavor::Tensor, Flavor::Strong] {
        check_eq("section tensor", se.tensor(&sf, flavor).map_err(geo)?.reduce().map_err(geo)?, ser.tensor(&sfr, flavor).map_err(geo)?)?;
    }
    check_eq(
        "dual pairing",
        space.fn_reduce(&alpha.dual_pair(&se).map_err(geo)?).map_err(geo)?,
        alpha.reduce().map_err(geo)?.dual_pair(&ser).map_err(geo)?,
    )?;

    let alg = AlgebroidData::tangent(space);
    let alg_red = algd::reduce_algebroid(&alg).map_err(|e| format!("seed {s}: {e}"))?;
    let (xs, ys) = (x.as_section(), y.as_section());
    let (xsr, ysr) = (xs.reduce().map_err(geo)?, ys.reduce().map_err(geo)?);
    let br = alg.bracket(&xs, &ys).map_err(|e| format!("seed {s}: {e}"))?;
    check_eq("algebroid bracket", br.reduce().map_err(geo)?, alg_red.bracket(&xsr, &ysr).map_err(|e| format!("seed {s}: {e}"))?)?;
    check_eq("anchor", alg.anchor_of(&xs).reduce().map_err(red)?, alg_red.anchor_of(&xsr))?;
    Ok(())
}

/// Linear Poisson structure `x2 ∂2∧∂3 + x1 ∂1∧∂4` on `ℝ^(4,3,1)`.
pub fn linear_poisson_example() -> PoissonData {
    let space = ConSpace::new(4, 3, 1).expect("nested");
    let mut pi = MultiVector::zero(space, 2, Flavor::Strong);
    pi.add_term(&[1, 2], Poly::var(4, 1));
    pi.add_term(&[0, 3], Poly::var(4, 0));
    PoissonData::new(pi).expect("bivector")
}

/// Reduction commutes with the calculus, bundle constructions, section
/// operations and algebroid structure on random W-classed data, and with the
/// cotangent algebroid construction.
pub fn reduction_functoriality(seed: u64, count: usize, mode: Mode) -> Verdict {
    let cases = seeds(seed, count);
    let fails = run(mode, &cases, |&s| functoriality_case(s).err());
    let mut fail = first_failure(fails);
    for (name, p) in [("canonical", dirac::canonical_example()), ("linear", linear_poisson_example())] {
        let lhs = dirac::cotangent_algebroid(&p).map_err(|e| e.to_string()).and_then(|a| algd::reduce_algebroid(&a).map_err(|e| e.to_string()));
        let rhs = dirac::reduce_poisson(&p).and_then(|r| dirac::cotangent_algebroid(&r)).map_err(|e| e.to_string());
        match (lhs, rhs) {
            (Ok(a), Ok(b)) if a == b => {}
            (Ok(_), Ok(_)) => {
                fail.get_or_insert(format!("{name} π: reduce ∘ cotangent ≠ cotangent ∘ reduce"));
            }
            (Err(e), _) | (_, Err(e)) => {
                fail.get_or_insert(format!("{name} π: {e}"));
            }
        }
    }
    verdict("reduction_functoriality", fail)
}

/// Random bivector or 2-form whose closedness varies: half the cases are
/// built to be closed.
fn random_graph(rng: &mut Rng, space: &ConSpace) -> DiracGraph {
    let n = space.nvars();
    let closed = rng.gen_bool(0.5);
    if rng.gen_bool(0.5) {
        let mut pi = MultiVector::zero(*space, 2, Flavor::Strong);
        if closed {
            // f ∂i∧∂j is always Poisson.
            let t = crate::cindex::increasing_tuples(n, 2);
            let pick = &t[rng.gen_range(0..t.len())];
            pi.add_term(pick, gen::poly(rng, n, 2, 3));
        } else {
            pi = gen::any_alt::<Contra>(rng, space, 2, Flavor::Strong, 2);
        }
        DiracGraph::Bivector(PoissonData::new(pi).expect("bivector"))
    } else {
        let w = if closed {
            let eta: KForm = gen::any_alt::<Co>(rng, space, 1, Flavor::Strong, 2);
            de_rham(&eta).expect("cotangent")
        } else {
            gen::any_alt::<Co>(rng, space, 2, Flavor::Strong, 2)
        };
        DiracGraph::TwoForm(PresymplecticData::new(w).expect("2-form"))
    }
}

/// The frame-residual involutivity verdict equals `⟦π, π⟧ = 0` or `dω = 0`.
pub fn dirac_oracle(seed: u64, count: usize, mode: Mode) -> (Verdict, usize) {
    let cases = seeds(seed, count);
    let results = run(mode, &cases, |&s| {
        let mut rng = gen::rng(s);
        let t = rng.gen_range(3..=4);
        let w = rng.gen_range(0..=t);
        let space = ConSpace::new(t, w, rng.gen_range(0..=w)).expect("nested");
        let g = random_graph(&mut rng, &space);
        let rep = dirac::dirac_check(&g);
        let residual_ok = rep.get("involutive").map(|v| v.pass).unwrap_or(false);
        let oracle_ok = match &g {
            DiracGraph::Bivector(p) => schouten(&p.pi, &p.pi).expect("bivector").is_zero(),
            DiracGraph::TwoForm(q) => de_rham(&q.omega).expect("2-form").is_zero(),
        };
        let sampled = rep.get("lagrangian_samples").map(|v| v.pass).unwrap_or(false);
        let fail = if residual_ok != oracle_ok {
            Some(format!("seed {s}: residual says {residual_ok}, oracle says {oracle_ok}"))
        } else if !sampled {
            Some(format!("seed {s}: graph not Lagrangian at a sample point"))
        } else {
            None
        };
        (fail, oracle_ok)
    });
    let involutive = results.iter().filter(|r| r.1).count();
    (verdict("dirac_oracle", first_failure(results.into_iter().map(|r| r.0).collect())), involutive)
}

/// Drops normal and leaf variables: agrees with `fn_reduce` on observable
/// functions and is defined everywhere.
fn naive_reduce(space: &ConSpace, f: &Poly) -> Poly {
    let map: Vec<Option<usize>> = (0..space.nvars()).map(|i| space.reduced_vars().iter().position(|&j| j == i)).collect();
    let mut g = f.clone();
    for i in space.leaf_vars().into_iter().chain(space.normal_vars()) {
        g = g.substitute_zero(&[i]);
    }
    g.reindex(&map, space.red_dim()).expect("only reduced variables remain")
}

fn random_morphism(rng: &mut Rng) -> BundleMorphism {
    // Half the cases get a leaf-dependent entry in the W-block.
    let leaky = rng.gen_bool(0.5);
    let space = loop {
        let s = gen::con_space(rng, 3);
        if s.dim.n > 0 || (!leaky && rng.gen_bool(0.2)) {
            break s;
        }
    };
    let mut e = random_bundle(rng, &space);
    let mut f = random_bundle(rng, &space);
    if leaky {
        e.classes[0] = SlotClass::WobsOnly;
        f.classes[0] = SlotClass::WobsOnly;
    }
    let hom = e.hom(&f).expect("same base");
    let n = space.nvars();
    let mut matrix = vec![vec![Poly::zero(n); e.rank()]; f.rank()];
    for r in 0..f.rank() {
        for c in 0..e.rank() {
            let class = hom.classes[r * e.rank() + c];
            let mut entry = gen::fn_of_class(rng, &space, class, 2);
            if leaky && class == SlotClass::WobsOnly {
                if let Some(&l) = space.leaf_vars().first() {
                    entry = &entry + &Poly::var(n, l);
                }
            }
            matrix[r][c] = entry;
        }
    }
    let base_map = (0..n).map(|i| Poly::var(n, i)).collect();
    BundleMorphism::new(e, f, base_map, matrix).expect("shapes")
}

/// `Φ(s)` stays observable and its reduction equals the reduced block
/// applied to `reduce s`, for basis and random W-sections.
fn reduction_commutes(phi: &BundleMorphism, rng: &mut Rng) -> bool {
    let space = phi.source.base;
    let rows = phi.target.wobs_only_slots();
    let cols = phi.source.wobs_only_slots();
    let block: Vec<Vec<Poly>> = rows.iter().map(|&r| cols.iter().map(|&c| naive_reduce(&space, &phi.matrix[r][c])).collect()).collect();
    let mut sections: Vec<ClassedSection> = (0..phi.source.rank())
        .filter(|&c| phi.source.classes[c] != SlotClass::TotalOnly)
        .map(|c| ClassedSection::basis(&phi.source, c))
        .collect();
    sections.extend((0..3).map(|_| gen::section(rng, &phi.source, 2, false)));
    sections.iter().all(|s| {
        let image = phi.apply(s).expect("source section");
        if !image.class().in_w {
            return false;
        }
        let lhs = image.reduce().expect("observable").components;
        let sr = s.reduce().expect("observable").components;
        let rn = space.red_dim();
        let rhs: Vec<Poly> = block.iter().map(|row| row.iter().zip(&sr).fold(Poly::zero(rn), |acc, (m, x)| &acc + &(m * x))).collect();
        lhs == rhs
    })
}

/// `connection_ok` holds exactly when reduction commutes with the morphism.
pub fn flat_connection(seed: u64, count: usize, mode: Mode) -> (Verdict, usize) {
    let cases = seeds(seed, count);
    let results = run(mode, &cases, |&s| {
        let mut rng = gen::rng(s);
        let phi = random_morphism(&mut rng);
        let chk = phi.check();
        if !chk.base_ok || !chk.fiber_ok {
            return (Some(format!("seed {s}: generator produced a non-morphism")), false);
        }
        let commutes = reduction_commutes(&phi, &mut rng);
        let fail = (commutes != chk.connection_ok).then(|| format!("seed {s}: connection_ok = {}, commutes = {commutes}", chk.connection_ok));
        (fail, chk.connection_ok)
    });
    let ok = results.iter().filter(|r| r.1).count();
    (verdict("flat_connection", first_failure(results.into_iter().map(|r| r.0).collect())), ok)
}

/// Default sizes for the full suite.
pub const CANONICAL_ISO_CASES: usize = 200;
pub const CARTAN_CASES: usize = 100;
pub const FUNCTORIALITY_CASES: usize = 100;
pub const DIRAC_CASES: usize = 50;
pub const MORPHISM_CASES: usize = 50;

/// Runs every invariant with the default sizes.
pub fn run_all(seed: u64, mode: Mode) -> Report {
    let mut rep = Report::new("selftest");
    rep.verdicts.push(index_set_laws());
    rep.verdicts.push(canonical_isos(seed, CANONICAL_ISO_CASES, mode));
    rep.verdicts.push(tensor_not_preserved());
    rep.verdicts.push(cartan_identities(seed, CARTAN_CASES, mode));
    rep.verdicts.push(poisson_reduction());
    rep.verdicts.push(algebroid_equivalences(mode).0);
    rep.verdicts.push(reduction_functoriality(seed, FUNCTORIALITY_CASES, mode));
    rep.verdicts.push(dirac_oracle(seed, DIRAC_CASES, mode).0);
    rep.verdicts.push(flat_connection(seed, MORPHISM_CASES, mode).0);
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponents_count() {
        assert_eq!(exponents(3, 2).len(), 6);
        assert_eq!(exponents(0, 0), vec![Vec::<u32>::new()]);
    }

    #[test]
    fn naive_reduce_matches_fn_reduce() {
        let m = ConSpace::new(3, 2, 1).unwrap();
        let f = Poly::parse("x2^2 + x3*x1", 3).unwrap();
        assert_eq!(naive_reduce(&m, &f), m.fn_reduce(&f).unwrap());
    }

    #[test]
    fn small_sweeps() {
        assert!(canonical_isos(7, 5, Mode::Sequential).pass);
        assert!(cartan_identities(7, 5, Mode::Sequential).pass);
        assert!(reduction_functoriality(7, 5, Mode::Sequential).pass);
        assert!(dirac_oracle(7, 5, Mode::Sequential).0.pass);
        assert!(flat_connection(7, 5, Mode::Sequential).0.pass);
    }
}
