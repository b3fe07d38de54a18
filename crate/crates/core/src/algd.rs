//! Constraint Lie algebroids (and Lie–Rinehart algebras in the flat model)
//! given by an anchor matrix and structure functions on the standard frame.

use thiserror::Error;

use crate::alt;
use crate::cartan::{gerstenhaber_comps, Anchored, CartanError, Co, Comps, Contra, KForm, MultiVector, VectorField};
use crate::cgeo::{BundleMorphism, ClassedSection, ConSpace, GeoError, TrivBundle};
use crate::cindex::{increasing_tuples, Flavor, SlotClass};
use crate::exact::Rational;
use crate::par;
use crate::poly::Poly;
use crate::report::Report;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgdError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("structure functions are not antisymmetric at ({0}, {1})")]
    NotAntisymmetric(usize, usize),
    #[error("classical algebroid axioms fail")]
    ClassicalAxiomsFail,
    #[error("algebroid checks fail: {0}")]
    ChecksFail(String),
    #[error("not a constraint bundle morphism")]
    NotBundleMorphism,
    #[error("a constituent algebroid fails its checks")]
    ConstituentFails,
    #[error(transparent)]
    Cartan(#[from] CartanError),
    #[error(transparent)]
    Geo(#[from] GeoError),
}

/// Anchor `ρ(e_i) = Σ_v anchor[v][i] ∂_v` and `[e_i, e_j] = Σ_m structure[i][j][m] e_m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgebroidData {
    pub base: ConSpace,
    pub bundle: TrivBundle,
    pub anchor: Vec<Vec<Poly>>,
    pub structure: Vec<Vec<Vec<Poly>>>,
}

/// The flat-model Lie–Rinehart algebra is the same data, with the anchor read
/// as derivations of the function algebra.
pub type LieRinehartData = AlgebroidData;

impl AlgebroidData {
    pub fn new(bundle: TrivBundle, anchor: Vec<Vec<Poly>>, structure: Vec<Vec<Vec<Poly>>>) -> Result<Self, AlgdError> {
        let base = bundle.base;
        let (n, k) = (base.nvars(), bundle.rank());
        if anchor.len() != n || anchor.iter().any(|r| r.len() != k) {
            return Err(AlgdError::Shape("anchor must be d_T × rank".into()));
        }
        if structure.len() != k || structure.iter().any(|r| r.len() != k || r.iter().any(|c| c.len() != k)) {
            return Err(AlgdError::Shape("structure must be rank × rank × rank".into()));
        }
        for f in anchor.iter().flatten().chain(structure.iter().flatten().flatten()) {
            base.check_poly(f)?;
        }
        for i in 0..k {
            for j in i..k {
                if (0..k).any(|m| structure[i][j][m] != -&structure[j][i][m]) {
                    return Err(AlgdError::NotAntisymmetric(i + 1, j + 1));
                }
            }
        }
        Ok(AlgebroidData { base, bundle, anchor, structure })
    }

    pub fn tangent(base: ConSpace) -> Self {
        let n = base.nvars();
        let anchor = (0..n).map(|v| (0..n).map(|i| if v == i { Poly::one(n) } else { Poly::zero(n) }).collect()).collect();
        AlgebroidData { base, bundle: TrivBundle::tangent(base), anchor, structure: zero_structure(n, n) }
    }

    /// Constraint Lie algebra as an algebroid over a point.
    pub fn point(classes: Vec<SlotClass>, consts: &[Vec<Vec<Rational>>]) -> Result<Self, AlgdError> {
        let base = ConSpace::plain(0);
        let structure = consts.iter().map(|r| r.iter().map(|c| c.iter().map(|x| Poly::constant(0, x.clone())).collect()).collect()).collect();
        Self::new(TrivBundle::new(base, classes), vec![], structure)
    }

    /// Zero anchor and the given constant structure on every fiber.
    pub fn bundle_of_lie_algebras(bundle: TrivBundle, consts: &[Vec<Vec<Rational>>]) -> Result<Self, AlgdError> {
        let n = bundle.base.nvars();
        let k = bundle.rank();
        let structure = consts.iter().map(|r| r.iter().map(|c| c.iter().map(|x| Poly::constant(n, x.clone())).collect()).collect()).collect();
        Self::new(bundle, vec![vec![Poly::zero(n); k]; n], structure)
    }

    pub fn rank(&self) -> usize {
        self.bundle.rank()
    }

    pub fn anchor_field(&self, i: usize) -> VectorField {
        VectorField { space: self.base, comps: self.anchor.iter().map(|row| row[i].clone()).collect() }
    }

    pub fn anchor_of(&self, s: &ClassedSection) -> VectorField {
        let n = self.base.nvars();
        let comps = self
            .anchor
            .iter()
            .map(|row| row.iter().zip(&s.components).fold(Poly::zero(n), |acc, (r, x)| &acc + &(r * x)))
            .collect();
        VectorField { space: self.base, comps }
    }

    pub fn basis(&self, i: usize) -> ClassedSection {
        ClassedSection::basis(&self.bundle, i)
    }

    pub fn section(&self, components: Vec<Poly>) -> Result<ClassedSection, AlgdError> {
        Ok(ClassedSection::new(self.bundle.clone(), components)?)
    }

    /// Bracket of arbitrary sections, extended from the frame by Leibniz.
    pub fn bracket(&self, s: &ClassedSection, t: &ClassedSection) -> Result<ClassedSection, AlgdError> {
        if s.bundle != self.bundle || t.bundle != self.bundle {
            return Err(AlgdError::Shape("sections of a different bundle".into()));
        }
        let n = self.base.nvars();
        let mut out = vec![Poly::zero(n); self.rank()];
        for (i, f) in s.components.iter().enumerate().filter(|(_, f)| !f.is_zero()) {
            for (j, g) in t.components.iter().enumerate().filter(|(_, g)| !g.is_zero()) {
                for (m, c) in self.bracket_monomials(i, f, j, g).into_iter().enumerate() {
                    out[m] = &out[m] + &c;
                }
            }
        }
        Ok(ClassedSection { bundle: self.bundle.clone(), components: out })
    }

    /// `[e_i, [e_j, e_m]] + [e_j, [e_m, e_i]] + [e_m, [e_i, e_j]]`.
    pub fn jacobiator(&self, i: usize, j: usize, m: usize) -> ClassedSection {
        let (a, b, c) = (self.basis(i), self.basis(j), self.basis(m));
        let br = |x: &ClassedSection, y: &ClassedSection| self.bracket(x, y).expect("own sections");
        let t1 = br(&a, &br(&b, &c));
        let t2 = br(&b, &br(&c, &a));
        let t3 = br(&c, &br(&a, &b));
        t1.add(&t2).and_then(|s| s.add(&t3)).expect("same bundle")
    }

    /// Slot classes of `A*`, the bundle on which algebroid forms live.
    pub fn form_slots(&self) -> Vec<SlotClass> {
        self.bundle.dual().classes
    }

    pub fn zero_form(&self, degree: usize, flavor: Flavor) -> KForm {
        KForm::zero_on(self.base, self.form_slots(), degree, flavor)
    }

    pub fn zero_multivector(&self, degree: usize, flavor: Flavor) -> MultiVector {
        MultiVector::zero_on(self.base, self.bundle.classes.clone(), degree, flavor)
    }
}

fn zero_structure(k: usize, n: usize) -> Vec<Vec<Vec<Poly>>> {
    vec![vec![vec![Poly::zero(n); k]; k]; k]
}

impl Anchored for AlgebroidData {
    fn rank(&self) -> usize {
        self.bundle.rank()
    }
    fn nvars(&self) -> usize {
        self.base.nvars()
    }
    fn anchor_apply(&self, i: usize, f: &Poly) -> Poly {
        self.anchor.iter().enumerate().fold(Poly::zero(self.base.nvars()), |acc, (v, row)| {
            if row[i].is_zero() {
                acc
            } else {
                &acc + &(&row[i] * &f.partial(v))
            }
        })
    }
    fn structure(&self, i: usize, j: usize) -> Vec<Poly> {
        self.structure[i][j].clone()
    }
}

/// `Σ f_m e_m` with 1-based frame labels.
pub fn fmt_section(components: &[Poly]) -> String {
    let terms: Vec<String> =
        components.iter().enumerate().filter(|(_, f)| !f.is_zero()).map(|(m, f)| format!("({f})*e{}", m + 1)).collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

fn fmt_field(v: &VectorField) -> String {
    let terms: Vec<String> =
        v.comps.iter().enumerate().filter(|(_, f)| !f.is_zero()).map(|(m, f)| format!("({f})*d{}", m + 1)).collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

/// Jacobi identity on frame triples and `ρ[e_i, e_j] = [ρe_i, ρe_j]`.
pub fn check_classical(a: &AlgebroidData) -> Report {
    let k = a.rank();
    let mut rep = Report::new("algebroid");
    let triples = increasing_tuples(k, 3);
    let jac = par::map(&triples, |t| {
        let j = a.jacobiator(t[0], t[1], t[2]);
        (!j.components.iter().all(Poly::is_zero))
            .then(|| format!("J(e{}, e{}, e{}) = {}", t[0] + 1, t[1] + 1, t[2] + 1, fmt_section(&j.components)))
    });
    rep.record("jacobi", jac.into_iter().flatten().next());
    let pairs = increasing_tuples(k, 2);
    let anc = par::map(&pairs, |t| {
        let (i, j) = (t[0], t[1]);
        let br = a.bracket(&a.basis(i), &a.basis(j)).expect("own sections");
        let lhs = a.anchor_of(&br);
        let rhs = crate::cartan::vf_bracket(&a.anchor_field(i), &a.anchor_field(j)).expect("same base");
        (lhs != rhs).then(|| format!("ρ[e{}, e{}] = {} but [ρe{}, ρe{}] = {}", i + 1, j + 1, fmt_field(&lhs), i + 1, j + 1, fmt_field(&rhs)))
    });
    rep.record("anchor_bracket", anc.into_iter().flatten().next());
    rep
}

/// Constraint conditions on anchor, bracket and the `W ∖ N` structure block.
pub fn check_constraint(a: &AlgebroidData) -> Result<Report, AlgdError> {
    if !check_classical(a).pass() {
        return Err(AlgdError::ClassicalAxiomsFail);
    }
    constraint_conditions(a)
}

/// The constraint conditions alone, without requiring the classical axioms.
pub fn constraint_conditions(a: &AlgebroidData) -> Result<Report, AlgdError> {
    let k = a.rank();
    let classes = &a.bundle.classes;
    let mut rep = Report::new("constraint algebroid");

    let anchor_fail = (0..k).find_map(|i| {
        let c = a.anchor_field(i).class();
        let ok = match classes[i] {
            SlotClass::Null => c.in_n,
            SlotClass::WobsOnly => c.in_w,
            SlotClass::TotalOnly => true,
        };
        (!ok).then(|| format!("anchor column {} = {} is not of class {}", i + 1, fmt_field(&a.anchor_field(i)), classes[i].short()))
    });
    rep.record("anchor", anchor_fail);

    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (0..k).map(move |j| (i, j))).collect();
    let bracket_fail = pairs.iter().find_map(|&(i, j)| {
        let s = ClassedSection { bundle: a.bundle.clone(), components: a.structure[i][j].clone() };
        let c = s.class();
        let ok = match classes[i].combine(classes[j], Flavor::Tensor) {
            SlotClass::Null => c.in_n,
            SlotClass::WobsOnly => c.in_w,
            SlotClass::TotalOnly => true,
        };
        (!ok).then(|| format!("[e{}, e{}] = {} has the wrong class", i + 1, j + 1, fmt_section(&s.components)))
    });
    rep.record("bracket", bracket_fail);

    let wn = a.bundle.wobs_only_slots();
    let mut conn_fail = None;
    'outer: for &i in &wn {
        for &j in &wn {
            for &m in &wn {
                let f = &a.structure[i][j][m];
                if !a.base.fn_class(f)?.in_w {
                    conn_fail = Some(format!("c^{}_{{{},{}}} = {f} is not observable", m + 1, i + 1, j + 1));
                    break 'outer;
                }
            }
        }
    }
    rep.record("connection", conn_fail);
    Ok(rep)
}

fn check_form(a: &AlgebroidData, w: &KForm) -> Result<(), AlgdError> {
    if w.space != a.base || w.slots != a.form_slots() {
        return Err(AlgdError::Shape("form over a different bundle".into()));
    }
    Ok(())
}

/// `(dα)(e_{i_0},…,e_{i_k}) = Σ_p (−1)^p ρ(e_{i_p}) α(…î_p…) + Σ_{p<q} (−1)^{p+q} α([e_{i_p}, e_{i_q}], …î_p…î_q…)`.
pub fn koszul(a: &AlgebroidData, w: &KForm) -> Result<KForm, AlgdError> {
    check_form(a, w)?;
    let k = w.degree;
    let n = a.base.nvars();
    let tuples = increasing_tuples(a.rank(), k + 1);
    let vals = par::map(&tuples, |t| {
        let mut val = Poly::zero(n);
        for p in 0..=k {
            let rest = alt::without(t, p);
            let term = a.anchor_apply(t[p], &w.get(&rest));
            val = if p % 2 == 0 { &val + &term } else { &val - &term };
        }
        for p in 0..=k {
            for qq in p + 1..=k {
                let rest = alt::without(&alt::without(t, qq), p);
                for (m, c) in a.structure[t[p]][t[qq]].iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    let Some((s, idx)) = alt::merge(&[m], &rest) else { continue };
                    let term = c * &w.get(&idx);
                    val = if alt::sign_pow((p + qq) as i64) * s > 0 { &val + &term } else { &val - &term };
                }
            }
        }
        val
    });
    let comps: Comps = tuples.into_iter().zip(vals).filter(|(_, v)| !v.is_zero()).collect();
    Ok(KForm::from_comps(a.base, w.slots.clone(), k + 1, w.flavor, comps))
}

/// First generator (coordinate function or frame covector) with `d² ≠ 0`.
pub fn koszul_square_witness(a: &AlgebroidData) -> Option<String> {
    let n = a.base.nvars();
    for v in 0..n {
        let mut f = a.zero_form(0, Flavor::Strong);
        f.add_term(&[], Poly::var(n, v));
        let dd = koszul(a, &koszul(a, &f).expect("own form")).expect("own form");
        if !dd.is_zero() {
            return Some(format!("d²(x{}) ≠ 0", v + 1));
        }
    }
    for i in 0..a.rank() {
        let mut e = a.zero_form(1, Flavor::Strong);
        e.add_term(&[i], Poly::one(n));
        let dd = koszul(a, &koszul(a, &e).expect("own form")).expect("own form");
        if !dd.is_zero() {
            return Some(format!("d²(e^{}) ≠ 0", i + 1));
        }
    }
    None
}

fn check_mv(a: &AlgebroidData, p: &MultiVector) -> Result<(), AlgdError> {
    if p.space != a.base || p.slots != a.bundle.classes {
        return Err(AlgdError::Shape("multivector over a different bundle".into()));
    }
    Ok(())
}

/// Gerstenhaber bracket on `Γ(Λ•A)`.
pub fn gerstenhaber(a: &AlgebroidData, p: &MultiVector, q: &MultiVector) -> Result<MultiVector, AlgdError> {
    check_mv(a, p)?;
    check_mv(a, q)?;
    if p.flavor != q.flavor {
        return Err(CartanError::FlavorMismatch.into());
    }
    let comps = gerstenhaber_comps(a, p.comps(), p.degree, q.comps(), q.degree);
    let degree = (p.degree + q.degree).saturating_sub(1);
    Ok(MultiVector::from_comps(a.base, p.slots.clone(), degree, p.flavor, comps))
}

fn pull(phi: &BundleMorphism, g: &Poly) -> Poly {
    g.compose(&phi.base_map, phi.source.base.nvars()).expect("base map matches target")
}

/// Anchor square `Tφ ∘ ρ_A = ρ_B ∘ Φ` and the bracket condition with
/// `Φ(e_i) = Σ_r Φ^r_i φ^*f_r`.
pub fn check_morphism(phi: &BundleMorphism, a: &AlgebroidData, b: &AlgebroidData) -> Result<Report, AlgdError> {
    if phi.source != a.bundle || phi.target != b.bundle {
        return Err(AlgdError::Shape("morphism does not connect the algebroid bundles".into()));
    }
    if !phi.check().all() {
        return Err(AlgdError::NotBundleMorphism);
    }
    let n = a.base.nvars();
    let (ka, kb, nb) = (a.rank(), b.rank(), b.base.nvars());
    let mut rep = Report::new("algebroid morphism");

    let mut anchor_fail = None;
    'anchor: for c in 0..ka {
        for u in 0..nb {
            let lhs = (0..n).fold(Poly::zero(n), |acc, v| &acc + &(&phi.base_map[u].partial(v) * &a.anchor[v][c]));
            let rhs = (0..kb).fold(Poly::zero(n), |acc, r| &acc + &(&pull(phi, &b.anchor[u][r]) * &phi.matrix[r][c]));
            if lhs != rhs {
                anchor_fail = Some(format!("Tφ(ρ_A e{}) = {lhs} but ρ_B(Φ e{}) = {rhs} in component {}", c + 1, c + 1, u + 1));
                break 'anchor;
            }
        }
    }
    rep.record("anchor", anchor_fail);

    let pairs = increasing_tuples(ka, 2);
    let fails = par::map(&pairs, |t| {
        let (i, j) = (t[0], t[1]);
        for r in 0..kb {
            let lhs = (0..ka).fold(Poly::zero(n), |acc, m| &acc + &(&a.structure[i][j][m] * &phi.matrix[r][m]));
            let mut rhs = &a.anchor_apply(i, &phi.matrix[r][j]) - &a.anchor_apply(j, &phi.matrix[r][i]);
            for s in 0..kb {
                for u in 0..kb {
                    let c = &b.structure[s][u][r];
                    if !c.is_zero() {
                        rhs = &rhs + &(&(&phi.matrix[s][i] * &phi.matrix[u][j]) * &pull(phi, c));
                    }
                }
            }
            if lhs != rhs {
                return Some(format!("Φ[e{}, e{}] and the bracket of images differ in slot {}: {lhs} vs {rhs}", i + 1, j + 1, r + 1));
            }
        }
        None
    });
    rep.record("bracket", fails.into_iter().flatten().next());
    Ok(rep)
}

/// `Φ: A* → B*` over `φ`; the transpose `Ψ f_r = Σ_c Φ^r_c e_c` must be a
/// Lie–Rinehart morphism paired with `φ^*`.
pub fn check_comorphism(phi: &BundleMorphism, a: &AlgebroidData, b: &AlgebroidData) -> Result<Report, AlgdError> {
    if phi.source != a.bundle.dual() || phi.target != b.bundle.dual() {
        return Err(AlgdError::Shape("comorphism must map A* to B*".into()));
    }
    if !phi.check().all() {
        return Err(AlgdError::NotBundleMorphism);
    }
    let n = a.base.nvars();
    let (kb, nb) = (b.rank(), b.base.nvars());
    let psi = |r: usize| ClassedSection { bundle: a.bundle.clone(), components: phi.matrix[r].clone() };
    let mut rep = Report::new("algebroid comorphism");

    let mut anchor_fail = None;
    'anchor: for r in 0..kb {
        let x = a.anchor_of(&psi(r));
        for u in 0..nb {
            let lhs = x.apply(&phi.base_map[u]);
            let rhs = pull(phi, &b.anchor[u][r]);
            if lhs != rhs {
                anchor_fail = Some(format!("ρ_A(Ψf{})(φ^{}) = {lhs} but φ^*(ρ_B(f{}) y{}) = {rhs}", r + 1, u + 1, r + 1, u + 1));
                break 'anchor;
            }
        }
    }
    rep.record("anchor", anchor_fail);

    let pairs = increasing_tuples(kb, 2);
    let fails = par::map(&pairs, |t| {
        let (j, k) = (t[0], t[1]);
        let mut lhs = vec![Poly::zero(n); a.rank()];
        for (m, c) in b.structure[j][k].iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let pc = pull(phi, c);
            for (l, e) in phi.matrix[m].iter().enumerate() {
                lhs[l] = &lhs[l] + &(&pc * e);
            }
        }
        let rhs = a.bracket(&psi(j), &psi(k)).expect("own sections").components;
        (lhs != rhs).then(|| format!("Ψ[f{}, f{}] = {} but [Ψf{}, Ψf{}] = {}", j + 1, k + 1, fmt_section(&lhs), j + 1, k + 1, fmt_section(&rhs)))
    });
    rep.record("bracket", fails.into_iter().flatten().next());
    Ok(rep)
}

/// A pair of algebroids on mutually dual bundles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BialgebroidData {
    pub a: AlgebroidData,
    pub astar: AlgebroidData,
}

impl BialgebroidData {
    pub fn new(a: AlgebroidData, astar: AlgebroidData) -> Result<Self, AlgdError> {
        if astar.bundle != a.bundle.dual() {
            return Err(AlgdError::Shape("second algebroid must live on the dual bundle".into()));
        }
        Ok(BialgebroidData { a, astar })
    }

    /// Differential of `A*` acting on multivectors of `A`.
    pub fn d_star(&self, p: &MultiVector) -> Result<MultiVector, AlgdError> {
        Ok(koszul(&self.astar, &p.transpose::<Co>())?.transpose::<Contra>())
    }
}

fn constituent_ok(a: &AlgebroidData) -> bool {
    check_classical(a).pass() && check_constraint(a).map(|r| r.pass()).unwrap_or(false)
}

/// `d_*⟦a, b⟧ = ⟦d_* a, b⟧ + (−1)^{|a|−1} ⟦a, d_* b⟧` on coordinate functions
/// and frame sections. Both sides are derivations in each argument, so
/// generators suffice.
pub fn check_bialgebroid(bd: &BialgebroidData) -> Result<Report, AlgdError> {
    if !constituent_ok(&bd.a) || !constituent_ok(&bd.astar) {
        return Err(AlgdError::ConstituentFails);
    }
    let a = &bd.a;
    let n = a.base.nvars();
    let mut gens: Vec<(String, MultiVector)> = Vec::new();
    for v in 0..n {
        let mut f = a.zero_multivector(0, Flavor::Strong);
        f.add_term(&[], Poly::var(n, v));
        gens.push((format!("x{}", v + 1), f));
    }
    for i in 0..a.rank() {
        let mut e = a.zero_multivector(1, Flavor::Strong);
        e.add_term(&[i], Poly::one(n));
        gens.push((format!("e{}", i + 1), e));
    }
    let pairs: Vec<(usize, usize)> = (0..gens.len()).flat_map(|i| (0..gens.len()).map(move |j| (i, j))).collect();
    let fails = par::map(&pairs, |&(i, j)| -> Result<Option<String>, AlgdError> {
        let (x, y) = (&gens[i].1, &gens[j].1);
        let lhs = if x.degree + y.degree == 0 { Comps::new() } else { bd.d_star(&gerstenhaber(a, x, y)?)?.comps().clone() };
        let t1 = gerstenhaber(a, &bd.d_star(x)?, y)?;
        let t2 = gerstenhaber(a, x, &bd.d_star(y)?)?;
        let rhs = if x.degree == 1 { t1.add(&t2)? } else { t1.sub(&t2)? };
        Ok((&lhs != rhs.comps()).then(|| format!("compatibility fails on ({}, {})", gens[i].0, gens[j].0)))
    });
    let mut first = None;
    for f in fails {
        if let Some(w) = f? {
            first.get_or_insert(w);
        }
    }
    let mut rep = Report::new("bialgebroid");
    rep.record("compatibility", first);
    Ok(rep)
}

/// Keeps the `W ∖ N` frame and reduces anchor and structure functions.
pub fn reduce_algebroid(a: &AlgebroidData) -> Result<AlgebroidData, AlgdError> {
    if !check_classical(a).pass() {
        return Err(AlgdError::ChecksFail("classical axioms".into()));
    }
    let rep = check_constraint(a)?;
    if let Some(v) = rep.first_failure() {
        return Err(AlgdError::ChecksFail(v.name.clone()));
    }
    let base = a.base;
    let keep = a.bundle.wobs_only_slots();
    let rows = base.reduced_vars();
    let anchor = rows
        .iter()
        .map(|&v| keep.iter().map(|&i| base.fn_reduce(&a.anchor[v][i])).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    let structure = keep
        .iter()
        .map(|&i| {
            keep.iter()
                .map(|&j| keep.iter().map(|&m| base.fn_reduce(&a.structure[i][j][m])).collect::<Result<Vec<_>, _>>())
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    AlgebroidData::new(a.bundle.reduce(), anchor, structure)
}

/// `[e_i, e_j] = Σ_m ε_{ijm} e_m`.
pub fn so3_constants() -> Vec<Vec<Vec<Rational>>> {
    let mut c = vec![vec![vec![Rational::from_integer(0.into()); 3]; 3]; 3];
    for (i, j, m) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
        c[i][j][m] = Rational::from_integer(1.into());
        c[j][i][m] = Rational::from_integer((-1).into());
    }
    c
}

/// so(3)-type constants with `[e_1, e_2] = e_3 + e_1`; the Jacobiator on
/// `(e_1, e_2, e_3)` becomes `e_2`.
pub fn broken_so3_constants() -> Vec<Vec<Vec<Rational>>> {
    let mut c = so3_constants();
    c[0][1][0] = Rational::from_integer(1.into());
    c[1][0][0] = Rational::from_integer((-1).into());
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calg::{ConLieAlgebraFD, ConVectorSpace};
    use crate::cartan::{de_rham, schouten};
    use crate::exact::q;

    fn p(s: &str, n: usize) -> Poly {
        Poly::parse(s, n).unwrap()
    }

    fn so3(classes: Vec<SlotClass>) -> AlgebroidData {
        AlgebroidData::point(classes, &so3_constants()).unwrap()
    }

    #[test]
    fn tangent_passes() {
        let a = AlgebroidData::tangent(ConSpace::new(3, 2, 1).unwrap());
        assert!(check_classical(&a).pass());
        assert!(check_constraint(&a).unwrap().pass());
        assert!(koszul_square_witness(&a).is_none());
    }

    #[test]
    fn so3_and_broken() {
        let a = so3(vec![SlotClass::WobsOnly; 3]);
        assert!(check_classical(&a).pass());
        assert!(koszul_square_witness(&a).is_none());
        let b = AlgebroidData::point(vec![SlotClass::WobsOnly; 3], &broken_so3_constants()).unwrap();
        let rep = check_classical(&b);
        let v = rep.get("jacobi").unwrap();
        assert!(!v.pass);
        assert_eq!(v.witness.as_deref(), Some("J(e1, e2, e3) = (1)*e2"));
        assert!(koszul_square_witness(&b).is_some());
        assert_eq!(check_constraint(&b), Err(AlgdError::ClassicalAxiomsFail));
    }

    #[test]
    fn antisymmetry_is_enforced() {
        let mut c = so3_constants();
        c[1][0][2] = q(1);
        assert_eq!(AlgebroidData::point(vec![SlotClass::WobsOnly; 3], &c), Err(AlgdError::NotAntisymmetric(1, 2)));
    }

    #[test]
    fn replaced_anchor_columns() {
        let m = ConSpace::new(3, 2, 1).unwrap();
        let mut a = AlgebroidData::tangent(m);
        for v in 0..3 {
            a.anchor[v][1] = Poly::zero(3);
        }
        a.anchor[0][1] = p("x3", 3);
        // x3∂1 points along the leaf, so the column is fine; [x3∂1, ∂3] = −∂1 breaks ρ.
        let rep = check_classical(&a);
        assert!(!rep.get("anchor_bracket").unwrap().pass);
        assert_eq!(check_constraint(&a), Err(AlgdError::ClassicalAxiomsFail));
        assert!(constraint_conditions(&a).unwrap().get("anchor").unwrap().pass);

        let mut b = AlgebroidData::tangent(m);
        b.anchor[0][0] = Poly::zero(3);
        b.anchor[1][0] = Poly::one(3);
        assert!(check_classical(&b).pass());
        let rep = check_constraint(&b).unwrap();
        assert!(!rep.get("anchor").unwrap().pass);
        assert!(rep.get("bracket").unwrap().pass);
    }

    #[test]
    fn koszul_matches_de_rham() {
        let m = ConSpace::new(3, 2, 1).unwrap();
        let a = AlgebroidData::tangent(m);
        let mut w = a.zero_form(1, Flavor::Strong);
        w.add_term(&[0], p("x2", 3));
        w.add_term(&[2], p("x1*x3^2", 3));
        assert_eq!(koszul(&a, &w).unwrap(), de_rham(&w).unwrap());
    }

    #[test]
    fn koszul_is_chevalley_eilenberg() {
        // d e^3 (e1, e2) = −e^3([e1, e2]) = −1.
        let a = so3(vec![SlotClass::WobsOnly; 3]);
        let mut e3 = a.zero_form(1, Flavor::Strong);
        e3.add_term(&[2], Poly::one(0));
        let d = koszul(&a, &e3).unwrap();
        assert_eq!(d.get(&[0, 1]), Poly::int(0, -1));
        assert!(koszul(&a, &d).unwrap().is_zero());
    }

    #[test]
    fn gerstenhaber_on_generators() {
        let m = ConSpace::plain(2);
        let mut a = AlgebroidData::tangent(m);
        a.anchor[0][1] = p("x1", 2);
        let f = p("x1^2*x2", 2);
        let mut fm = a.zero_multivector(0, Flavor::Strong);
        fm.add_term(&[], f.clone());
        for i in 0..2 {
            let mut e = a.zero_multivector(1, Flavor::Strong);
            e.add_term(&[i], Poly::one(2));
            assert_eq!(gerstenhaber(&a, &e, &fm).unwrap().get(&[]), a.anchor_apply(i, &f));
            assert_eq!(gerstenhaber(&a, &fm, &e).unwrap().get(&[]), -a.anchor_apply(i, &f));
        }
        let so = so3(vec![SlotClass::WobsOnly; 3]);
        let mut e1 = so.zero_multivector(1, Flavor::Strong);
        e1.add_term(&[0], Poly::one(0));
        let mut e2 = so.zero_multivector(1, Flavor::Strong);
        e2.add_term(&[1], Poly::one(0));
        let br = gerstenhaber(&so, &e1, &e2).unwrap();
        assert_eq!(br.get(&[2]), Poly::one(0));
        // Tangent case agrees with the Schouten bracket.
        let t = AlgebroidData::tangent(m);
        let mut pi = t.zero_multivector(2, Flavor::Strong);
        pi.add_term(&[0, 1], p("x1*x2", 2));
        assert_eq!(gerstenhaber(&t, &pi, &pi).unwrap(), schouten(&pi, &pi).unwrap());
    }

    #[test]
    fn morphisms() {
        let m = ConSpace::new(2, 1, 0).unwrap();
        let a = AlgebroidData::tangent(m);
        let id = BundleMorphism::identity(&a.bundle);
        assert!(check_morphism(&id, &a, &a).unwrap().pass());
        let idd = BundleMorphism::identity(&a.bundle.dual());
        assert!(check_comorphism(&idd, &a, &a).unwrap().pass());

        // Tangent map of a base map preserving C = {x2 = 0}.
        let phi = vec![p("x1 + x1*x2", 2), p("x2*x1 + x2", 2)];
        let jac: Vec<Vec<Poly>> = phi.iter().map(|f| (0..2).map(|c| f.partial(c)).collect()).collect();
        let tm = BundleMorphism::new(a.bundle.clone(), a.bundle.clone(), phi, jac).unwrap();
        assert!(tm.check().all());
        assert!(check_morphism(&tm, &a, &a).unwrap().pass());
    }

    #[test]
    fn swapped_columns_break_the_anchor() {
        let m = ConSpace::plain(2);
        let a = AlgebroidData::tangent(m);
        let n = 2;
        let swap = vec![vec![Poly::zero(n), Poly::one(n)], vec![Poly::one(n), Poly::zero(n)]];
        let base = vec![Poly::var(n, 0), Poly::var(n, 1)];
        let f = BundleMorphism::new(a.bundle.clone(), a.bundle.clone(), base, swap).unwrap();
        let rep = check_morphism(&f, &a, &a).unwrap();
        assert!(!rep.get("anchor").unwrap().pass);
        assert!(rep.get("anchor").unwrap().witness.is_some());
    }

    #[test]
    fn point_comorphism_is_lie_hom() {
        // Ψ: so(3) → so(3), a rotation of the frame (e1, e2, e3) ↦ (e2, e3, e1).
        let a = so3(vec![SlotClass::WobsOnly; 3]);
        let one = Poly::one(0);
        let z = Poly::zero(0);
        let mut mat = vec![vec![z.clone(); 3]; 3];
        mat[0][1] = one.clone();
        mat[1][2] = one.clone();
        mat[2][0] = one;
        let phi = BundleMorphism::new(a.bundle.dual(), a.bundle.dual(), vec![], mat.clone()).unwrap();
        assert!(check_comorphism(&phi, &a, &a).unwrap().pass());
        mat[2][0] = Poly::int(0, 2);
        let phi = BundleMorphism::new(a.bundle.dual(), a.bundle.dual(), vec![], mat).unwrap();
        assert!(!check_comorphism(&phi, &a, &a).unwrap().pass());
    }

    #[test]
    fn tangent_and_zero_dual_form_a_bialgebroid() {
        let m = ConSpace::new(2, 1, 0).unwrap();
        let a = AlgebroidData::tangent(m);
        let zero = AlgebroidData::bundle_of_lie_algebras(a.bundle.dual(), &vec![vec![vec![q(0); 2]; 2]; 2]).unwrap();
        let bd = BialgebroidData::new(a, zero).unwrap();
        assert!(check_bialgebroid(&bd).unwrap().pass());
    }

    #[test]
    fn lie_algebra_bundle_is_not_compatible_with_tangent() {
        let m = ConSpace::plain(3);
        let a = AlgebroidData::tangent(m);
        let dual = AlgebroidData::bundle_of_lie_algebras(a.bundle.dual(), &so3_constants()).unwrap();
        let bd = BialgebroidData::new(a, dual).unwrap();
        assert!(!check_bialgebroid(&bd).unwrap().pass());
    }

    #[test]
    fn reduction_of_tangent_and_point() {
        let m = ConSpace::new(4, 3, 1).unwrap();
        let r = reduce_algebroid(&AlgebroidData::tangent(m)).unwrap();
        assert_eq!(r, AlgebroidData::tangent(ConSpace::plain(2)));

        // so(3) with e1 null, e2 and e3 observable: the bracket must send N·W into N,
        // which fails since [e1, e2] = e3. Use the abelian-by-ideal variant instead.
        let classes = vec![SlotClass::Null, SlotClass::WobsOnly, SlotClass::WobsOnly, SlotClass::TotalOnly];
        let mut c = vec![vec![vec![q(0); 4]; 4]; 4];
        // [e2, e3] = e1 (lands in N), [e2, e1] = e1.
        c[1][2][0] = q(1);
        c[2][1][0] = q(-1);
        c[1][0][0] = q(1);
        c[0][1][0] = q(-1);
        let a = AlgebroidData::point(classes.clone(), &c).unwrap();
        assert!(check_classical(&a).pass());
        assert!(check_constraint(&a).unwrap().pass());
        let r = reduce_algebroid(&a).unwrap();
        assert_eq!(r.rank(), 2);
        assert!(r.structure.iter().flatten().flatten().all(Poly::is_zero));

        let space = ConVectorSpace::from_classes(&classes);
        let g = ConLieAlgebraFD::ungraded(space, c).unwrap();
        let gr = g.reduce().unwrap();
        assert_eq!(gr.space().dim(), r.rank());
        for i in 0..2 {
            for j in 0..2 {
                for m in 0..2 {
                    assert_eq!(Poly::constant(0, gr.structure()[i][j][m].clone()), r.structure[i][j][m]);
                }
            }
        }
    }
}
