//! Polynomial Cartan calculus on `ℝ^(d_T, d_W, d_N)`: vector fields, forms and
//! multivector fields in both flavors, and their brackets.

use std::collections::BTreeMap;
use std::marker::PhantomData;

use thiserror::Error;

use crate::alt;
use crate::cgeo::{ClassedSection, ConSpace, FnClass, GeoError, TrivBundle};
use crate::cindex::{increasing_tuples, tuple_class, Flavor, SlotClass};
use crate::exact::{qf, Rational};
use crate::poly::Poly;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CartanError {
    #[error("operands live on different spaces or bundles")]
    SpaceMismatch,
    #[error("insertion into a function")]
    DegreeZero,
    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),
    #[error("flavors differ")]
    FlavorMismatch,
    #[error("operation requires the (co)tangent bundle of the base")]
    NotTangent,
    #[error(transparent)]
    Geo(#[from] GeoError),
}

/// Sorted-tuple components with nonzero polynomial coefficients.
pub type Comps = BTreeMap<Vec<usize>, Poly>;

fn add_to(c: &mut Comps, idx: &[usize], f: Poly) {
    if f.is_zero() {
        return;
    }
    let Some((s, t)) = alt::sort_signed(idx) else { return };
    let f = if s < 0 { -f } else { f };
    let sum = match c.remove(&t) {
        Some(old) => &old + &f,
        None => f,
    };
    if !sum.is_zero() {
        c.insert(t, sum);
    }
}

fn add_comps(a: &Comps, b: &Comps) -> Comps {
    let mut out = a.clone();
    for (t, f) in b {
        add_to(&mut out, t, f.clone());
    }
    out
}

fn wedge_comps(a: &Comps, b: &Comps) -> Comps {
    let mut out = Comps::new();
    for (ta, fa) in a {
        for (tb, fb) in b {
            if let Some((s, t)) = alt::merge(ta, tb) {
                let f = fa * fb;
                add_to(&mut out, &t, if s < 0 { -f } else { f });
            }
        }
    }
    out
}

pub trait Variance: Clone + std::fmt::Debug + PartialEq + Eq {
    fn default_slots(space: &ConSpace) -> Vec<SlotClass>;
}

/// Covariant slots: differential forms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Co;
/// Contravariant slots: multivector fields.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contra;

impl Variance for Co {
    fn default_slots(space: &ConSpace) -> Vec<SlotClass> {
        space.cotangent_classes()
    }
}

impl Variance for Contra {
    fn default_slots(space: &ConSpace) -> Vec<SlotClass> {
        space.tangent_classes()
    }
}

/// Homogeneous alternating tensor field. The slot classes default to the
/// (co)tangent bundle but may describe any trivial bundle, which is how
/// algebroid forms and multivectors are represented.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alt<V: Variance> {
    pub space: ConSpace,
    pub slots: Vec<SlotClass>,
    pub degree: usize,
    pub flavor: Flavor,
    comps: Comps,
    _v: PhantomData<V>,
}

pub type KForm = Alt<Co>;
pub type MultiVector = Alt<Contra>;

impl<V: Variance> Alt<V> {
    pub fn zero(space: ConSpace, degree: usize, flavor: Flavor) -> Self {
        Self::zero_on(space, V::default_slots(&space), degree, flavor)
    }

    pub fn zero_on(space: ConSpace, slots: Vec<SlotClass>, degree: usize, flavor: Flavor) -> Self {
        Alt { space, slots, degree, flavor, comps: Comps::new(), _v: PhantomData }
    }

    /// A degree-0 element.
    pub fn function(space: ConSpace, flavor: Flavor, f: Poly) -> Self {
        let mut a = Self::zero(space, 0, flavor);
        a.add_term(&[], f);
        a
    }

    pub fn from_terms(
        space: ConSpace,
        degree: usize,
        flavor: Flavor,
        terms: impl IntoIterator<Item = (Vec<usize>, Poly)>,
    ) -> Result<Self, CartanError> {
        let mut a = Self::zero(space, degree, flavor);
        for (t, f) in terms {
            a.try_add_term(&t, f)?;
        }
        Ok(a)
    }

    pub fn from_comps(space: ConSpace, slots: Vec<SlotClass>, degree: usize, flavor: Flavor, comps: Comps) -> Self {
        let mut a = Self::zero_on(space, slots, degree, flavor);
        for (t, f) in comps {
            add_to(&mut a.comps, &t, f);
        }
        a
    }

    pub fn try_add_term(&mut self, idx: &[usize], f: Poly) -> Result<(), CartanError> {
        if idx.len() != self.degree || idx.iter().any(|&i| i >= self.slots.len()) {
            return Err(CartanError::DegreeMismatch(format!("tuple {idx:?} for degree {}", self.degree)));
        }
        self.space.check_poly(&f)?;
        add_to(&mut self.comps, idx, f);
        Ok(())
    }

    /// Adds `f` to the coefficient of `e_idx` (any order; sign handled).
    pub fn add_term(&mut self, idx: &[usize], f: Poly) {
        self.try_add_term(idx, f).expect("valid term");
    }

    pub fn comps(&self) -> &Comps {
        &self.comps
    }

    pub fn get(&self, sorted: &[usize]) -> Poly {
        self.comps.get(sorted).cloned().unwrap_or_else(|| Poly::zero(self.space.nvars()))
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn nslots(&self) -> usize {
        self.slots.len()
    }

    fn with_comps(&self, degree: usize, comps: Comps) -> Self {
        Alt { space: self.space, slots: self.slots.clone(), degree, flavor: self.flavor, comps, _v: PhantomData }
    }

    fn compatible(&self, other: &Self) -> Result<(), CartanError> {
        if self.space != other.space || self.slots != other.slots {
            return Err(CartanError::SpaceMismatch);
        }
        if self.flavor != other.flavor {
            return Err(CartanError::FlavorMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, CartanError> {
        self.compatible(other)?;
        if self.degree != other.degree {
            return Err(CartanError::DegreeMismatch("sum of different degrees".into()));
        }
        Ok(self.with_comps(self.degree, add_comps(&self.comps, &other.comps)))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, CartanError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.with_comps(self.degree, self.comps.iter().map(|(t, f)| (t.clone(), -f)).collect())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let comps = self.comps.iter().map(|(t, f)| (t.clone(), f.scale(c))).filter(|(_, f)| !f.is_zero()).collect();
        self.with_comps(self.degree, comps)
    }

    pub fn scale_fn(&self, g: &Poly) -> Self {
        let comps = self.comps.iter().map(|(t, f)| (t.clone(), f * g)).filter(|(_, f)| !f.is_zero()).collect();
        self.with_comps(self.degree, comps)
    }

    pub fn wedge(&self, other: &Self) -> Result<Self, CartanError> {
        self.compatible(other)?;
        Ok(self.with_comps(self.degree + other.degree, wedge_comps(&self.comps, &other.comps)))
    }

    /// Tuple class from the slot classes and flavor, then the componentwise
    /// coefficient rule.
    pub fn class(&self) -> FnClass {
        let mut in_w = true;
        let mut in_n = true;
        for (t, f) in &self.comps {
            let k = self.space.fn_class(f).expect("checked");
            match tuple_class(&self.slots, t, self.flavor) {
                SlotClass::Null => {}
                SlotClass::WobsOnly => {
                    in_w &= k.in_w;
                    in_n &= k.in_n;
                }
                SlotClass::TotalOnly => {
                    in_w &= k.in_n;
                    in_n &= k.in_n;
                }
            }
        }
        FnClass { in_w, in_n }
    }

    /// First component keeping the element out of the W-component, 1-based.
    pub fn w_witness(&self) -> Option<String> {
        self.comps.iter().find_map(|(t, f)| {
            let k = self.space.fn_class(f).expect("checked");
            let ok = match tuple_class(&self.slots, t, self.flavor) {
                SlotClass::Null => true,
                SlotClass::WobsOnly => k.in_w,
                SlotClass::TotalOnly => k.in_n,
            };
            let idx: Vec<String> = t.iter().map(|i| (i + 1).to_string()).collect();
            (!ok).then(|| format!("component [{}] = {f}", idx.join(",")))
        })
    }

    /// Keeps tuples made of `W ∖ N` slots and reduces their coefficients.
    pub fn reduce(&self) -> Result<Self, CartanError> {
        if !self.class().in_w {
            return Err(GeoError::NotInWobs.into());
        }
        let keep: Vec<usize> = (0..self.slots.len()).filter(|&i| self.slots[i] == SlotClass::WobsOnly).collect();
        let pos: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let red = self.space.reduced();
        let mut comps = Comps::new();
        for (t, f) in &self.comps {
            if t.iter().all(|i| pos.contains_key(i)) {
                let nt: Vec<usize> = t.iter().map(|i| pos[i]).collect();
                add_to(&mut comps, &nt, self.space.fn_reduce(f)?);
            }
        }
        Ok(Alt {
            space: red,
            slots: vec![SlotClass::WobsOnly; keep.len()],
            degree: self.degree,
            flavor: self.flavor,
            comps,
            _v: PhantomData,
        })
    }

    /// Same components, read with the opposite variance.
    pub fn transpose<W: Variance>(&self) -> Alt<W> {
        Alt { space: self.space, slots: self.slots.clone(), degree: self.degree, flavor: self.flavor, comps: self.comps.clone(), _v: PhantomData }
    }

    fn is_default_bundle(&self) -> bool {
        self.slots == V::default_slots(&self.space)
    }
}

/// Vector field `Σ X^i ∂_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VectorField {
    pub space: ConSpace,
    pub comps: Vec<Poly>,
}

impl VectorField {
    pub fn new(space: ConSpace, comps: Vec<Poly>) -> Result<Self, CartanError> {
        if comps.len() != space.nvars() {
            return Err(CartanError::DegreeMismatch("one component per coordinate".into()));
        }
        for c in &comps {
            space.check_poly(c)?;
        }
        Ok(VectorField { space, comps })
    }

    pub fn zero(space: ConSpace) -> Self {
        VectorField { space, comps: vec![Poly::zero(space.nvars()); space.nvars()] }
    }

    pub fn coord(space: ConSpace, i: usize) -> Self {
        let mut v = Self::zero(space);
        v.comps[i] = Poly::one(space.nvars());
        v
    }

    pub fn as_section(&self) -> ClassedSection {
        ClassedSection { bundle: TrivBundle::tangent(self.space), components: self.comps.clone() }
    }

    pub fn class(&self) -> FnClass {
        self.as_section().class()
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Poly::is_zero)
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        VectorField { space: self.space, comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        VectorField { space: self.space, comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a - b).collect() }
    }

    pub fn scale_fn(&self, f: &Poly) -> VectorField {
        VectorField { space: self.space, comps: self.comps.iter().map(|a| a * f).collect() }
    }

    /// `X(f) = Σ X^i ∂_i f`.
    pub fn apply(&self, f: &Poly) -> Poly {
        self.comps.iter().enumerate().fold(Poly::zero(self.space.nvars()), |acc, (i, x)| {
            if x.is_zero() {
                acc
            } else {
                &acc + &(x * &f.partial(i))
            }
        })
    }

    pub fn to_mv(&self, flavor: Flavor) -> MultiVector {
        let mut m = MultiVector::zero(self.space, 1, flavor);
        for (i, c) in self.comps.iter().enumerate() {
            m.add_term(&[i], c.clone());
        }
        m
    }

    pub fn from_mv(m: &MultiVector) -> Result<Self, CartanError> {
        if m.degree != 1 {
            return Err(CartanError::DegreeMismatch("vector fields have degree 1".into()));
        }
        let mut v = Self::zero(m.space);
        for (t, f) in m.comps() {
            v.comps[t[0]] = f.clone();
        }
        Ok(v)
    }

    pub fn reduce(&self) -> Result<VectorField, CartanError> {
        let s = self.as_section().reduce()?;
        Ok(VectorField { space: self.space.reduced(), comps: s.components })
    }
}

/// `[X, Y]^j = Σ_i (X^i ∂_i Y^j − Y^i ∂_i X^j)`.
pub fn vf_bracket(x: &VectorField, y: &VectorField) -> Result<VectorField, CartanError> {
    if x.space != y.space {
        return Err(CartanError::SpaceMismatch);
    }
    let comps = (0..x.space.nvars()).map(|j| &x.apply(&y.comps[j]) - &y.apply(&x.comps[j])).collect();
    Ok(VectorField { space: x.space, comps })
}

fn require_cotangent(w: &KForm) -> Result<(), CartanError> {
    if w.is_default_bundle() {
        Ok(())
    } else {
        Err(CartanError::NotTangent)
    }
}

/// `dω = Σ_i Σ_I ∂_i ω_I dx^i ∧ dx^I`.
pub fn de_rham(w: &KForm) -> Result<KForm, CartanError> {
    require_cotangent(w)?;
    let mut comps = Comps::new();
    for (t, f) in w.comps() {
        for i in 0..w.space.nvars() {
            let mut idx = vec![i];
            idx.extend(t);
            add_to(&mut comps, &idx, f.partial(i));
        }
    }
    Ok(w.with_comps(w.degree + 1, comps))
}

/// `i_X ω = ω(X, …)`.
pub fn insertion(x: &VectorField, w: &KForm) -> Result<KForm, CartanError> {
    require_cotangent(w)?;
    if x.space != w.space {
        return Err(CartanError::SpaceMismatch);
    }
    if w.degree == 0 {
        return Err(CartanError::DegreeZero);
    }
    let mut comps = Comps::new();
    for (t, f) in w.comps() {
        for p in 0..t.len() {
            let coef = &x.comps[t[p]] * f;
            let coef = if p % 2 == 1 { -coef } else { coef };
            add_to(&mut comps, &alt::without(t, p), coef);
        }
    }
    Ok(w.with_comps(w.degree - 1, comps))
}

/// Lie derivative computed directly: `L_X(f dx^I) = X(f) dx^I + f Σ_p … d(X^{i_p}) …`.
pub fn lie_derivative(x: &VectorField, w: &KForm) -> Result<KForm, CartanError> {
    require_cotangent(w)?;
    if x.space != w.space {
        return Err(CartanError::SpaceMismatch);
    }
    let mut comps = Comps::new();
    for (t, f) in w.comps() {
        add_to(&mut comps, t, x.apply(f));
        for p in 0..t.len() {
            for j in 0..w.space.nvars() {
                let dx = x.comps[t[p]].partial(j);
                if dx.is_zero() {
                    continue;
                }
                let mut idx = t.clone();
                idx[p] = j;
                add_to(&mut comps, &idx, f * &dx);
            }
        }
    }
    Ok(w.with_comps(w.degree, comps))
}

pub fn lie_derivative_fn(x: &VectorField, f: &Poly) -> Poly {
    x.apply(f)
}

/// Bracket data of an anchored bundle with constant frame `e_i`:
/// `[e_i, e_j] = Σ_m c^m_ij e_m` and anchor `ρ(e_i)`.
pub trait Anchored {
    fn rank(&self) -> usize;
    fn nvars(&self) -> usize;
    /// `ρ(e_i)(f)`.
    fn anchor_apply(&self, i: usize, f: &Poly) -> Poly;
    /// Coefficients of `[e_i, e_j]`.
    fn structure(&self, i: usize, j: usize) -> Vec<Poly>;

    /// `[f e_i, g e_j] = fg[e_i, e_j] + f ρ(e_i)(g) e_j − g ρ(e_j)(f) e_i`.
    fn bracket_monomials(&self, i: usize, f: &Poly, j: usize, g: &Poly) -> Vec<Poly> {
        let fg = f * g;
        let mut out: Vec<Poly> = self.structure(i, j).iter().map(|c| c * &fg).collect();
        out[j] = &out[j] + &(f * &self.anchor_apply(i, g));
        out[i] = &out[i] - &(g * &self.anchor_apply(j, f));
        out
    }
}

/// The tangent bundle: `ρ = id`, `[∂_i, ∂_j] = 0`.
pub struct Tangent(pub usize);

impl Anchored for Tangent {
    fn rank(&self) -> usize {
        self.0
    }
    fn nvars(&self) -> usize {
        self.0
    }
    fn anchor_apply(&self, i: usize, f: &Poly) -> Poly {
        f.partial(i)
    }
    fn structure(&self, _: usize, _: usize) -> Vec<Poly> {
        vec![Poly::zero(self.0); self.0]
    }
}

/// Gerstenhaber bracket on `Λ•` of an anchored bundle, from the expansion
/// `⟦X_0∧…∧X_k, Y_0∧…∧Y_l⟧ = Σ (−1)^{a+b} [X_a, Y_b] ∧ X_0…X̂_a… ∧ Y_0…Ŷ_b…`
/// applied to monomials `f e_I = (f e_{i_0}) ∧ e_{i_1} ∧ …`, with
/// `⟦P, g⟧ = Σ_a (−1)^{k−a} ρ(X_a)(g) X_0…X̂_a…X_k` and graded antisymmetry
/// for a function in the first slot.
pub fn gerstenhaber_comps(data: &dyn Anchored, p: &Comps, dp: usize, qc: &Comps, dq: usize) -> Comps {
    let n = data.nvars();
    let mut out = Comps::new();
    match (dp, dq) {
        (0, 0) => {}
        (_, 0) => {
            for (ti, f) in p {
                let g = qc.get(&Vec::new()).cloned().unwrap_or_else(|| Poly::zero(n));
                let k = ti.len() as i64 - 1;
                for a in 0..ti.len() {
                    let coef = f * &data.anchor_apply(ti[a], &g);
                    let s = alt::sign_pow(k - a as i64);
                    add_to(&mut out, &alt::without(ti, a), if s < 0 { -coef } else { coef });
                }
            }
        }
        (0, _) => {
            let back = gerstenhaber_comps(data, qc, dq, p, dp);
            // ⟦f, Q⟧ = −(−1)^{(|f|−1)(|Q|−1)} ⟦Q, f⟧ with |f| = 0.
            let s = -alt::sign_pow(-(dq as i64 - 1));
            for (t, f) in back {
                add_to(&mut out, &t, if s < 0 { -f } else { f });
            }
        }
        _ => {
            let one = Poly::one(n);
            for (ti, f) in p {
                for (tj, g) in qc {
                    for a in 0..ti.len() {
                        for b in 0..tj.len() {
                            let xa = if a == 0 { f } else { &one };
                            let yb = if b == 0 { g } else { &one };
                            let br = data.bracket_monomials(ti[a], xa, tj[b], yb);
                            let mut rest = if a == 0 { one.clone() } else { f.clone() };
                            if b != 0 {
                                rest = &rest * g;
                            }
                            let ri = alt::without(ti, a);
                            let rj = alt::without(tj, b);
                            let Some((s0, tail)) = alt::merge(&ri, &rj) else { continue };
                            let sign = alt::sign_pow((a + b) as i64) * s0;
                            for (m, c) in br.iter().enumerate() {
                                if c.is_zero() {
                                    continue;
                                }
                                let Some((s1, t)) = alt::merge(&[m], &tail) else { continue };
                                let coef = c * &rest;
                                add_to(&mut out, &t, if sign * s1 < 0 { -coef } else { coef });
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Schouten bracket of multivector fields.
pub fn schouten(p: &MultiVector, qv: &MultiVector) -> Result<MultiVector, CartanError> {
    p.compatible(qv)?;
    if !p.is_default_bundle() {
        return Err(CartanError::NotTangent);
    }
    let comps = gerstenhaber_comps(&Tangent(p.space.nvars()), p.comps(), p.degree, qv.comps(), qv.degree);
    let degree = (p.degree + qv.degree).saturating_sub(1);
    if p.degree + qv.degree == 0 {
        return Ok(p.with_comps(0, Comps::new()));
    }
    Ok(p.with_comps(degree, comps))
}

/// `⟦X + α, Y + β⟧ = ([X, Y], L_X β − L_Y α + ½ d(α(Y) − β(X)))`.
pub fn courant(x: &VectorField, a: &KForm, y: &VectorField, b: &KForm) -> Result<(VectorField, KForm), CartanError> {
    if a.degree != 1 || b.degree != 1 {
        return Err(CartanError::DegreeMismatch("Courant bracket takes 1-forms".into()));
    }
    if a.flavor != Flavor::Strong || b.flavor != Flavor::Strong {
        return Err(CartanError::FlavorMismatch);
    }
    let xy = vf_bracket(x, y)?;
    let ay = insertion(y, a)?;
    let bx = insertion(x, b)?;
    let diff = ay.sub(&bx)?;
    let half = de_rham(&diff)?.scale(&qf(1, 2));
    let form = lie_derivative(x, b)?.sub(&lie_derivative(y, a)?)?.add(&half)?;
    Ok((xy, form))
}

/// Endomorphism field: `A(∂_j) = Σ_i matrix[i][j] ∂_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EndField {
    pub space: ConSpace,
    pub matrix: Vec<Vec<Poly>>,
}

impl EndField {
    pub fn new(space: ConSpace, matrix: Vec<Vec<Poly>>) -> Result<Self, CartanError> {
        let n = space.nvars();
        if matrix.len() != n || matrix.iter().any(|r| r.len() != n) {
            return Err(CartanError::DegreeMismatch("endomorphism must be d_T × d_T".into()));
        }
        for f in matrix.iter().flatten() {
            space.check_poly(f)?;
        }
        Ok(EndField { space, matrix })
    }

    pub fn identity(space: ConSpace) -> Self {
        let n = space.nvars();
        let matrix = (0..n).map(|i| (0..n).map(|j| if i == j { Poly::one(n) } else { Poly::zero(n) }).collect()).collect();
        EndField { space, matrix }
    }

    pub fn apply(&self, x: &VectorField) -> VectorField {
        let n = self.space.nvars();
        let comps = (0..n)
            .map(|i| (0..n).fold(Poly::zero(n), |acc, j| &acc + &(&self.matrix[i][j] * &x.comps[j])))
            .collect();
        VectorField { space: self.space, comps }
    }

    pub fn compose(&self, other: &EndField) -> EndField {
        let n = self.space.nvars();
        let matrix = (0..n)
            .map(|i| (0..n).map(|j| (0..n).fold(Poly::zero(n), |acc, k| &acc + &(&self.matrix[i][k] * &other.matrix[k][j]))).collect())
            .collect();
        EndField { space: self.space, matrix }
    }

    /// Section of `End(TM)`, slot `(r, c)` at `r·d_T + c`.
    pub fn as_section(&self) -> ClassedSection {
        let tm = TrivBundle::tangent(self.space);
        ClassedSection { bundle: tm.hom(&tm).expect("same base"), components: self.matrix.iter().flatten().cloned().collect() }
    }

    pub fn class(&self) -> FnClass {
        self.as_section().class()
    }

    /// The `W ∖ N` block with reduced entries.
    pub fn reduce(&self) -> Result<EndField, CartanError> {
        if !self.class().in_w {
            return Err(GeoError::NotInWobs.into());
        }
        let keep = self.space.reduced_vars();
        let matrix = keep
            .iter()
            .map(|&r| keep.iter().map(|&c| self.space.fn_reduce(&self.matrix[r][c])).collect::<Result<Vec<_>, _>>())
            .collect::<Result<_, _>>()?;
        Ok(EndField { space: self.space.reduced(), matrix })
    }
}

/// `N_A(X, Y) = [AX, AY] − A[AX, Y] − A[X, AY] + A²[X, Y]`.
pub fn nijenhuis_on(a: &EndField, x: &VectorField, y: &VectorField) -> Result<VectorField, CartanError> {
    let (ax, ay) = (a.apply(x), a.apply(y));
    let t1 = vf_bracket(&ax, &ay)?;
    let t2 = a.apply(&vf_bracket(&ax, y)?);
    let t3 = a.apply(&vf_bracket(x, &ay)?);
    let t4 = a.apply(&a.apply(&vf_bracket(x, y)?));
    Ok(t1.sub(&t2).sub(&t3).add(&t4))
}

/// Torsion on coordinate fields, `(i, j) ↦ N_A(∂_i, ∂_j)` for `i < j`.
pub fn nijenhuis(a: &EndField) -> BTreeMap<(usize, usize), VectorField> {
    let n = a.space.nvars();
    let mut out = BTreeMap::new();
    for t in increasing_tuples(n, 2) {
        let (i, j) = (t[0], t[1]);
        let v = nijenhuis_on(a, &VectorField::coord(a.space, i), &VectorField::coord(a.space, j)).expect("same space");
        out.insert((i, j), v);
    }
    out
}

pub fn is_nijenhuis(a: &EndField) -> bool {
    nijenhuis(a).values().all(VectorField::is_zero)
}

/// `A² = −id`.
pub fn is_almost_complex(a: &EndField) -> bool {
    let sq = a.compose(a);
    let n = a.space.nvars();
    (0..n).all(|i| (0..n).all(|j| sq.matrix[i][j] == if i == j { Poly::int(n, -1) } else { Poly::zero(n) }))
}

/// Coefficient matrix `π^{ij}` (antisymmetric) of a bivector.
pub fn bivector_matrix(pi: &MultiVector) -> Vec<Vec<Poly>> {
    let n = pi.nslots();
    let nv = pi.space.nvars();
    let mut m = vec![vec![Poly::zero(nv); n]; n];
    for (t, f) in pi.comps() {
        if t.len() == 2 {
            m[t[0]][t[1]] = f.clone();
            m[t[1]][t[0]] = -f;
        }
    }
    m
}

/// Coefficient matrix `ω_{ij}` (antisymmetric) of a 2-form.
pub fn two_form_matrix(w: &KForm) -> Vec<Vec<Poly>> {
    bivector_matrix(&w.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(t: usize, w: usize, n: usize) -> ConSpace {
        ConSpace::new(t, w, n).unwrap()
    }

    fn p(s: &str, n: usize) -> Poly {
        Poly::parse(s, n).unwrap()
    }

    fn vf(space: ConSpace, comps: &[&str]) -> VectorField {
        VectorField::new(space, comps.iter().map(|c| p(c, space.nvars())).collect()).unwrap()
    }

    fn form(space: ConSpace, flavor: Flavor, degree: usize, terms: &[(&[usize], &str)]) -> KForm {
        KForm::from_terms(space, degree, flavor, terms.iter().map(|(t, c)| (t.to_vec(), p(c, space.nvars())))).unwrap()
    }

    fn mv(space: ConSpace, flavor: Flavor, degree: usize, terms: &[(&[usize], &str)]) -> MultiVector {
        MultiVector::from_terms(space, degree, flavor, terms.iter().map(|(t, c)| (t.to_vec(), p(c, space.nvars())))).unwrap()
    }

    #[test]
    fn w_witness_names_the_component() {
        let m = sp(4, 3, 1);
        let bad = mv(m, Flavor::Strong, 2, &[(&[1, 2], "x1"), (&[0, 3], "1")]);
        assert!(!bad.class().in_w);
        assert_eq!(bad.w_witness().as_deref(), Some("component [2,3] = x1"));
        let good = mv(m, Flavor::Strong, 2, &[(&[1, 2], "1"), (&[0, 3], "1")]);
        assert!(good.class().in_w && good.w_witness().is_none());
    }

    #[test]
    fn bracket_examples() {
        let m = ConSpace::plain(2);
        let d1 = vf(m, &["1", "0"]);
        let x = vf(m, &["0", "x1"]);
        assert_eq!(vf_bracket(&d1, &x).unwrap(), vf(m, &["0", "1"]));
        assert!(vf_bracket(&x, &x).unwrap().is_zero());
        assert_eq!(vf_bracket(&d1, &VectorField::zero(ConSpace::plain(3))), Err(CartanError::SpaceMismatch));
    }

    #[test]
    fn form_class_examples() {
        let m = sp(2, 1, 1);
        let a = form(m, Flavor::Tensor, 1, &[(&[1], "x1")]);
        assert!(a.class().in_n);
        let v = form(m, Flavor::Tensor, 2, &[(&[0, 1], "1")]);
        assert_eq!(v.class(), FnClass { in_w: false, in_n: false });
        let v = form(m, Flavor::Strong, 2, &[(&[0, 1], "1")]);
        assert!(v.class().in_n);
    }

    #[test]
    fn de_rham_examples() {
        let m = sp(2, 1, 1);
        let a = form(m, Flavor::Tensor, 1, &[(&[1], "x1")]);
        let da = de_rham(&a).unwrap();
        assert_eq!(da, form(m, Flavor::Tensor, 2, &[(&[0, 1], "1")]));
        assert!(!da.class().in_n);
        let f = KForm::function(ConSpace::plain(2), Flavor::Strong, p("x1^2*x2", 2));
        assert_eq!(de_rham(&f).unwrap(), form(ConSpace::plain(2), Flavor::Strong, 1, &[(&[0], "2*x1*x2"), (&[1], "x1^2")]));
    }

    #[test]
    fn insertion_and_lie_examples() {
        let m = ConSpace::plain(2);
        let v = form(m, Flavor::Strong, 2, &[(&[0, 1], "1")]);
        assert_eq!(insertion(&VectorField::coord(m, 0), &v).unwrap(), form(m, Flavor::Strong, 1, &[(&[1], "1")]));
        let a = form(m, Flavor::Strong, 1, &[(&[0], "x1")]);
        assert_eq!(lie_derivative(&VectorField::coord(m, 0), &a).unwrap(), form(m, Flavor::Strong, 1, &[(&[0], "1")]));
        let f = KForm::function(m, Flavor::Strong, p("x1", 2));
        assert_eq!(insertion(&VectorField::coord(m, 0), &f), Err(CartanError::DegreeZero));
    }

    #[test]
    fn magic_formula_small() {
        let m = ConSpace::plain(3);
        let x = vf(m, &["x2", "x1*x3", "1"]);
        let w = form(m, Flavor::Strong, 2, &[(&[0, 1], "x3^2"), (&[1, 2], "x1*x2")]);
        let lhs = lie_derivative(&x, &w).unwrap();
        let rhs = insertion(&x, &de_rham(&w).unwrap()).unwrap().add(&de_rham(&insertion(&x, &w).unwrap()).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn schouten_examples() {
        let m = ConSpace::plain(2);
        let pi = mv(m, Flavor::Strong, 2, &[(&[0, 1], "1")]);
        let x1 = MultiVector::function(m, Flavor::Strong, p("x1", 2));
        assert_eq!(schouten(&pi, &x1).unwrap(), mv(m, Flavor::Strong, 1, &[(&[1], "-1")]));
        assert!(schouten(&pi, &pi).unwrap().is_zero());
        let x = vf(m, &["x2", "x1^2"]);
        let y = vf(m, &["1", "x1*x2"]);
        let s = schouten(&x.to_mv(Flavor::Strong), &y.to_mv(Flavor::Strong)).unwrap();
        assert_eq!(VectorField::from_mv(&s).unwrap(), vf_bracket(&x, &y).unwrap());
        let f = MultiVector::function(m, Flavor::Strong, p("x1*x2^2", 2));
        let xf = schouten(&x.to_mv(Flavor::Strong), &f).unwrap();
        assert_eq!(xf.get(&[]), x.apply(&p("x1*x2^2", 2)));
        let fx = schouten(&f, &x.to_mv(Flavor::Strong)).unwrap();
        assert_eq!(fx.get(&[]), -x.apply(&p("x1*x2^2", 2)));
    }

    #[test]
    fn courant_examples() {
        let m = ConSpace::plain(2);
        let d1 = VectorField::coord(m, 0);
        let zero_v = VectorField::zero(m);
        let dx1 = form(m, Flavor::Strong, 1, &[(&[0], "1")]);
        let zero_f = KForm::zero(m, 1, Flavor::Strong);
        let (v, f) = courant(&d1, &zero_f, &zero_v, &dx1).unwrap();
        assert!(v.is_zero() && f.is_zero());
        let x = vf(m, &["x2", "0"]);
        let y = vf(m, &["0", "x1"]);
        let (v, f) = courant(&x, &zero_f, &y, &zero_f).unwrap();
        assert_eq!(v, vf_bracket(&x, &y).unwrap());
        assert!(f.is_zero());
        let t = form(m, Flavor::Tensor, 1, &[(&[0], "1")]);
        assert_eq!(courant(&x, &t, &y, &t).map(|_| ()), Err(CartanError::FlavorMismatch));
    }

    #[test]
    fn nijenhuis_examples() {
        let m = ConSpace::plain(2);
        let c = EndField::new(m, vec![vec![p("2", 2), p("1", 2)], vec![p("0", 2), p("-3", 2)]]).unwrap();
        assert!(is_nijenhuis(&c));
        let j = EndField::new(m, vec![vec![p("0", 2), p("-1", 2)], vec![p("1", 2), p("0", 2)]]).unwrap();
        assert!(is_almost_complex(&j) && is_nijenhuis(&j));
        assert!(!is_almost_complex(&c));
    }

    #[test]
    fn nijenhuis_term_by_term() {
        // A = diag(x1, 0): A∂1 = x1∂1, A∂2 = 0, so only −A[A∂1, ∂2] and the
        // [A∂1, A∂2] term could contribute, and both vanish.
        let m = ConSpace::plain(2);
        let a = EndField::new(m, vec![vec![p("x1", 2), p("0", 2)], vec![p("0", 2), p("0", 2)]]).unwrap();
        let t = nijenhuis(&a);
        assert!(t[&(0, 1)].is_zero());
        // A = [[0, x1], [0, 0]]: A∂1 = 0, A∂2 = x1∂1.
        // N(∂1, ∂2) = −A[∂1, x1∂1] = −A∂1 = 0; check against the direct expansion.
        let b = EndField::new(m, vec![vec![p("0", 2), p("x1", 2)], vec![p("0", 2), p("0", 2)]]).unwrap();
        let d1 = VectorField::coord(m, 0);
        let d2 = VectorField::coord(m, 1);
        let bd2 = vf(m, &["x1", "0"]);
        let expected = vf_bracket(&VectorField::zero(m), &bd2)
            .unwrap()
            .sub(&b.apply(&vf_bracket(&VectorField::zero(m), &d2).unwrap()))
            .sub(&b.apply(&vf_bracket(&d1, &bd2).unwrap()));
        assert_eq!(nijenhuis(&b)[&(0, 1)], expected);
        assert!(nijenhuis(&b)[&(0, 1)].is_zero());
        // A = [[x2, 0], [0, 0]]: N(∂1, ∂2) = −A[x2∂1, ∂2] = −A(−∂1) = x2∂1.
        let c = EndField::new(m, vec![vec![p("x2", 2), p("0", 2)], vec![p("0", 2), p("0", 2)]]).unwrap();
        assert_eq!(nijenhuis(&c)[&(0, 1)], vf(m, &["x2", "0"]));
    }

    #[test]
    fn reduction_examples() {
        let m = sp(3, 2, 1);
        let dx2 = form(m, Flavor::Strong, 1, &[(&[1], "1")]);
        assert_eq!(dx2.reduce().unwrap(), form(ConSpace::plain(1), Flavor::Strong, 1, &[(&[0], "1")]));
        let null = form(m, Flavor::Strong, 1, &[(&[1], "x3*x1"), (&[2], "x1")]);
        assert!(null.class().in_n);
        assert!(null.reduce().unwrap().is_zero());
        let bad = form(m, Flavor::Strong, 1, &[(&[1], "x1")]);
        assert_eq!(bad.reduce(), Err(CartanError::Geo(GeoError::NotInWobs)));
    }
}
