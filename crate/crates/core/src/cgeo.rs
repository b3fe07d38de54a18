//! The flat constraint manifold `ℝ^(d_T, d_W, d_N)`, trivial constraint
//! bundles with their flat connection, sections, bundle morphisms and
//! reduction.
//!
//! `C = {x_{d_W+1} = … = x_{d_T} = 0}` and the leaves of `D` are spanned by
//! `∂_1 … ∂_{d_N}`. Variables and slots are 0-based in the API.

use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::cindex::{ConDim, ConIndexSet, Flavor, SlotClass};
use crate::exact::Rational;
use crate::poly::Poly;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeoError {
    #[error("polynomial has {found} variables, expected {expected}")]
    VarMismatch { expected: usize, found: usize },
    #[error("object is not in the W-component")]
    NotInWobs,
    #[error("bundles live over different bases")]
    BaseMismatch,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("dimensions must satisfy d_N ≤ d_W ≤ d_T")]
    BadDims,
}

/// Membership of a function or section in the W- and N-components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FnClass {
    pub in_w: bool,
    pub in_n: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ConSpace {
    pub dim: ConDim,
}

impl ConSpace {
    pub fn new(t: usize, w: usize, n: usize) -> Result<ConSpace, GeoError> {
        ConDim::new(t, w, n).map(|dim| ConSpace { dim }).ok_or(GeoError::BadDims)
    }

    /// Plain `ℝ^d` (every function observable, nothing null).
    pub fn plain(d: usize) -> ConSpace {
        ConSpace { dim: ConDim { t: d, w: d, n: 0 } }
    }

    pub fn nvars(&self) -> usize {
        self.dim.t
    }

    pub fn red_dim(&self) -> usize {
        self.dim.red()
    }

    /// The reduced space `ℝ^{d_W − d_N}`.
    pub fn reduced(&self) -> ConSpace {
        ConSpace::plain(self.red_dim())
    }

    /// Variables cutting out `C`.
    pub fn normal_vars(&self) -> Vec<usize> {
        (self.dim.w..self.dim.t).collect()
    }

    /// Leaf directions of `D`.
    pub fn leaf_vars(&self) -> Vec<usize> {
        (0..self.dim.n).collect()
    }

    /// Variables that survive reduction.
    pub fn reduced_vars(&self) -> Vec<usize> {
        (self.dim.n..self.dim.w).collect()
    }

    pub fn tangent_classes(&self) -> Vec<SlotClass> {
        (0..self.dim.t)
            .map(|i| match i {
                i if i < self.dim.n => SlotClass::Null,
                i if i < self.dim.w => SlotClass::WobsOnly,
                _ => SlotClass::TotalOnly,
            })
            .collect()
    }

    pub fn cotangent_classes(&self) -> Vec<SlotClass> {
        self.tangent_classes().into_iter().map(SlotClass::dual).collect()
    }

    pub fn check_poly(&self, f: &Poly) -> Result<(), GeoError> {
        if f.nvars() != self.nvars() {
            return Err(GeoError::VarMismatch { expected: self.nvars(), found: f.nvars() });
        }
        Ok(())
    }

    /// `f|_C`, still written in all variables.
    pub fn restrict(&self, f: &Poly) -> Poly {
        f.substitute_zero(&self.normal_vars())
    }

    pub fn fn_class(&self, f: &Poly) -> Result<FnClass, GeoError> {
        self.check_poly(f)?;
        let r = self.restrict(f);
        let in_n = r.is_zero();
        let in_w = self.leaf_vars().iter().all(|&i| self.restrict(&f.partial(i)).is_zero());
        Ok(FnClass { in_w, in_n })
    }

    /// Whether `f` lies in the class required by a slot of class `c`.
    pub fn fits(&self, f: &Poly, c: SlotClass) -> Result<bool, GeoError> {
        let k = self.fn_class(f)?;
        Ok(match c {
            SlotClass::Null => true,
            SlotClass::WobsOnly => k.in_w,
            SlotClass::TotalOnly => k.in_n,
        })
    }

    /// The function induced on the reduced space.
    pub fn fn_reduce(&self, f: &Poly) -> Result<Poly, GeoError> {
        if !self.fn_class(f)?.in_w {
            return Err(GeoError::NotInWobs);
        }
        let r = self.restrict(f);
        let map: Vec<Option<usize>> =
            (0..self.nvars()).map(|i| (self.dim.n <= i && i < self.dim.w).then(|| i - self.dim.n)).collect();
        Ok(r.reindex(&map, self.red_dim()).expect("restriction of a W-function is leafwise constant"))
    }

    /// Pullback of a reduced function along the projection `C → M_red`,
    /// extended constantly off `C`.
    pub fn fn_lift(&self, g: &Poly) -> Result<Poly, GeoError> {
        if g.nvars() != self.red_dim() {
            return Err(GeoError::VarMismatch { expected: self.red_dim(), found: g.nvars() });
        }
        let map: Vec<Option<usize>> = (0..self.red_dim()).map(|i| Some(i + self.dim.n)).collect();
        Ok(g.reindex(&map, self.nvars()).expect("total map"))
    }
}

/// Trivial bundle `M × ℝ^k` whose basis slots carry index-set classes; the
/// connection is the flat componentwise one.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TrivBundle {
    pub base: ConSpace,
    pub classes: Vec<SlotClass>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BundleKind {
    Dsum,
    Tensor,
    StrongTensor,
    Dual,
    Hom,
}

impl TrivBundle {
    pub fn new(base: ConSpace, classes: Vec<SlotClass>) -> TrivBundle {
        TrivBundle { base, classes }
    }

    pub fn tangent(base: ConSpace) -> TrivBundle {
        TrivBundle { base, classes: base.tangent_classes() }
    }

    pub fn cotangent(base: ConSpace) -> TrivBundle {
        TrivBundle { base, classes: base.cotangent_classes() }
    }

    pub fn rank(&self) -> usize {
        self.classes.len()
    }

    pub fn ranks(&self) -> ConDim {
        self.index_set().dims()
    }

    pub fn index_set(&self) -> ConIndexSet {
        ConIndexSet::from_classes(&self.classes)
    }

    pub fn wobs_only_slots(&self) -> Vec<usize> {
        (0..self.rank()).filter(|&i| self.classes[i] == SlotClass::WobsOnly).collect()
    }

    pub fn dual(&self) -> TrivBundle {
        TrivBundle { base: self.base, classes: self.classes.iter().map(|c| c.dual()).collect() }
    }

    pub fn dsum(&self, other: &TrivBundle) -> Result<TrivBundle, GeoError> {
        self.same_base(other)?;
        Ok(TrivBundle { base: self.base, classes: [self.classes.clone(), other.classes.clone()].concat() })
    }

    /// Slot `(i, j)` sits at `i·rank(other) + j`.
    pub fn tensor(&self, other: &TrivBundle, flavor: Flavor) -> Result<TrivBundle, GeoError> {
        self.same_base(other)?;
        let classes = self.classes.iter().flat_map(|a| other.classes.iter().map(move |b| a.combine(*b, flavor))).collect();
        Ok(TrivBundle { base: self.base, classes })
    }

    /// `Hom(self, other) = other ⊠ self*`, slot `(r, c)` at `r·rank(self) + c`.
    pub fn hom(&self, other: &TrivBundle) -> Result<TrivBundle, GeoError> {
        other.tensor(&self.dual(), Flavor::Strong)
    }

    pub fn construct(&self, kind: BundleKind, other: Option<&TrivBundle>) -> Result<TrivBundle, GeoError> {
        let need = || other.ok_or_else(|| GeoError::ShapeMismatch("second bundle required".into()));
        match kind {
            BundleKind::Dsum => self.dsum(need()?),
            BundleKind::Tensor => self.tensor(need()?, Flavor::Tensor),
            BundleKind::StrongTensor => self.tensor(need()?, Flavor::Strong),
            BundleKind::Hom => self.hom(need()?),
            BundleKind::Dual => match other {
                None => Ok(self.dual()),
                Some(_) => Err(GeoError::ShapeMismatch("dual takes one bundle".into())),
            },
        }
    }

    /// Reduced bundle over `ℝ^{d_red}`: the `W ∖ N` slots.
    pub fn reduce(&self) -> TrivBundle {
        TrivBundle { base: self.base.reduced(), classes: vec![SlotClass::WobsOnly; self.wobs_only_slots().len()] }
    }

    fn same_base(&self, other: &TrivBundle) -> Result<(), GeoError> {
        if self.base != other.base {
            return Err(GeoError::BaseMismatch);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassedSection {
    pub bundle: TrivBundle,
    pub components: Vec<Poly>,
}

impl ClassedSection {
    pub fn new(bundle: TrivBundle, components: Vec<Poly>) -> Result<ClassedSection, GeoError> {
        if components.len() != bundle.rank() {
            return Err(GeoError::ShapeMismatch(format!("{} components for rank {}", components.len(), bundle.rank())));
        }
        for c in &components {
            bundle.base.check_poly(c)?;
        }
        Ok(ClassedSection { bundle, components })
    }

    pub fn zero(bundle: &TrivBundle) -> ClassedSection {
        let n = bundle.base.nvars();
        ClassedSection { components: vec![Poly::zero(n); bundle.rank()], bundle: bundle.clone() }
    }

    /// Constant section `e_i`.
    pub fn basis(bundle: &TrivBundle, i: usize) -> ClassedSection {
        let mut s = Self::zero(bundle);
        s.components[i] = Poly::one(bundle.base.nvars());
        s
    }

    pub fn class(&self) -> FnClass {
        let base = &self.bundle.base;
        let mut in_w = true;
        let mut in_n = true;
        for (f, c) in self.components.iter().zip(&self.bundle.classes) {
            let k = base.fn_class(f).expect("checked at construction");
            match c {
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

    pub fn add(&self, other: &ClassedSection) -> Result<ClassedSection, GeoError> {
        if self.bundle != other.bundle {
            return Err(GeoError::ShapeMismatch("sections of different bundles".into()));
        }
        let components = self.components.iter().zip(&other.components).map(|(a, b)| a + b).collect();
        Ok(ClassedSection { bundle: self.bundle.clone(), components })
    }

    /// `f · s`.
    pub fn scale_fn(&self, f: &Poly) -> ClassedSection {
        ClassedSection { bundle: self.bundle.clone(), components: self.components.iter().map(|c| c * f).collect() }
    }

    pub fn reduce(&self) -> Result<ClassedSection, GeoError> {
        if !self.class().in_w {
            return Err(GeoError::NotInWobs);
        }
        let base = &self.bundle.base;
        let components = self
            .bundle
            .wobs_only_slots()
            .iter()
            .map(|&i| base.fn_reduce(&self.components[i]))
            .collect::<Result<_, _>>()?;
        Ok(ClassedSection { bundle: self.bundle.reduce(), components })
    }

    pub fn dsum(&self, other: &ClassedSection) -> Result<ClassedSection, GeoError> {
        let bundle = self.bundle.dsum(&other.bundle)?;
        Ok(ClassedSection { bundle, components: [self.components.clone(), other.components.clone()].concat() })
    }

    pub fn tensor(&self, other: &ClassedSection, flavor: Flavor) -> Result<ClassedSection, GeoError> {
        let bundle = self.bundle.tensor(&other.bundle, flavor)?;
        let components = self.components.iter().flat_map(|a| other.components.iter().map(move |b| a * b)).collect();
        Ok(ClassedSection { bundle, components })
    }

    /// `α(s)` for a section `α` of `E*` and `s` of `E`.
    pub fn dual_pair(&self, s: &ClassedSection) -> Result<Poly, GeoError> {
        if self.bundle != s.bundle.dual() {
            return Err(GeoError::ShapeMismatch("first argument must be a section of the dual bundle".into()));
        }
        Ok(self.components.iter().zip(&s.components).fold(Poly::zero(s.bundle.base.nvars()), |acc, (a, b)| &acc + &(a * b)))
    }

    /// `Φ(s)` for a section `Φ` of `Hom(E, F)`.
    pub fn hom_apply(&self, source: &TrivBundle, target: &TrivBundle, s: &ClassedSection) -> Result<ClassedSection, GeoError> {
        if self.bundle != source.hom(target)? || &s.bundle != source {
            return Err(GeoError::ShapeMismatch("section of Hom(E, F) applied to a section of E expected".into()));
        }
        let k = source.rank();
        let n = source.base.nvars();
        let components = (0..target.rank())
            .map(|r| (0..k).fold(Poly::zero(n), |acc, c| &acc + &(&self.components[r * k + c] * &s.components[c])))
            .collect();
        Ok(ClassedSection { bundle: target.clone(), components })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SectionOp {
    Dsum,
    Tensor,
    StrongTensor,
    DualPair,
    HomApply,
}

/// Outcome of [`BundleMorphism::check`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MorphismCheck {
    pub base_ok: bool,
    pub fiber_ok: bool,
    pub connection_ok: bool,
}

impl MorphismCheck {
    pub fn all(&self) -> bool {
        self.base_ok && self.fiber_ok && self.connection_ok
    }
}

/// Vector bundle morphism over a polynomial base map `φ`; `matrix[r][c]` is
/// the coefficient of target slot `r` in the image of source slot `c`, as a
/// function on the source base.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundleMorphism {
    pub source: TrivBundle,
    pub target: TrivBundle,
    pub base_map: Vec<Poly>,
    pub matrix: Vec<Vec<Poly>>,
}

impl BundleMorphism {
    pub fn new(source: TrivBundle, target: TrivBundle, base_map: Vec<Poly>, matrix: Vec<Vec<Poly>>) -> Result<Self, GeoError> {
        let n = source.base.nvars();
        if base_map.len() != target.base.nvars() {
            return Err(GeoError::ShapeMismatch("base map must list one polynomial per target coordinate".into()));
        }
        if matrix.len() != target.rank() || matrix.iter().any(|r| r.len() != source.rank()) {
            return Err(GeoError::ShapeMismatch("matrix must be rank(target) × rank(source)".into()));
        }
        for f in base_map.iter().chain(matrix.iter().flatten()) {
            if f.nvars() != n {
                return Err(GeoError::VarMismatch { expected: n, found: f.nvars() });
            }
        }
        Ok(BundleMorphism { source, target, base_map, matrix })
    }

    pub fn identity(e: &TrivBundle) -> BundleMorphism {
        let n = e.base.nvars();
        let k = e.rank();
        BundleMorphism {
            source: e.clone(),
            target: e.clone(),
            base_map: (0..n).map(|i| Poly::var(n, i)).collect(),
            matrix: (0..k).map(|r| (0..k).map(|c| if r == c { Poly::one(n) } else { Poly::zero(n) }).collect()).collect(),
        }
    }

    pub fn check(&self) -> MorphismCheck {
        let src = &self.source.base;
        let tgt = &self.target.base;
        let normal_ok = (tgt.dim.w..tgt.dim.t).all(|j| src.restrict(&self.base_map[j]).is_zero());
        let leaf_ok = src.leaf_vars().iter().all(|&i| {
            (tgt.dim.n..tgt.dim.t).all(|j| src.restrict(&self.base_map[j].partial(i)).is_zero())
        });
        let mut fiber_ok = true;
        let mut connection_ok = true;
        for (r, rc) in self.target.classes.iter().enumerate() {
            for (c, cc) in self.source.classes.iter().enumerate() {
                let entry = &self.matrix[r][c];
                match rc.combine(cc.dual(), Flavor::Strong) {
                    SlotClass::Null => {}
                    SlotClass::WobsOnly => connection_ok &= src.fn_class(entry).expect("checked").in_w,
                    SlotClass::TotalOnly => fiber_ok &= src.fn_class(entry).expect("checked").in_n,
                }
            }
        }
        MorphismCheck { base_ok: normal_ok && leaf_ok, fiber_ok, connection_ok }
    }

    /// `p ↦ Φ_p(s(p))`, a section of the pullback of the target bundle,
    /// written with the target's slot classes over the source base.
    pub fn apply(&self, s: &ClassedSection) -> Result<ClassedSection, GeoError> {
        if s.bundle != self.source {
            return Err(GeoError::ShapeMismatch("section of the source bundle expected".into()));
        }
        let n = self.source.base.nvars();
        let components = self
            .matrix
            .iter()
            .map(|row| row.iter().zip(&s.components).fold(Poly::zero(n), |acc, (m, x)| &acc + &(m * x)))
            .collect();
        Ok(ClassedSection { bundle: TrivBundle::new(self.source.base, self.target.classes.clone()), components })
    }

    /// Reduced morphism between the reduced bundles.
    pub fn reduce(&self) -> Result<BundleMorphism, GeoError> {
        if !self.check().all() {
            return Err(GeoError::NotInWobs);
        }
        let src = &self.source.base;
        let tgt = &self.target.base;
        let base_map = tgt.reduced_vars().iter().map(|&j| src.fn_reduce(&self.base_map[j])).collect::<Result<_, _>>()?;
        let (rows, cols) = (self.target.wobs_only_slots(), self.source.wobs_only_slots());
        let matrix = rows
            .iter()
            .map(|&r| cols.iter().map(|&c| src.fn_reduce(&self.matrix[r][c])).collect::<Result<Vec<_>, _>>())
            .collect::<Result<_, _>>()?;
        BundleMorphism::new(self.source.reduce(), self.target.reduce(), base_map, matrix)
    }
}

/// Constant frame and coordinate coframe of a trivial bundle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectionDualBasis {
    pub index: ConIndexSet,
    pub frame: Vec<ClassedSection>,
    pub coframe: Vec<ClassedSection>,
}

pub fn standard_dual_basis(e: &TrivBundle) -> SectionDualBasis {
    let dual = e.dual();
    SectionDualBasis {
        index: e.index_set(),
        frame: (0..e.rank()).map(|i| ClassedSection::basis(e, i)).collect(),
        coframe: (0..e.rank()).map(|i| ClassedSection::basis(&dual, i)).collect(),
    }
}

/// Reconstruction `s = Σ e_n e^n(s)` on components plus the four class
/// conditions on frame and coframe.
pub fn verify_section_dual_basis(e: &TrivBundle, db: &SectionDualBasis) -> Result<(), String> {
    let classes: Vec<SlotClass> = db.index.total().iter().map(|l| db.index.class_of(l).unwrap()).collect();
    if classes.len() != db.frame.len() || classes.len() != db.coframe.len() {
        return Err("family sizes differ from the index set".into());
    }
    let n = e.base.nvars();
    for i in 0..e.rank() {
        for j in 0..e.rank() {
            let mut acc = Poly::zero(n);
            for (v, w) in db.frame.iter().zip(&db.coframe) {
                acc = &acc + &(&v.components[i] * &w.components[j]);
            }
            let expect = if i == j { Poly::one(n) } else { Poly::zero(n) };
            if acc != expect {
                return Err(format!("reconstruction fails at ({i}, {j})"));
            }
        }
    }
    for (k, c) in classes.iter().enumerate() {
        let fk = db.frame[k].class();
        let ck = db.coframe[k].class();
        if c.in_wobs() && !fk.in_w {
            return Err(format!("frame element {k} not in W"));
        }
        if c.in_null() && !fk.in_n {
            return Err(format!("frame element {k} not in N"));
        }
        if !c.in_null() && !ck.in_w {
            return Err(format!("coframe element {k} not in (E*)_W"));
        }
        if !c.in_wobs() && !ck.in_n {
            return Err(format!("coframe element {k} not in (E*)_N"));
        }
    }
    Ok(())
}

/// Rational points of `C` on a small grid, deterministic in `count`.
pub fn sample_points_on_c(space: &ConSpace, count: usize) -> Vec<Vec<Rational>> {
    let vals: [(i64, i64); 7] = [(0, 1), (1, 1), (-1, 1), (2, 1), (1, 2), (-3, 2), (3, 1)];
    (0..count)
        .map(|k| {
            (0..space.nvars())
                .map(|i| {
                    if i >= space.dim.w {
                        return Rational::zero();
                    }
                    let (a, b) = vals[(k * 3 + i * 5 + k / 7) % vals.len()];
                    crate::exact::qf(a, b)
                })
                .collect()
        })
        .collect()
}
