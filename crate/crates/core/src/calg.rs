//! Finite-dimensional constraint vector spaces, algebras, modules and Lie
//! algebras over ℚ, their constructions, and their reductions.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::alt;
use crate::cindex::{ConDim, ConIndexSet, Flavor, SlotClass};
use crate::exact::{is_zero_vec, q, unit, ExactError, Mat, Quotient, Rational, Subspace};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CalgError {
    #[error("flag is not nested N ⊆ W ⊆ T")]
    NotNested,
    #[error("map is not a constraint map")]
    NotConstraintMap,
    #[error("induced structure is ill-defined: {0}")]
    IllDefinedQuotient(String),
    #[error("operands live over different algebras")]
    BaseMismatch,
    #[error("base algebra is not commutative")]
    NonCommutativeBase,
    #[error("invalid structure: {0}")]
    InvalidStructure(String),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

type Vector = Vec<Rational>;

fn add_into(acc: &mut [Rational], v: &[Rational], c: &Rational) {
    if c.is_zero() {
        return;
    }
    for (a, b) in acc.iter_mut().zip(v) {
        if !b.is_zero() {
            *a += c * b;
        }
    }
}

fn sub_vec(a: &[Rational], b: &[Rational]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn scale_vec(a: &[Rational], c: &Rational) -> Vector {
    a.iter().map(|x| x * c).collect()
}

fn kron_vec(a: &[Rational], b: &[Rational]) -> Vector {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

/// Constraint vector space: a flag `V_N ⊆ V_W ⊆ ℚⁿ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConVectorSpace {
    dim: usize,
    wobs: Subspace,
    null: Subspace,
}

impl ConVectorSpace {
    pub fn new(dim: usize, wobs: Subspace, null: Subspace) -> Result<Self, CalgError> {
        if wobs.ambient() != dim || null.ambient() != dim || !null.is_subspace_of(&wobs) {
            return Err(CalgError::NotNested);
        }
        Ok(ConVectorSpace { dim, wobs, null })
    }

    /// `(ℚⁿ, ℚⁿ, 0)`.
    pub fn trivial(dim: usize) -> Self {
        ConVectorSpace { dim, wobs: Subspace::full(dim), null: Subspace::zero(dim) }
    }

    /// Coordinate flag read off per-basis-vector classes.
    pub fn from_classes(classes: &[SlotClass]) -> Self {
        let n = classes.len();
        let w = (0..n).filter(|&i| classes[i].in_wobs());
        let z = (0..n).filter(|&i| classes[i].in_null());
        ConVectorSpace { dim: n, wobs: Subspace::coordinate(n, w), null: Subspace::coordinate(n, z) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn wobs(&self) -> &Subspace {
        &self.wobs
    }

    pub fn null(&self) -> &Subspace {
        &self.null
    }

    pub fn dims(&self) -> ConDim {
        ConDim { t: self.dim, w: self.wobs.dim(), n: self.null.dim() }
    }

    /// Coordinates on `V_W / V_N`.
    pub fn quotient(&self) -> Quotient {
        Quotient::new(&self.wobs, &self.null).expect("flag is nested")
    }

    pub fn red_dim(&self) -> usize {
        self.wobs.dim() - self.null.dim()
    }

    pub fn is_trivial_flag(&self) -> bool {
        self.wobs == Subspace::full(self.dim) && self.null.dim() == 0
    }
}

/// Flag of subspaces whose Total part is not necessarily the whole space,
/// as produced by kernels and images.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConSubspace {
    pub total: Subspace,
    pub wobs: Subspace,
    pub null: Subspace,
}

impl ConSubspace {
    pub fn dims(&self) -> ConDim {
        ConDim { t: self.total.dim(), w: self.wobs.dim(), n: self.null.dim() }
    }

    /// The same flag in coordinates of the canonical basis of `total`.
    pub fn coordinatize(&self) -> ConVectorSpace {
        let coords = |s: &Subspace| {
            let vecs: Vec<Vector> = s.basis_vecs().iter().map(|v| self.total.coords(v).expect("nested flag")).collect();
            Subspace::span(self.total.dim(), &vecs)
        };
        ConVectorSpace { dim: self.total.dim(), wobs: coords(&self.wobs), null: coords(&self.null) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConLinearMap {
    pub source: ConVectorSpace,
    pub target: ConVectorSpace,
    pub matrix: Mat,
}

impl ConLinearMap {
    pub fn new(source: ConVectorSpace, target: ConVectorSpace, matrix: Mat) -> Result<Self, CalgError> {
        if matrix.rows() != target.dim || matrix.cols() != source.dim {
            return Err(ExactError::DimensionMismatch { expected: target.dim * source.dim, found: matrix.rows() * matrix.cols() }.into());
        }
        Ok(ConLinearMap { source, target, matrix })
    }

    pub fn is_constraint(&self) -> bool {
        self.source.wobs.image(&self.matrix).is_subspace_of(&self.target.wobs)
            && self.source.null.image(&self.matrix).is_subspace_of(&self.target.null)
    }

    fn require_constraint(&self) -> Result<(), CalgError> {
        if self.is_constraint() {
            Ok(())
        } else {
            Err(CalgError::NotConstraintMap)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MorphismClass {
    pub mono: bool,
    pub epi: bool,
    pub regular_mono: bool,
    pub regular_epi: bool,
    /// Invertible with a constraint inverse.
    pub iso: bool,
}

impl MorphismClass {
    /// Whether `iso ⇔ mono ∧ regular_epi ⇔ regular_mono ∧ epi` holds here.
    pub fn consistent(&self) -> bool {
        self.iso == (self.mono && self.regular_epi) && self.iso == (self.regular_mono && self.epi)
    }
}

pub fn classify_morphism(phi: &ConLinearMap) -> Result<MorphismClass, CalgError> {
    phi.require_constraint()?;
    let m = &phi.matrix;
    let (e, f) = (&phi.source, &phi.target);
    let rank = m.rank();
    let mono = rank == e.dim;
    let epi = rank == f.dim && e.wobs.image(m) == f.wobs;
    let regular_mono = mono && f.null.preimage(m).intersect(&e.wobs)? == e.null;
    let regular_epi = epi && e.null.image(m) == f.null;
    let iso = match m.inverse() {
        Some(inv) => ConLinearMap { source: f.clone(), target: e.clone(), matrix: inv }.is_constraint(),
        None => false,
    };
    Ok(MorphismClass { mono, epi, regular_mono, regular_epi, iso })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelImage {
    Kernel,
    Image,
    RegularImage,
}

pub fn kernel_image(phi: &ConLinearMap, which: KernelImage) -> Result<ConSubspace, CalgError> {
    phi.require_constraint()?;
    let m = &phi.matrix;
    let (e, f) = (&phi.source, &phi.target);
    Ok(match which {
        KernelImage::Kernel => {
            let k = m.kernel();
            ConSubspace { wobs: k.intersect(&e.wobs)?, null: k.intersect(&e.null)?, total: k }
        }
        KernelImage::Image => ConSubspace {
            total: Subspace::full(e.dim).image(m),
            wobs: e.wobs.image(m),
            null: e.null.image(m),
        },
        KernelImage::RegularImage => {
            let w = e.wobs.image(m);
            ConSubspace { total: Subspace::full(e.dim).image(m), null: w.intersect(&f.null)?, wobs: w }
        }
    })
}

/// `S ⊗ T` inside `ℚ^{s·t}` with index `i·t + j`.
pub fn tensor_subspace(s: &Subspace, t: &Subspace) -> Subspace {
    let vecs: Vec<Vector> = s
        .basis_vecs()
        .iter()
        .flat_map(|a| t.basis_vecs().into_iter().map(move |b| kron_vec(a, &b)))
        .collect();
    Subspace::span(s.ambient() * t.ambient(), &vecs)
}

fn sum_all(ambient: usize, parts: &[Subspace]) -> Subspace {
    parts.iter().fold(Subspace::zero(ambient), |acc, p| acc.sum(p).expect("same ambient"))
}

fn direct_sum_subspace(a: &Subspace, b: &Subspace) -> Subspace {
    let (m, n) = (a.ambient(), b.ambient());
    let mut vecs: Vec<Vector> = a.basis_vecs().into_iter().map(|v| [v, vec![Rational::zero(); n]].concat()).collect();
    vecs.extend(b.basis_vecs().into_iter().map(|v| [vec![Rational::zero(); m], v].concat()));
    Subspace::span(m + n, &vecs)
}

/// Linear conditions (on row-major `f×e` matrices) expressing `Φ(src) ⊆ dst`.
fn inclusion_rows(src: &Subspace, dst: &Subspace) -> Vec<Vector> {
    let (e, f) = (src.ambient(), dst.ambient());
    let ann = dst.annihilator().basis_vecs();
    let mut rows = Vec::new();
    for s in src.basis_vecs() {
        for a in &ann {
            let mut row = vec![Rational::zero(); f * e];
            for r in 0..f {
                if a[r].is_zero() {
                    continue;
                }
                for c in 0..e {
                    row[r * e + c] = &a[r] * &s[c];
                }
            }
            rows.push(row);
        }
    }
    rows
}

fn solve_rows(cols: usize, rows: Vec<Vector>) -> Subspace {
    Mat::from_rows(rows, cols).kernel()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Construction {
    Dsum,
    Tensor,
    StrongTensor,
    Dual,
    Hom,
}

impl ConVectorSpace {
    pub fn dsum(&self, other: &ConVectorSpace) -> ConVectorSpace {
        ConVectorSpace {
            dim: self.dim + other.dim,
            wobs: direct_sum_subspace(&self.wobs, &other.wobs),
            null: direct_sum_subspace(&self.null, &other.null),
        }
    }

    pub fn tensor(&self, other: &ConVectorSpace, flavor: Flavor) -> ConVectorSpace {
        let n = self.dim * other.dim;
        let (e, f) = (self, other);
        let full_e = Subspace::full(e.dim);
        let full_f = Subspace::full(f.dim);
        let (wobs, null) = match flavor {
            Flavor::Tensor => (
                tensor_subspace(&e.wobs, &f.wobs),
                sum_all(n, &[tensor_subspace(&e.null, &f.wobs), tensor_subspace(&e.wobs, &f.null)]),
            ),
            Flavor::Strong => {
                let null = sum_all(n, &[tensor_subspace(&e.null, &full_f), tensor_subspace(&full_e, &f.null)]);
                (sum_all(n, &[tensor_subspace(&e.wobs, &f.wobs), null.clone()]), null)
            }
        };
        ConVectorSpace { dim: n, wobs, null }
    }

    /// `Hom(self, other)` on row-major `other.dim × self.dim` matrices.
    pub fn hom(&self, other: &ConVectorSpace) -> ConVectorSpace {
        let n = self.dim * other.dim;
        let wobs =
            solve_rows(n, [inclusion_rows(&self.wobs, &other.wobs), inclusion_rows(&self.null, &other.null)].concat());
        let null = solve_rows(n, inclusion_rows(&self.wobs, &other.null));
        ConVectorSpace { dim: n, wobs, null }
    }

    pub fn dual(&self) -> ConVectorSpace {
        self.hom(&ConVectorSpace::trivial(1))
    }
}

pub fn construct(kind: Construction, e: &ConVectorSpace, f: Option<&ConVectorSpace>) -> Result<ConVectorSpace, CalgError> {
    let need = || f.ok_or_else(|| CalgError::InvalidStructure("second operand required".into()));
    Ok(match kind {
        Construction::Dsum => e.dsum(need()?),
        Construction::Tensor => e.tensor(need()?, Flavor::Tensor),
        Construction::StrongTensor => e.tensor(need()?, Flavor::Strong),
        Construction::Hom => e.hom(need()?),
        Construction::Dual => {
            if f.is_some() {
                return Err(CalgError::InvalidStructure("dual takes one operand".into()));
            }
            e.dual()
        }
    })
}

/// Matrix of the induced map `E_W/E_N → F_W/F_N` on complement bases.
pub fn reduce_map(phi: &ConLinearMap) -> Result<Mat, CalgError> {
    phi.require_constraint()?;
    let qe = phi.source.quotient();
    let qf = phi.target.quotient();
    let cols: Vec<Vector> = qe
        .complement()
        .iter()
        .map(|u| qf.project(&phi.matrix.mul_vec(u)))
        .collect::<Result<_, _>>()?;
    Ok(Mat::from_rows(cols, qf.dim()).transpose())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CanonicalIso {
    /// `F ⊠ E* → Hom(E, F)`, `y ⊗ α ↦ (x ↦ y α(x))`.
    HomAsStrongTensor,
    /// `E* ⊠ F* → (E ⊗ F)*`.
    DualOfTensor,
    /// `E* ⊗ F* → (E ⊠ F)*`.
    DualOfStrongTensor,
    /// `Hom(E ⊗ F, G) → Hom(F, G ⊠ E*)`, currying.
    HomAdjunction,
}

/// The canonical map as a linear map between the flagged source and target.
pub fn canonical_iso(
    which: CanonicalIso,
    e: &ConVectorSpace,
    f: &ConVectorSpace,
    g: Option<&ConVectorSpace>,
) -> Result<ConLinearMap, CalgError> {
    let (source, target, matrix) = match which {
        CanonicalIso::HomAsStrongTensor => {
            let source = f.tensor(&e.dual(), Flavor::Strong);
            let target = e.hom(f);
            // y_r ⊗ ε^c ↦ the matrix unit sending e_c to f_r.
            let mut m = Mat::zeros(target.dim, source.dim);
            for r in 0..f.dim {
                for c in 0..e.dim {
                    m[(r * e.dim + c, r * e.dim + c)] = Rational::one();
                }
            }
            (source, target, m)
        }
        CanonicalIso::DualOfTensor | CanonicalIso::DualOfStrongTensor => {
            let (inner, outer) = match which {
                CanonicalIso::DualOfTensor => (Flavor::Tensor, Flavor::Strong),
                _ => (Flavor::Strong, Flavor::Tensor),
            };
            let source = e.dual().tensor(&f.dual(), outer);
            let target = e.tensor(f, inner).dual();
            // ε^i ⊗ φ^j ↦ (e_k ⊗ f_l ↦ δ_ik δ_jl).
            let mut m = Mat::zeros(target.dim, source.dim);
            for i in 0..e.dim {
                for j in 0..f.dim {
                    m[(i * f.dim + j, i * f.dim + j)] = Rational::one();
                }
            }
            (source, target, m)
        }
        CanonicalIso::HomAdjunction => {
            let g = g.ok_or_else(|| CalgError::InvalidStructure("adjunction needs a third space".into()))?;
            let source = e.tensor(f, Flavor::Tensor).hom(g);
            let target = f.hom(&g.tensor(&e.dual(), Flavor::Strong));
            // Φ ↦ (y ↦ Σ_i Φ(e_i ⊗ y) ⊗ ε^i).
            let (de, df, dg) = (e.dim, f.dim, g.dim);
            let mut m = Mat::zeros(target.dim, source.dim);
            for r in 0..dg {
                for i in 0..de {
                    for j in 0..df {
                        let src = r * (de * df) + i * df + j;
                        let dst = (r * de + i) * df + j;
                        m[(dst, src)] = Rational::one();
                    }
                }
            }
            (source, target, m)
        }
    };
    ConLinearMap::new(source, target, matrix)
}

/// Unital associative algebra on ℚⁿ given by structure constants, with a
/// constraint flag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConAlgebraFD {
    space: ConVectorSpace,
    /// `mult[i][j]` = coordinates of `e_i e_j`.
    mult: Vec<Vec<Vector>>,
    unit: Vector,
}

impl ConAlgebraFD {
    pub fn new(space: ConVectorSpace, mult: Vec<Vec<Vector>>, unit: Vector) -> Result<Self, CalgError> {
        let a = ConAlgebraFD { space, mult, unit };
        a.validate().map_err(CalgError::InvalidStructure)?;
        Ok(a)
    }

    /// The ground field with flag `(ℚ, ℚ, 0)`.
    pub fn ground() -> Self {
        ConAlgebraFD { space: ConVectorSpace::trivial(1), mult: vec![vec![vec![q(1)]]], unit: vec![q(1)] }
    }

    /// `ℚ(i)` on the basis `1, i` with the given flag.
    pub fn gaussian(space: ConVectorSpace) -> Result<Self, CalgError> {
        let mult = vec![vec![vec![q(1), q(0)], vec![q(0), q(1)]], vec![vec![q(0), q(1)], vec![q(-1), q(0)]]];
        Self::new(space, mult, vec![q(1), q(0)])
    }

    /// `ℚ[x]/(x²)` on the basis `1, x` with the given flag.
    pub fn dual_numbers(space: ConVectorSpace) -> Result<Self, CalgError> {
        let mult = vec![vec![vec![q(1), q(0)], vec![q(0), q(1)]], vec![vec![q(0), q(1)], vec![q(0), q(0)]]];
        Self::new(space, mult, vec![q(1), q(0)])
    }

    pub fn space(&self) -> &ConVectorSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim
    }

    pub fn unit(&self) -> &[Rational] {
        &self.unit
    }

    pub fn structure(&self) -> &[Vec<Vector>] {
        &self.mult
    }

    pub fn mul(&self, x: &[Rational], y: &[Rational]) -> Vector {
        let n = self.dim();
        let mut out = vec![Rational::zero(); n];
        for i in 0..n {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if y[j].is_zero() {
                    continue;
                }
                add_into(&mut out, &self.mult[i][j], &(&x[i] * &y[j]));
            }
        }
        out
    }

    /// Matrix of `x ↦ x·a`.
    pub fn right_mult(&self, a: &[Rational]) -> Mat {
        let n = self.dim();
        let cols: Vec<Vector> = (0..n).map(|i| self.mul(&unit(n, i), a)).collect();
        Mat::from_rows(cols, n).transpose()
    }

    pub fn is_commutative(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| self.mult[i][j] == self.mult[j][i]))
    }

    /// `A_N` is an ideal of all of `A_T`.
    pub fn is_strong(&self) -> bool {
        let n = self.dim();
        let null = self.space.null.basis_vecs();
        (0..n).all(|i| {
            null.iter().all(|z| {
                self.space.null.contains_vec(&self.mul(&unit(n, i), z)) && self.space.null.contains_vec(&self.mul(z, &unit(n, i)))
            })
        })
    }

    fn validate(&self) -> Result<(), String> {
        let n = self.dim();
        if self.mult.len() != n || self.mult.iter().any(|r| r.len() != n || r.iter().any(|v| v.len() != n)) || self.unit.len() != n {
            return Err("structure constant shape".into());
        }
        let basis: Vec<Vector> = (0..n).map(|i| unit(n, i)).collect();
        for b in &basis {
            if &self.mul(&self.unit, b) != b || &self.mul(b, &self.unit) != b {
                return Err("unit law fails".into());
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let l = self.mul(&self.mult[i][j], &basis[k]);
                    let r = self.mul(&basis[i], &self.mult[j][k]);
                    if l != r {
                        return Err(format!("associativity fails on (e{i} e{j}) e{k}"));
                    }
                }
            }
        }
        if !self.space.wobs.contains_vec(&self.unit) {
            return Err("unit not in A_W".into());
        }
        let w = self.space.wobs.basis_vecs();
        let z = self.space.null.basis_vecs();
        for a in &w {
            for b in &w {
                if !self.space.wobs.contains_vec(&self.mul(a, b)) {
                    return Err("A_W not closed under products".into());
                }
            }
            for c in &z {
                if !self.space.null.contains_vec(&self.mul(a, c)) || !self.space.null.contains_vec(&self.mul(c, a)) {
                    return Err("A_N is not an ideal in A_W".into());
                }
            }
        }
        Ok(())
    }

    /// Reduced algebra `A_W / A_N` with trivial flag, plus the quotient used.
    pub fn reduce(&self) -> Result<(ConAlgebraFD, Quotient), CalgError> {
        let qa = self.space.quotient();
        let m = qa.dim();
        let reps = qa.complement().to_vec();
        let mut mult = vec![vec![vec![]; m]; m];
        for i in 0..m {
            for j in 0..m {
                mult[i][j] = qa
                    .project(&self.mul(&reps[i], &reps[j]))
                    .map_err(|_| CalgError::IllDefinedQuotient("A_W not closed".into()))?;
            }
        }
        for z in self.space.null.basis_vecs() {
            for w in self.space.wobs.basis_vecs() {
                if !self.space.null.contains_vec(&self.mul(&z, &w)) || !self.space.null.contains_vec(&self.mul(&w, &z)) {
                    return Err(CalgError::IllDefinedQuotient("A_N is not an ideal in A_W".into()));
                }
            }
        }
        let unit = qa.project(&self.unit).map_err(|_| CalgError::IllDefinedQuotient("unit outside A_W".into()))?;
        let red = ConAlgebraFD { space: ConVectorSpace::trivial(m), mult, unit };
        red.validate().map_err(CalgError::IllDefinedQuotient)?;
        Ok((red, qa))
    }
}

/// Right module over a [`ConAlgebraFD`]; `action[k]` is the matrix of `x ↦ x·e_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConModuleFD {
    algebra: ConAlgebraFD,
    space: ConVectorSpace,
    action: Vec<Mat>,
}

impl ConModuleFD {
    pub fn new(algebra: ConAlgebraFD, space: ConVectorSpace, action: Vec<Mat>) -> Result<Self, CalgError> {
        let m = ConModuleFD { algebra, space, action };
        m.validate().map_err(CalgError::InvalidStructure)?;
        Ok(m)
    }

    /// A vector space seen as a module over the ground field.
    pub fn over_ground(space: ConVectorSpace) -> Self {
        let n = space.dim;
        ConModuleFD { algebra: ConAlgebraFD::ground(), space, action: vec![Mat::identity(n)] }
    }

    /// The algebra as a right module over itself.
    pub fn regular(algebra: &ConAlgebraFD) -> Self {
        let n = algebra.dim();
        let action = (0..n).map(|k| algebra.right_mult(&unit(n, k))).collect();
        ConModuleFD { algebra: algebra.clone(), space: algebra.space.clone(), action }
    }

    pub fn algebra(&self) -> &ConAlgebraFD {
        &self.algebra
    }

    pub fn space(&self) -> &ConVectorSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim
    }

    pub fn action_matrices(&self) -> &[Mat] {
        &self.action
    }

    /// Matrix of `x ↦ x·a`.
    pub fn action(&self, a: &[Rational]) -> Mat {
        let n = self.dim();
        let mut m = Mat::zeros(n, n);
        for (k, ak) in a.iter().enumerate() {
            if !ak.is_zero() {
                m = m.add(&self.action[k].scale(ak));
            }
        }
        m
    }

    pub fn act(&self, x: &[Rational], a: &[Rational]) -> Vector {
        self.action(a).mul_vec(x)
    }

    pub fn is_strong(&self) -> bool {
        let e = &self.space;
        let a = &self.algebra.space;
        let all_a: Vec<Vector> = (0..a.dim).map(|k| unit(a.dim, k)).collect();
        let all_e: Vec<Vector> = (0..e.dim).map(|k| unit(e.dim, k)).collect();
        e.null.basis_vecs().iter().all(|z| all_a.iter().all(|x| e.null.contains_vec(&self.act(z, x))))
            && all_e.iter().all(|x| a.null.basis_vecs().iter().all(|z| e.null.contains_vec(&self.act(x, z))))
    }

    fn validate(&self) -> Result<(), String> {
        let (n, da) = (self.dim(), self.algebra.dim());
        if self.action.len() != da || self.action.iter().any(|m| m.rows() != n || m.cols() != n) {
            return Err("action shape".into());
        }
        if self.action(&self.algebra.unit) != Mat::identity(n) {
            return Err("unit acts non-trivially".into());
        }
        for i in 0..da {
            for j in 0..da {
                let lhs = self.action(&self.algebra.mult[i][j]);
                let rhs = self.action[j].mul(&self.action[i]);
                if lhs != rhs {
                    return Err(format!("action not associative on e{i} e{j}"));
                }
            }
        }
        for a in self.algebra.space.wobs.basis_vecs() {
            let r = self.action(&a);
            if !self.space.wobs.image(&r).is_subspace_of(&self.space.wobs) {
                return Err("E_W·A_W ⊄ E_W".into());
            }
            if !self.space.null.image(&r).is_subspace_of(&self.space.null) {
                return Err("E_N·A_W ⊄ E_N".into());
            }
        }
        Ok(())
    }

    /// Reduced module over the reduced algebra.
    pub fn reduce(&self) -> Result<ConModuleFD, CalgError> {
        let (ared, qa) = self.algebra.reduce()?;
        let qe = self.space.quotient();
        for z in self.algebra.space.null.basis_vecs() {
            for w in self.space.wobs.basis_vecs() {
                if !self.space.null.contains_vec(&self.act(&w, &z)) {
                    return Err(CalgError::IllDefinedQuotient("E_W·A_N ⊄ E_N".into()));
                }
            }
        }
        let m = qe.dim();
        let mut action = Vec::new();
        for a in qa.complement() {
            let r = self.action(a);
            let cols: Vec<Vector> = qe
                .complement()
                .iter()
                .map(|u| qe.project(&r.mul_vec(u)))
                .collect::<Result<_, _>>()
                .map_err(|_| CalgError::IllDefinedQuotient("E_W·A_W ⊄ E_W".into()))?;
            action.push(Mat::from_rows(cols, m).transpose());
        }
        let red = ConModuleFD { algebra: ared, space: ConVectorSpace::trivial(m), action };
        red.validate().map_err(CalgError::IllDefinedQuotient)?;
        Ok(red)
    }

    pub fn dsum(&self, other: &ConModuleFD) -> Result<ConModuleFD, CalgError> {
        if self.algebra != other.algebra {
            return Err(CalgError::BaseMismatch);
        }
        let (m, n) = (self.dim(), other.dim());
        let action = self
            .action
            .iter()
            .zip(&other.action)
            .map(|(a, b)| {
                let mut out = Mat::zeros(m + n, m + n);
                for r in 0..m {
                    for c in 0..m {
                        out[(r, c)] = a[(r, c)].clone();
                    }
                }
                for r in 0..n {
                    for c in 0..n {
                        out[(m + r, m + c)] = b[(r, c)].clone();
                    }
                }
                out
            })
            .collect();
        Ok(ConModuleFD { algebra: self.algebra.clone(), space: self.space.dsum(&other.space), action })
    }

    /// `Hom_A(self, other)` with its A-module structure `(Φ·a)(x) = Φ(x)·a`.
    pub fn hom(&self, other: &ConModuleFD) -> Result<ConModuleFD, CalgError> {
        if self.algebra != other.algebra {
            return Err(CalgError::BaseMismatch);
        }
        if !self.algebra.is_commutative() {
            return Err(CalgError::NonCommutativeBase);
        }
        let (e, f) = (self.dim(), other.dim());
        let n = e * f;
        let mut linear = Vec::new();
        for (re, rf) in self.action.iter().zip(&other.action) {
            // Φ·R^E_k − R^F_k·Φ = 0, entry (r, c).
            for r in 0..f {
                for c in 0..e {
                    let mut row = vec![Rational::zero(); n];
                    for k in 0..e {
                        row[r * e + k] += &re[(k, c)];
                    }
                    for k in 0..f {
                        row[k * e + c] -= &rf[(r, k)];
                    }
                    linear.push(row);
                }
            }
        }
        let total = solve_rows(n, linear.clone());
        let wobs = solve_rows(
            n,
            [linear.clone(), inclusion_rows(&self.space.wobs, &other.space.wobs), inclusion_rows(&self.space.null, &other.space.null)]
                .concat(),
        );
        let null = solve_rows(n, [linear, inclusion_rows(&self.space.wobs, &other.space.null)].concat());
        let flag = ConSubspace { total: total.clone(), wobs, null };
        let space = flag.coordinatize();
        let basis = total.basis_vecs();
        let mut action = Vec::new();
        for rf in &other.action {
            let cols: Vec<Vector> = basis
                .iter()
                .map(|b| {
                    let phi = Mat::from_rows(b.chunks(e).map(|c| c.to_vec()).collect(), e);
                    let img = rf.mul(&phi);
                    let flat: Vector = (0..f).flat_map(|r| img.row(r).to_vec()).collect();
                    total.coords(&flat).ok_or_else(|| CalgError::IllDefinedQuotient("Hom_A not closed under A".into()))
                })
                .collect::<Result<_, _>>()?;
            action.push(Mat::from_rows(cols, total.dim()).transpose());
        }
        let out = ConModuleFD { algebra: self.algebra.clone(), space, action };
        out.validate().map_err(CalgError::InvalidStructure)?;
        Ok(out)
    }

    pub fn dual(&self) -> Result<ConModuleFD, CalgError> {
        self.hom(&ConModuleFD::regular(&self.algebra))
    }
}

/// `E ⊗_A F` (or `E ⊠_A F`) as the quotient of the ℚ-tensor product by the
/// balancing relations `x·a ⊗ y − x ⊗ a·y`.
pub fn tensor_over_algebra(e: &ConModuleFD, f: &ConModuleFD, flavor: Flavor) -> Result<ConModuleFD, CalgError> {
    if e.algebra != f.algebra {
        return Err(CalgError::BaseMismatch);
    }
    if !e.algebra.is_commutative() {
        return Err(CalgError::NonCommutativeBase);
    }
    let (de, df) = (e.dim(), f.dim());
    let n = de * df;
    let mut rel = Vec::new();
    for (re, rf) in e.action.iter().zip(&f.action) {
        for i in 0..de {
            for j in 0..df {
                let xa = re.mul_vec(&unit(de, i));
                let ay = rf.mul_vec(&unit(df, j));
                rel.push(sub_vec(&kron_vec(&xa, &unit(df, j)), &kron_vec(&unit(de, i), &ay)));
            }
        }
    }
    let balancing = Subspace::span(n, &rel);
    let qt = Quotient::new(&Subspace::full(n), &balancing)?;
    let m = qt.dim();
    let flat = e.space.tensor(&f.space, flavor);
    let project_all = |s: &Subspace| -> Result<Subspace, CalgError> {
        let vecs: Vec<Vector> = s.basis_vecs().iter().map(|v| qt.project(v)).collect::<Result<_, _>>()?;
        Ok(Subspace::span(m, &vecs))
    };
    let space = ConVectorSpace::new(m, project_all(&flat.wobs)?, project_all(&flat.null)?)?;
    let mut action = Vec::new();
    for rf in &f.action {
        let lift = Mat::identity(de).kron(rf);
        for b in balancing.basis_vecs() {
            if !balancing.contains_vec(&lift.mul_vec(&b)) {
                return Err(CalgError::IllDefinedQuotient("action does not preserve balancing relations".into()));
            }
        }
        let cols: Vec<Vector> =
            qt.complement().iter().map(|u| qt.project(&lift.mul_vec(u))).collect::<Result<_, _>>()?;
        action.push(Mat::from_rows(cols, m).transpose());
    }
    let out = ConModuleFD { algebra: e.algebra.clone(), space, action };
    out.validate().map_err(CalgError::InvalidStructure)?;
    Ok(out)
}

/// Dual basis of a module: `covectors[n]` is an A-valued map, stored as a
/// `dim A × dim E` matrix. Positions follow the sorted labels of `index`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConDualBasis {
    pub index: ConIndexSet,
    pub vectors: Vec<Vector>,
    pub covectors: Vec<Mat>,
}

impl ConDualBasis {
    /// Standard basis and coordinate covectors of a module over the ground field.
    pub fn standard(index: ConIndexSet) -> ConDualBasis {
        let n = index.total().len();
        ConDualBasis {
            index,
            vectors: (0..n).map(|i| unit(n, i)).collect(),
            covectors: (0..n).map(|i| Mat::from_rows(vec![unit(n, i)], n)).collect(),
        }
    }

    fn classes(&self) -> Vec<SlotClass> {
        self.index.total().iter().map(|l| self.index.class_of(l).expect("label of index")).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualBasisReport {
    pub ok: bool,
    pub reason: Option<String>,
}

impl DualBasisReport {
    fn fail(reason: String) -> Self {
        DualBasisReport { ok: false, reason: Some(reason) }
    }
}

fn covector_maps_into(phi: &Mat, src: &Subspace, dst: &Subspace) -> bool {
    src.image(phi).is_subspace_of(dst)
}

pub fn verify_dual_basis(e: &ConModuleFD, db: &ConDualBasis) -> DualBasisReport {
    let classes = db.classes();
    let (n, de, da) = (classes.len(), e.dim(), e.algebra.dim());
    if db.vectors.len() != n || db.covectors.len() != n {
        return DualBasisReport::fail("family sizes differ from the index set".into());
    }
    if db.vectors.iter().any(|v| v.len() != de) || db.covectors.iter().any(|m| m.rows() != da || m.cols() != de) {
        return DualBasisReport::fail("family shapes do not match the module".into());
    }
    for (k, phi) in db.covectors.iter().enumerate() {
        for (b, re) in e.action.iter().enumerate() {
            let mb = e.algebra.right_mult(&unit(da, b));
            if phi.mul(re) != mb.mul(phi) {
                return DualBasisReport::fail(format!("covector {k} is not A-linear"));
            }
        }
    }
    for x in 0..de {
        let ex = unit(de, x);
        let mut acc = vec![Rational::zero(); de];
        for (v, phi) in db.vectors.iter().zip(&db.covectors) {
            let val = phi.mul_vec(&ex);
            let term = e.act(v, &val);
            add_into(&mut acc, &term, &Rational::one());
        }
        if acc != ex {
            return DualBasisReport::fail(format!("reconstruction fails on basis vector {x}"));
        }
    }
    let (ew, en) = (&e.space.wobs, &e.space.null);
    let (aw, an) = (&e.algebra.space.wobs, &e.algebra.space.null);
    for (k, c) in classes.iter().enumerate() {
        if c.in_wobs() && !ew.contains_vec(&db.vectors[k]) {
            return DualBasisReport::fail(format!("vector {k} is indexed in W but lies outside E_W"));
        }
        if c.in_null() && !en.contains_vec(&db.vectors[k]) {
            return DualBasisReport::fail(format!("vector {k} is indexed in N but lies outside E_N"));
        }
        let phi = &db.covectors[k];
        if !c.in_null() && !(covector_maps_into(phi, ew, aw) && covector_maps_into(phi, en, an)) {
            return DualBasisReport::fail(format!("covector {k} is not in (E*)_W"));
        }
        if !c.in_wobs() && !covector_maps_into(phi, ew, an) {
            return DualBasisReport::fail(format!("covector {k} is not in (E*)_N"));
        }
    }
    DualBasisReport { ok: true, reason: None }
}

/// Reduced families indexed by `W ∖ N`, as a dual basis of the reduced module.
pub fn reduce_dual_basis(e: &ConModuleFD, db: &ConDualBasis) -> Result<(ConModuleFD, ConDualBasis), CalgError> {
    let red = e.reduce()?;
    let (_, qa) = e.algebra.reduce()?;
    let qe = e.space.quotient();
    let classes = db.classes();
    let mut vectors = Vec::new();
    let mut covectors = Vec::new();
    for (k, c) in classes.iter().enumerate() {
        if *c != SlotClass::WobsOnly {
            continue;
        }
        vectors.push(qe.project(&db.vectors[k])?);
        let cols: Vec<Vector> =
            qe.complement().iter().map(|u| qa.project(&db.covectors[k].mul_vec(u))).collect::<Result<_, _>>()?;
        covectors.push(Mat::from_rows(cols, qa.dim()).transpose());
    }
    let index = ConIndexSet::from_classes(&vec![SlotClass::WobsOnly; vectors.len()]);
    Ok((red, ConDualBasis { index, vectors, covectors }))
}

/// Derivations of `A` inside `End(A_T)` (row-major `n×n` matrices), with the
/// constraint flag `D(A_W) ⊆ A_W, D(A_N) ⊆ A_N` and `D(A_W) ⊆ A_N`.
pub fn derivations(a: &ConAlgebraFD) -> ConSubspace {
    let n = a.dim();
    let nn = n * n;
    let mut leibniz = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for s in 0..n {
                let mut row = vec![Rational::zero(); nn];
                // Σ_k c_ij^k D_sk
                for k in 0..n {
                    row[s * n + k] += &a.mult[i][j][k];
                }
                // − Σ_r D_ri (e_r e_j)_s − Σ_r D_rj (e_i e_r)_s
                for r in 0..n {
                    row[r * n + i] -= &a.mult[r][j][s];
                    row[r * n + j] -= &a.mult[i][r][s];
                }
                leibniz.push(row);
            }
        }
    }
    let (w, z) = (&a.space.wobs, &a.space.null);
    ConSubspace {
        total: solve_rows(nn, leibniz.clone()),
        wobs: solve_rows(nn, [leibniz.clone(), inclusion_rows(w, w), inclusion_rows(z, z)].concat()),
        null: solve_rows(nn, [leibniz, inclusion_rows(w, z)].concat()),
    }
}

/// Derivations as a constraint Lie algebra under the commutator.
pub fn derivation_lie_algebra(a: &ConAlgebraFD) -> Result<ConLieAlgebraFD, CalgError> {
    let n = a.dim();
    let der = derivations(a);
    let basis: Vec<Mat> = der.total.basis_vecs().iter().map(|b| Mat::from_rows(b.chunks(n).map(|c| c.to_vec()).collect(), n)).collect();
    let m = basis.len();
    let mut bracket = vec![vec![vec![]; m]; m];
    for i in 0..m {
        for j in 0..m {
            let c = basis[i].mul(&basis[j]).sub(&basis[j].mul(&basis[i]));
            let flat: Vector = (0..n).flat_map(|r| c.row(r).to_vec()).collect();
            bracket[i][j] = der
                .total
                .coords(&flat)
                .ok_or_else(|| CalgError::InvalidStructure("commutator leaves the derivations".into()))?;
        }
    }
    ConLieAlgebraFD::new(der.coordinatize(), vec![0; m], 0, bracket)
}

/// Graded Lie algebra with degree shift `k`: `[ξ, η] = −(−1)^{(|ξ|+k)(|η|+k)} [η, ξ]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConLieAlgebraFD {
    space: ConVectorSpace,
    degrees: Vec<i32>,
    shift: i32,
    bracket: Vec<Vec<Vector>>,
}

impl ConLieAlgebraFD {
    pub fn new(space: ConVectorSpace, degrees: Vec<i32>, shift: i32, bracket: Vec<Vec<Vector>>) -> Result<Self, CalgError> {
        let g = ConLieAlgebraFD { space, degrees, shift, bracket };
        g.validate().map_err(CalgError::InvalidStructure)?;
        Ok(g)
    }

    /// Ungraded Lie algebra from structure constants `[e_i, e_j] = Σ c[i][j][m] e_m`.
    pub fn ungraded(space: ConVectorSpace, bracket: Vec<Vec<Vector>>) -> Result<Self, CalgError> {
        let n = space.dim;
        Self::new(space, vec![0; n], 0, bracket)
    }

    pub fn space(&self) -> &ConVectorSpace {
        &self.space
    }

    pub fn degrees(&self) -> &[i32] {
        &self.degrees
    }

    pub fn shift(&self) -> i32 {
        self.shift
    }

    pub fn structure(&self) -> &[Vec<Vector>] {
        &self.bracket
    }

    pub fn bracket(&self, x: &[Rational], y: &[Rational]) -> Vector {
        let n = self.space.dim;
        let mut out = vec![Rational::zero(); n];
        for i in 0..n {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if !y[j].is_zero() {
                    add_into(&mut out, &self.bracket[i][j], &(&x[i] * &y[j]));
                }
            }
        }
        out
    }

    fn sign(&self, i: usize, j: usize) -> Rational {
        let k = self.shift as i64;
        q(alt::sign_pow((self.degrees[i] as i64 + k) * (self.degrees[j] as i64 + k)))
    }

    fn homogeneous(&self, v: &[Rational]) -> Option<i32> {
        let mut deg = None;
        for (i, c) in v.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            match deg {
                None => deg = Some(self.degrees[i]),
                Some(d) if d != self.degrees[i] => return None,
                _ => {}
            }
        }
        deg.or(Some(i32::MIN))
    }

    fn validate(&self) -> Result<(), String> {
        let n = self.space.dim;
        if self.degrees.len() != n || self.bracket.len() != n || self.bracket.iter().any(|r| r.len() != n || r.iter().any(|v| v.len() != n)) {
            return Err("bracket shape".into());
        }
        for s in [&self.space.wobs, &self.space.null] {
            if s.basis_vecs().iter().any(|v| self.homogeneous(v).is_none()) {
                return Err("flag is not graded".into());
            }
        }
        let basis: Vec<Vector> = (0..n).map(|i| unit(n, i)).collect();
        for i in 0..n {
            for j in 0..n {
                let b = &self.bracket[i][j];
                match self.homogeneous(b) {
                    Some(d) if d == i32::MIN || d == self.degrees[i] + self.degrees[j] + self.shift => {}
                    _ => return Err(format!("[e{i}, e{j}] is not homogeneous of the right degree")),
                }
                let anti = scale_vec(&self.bracket[j][i], &-self.sign(i, j));
                if b != &anti {
                    return Err(format!("graded antisymmetry fails on (e{i}, e{j})"));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let lhs = self.bracket(&basis[i], &self.bracket[j][l]);
                    let mut rhs = self.bracket(&self.bracket[i][j], &basis[l]);
                    add_into(&mut rhs, &self.bracket(&basis[j], &self.bracket[i][l]), &self.sign(i, j));
                    if lhs != rhs {
                        return Err(format!("graded Jacobi fails on (e{i}, e{j}, e{l})"));
                    }
                }
            }
        }
        let (w, z) = (self.space.wobs.basis_vecs(), self.space.null.basis_vecs());
        for a in &w {
            for b in &w {
                if !self.space.wobs.contains_vec(&self.bracket(a, b)) {
                    return Err("[W, W] ⊄ W".into());
                }
            }
            for c in &z {
                if !self.space.null.contains_vec(&self.bracket(a, c)) || !self.space.null.contains_vec(&self.bracket(c, a)) {
                    return Err("[W, N] ⊄ N".into());
                }
            }
        }
        Ok(())
    }

    /// Reduced graded Lie algebra on `W / N`.
    pub fn reduce(&self) -> Result<ConLieAlgebraFD, CalgError> {
        let qt = self.space.quotient();
        let reps = qt.complement().to_vec();
        let m = reps.len();
        let degrees: Vec<i32> = reps.iter().map(|r| self.homogeneous(r).expect("graded flag")).collect();
        let mut bracket = vec![vec![vec![]; m]; m];
        for i in 0..m {
            for j in 0..m {
                bracket[i][j] = qt
                    .project(&self.bracket(&reps[i], &reps[j]))
                    .map_err(|_| CalgError::IllDefinedQuotient("[W, W] ⊄ W".into()))?;
            }
        }
        let red = ConLieAlgebraFD { space: ConVectorSpace::trivial(m), degrees, shift: self.shift, bracket };
        red.validate().map_err(CalgError::IllDefinedQuotient)?;
        Ok(red)
    }
}

/// Graded commutative algebra with a degree −1 graded Lie bracket on the
/// same constraint space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConGerstenhaberFD {
    pub algebra: ConAlgebraFD,
    pub lie: ConLieAlgebraFD,
}

impl ConGerstenhaberFD {
    pub fn new(algebra: ConAlgebraFD, lie: ConLieAlgebraFD) -> Result<Self, CalgError> {
        let g = ConGerstenhaberFD { algebra, lie };
        g.check_axioms().map_err(CalgError::InvalidStructure)?;
        Ok(g)
    }

    /// Graded commutativity, homogeneity of the product and the graded
    /// Leibniz rule `⟦ξ, ηχ⟧ = ⟦ξ, η⟧χ + (−1)^{(|ξ|−1)|η|} η⟦ξ, χ⟧`.
    pub fn check_axioms(&self) -> Result<(), String> {
        if self.algebra.space != self.lie.space {
            return Err("algebra and bracket live on different spaces".into());
        }
        if self.lie.shift != -1 {
            return Err("bracket must have degree −1".into());
        }
        let n = self.algebra.dim();
        let d = &self.lie.degrees;
        let basis: Vec<Vector> = (0..n).map(|i| unit(n, i)).collect();
        for i in 0..n {
            for j in 0..n {
                let p = &self.algebra.mult[i][j];
                match self.lie.homogeneous(p) {
                    Some(k) if k == i32::MIN || k == d[i] + d[j] => {}
                    _ => return Err(format!("e{i} e{j} is not homogeneous of degree |e{i}|+|e{j}|")),
                }
                let s = q(alt::sign_pow(d[i] as i64 * d[j] as i64));
                if p != &scale_vec(&self.algebra.mult[j][i], &s) {
                    return Err(format!("graded commutativity fails on (e{i}, e{j})"));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let lhs = self.lie.bracket(&basis[i], &self.algebra.mult[j][l]);
                    let mut rhs = self.algebra.mul(&self.lie.bracket[i][j], &basis[l]);
                    let s = q(alt::sign_pow((d[i] as i64 - 1) * d[j] as i64));
                    add_into(&mut rhs, &self.algebra.mul(&basis[j], &self.lie.bracket[i][l]), &s);
                    if lhs != rhs {
                        return Err(format!("graded Leibniz fails on (e{i}, e{j}, e{l})"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn reduce(&self) -> Result<ConGerstenhaberFD, CalgError> {
        let (algebra, _) = self.algebra.reduce()?;
        let lie = self.lie.reduce()?;
        let out = ConGerstenhaberFD { algebra, lie };
        out.check_axioms().map_err(CalgError::IllDefinedQuotient)?;
        Ok(out)
    }
}

/// `Λ•g` of an ungraded constraint Lie algebra, with the wedge product and
/// the bracket extended as a biderivation; the flag is `Λ_⊗`, i.e.
/// `W = Λ g_W` and `N = g_N ∧ Λ g_W`.
pub fn exterior_gerstenhaber(g: &ConLieAlgebraFD) -> Result<ConGerstenhaberFD, CalgError> {
    let n = g.space.dim;
    if g.degrees.iter().any(|&d| d != 0) || g.shift != 0 {
        return Err(CalgError::InvalidStructure("expects an ungraded Lie algebra".into()));
    }
    let tuples: Vec<Vec<usize>> = (0..=n).flat_map(|k| crate::cindex::increasing_tuples(n, k)).collect();
    let pos: BTreeMap<Vec<usize>, usize> = tuples.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
    let big = tuples.len();
    let degrees: Vec<i32> = tuples.iter().map(|t| t.len() as i32).collect();

    let wedge_basis = |a: &[usize], b: &[usize]| -> Vector {
        let mut v = vec![Rational::zero(); big];
        if let Some((s, t)) = alt::merge(a, b) {
            v[pos[&t]] = q(s);
        }
        v
    };
    let wedge_vec = |x: &[Rational], y: &[Rational]| -> Vector {
        let mut out = vec![Rational::zero(); big];
        for (i, a) in x.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in y.iter().enumerate() {
                if !b.is_zero() {
                    add_into(&mut out, &wedge_basis(&tuples[i], &tuples[j]), &(a * b));
                }
            }
        }
        out
    };
    let embed1 = |v: &[Rational]| -> Vector {
        let mut out = vec![Rational::zero(); big];
        for (i, c) in v.iter().enumerate() {
            out[pos[&vec![i]]] = c.clone();
        }
        out
    };

    let mult: Vec<Vec<Vector>> = (0..big).map(|i| (0..big).map(|j| wedge_basis(&tuples[i], &tuples[j])).collect()).collect();
    let mut unit_v = vec![Rational::zero(); big];
    unit_v[0] = Rational::one();

    // ⟦e_I, e_J⟧ = Σ_{p,q} (−1)^{p+q} [e_{I_p}, e_{J_q}] ∧ e_{I∖p} ∧ e_{J∖q}.
    let mut bracket = vec![vec![vec![Rational::zero(); big]; big]; big];
    for (a, ti) in tuples.iter().enumerate() {
        for (b, tj) in tuples.iter().enumerate() {
            let mut acc = vec![Rational::zero(); big];
            for p in 0..ti.len() {
                for qq in 0..tj.len() {
                    let inner = embed1(&g.bracket[ti[p]][tj[qq]]);
                    let rest = wedge_basis(&alt::without(ti, p), &alt::without(tj, qq));
                    let term = wedge_vec(&inner, &rest);
                    add_into(&mut acc, &term, &q(alt::sign_pow((p + qq) as i64)));
                }
            }
            bracket[a][b] = acc;
        }
    }

    let mut wobs_vecs = Vec::new();
    let mut null_vecs = Vec::new();
    let gw = g.space.wobs.basis_vecs();
    let gn = g.space.null.basis_vecs();
    for k in 0..=n {
        for sel in crate::cindex::increasing_tuples(gw.len(), k) {
            let mut v = unit(big, 0);
            for &s in &sel {
                v = wedge_vec(&v, &embed1(&gw[s]));
            }
            if !is_zero_vec(&v) {
                wobs_vecs.push(v.clone());
                for z in &gn {
                    null_vecs.push(wedge_vec(&embed1(z), &v));
                }
            }
        }
    }
    let space = ConVectorSpace::new(big, Subspace::span(big, &wobs_vecs), Subspace::span(big, &null_vecs))?;
    let algebra = ConAlgebraFD::new(space.clone(), mult, unit_v)?;
    let lie = ConLieAlgebraFD::new(space, degrees, -1, bracket)?;
    ConGerstenhaberFD::new(algebra, lie)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cindex::{Label, LabelSet};

    fn span(n: usize, idx: &[usize]) -> Subspace {
        Subspace::coordinate(n, idx.iter().copied())
    }

    fn cvs(n: usize, w: &[usize], z: &[usize]) -> ConVectorSpace {
        ConVectorSpace::new(n, span(n, w), span(n, z)).unwrap()
    }

    fn atoms(xs: &[u32]) -> LabelSet {
        xs.iter().map(|&x| Label::Atom(x)).collect()
    }

    #[test]
    fn morphism_examples() {
        let e = cvs(2, &[0], &[]);
        let id = ConLinearMap::new(e.clone(), e.clone(), Mat::identity(2)).unwrap();
        let c = classify_morphism(&id).unwrap();
        assert!(c.mono && c.epi && c.regular_mono && c.regular_epi && c.iso);

        let src = cvs(1, &[0], &[]);
        let dst = cvs(1, &[0], &[0]);
        let c = classify_morphism(&ConLinearMap::new(src, dst, Mat::identity(1)).unwrap()).unwrap();
        assert_eq!(c, MorphismClass { mono: true, epi: true, regular_mono: false, regular_epi: false, iso: false });

        let full = cvs(1, &[0], &[0]);
        let c = classify_morphism(&ConLinearMap::new(full.clone(), full, Mat::zeros(1, 1)).unwrap()).unwrap();
        assert!(!c.mono && !c.epi);

        let bad = ConLinearMap::new(cvs(1, &[0], &[0]), cvs(1, &[0], &[]), Mat::identity(1)).unwrap();
        assert_eq!(classify_morphism(&bad), Err(CalgError::NotConstraintMap));
    }

    #[test]
    fn kernel_image_examples() {
        let e = cvs(2, &[0], &[]);
        let k = kernel_image(&ConLinearMap::new(e.clone(), e.clone(), Mat::identity(2)).unwrap(), KernelImage::Kernel).unwrap();
        assert_eq!(k.dims(), ConDim { t: 0, w: 0, n: 0 });
        let z = kernel_image(&ConLinearMap::new(e.clone(), e.clone(), Mat::zeros(2, 2)).unwrap(), KernelImage::Image).unwrap();
        assert_eq!(z.dims(), ConDim { t: 0, w: 0, n: 0 });

        let phi = ConLinearMap::new(e, cvs(2, &[0, 1], &[0]), Mat::identity(2)).unwrap();
        let im = kernel_image(&phi, KernelImage::Image).unwrap();
        assert_eq!(im, ConSubspace { total: Subspace::full(2), wobs: span(2, &[0]), null: Subspace::zero(2) });
        let rim = kernel_image(&phi, KernelImage::RegularImage).unwrap();
        assert_eq!(rim, ConSubspace { total: Subspace::full(2), wobs: span(2, &[0]), null: span(2, &[0]) });
    }

    #[test]
    fn construction_examples() {
        let e = cvs(3, &[0, 1], &[0]);
        assert_eq!(e.dual(), cvs(3, &[1, 2], &[2]));
        let a = cvs(2, &[0], &[]);
        let b = cvs(1, &[0], &[0]);
        assert_eq!(a.dsum(&b).dims(), ConDim { t: 3, w: 2, n: 1 });
        let t = cvs(1, &[0], &[]).tensor(&b, Flavor::Tensor);
        assert_eq!(t.null, Subspace::full(1));
        assert!(matches!(construct(Construction::Tensor, &a, None), Err(CalgError::InvalidStructure(_))));
    }

    #[test]
    fn reduce_examples() {
        assert_eq!(cvs(3, &[0, 1], &[0]).red_dim(), 1);
        let e = cvs(3, &[0, 1], &[0]);
        let id = ConLinearMap::new(e.clone(), e, Mat::identity(3)).unwrap();
        assert_eq!(reduce_map(&id).unwrap(), Mat::identity(1));
    }

    fn gaussian_pair() -> (ConAlgebraFD, ConModuleFD) {
        let a = ConAlgebraFD::gaussian(cvs(2, &[0], &[])).unwrap();
        let e = ConModuleFD::new(a.clone(), cvs(2, &[0, 1], &[]), ConModuleFD::regular(&a).action.clone()).unwrap();
        (a, e)
    }

    #[test]
    fn gaussian_module_reduction() {
        let (_, e) = gaussian_pair();
        let red = e.reduce().unwrap();
        assert_eq!(red.dim(), 2);
        assert_eq!(red.algebra().dim(), 1);
    }

    #[test]
    fn gaussian_tensor_dimensions() {
        let (_, e) = gaussian_pair();
        let t = tensor_over_algebra(&e, &e, Flavor::Tensor).unwrap();
        assert_eq!(t.dim(), 2);
        assert_eq!(t.reduce().unwrap().dim(), 2);
        let red = e.reduce().unwrap();
        let t2 = tensor_over_algebra(&red, &red, Flavor::Tensor).unwrap();
        // ℚ(i) ⊗_ℚ ℚ(i) is four-dimensional, so the two sides differ.
        assert_eq!(t2.reduce().unwrap().dim(), 4);
        let s = tensor_over_algebra(&e, &e, Flavor::Strong).unwrap();
        assert_eq!(s.space().null().dim(), 0);
    }

    #[test]
    fn tensor_with_algebra_is_unit() {
        let (a, e) = gaussian_pair();
        let t = tensor_over_algebra(&e, &ConModuleFD::regular(&a), Flavor::Tensor).unwrap();
        assert_eq!(t.dim(), e.dim());
    }

    #[test]
    fn canonical_iso_examples() {
        let k = cvs(1, &[0], &[]);
        let m = canonical_iso(CanonicalIso::HomAsStrongTensor, &k, &k, None).unwrap();
        assert_eq!(m.matrix, Mat::identity(1));
        assert!(classify_morphism(&m).unwrap().iso);
        let e = cvs(2, &[0], &[]);
        let f = cvs(1, &[0], &[0]);
        for which in [CanonicalIso::DualOfTensor, CanonicalIso::DualOfStrongTensor] {
            assert!(classify_morphism(&canonical_iso(which, &e, &f, None).unwrap()).unwrap().iso);
        }
        let adj = canonical_iso(CanonicalIso::HomAdjunction, &e, &f, Some(&k)).unwrap();
        assert!(classify_morphism(&adj).unwrap().iso);
    }

    #[test]
    fn dual_basis_examples() {
        let e = ConModuleFD::over_ground(cvs(2, &[0], &[]));
        let good = ConDualBasis::standard(ConIndexSet::new(atoms(&[1, 2]), atoms(&[1]), atoms(&[])).unwrap());
        assert!(verify_dual_basis(&e, &good).ok);
        let bad = ConDualBasis::standard(ConIndexSet::new(atoms(&[1, 2]), atoms(&[2]), atoms(&[])).unwrap());
        let r = verify_dual_basis(&e, &bad);
        assert!(!r.ok && r.reason.is_some());
        let zero = ConModuleFD::over_ground(ConVectorSpace::trivial(0));
        let empty = ConDualBasis::standard(ConIndexSet::from_classes(&[]));
        assert!(verify_dual_basis(&zero, &empty).ok);
    }

    #[test]
    fn derivation_examples() {
        assert_eq!(derivations(&ConAlgebraFD::ground()).total.dim(), 0);
        let a = ConAlgebraFD::dual_numbers(cvs(2, &[0, 1], &[1])).unwrap();
        let der = derivations(&a);
        // x∂x: 1 ↦ 0, x ↦ x, i.e. the matrix unit at (1, 1).
        assert_eq!(der.total, Subspace::span(4, &[vec![q(0), q(0), q(0), q(1)]]));
        let lie = derivation_lie_algebra(&a).unwrap();
        assert_eq!(lie.space().dim(), 1);
    }

    #[test]
    fn module_hom_and_dual() {
        let (_, e) = gaussian_pair();
        let d = e.dual().unwrap();
        assert_eq!(d.dim(), 2);
        let h = e.hom(&e).unwrap();
        assert_eq!(h.dim(), 2);
        assert!(e.dsum(&e).unwrap().space().dims() == ConDim { t: 4, w: 4, n: 0 });
    }

    #[test]
    fn exterior_algebra_of_affine_lie_algebra() {
        // [x, y] = y with y spanning N.
        let br = vec![
            vec![vec![q(0), q(0)], vec![q(0), q(1)]],
            vec![vec![q(0), q(-1)], vec![q(0), q(0)]],
        ];
        let g = ConLieAlgebraFD::ungraded(cvs(2, &[0, 1], &[1]), br).unwrap();
        let ger = exterior_gerstenhaber(&g).unwrap();
        assert_eq!(ger.algebra.dim(), 4);
        let red = ger.reduce().unwrap();
        assert_eq!(red.algebra.dim(), 2);
    }

    #[test]
    fn sign_broken_lie_rejected() {
        let br = vec![
            vec![vec![q(0), q(0)], vec![q(0), q(1)]],
            vec![vec![q(0), q(1)], vec![q(0), q(0)]],
        ];
        assert!(matches!(ConLieAlgebraFD::ungraded(ConVectorSpace::trivial(2), br), Err(CalgError::InvalidStructure(_))));
    }
}
