//! Graph-type Dirac structures on `ℝ^(d_T, d_W, d_N)`: Poisson bivectors,
//! presymplectic forms, the cotangent algebroid and Poisson–Nijenhuis pairs.

use thiserror::Error;

use crate::algd::{AlgdError, AlgebroidData};
use crate::cartan::{
    bivector_matrix, courant, de_rham, insertion, is_nijenhuis, lie_derivative, nijenhuis, schouten, vf_bracket, CartanError, EndField, KForm, MultiVector, VectorField,
};
use crate::cgeo::{sample_points_on_c, ConSpace, TrivBundle};
use crate::cindex::Flavor;
use crate::exact::{qf, Mat, Rational, Subspace};
use crate::par;
use crate::poly::Poly;
use crate::report::Report;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiracError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("check fails: {0}")]
    CheckFails(String),
    #[error(transparent)]
    Cartan(#[from] CartanError),
    #[error(transparent)]
    Algd(#[from] AlgdError),
}

/// Strong bivector on the tangent bundle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoissonData {
    pub pi: MultiVector,
}

impl PoissonData {
    pub fn new(pi: MultiVector) -> Result<Self, DiracError> {
        if pi.degree != 2 || pi.flavor != Flavor::Strong || pi.slots != pi.space.tangent_classes() {
            return Err(DiracError::Shape("expected a strong bivector on the tangent bundle".into()));
        }
        Ok(PoissonData { pi })
    }

    pub fn space(&self) -> ConSpace {
        self.pi.space
    }

    /// `π^{ij}` with `π♯(dx^i) = Σ_j π^{ij} ∂_j`.
    pub fn matrix(&self) -> Vec<Vec<Poly>> {
        bivector_matrix(&self.pi)
    }

    pub fn sharp(&self, xi: &KForm) -> VectorField {
        let m = self.matrix();
        let n = self.space().nvars();
        let comps = (0..n)
            .map(|j| (0..n).fold(Poly::zero(n), |acc, i| &acc + &(&xi.get(&[i]) * &m[i][j])))
            .collect();
        VectorField { space: self.space(), comps }
    }
}

/// Strong 2-form on the cotangent bundle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PresymplecticData {
    pub omega: KForm,
}

impl PresymplecticData {
    pub fn new(omega: KForm) -> Result<Self, DiracError> {
        if omega.degree != 2 || omega.flavor != Flavor::Strong || omega.slots != omega.space.cotangent_classes() {
            return Err(DiracError::Shape("expected a strong 2-form on the cotangent bundle".into()));
        }
        Ok(PresymplecticData { omega })
    }

    pub fn space(&self) -> ConSpace {
        self.omega.space
    }

    /// `ω♭(X) = i_X ω`.
    pub fn flat(&self, x: &VectorField) -> KForm {
        insertion(x, &self.omega).expect("degree 2")
    }
}

/// `⟦π, π⟧ = 0` and `π` observable in the strong flavor.
pub fn check_poisson(p: &PoissonData) -> Report {
    let mut rep = Report::new("poisson");
    let s = schouten(&p.pi, &p.pi).expect("same bivector");
    rep.record("schouten", (!s.is_zero()).then(|| format!("[[pi, pi]] has {} nonzero components", s.comps().len())));
    rep.record("class", p.pi.w_witness());
    rep
}

pub fn reduce_poisson(p: &PoissonData) -> Result<PoissonData, DiracError> {
    if let Some(v) = check_poisson(p).first_failure() {
        return Err(DiracError::CheckFails(v.name.clone()));
    }
    let red = PoissonData::new(p.pi.reduce()?)?;
    assert!(schouten(&red.pi, &red.pi)?.is_zero(), "reduced bivector must stay Poisson");
    Ok(red)
}

/// `dω = 0` and `ω` observable in the strong flavor.
pub fn check_presymplectic(q: &PresymplecticData) -> Report {
    let mut rep = Report::new("presymplectic");
    let d = de_rham(&q.omega).expect("cotangent form");
    rep.record("closed", (!d.is_zero()).then(|| format!("dω has {} nonzero components", d.comps().len())));
    rep.record("class", q.omega.w_witness());
    rep
}

pub fn reduce_presymplectic(q: &PresymplecticData) -> Result<PresymplecticData, DiracError> {
    if let Some(v) = check_presymplectic(q).first_failure() {
        return Err(DiracError::CheckFails(v.name.clone()));
    }
    let red = PresymplecticData::new(q.omega.reduce()?)?;
    assert!(de_rham(&red.omega)?.is_zero(), "reduced form must stay closed");
    Ok(red)
}

/// `T*M` with anchor `π♯` and `[dx^i, dx^j] = Σ_m ∂_m π^{ij} dx^m`.
pub fn cotangent_algebroid(p: &PoissonData) -> Result<AlgebroidData, DiracError> {
    if let Some(v) = check_poisson(p).first_failure() {
        return Err(DiracError::CheckFails(v.name.clone()));
    }
    Ok(cotangent_algebroid_unchecked(p))
}

/// The same data without requiring `π` to be Poisson.
pub fn cotangent_algebroid_unchecked(p: &PoissonData) -> AlgebroidData {
    let space = p.space();
    let n = space.nvars();
    let m = p.matrix();
    let anchor = (0..n).map(|j| (0..n).map(|i| m[i][j].clone()).collect()).collect();
    let structure = (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| m[i][j].partial(k)).collect()).collect()).collect();
    AlgebroidData::new(TrivBundle::cotangent(space), anchor, structure).expect("antisymmetric by construction")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiracGraph {
    Bivector(PoissonData),
    TwoForm(PresymplecticData),
}

impl DiracGraph {
    pub fn space(&self) -> ConSpace {
        match self {
            DiracGraph::Bivector(p) => p.space(),
            DiracGraph::TwoForm(q) => q.space(),
        }
    }

    /// `π♯(dx^i) + dx^i`, or `∂_i + i_{∂_i} ω`.
    pub fn frame(&self) -> Vec<(VectorField, KForm)> {
        let space = self.space();
        let n = space.nvars();
        (0..n)
            .map(|i| match self {
                DiracGraph::Bivector(p) => {
                    let mut dx = KForm::zero(space, 1, Flavor::Strong);
                    dx.add_term(&[i], Poly::one(n));
                    (p.sharp(&dx), dx)
                }
                DiracGraph::TwoForm(q) => {
                    let d = VectorField::coord(space, i);
                    let f = q.flat(&d);
                    (d, f)
                }
            })
            .collect()
    }

    /// Residual of `(X, ξ)` against membership in the graph.
    fn residual(&self, x: &VectorField, xi: &KForm) -> (VectorField, KForm) {
        match self {
            DiracGraph::Bivector(p) => (x.sub(&p.sharp(xi)), KForm::zero(self.space(), 1, Flavor::Strong)),
            DiracGraph::TwoForm(q) => (VectorField::zero(self.space()), xi.sub(&q.flat(x)).expect("1-forms")),
        }
    }
}

fn pairing(a: &(VectorField, KForm), b: &(VectorField, KForm)) -> Poly {
    let ab = insertion(&b.0, &a.1).expect("1-form").get(&[]);
    let ba = insertion(&a.0, &b.1).expect("1-form").get(&[]);
    (&ab + &ba).scale(&qf(1, 2))
}

fn eval_pair(v: &(VectorField, KForm), pt: &[Rational]) -> Vec<Rational> {
    let n = pt.len();
    let mut out: Vec<Rational> = v.0.comps.iter().map(|f| f.eval(pt).expect("arity")).collect();
    out.extend((0..n).map(|i| v.1.get(&[i]).eval(pt).expect("arity")));
    out
}

/// `L = L^⊥` for the span of the frame evaluated at each point.
fn lagrangian_at(frame: &[(VectorField, KForm)], pt: &[Rational]) -> bool {
    let n = pt.len();
    let rows: Vec<Vec<Rational>> = frame.iter().map(|v| eval_pair(v, pt)).collect();
    let f = Mat::from_rows(rows, 2 * n);
    let half = qf(1, 2);
    let mut g = Mat::zeros(2 * n, 2 * n);
    let mut grows = g.row_vecs();
    for i in 0..n {
        grows[i][n + i] = half.clone();
        grows[n + i][i] = half.clone();
    }
    g = Mat::from_rows(grows, 2 * n);
    let l = Subspace::row_space(&f);
    let perp = f.mul(&g).kernel();
    l.dim() == n && l.is_subspace_of(&perp) && perp.is_subspace_of(&l)
}

pub const LAGRANGIAN_SAMPLES: usize = 12;

/// Lagrangian (symbolic Gram and sampled), involutivity through Courant
/// residuals cross-checked against `⟦π, π⟧` or `dω`, and the class condition.
pub fn dirac_check(l: &DiracGraph) -> Report {
    let space = l.space();
    let n = space.nvars();
    let frame = l.frame();
    let mut rep = Report::new("dirac");

    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let gram = pairs.iter().find_map(|&(i, j)| {
        let g = pairing(&frame[i], &frame[j]);
        (!g.is_zero()).then(|| format!("<s{}, s{}> = {g}", i + 1, j + 1))
    });
    rep.record("isotropic", gram);
    rep.flag("rank", frame.len() == n);
    let pts = sample_points_on_c(&space, LAGRANGIAN_SAMPLES);
    let bad = par::map(&pts, |pt| !lagrangian_at(&frame, pt));
    rep.record("lagrangian_samples", bad.iter().position(|&b| b).map(|k| format!("L ≠ L^⊥ at {:?}", pts[k].iter().map(|r| r.to_string()).collect::<Vec<_>>())));

    let brackets: Vec<(usize, usize)> = pairs.iter().copied().filter(|(i, j)| i < j).collect();
    let residuals = par::map(&brackets, |&(i, j)| {
        let (x, xi) = courant(&frame[i].0, &frame[i].1, &frame[j].0, &frame[j].1).expect("strong 1-forms");
        let (rx, rxi) = l.residual(&x, &xi);
        (!(rx.is_zero() && rxi.is_zero())).then(|| format!("[[s{}, s{}]] leaves L", i + 1, j + 1))
    });
    let inv = residuals.into_iter().flatten().next();
    let oracle_closed = match l {
        DiracGraph::Bivector(p) => schouten(&p.pi, &p.pi).expect("same bivector").is_zero(),
        DiracGraph::TwoForm(q) => de_rham(&q.omega).expect("cotangent form").is_zero(),
    };
    rep.flag("oracle_agrees", inv.is_none() == oracle_closed);
    rep.record("involutive", inv);
    let witness = match l {
        DiracGraph::Bivector(p) => p.pi.w_witness(),
        DiracGraph::TwoForm(q) => q.omega.w_witness(),
    };
    rep.record("class", witness);
    rep
}

pub fn dirac_reduce(l: &DiracGraph) -> Result<DiracGraph, DiracError> {
    if let Some(v) = dirac_check(l).first_failure() {
        return Err(DiracError::CheckFails(v.name.clone()));
    }
    let red = match l {
        DiracGraph::Bivector(p) => DiracGraph::Bivector(PoissonData::new(p.pi.reduce()?)?),
        DiracGraph::TwoForm(q) => DiracGraph::TwoForm(PresymplecticData::new(q.omega.reduce()?)?),
    };
    if let Some(v) = dirac_check(&red).first_failure() {
        return Err(DiracError::CheckFails(format!("reduced graph: {}", v.name)));
    }
    Ok(red)
}

/// Poisson bivector with a `(1,1)`-tensor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PNData {
    pub pi: PoissonData,
    pub a: EndField,
}

impl PNData {
    pub fn new(pi: PoissonData, a: EndField) -> Result<Self, DiracError> {
        if pi.space() != a.space {
            return Err(DiracError::Shape("π and A live on different spaces".into()));
        }
        Ok(PNData { pi, a })
    }
}

/// `(L_X A) Y = [X, AY] − A[X, Y]`.
fn lie_end(x: &VectorField, a: &EndField, y: &VectorField) -> VectorField {
    vf_bracket(x, &a.apply(y)).expect("same space").sub(&a.apply(&vf_bracket(x, y).expect("same space")))
}

/// `C(dx^i, ∂_j, dx^k) = dx^k((L_{π♯dx^i} A) ∂_j) − dx^i((L_{π♯dx^k} A) ∂_j) + (A∂_j)(π^{ik}) − ∂_j(π(A^* dx^i, dx^k))`.
pub fn concomitant(s: &PNData, i: usize, j: usize, k: usize) -> Poly {
    let space = s.pi.space();
    let n = space.nvars();
    let m = s.pi.matrix();
    let sharp = |r: usize| VectorField { space, comps: m[r].clone() };
    let dj = VectorField::coord(space, j);
    let t1 = lie_end(&sharp(i), &s.a, &dj).comps[k].clone();
    let t2 = lie_end(&sharp(k), &s.a, &dj).comps[i].clone();
    let t3 = s.a.apply(&dj).apply(&m[i][k]);
    let pa = (0..n).fold(Poly::zero(n), |acc, a| &acc + &(&s.a.matrix[i][a] * &m[a][k]));
    let t4 = pa.partial(j);
    &(&(&t1 - &t2) + &t3) - &t4
}

pub fn check_pn(s: &PNData) -> Report {
    let space = s.pi.space();
    let n = space.nvars();
    let mut rep = Report::new("poisson-nijenhuis");
    rep.flag("poisson", check_poisson(&s.pi).pass());
    rep.flag("a_class", s.a.class().in_w);
    let torsion = nijenhuis(&s.a).into_iter().find(|(_, v)| !v.is_zero()).map(|((i, j), _)| format!("N_A(d{}, d{}) ≠ 0", i + 1, j + 1));
    debug_assert_eq!(torsion.is_none(), is_nijenhuis(&s.a));
    rep.record("nijenhuis", torsion);

    let m = s.pi.matrix();
    let a = &s.a.matrix;
    let mut compat = None;
    'outer: for i in 0..n {
        for k in 0..n {
            let lhs = (0..n).fold(Poly::zero(n), |acc, r| &acc + &(&m[i][r] * &a[k][r]));
            let rhs = (0..n).fold(Poly::zero(n), |acc, r| &acc + &(&a[i][r] * &m[r][k]));
            if lhs != rhs {
                compat = Some(format!("(πAᵀ)[{},{}] = {lhs} but (Aπ)[{},{}] = {rhs}", i + 1, k + 1, i + 1, k + 1));
                break 'outer;
            }
        }
    }
    rep.record("compatible", compat);

    let triples: Vec<(usize, usize, usize)> = (0..n).flat_map(|i| (0..n).flat_map(move |j| (0..n).map(move |k| (i, j, k)))).collect();
    let conc = par::map(&triples, |&(i, j, k)| {
        let c = concomitant(s, i, j, k);
        (!c.is_zero()).then(|| format!("C(dx{}, d{}, dx{}) = {c}", i + 1, j + 1, k + 1))
    });
    rep.record("concomitant", conc.into_iter().flatten().next());
    rep
}

pub fn reduce_pn(s: &PNData) -> Result<PNData, DiracError> {
    if let Some(v) = check_pn(s).first_failure() {
        return Err(DiracError::CheckFails(v.name.clone()));
    }
    let red = PNData::new(reduce_poisson(&s.pi)?, s.a.reduce()?)?;
    if let Some(v) = check_pn(&red).first_failure() {
        return Err(DiracError::CheckFails(format!("reduced pair: {}", v.name)));
    }
    Ok(red)
}

/// `[α, β] = L_{π♯α} β − L_{π♯β} α − d π(α, β)`, evaluated with the Cartan
/// calculus rather than structure functions.
pub fn koszul_bracket_direct(p: &PoissonData, a: &KForm, b: &KForm) -> Result<KForm, DiracError> {
    let (xa, xb) = (p.sharp(a), p.sharp(b));
    let pab = insertion(&xa, b)?;
    Ok(lie_derivative(&xa, b)?.sub(&lie_derivative(&xb, a)?)?.sub(&de_rham(&pab)?)?)
}

/// Canonical `π = ∂_2∧∂_3 + ∂_1∧∂_4` on `ℝ^(4,3,1)`.
pub fn canonical_example() -> PoissonData {
    let space = ConSpace::new(4, 3, 1).expect("nested");
    let mut pi = MultiVector::zero(space, 2, Flavor::Strong);
    pi.add_term(&[1, 2], Poly::one(4));
    pi.add_term(&[0, 3], Poly::one(4));
    PoissonData::new(pi).expect("bivector")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algd::{check_classical, check_constraint, reduce_algebroid};
    use crate::exact::q;

    fn p(s: &str, n: usize) -> Poly {
        Poly::parse(s, n).unwrap()
    }

    fn bivector(space: ConSpace, terms: &[(&[usize], &str)]) -> PoissonData {
        let pi = MultiVector::from_terms(space, 2, Flavor::Strong, terms.iter().map(|(t, c)| (t.to_vec(), p(c, space.nvars())))).unwrap();
        PoissonData::new(pi).unwrap()
    }

    fn two_form(space: ConSpace, terms: &[(&[usize], &str)]) -> PresymplecticData {
        let w = KForm::from_terms(space, 2, Flavor::Strong, terms.iter().map(|(t, c)| (t.to_vec(), p(c, space.nvars())))).unwrap();
        PresymplecticData::new(w).unwrap()
    }

    #[test]
    fn poisson_examples() {
        let c = canonical_example();
        assert!(check_poisson(&c).pass());
        let r = reduce_poisson(&c).unwrap();
        assert_eq!(r, bivector(ConSpace::plain(2), &[(&[0, 1], "1")]));
        let zero = bivector(c.space(), &[]);
        assert!(check_poisson(&zero).pass());
        assert!(reduce_poisson(&zero).unwrap().pi.is_zero());
        let bad = bivector(c.space(), &[(&[1, 2], "x1")]);
        let rep = check_poisson(&bad);
        assert!(rep.get("schouten").unwrap().pass);
        assert!(!rep.get("class").unwrap().pass);
        assert!(matches!(reduce_poisson(&bad), Err(DiracError::CheckFails(_))));
    }

    #[test]
    fn presymplectic_reduction() {
        let m = ConSpace::new(4, 3, 1).unwrap();
        let w = two_form(m, &[(&[1, 2], "1")]);
        assert!(check_presymplectic(&w).pass());
        assert_eq!(reduce_presymplectic(&w).unwrap(), two_form(ConSpace::plain(2), &[(&[0, 1], "1")]));
    }

    #[test]
    fn cotangent_algebroid_examples() {
        let c = canonical_example();
        let a = cotangent_algebroid(&c).unwrap();
        assert!(a.structure.iter().flatten().flatten().all(Poly::is_zero));
        assert!(check_classical(&a).pass());
        assert!(check_constraint(&a).unwrap().pass());

        let zero = cotangent_algebroid(&bivector(ConSpace::plain(2), &[])).unwrap();
        assert!(zero.anchor.iter().flatten().all(Poly::is_zero));

        // Lie–Poisson of so(3): π^{12} = x3, π^{23} = x1, π^{31} = x2.
        let lp = bivector(ConSpace::plain(3), &[(&[0, 1], "x3"), (&[1, 2], "x1"), (&[0, 2], "-x2")]);
        let a = cotangent_algebroid(&lp).unwrap();
        assert_eq!(a.structure[0][1][2], Poly::one(3));
        assert_eq!(a.structure[1][2][0], Poly::one(3));
        assert_eq!(a.structure[0][2][1], Poly::int(3, -1));
        assert!(check_classical(&a).pass());
        for i in 0..3 {
            for j in 0..3 {
                let mut dxi = KForm::zero(lp.space(), 1, Flavor::Strong);
                dxi.add_term(&[i], Poly::one(3));
                let mut dxj = KForm::zero(lp.space(), 1, Flavor::Strong);
                dxj.add_term(&[j], Poly::one(3));
                let direct = koszul_bracket_direct(&lp, &dxi, &dxj).unwrap();
                for m in 0..3 {
                    assert_eq!(direct.get(&[m]), a.structure[i][j][m]);
                }
            }
        }
    }

    #[test]
    fn reduction_commutes_with_cotangent() {
        let c = canonical_example();
        let lhs = reduce_algebroid(&cotangent_algebroid(&c).unwrap()).unwrap();
        let rhs = cotangent_algebroid(&reduce_poisson(&c).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn dirac_examples() {
        let c = DiracGraph::Bivector(canonical_example());
        assert!(dirac_check(&c).pass());
        let r = dirac_reduce(&c).unwrap();
        assert_eq!(r, DiracGraph::Bivector(bivector(ConSpace::plain(2), &[(&[0, 1], "1")])));

        // v = (π^23, π^31, π^12) = (1, 0, x3) is curl-free, so this one is Poisson.
        let curl_free = DiracGraph::Bivector(bivector(ConSpace::plain(3), &[(&[0, 1], "x3"), (&[1, 2], "1")]));
        assert!(dirac_check(&curl_free).pass());
        // v = (x2, 0, 1): v · curl v = −1.
        let bad = DiracGraph::Bivector(bivector(ConSpace::plain(3), &[(&[0, 1], "1"), (&[1, 2], "x2")]));
        let rep = dirac_check(&bad);
        assert!(!rep.get("involutive").unwrap().pass);
        assert!(rep.get("oracle_agrees").unwrap().pass);
        assert!(rep.get("lagrangian_samples").unwrap().pass);

        let w = DiracGraph::TwoForm(two_form(ConSpace::plain(2), &[(&[0, 1], "1")]));
        assert!(dirac_check(&w).pass());
        let z = DiracGraph::Bivector(bivector(ConSpace::new(3, 2, 1).unwrap(), &[]));
        assert_eq!(dirac_reduce(&z).unwrap(), DiracGraph::Bivector(bivector(ConSpace::plain(1), &[])));

        let open = DiracGraph::TwoForm(two_form(ConSpace::plain(3), &[(&[0, 1], "x3")]));
        let rep = dirac_check(&open);
        assert!(!rep.get("involutive").unwrap().pass);
        assert!(rep.get("oracle_agrees").unwrap().pass);
    }

    #[test]
    fn closed_form_reduces_closed() {
        let m = ConSpace::new(4, 3, 1).unwrap();
        let w = DiracGraph::TwoForm(two_form(m, &[(&[1, 2], "1 + x2"), (&[0, 3], "x1")]));
        assert!(dirac_check(&w).pass());
        let DiracGraph::TwoForm(r) = dirac_reduce(&w).unwrap() else { panic!("kind changes") };
        assert_eq!(r, two_form(ConSpace::plain(2), &[(&[0, 1], "1 + x1")]));
    }

    #[test]
    fn pn_examples() {
        let c = canonical_example();
        let id = EndField::identity(c.space());
        let s = PNData::new(c.clone(), id.clone()).unwrap();
        assert!(check_pn(&s).pass());
        let lam = EndField::new(c.space(), id.matrix.iter().map(|r| r.iter().map(|f| f.scale(&q(3))).collect()).collect()).unwrap();
        let s = PNData::new(c.clone(), lam).unwrap();
        assert!(check_pn(&s).pass());
        let r = reduce_pn(&s).unwrap();
        assert_eq!(r.a.matrix, vec![vec![Poly::int(2, 3), Poly::zero(2)], vec![Poly::zero(2), Poly::int(2, 3)]]);

        // A = diag(1, 2, 1, 1) is constant but does not commute with π.
        let mut mat = id.matrix.clone();
        mat[1][1] = Poly::int(4, 2);
        let s = PNData::new(c.clone(), EndField::new(c.space(), mat).unwrap()).unwrap();
        let rep = check_pn(&s);
        assert!(!rep.get("compatible").unwrap().pass);
        assert!(rep.get("nijenhuis").unwrap().pass);
    }
}
