//! Exact rational scalars, dense matrices and subspaces of ℚⁿ.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Exact rational number, always in lowest terms with a positive denominator.
pub type Rational = BigRational;

/// Integer as a rational.
pub fn q(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// The fraction `n/d`. Panics on `d == 0`.
pub fn qf(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("subspace is not contained in the ambient subspace")]
    NotContained,
}

/// Dense row-major matrix over ℚ.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mat{}x{}[", self.rows, self.cols)?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = self.row(r).iter().map(|x| x.to_string()).collect();
            write!(f, "{}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    /// Builds a matrix from rational rows. All rows must share one length;
    /// `cols` is only consulted when `rows` is empty.
    pub fn from_rows(rows: Vec<Vec<Rational>>, cols: usize) -> Self {
        let cols = rows.first().map_or(cols, |r| r.len());
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend(r);
        }
        Mat { rows: n, cols, data }
    }

    pub fn from_ints(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect(), cols)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[Rational] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn col(&self, c: usize) -> Vec<Rational> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "matrix product shape");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(self.cols, v.len(), "matrix-vector shape");
        (0..self.rows)
            .map(|r| {
                let mut acc = Rational::zero();
                for (a, b) in self.row(r).iter().zip(v) {
                    if !a.is_zero() && !b.is_zero() {
                        acc += a * b;
                    }
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: &Rational) -> Mat {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * s).collect() }
    }

    /// Kronecker product; index `(i*p + k, j*q + l)` holds `a_ij b_kl`.
    pub fn kron(&self, other: &Mat) -> Mat {
        let mut out = Mat::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = &self[(i, j)];
                if a.is_zero() {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] = a * &other[(k, l)];
                    }
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.cols, "vstack width");
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Mat { rows: self.rows + other.rows, cols: self.cols, data }
    }

    /// Reduced row-echelon form (same shape) together with the pivot columns.
    pub fn rref_with_pivots(&self) -> (Mat, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut lead = 0;
        for c in 0..m.cols {
            if lead == m.rows {
                break;
            }
            let Some(p) = (lead..m.rows).find(|&r| !m[(r, c)].is_zero()) else {
                continue;
            };
            m.swap_rows(lead, p);
            let inv = m[(lead, c)].recip();
            for j in c..m.cols {
                let v = &m[(lead, j)] * &inv;
                m[(lead, j)] = v;
            }
            for r in 0..m.rows {
                if r == lead || m[(r, c)].is_zero() {
                    continue;
                }
                let f = m[(r, c)].clone();
                for j in c..m.cols {
                    let v = &m[(lead, j)] * &f;
                    if !v.is_zero() {
                        m[(r, j)] -= v;
                    }
                }
            }
            pivots.push(c);
            lead += 1;
        }
        (m, pivots)
    }

    pub fn rref(&self) -> Mat {
        self.rref_with_pivots().0
    }

    pub fn rank(&self) -> usize {
        self.rref_with_pivots().1.len()
    }

    /// Null space `{v : self·v = 0}`.
    pub fn kernel(&self) -> Subspace {
        let (r, pivots) = self.rref_with_pivots();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let vecs = free
            .iter()
            .map(|&f| {
                let mut v = vec![Rational::zero(); self.cols];
                v[f] = Rational::one();
                for (i, &p) in pivots.iter().enumerate() {
                    v[p] = -r[(i, f)].clone();
                }
                v
            })
            .collect::<Vec<_>>();
        Subspace::span(self.cols, &vecs)
    }

    /// Some solution of `self·x = b`, if one exists.
    pub fn solve(&self, b: &[Rational]) -> Option<Vec<Rational>> {
        assert_eq!(b.len(), self.rows, "right-hand side length");
        let mut aug = Mat::zeros(self.rows, self.cols + 1);
        for r in 0..self.rows {
            for c in 0..self.cols {
                aug[(r, c)] = self[(r, c)].clone();
            }
            aug[(r, self.cols)] = b[r].clone();
        }
        let (red, pivots) = aug.rref_with_pivots();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![Rational::zero(); self.cols];
        for (i, &p) in pivots.iter().enumerate() {
            x[p] = red[(i, self.cols)].clone();
        }
        Some(x)
    }

    /// Inverse of a square matrix, if it is invertible.
    pub fn inverse(&self) -> Option<Mat> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut aug = Mat::zeros(n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                aug[(r, c)] = self[(r, c)].clone();
            }
            aug[(r, n + r)] = Rational::one();
        }
        let (red, pivots) = aug.rref_with_pivots();
        if pivots.len() < n || pivots[n - 1] >= n {
            return None;
        }
        let mut inv = Mat::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                inv[(r, c)] = red[(r, n + c)].clone();
            }
        }
        Some(inv)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = Rational;
    fn index(&self, (r, c): (usize, usize)) -> &Rational {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Rational {
        &mut self.data[r * self.cols + c]
    }
}

/// Linear subspace of ℚⁿ stored by the RREF of a row basis (no zero rows),
/// so two subspaces are equal exactly when their stored bases are equal.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    ambient: usize,
    basis: Mat,
    pivots: Vec<usize>,
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subspace(ℚ^{}, dim {}, {:?})", self.ambient, self.dim(), self.basis)
    }
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Subspace { ambient, basis: Mat::zeros(0, ambient), pivots: vec![] }
    }

    pub fn full(ambient: usize) -> Self {
        Subspace { ambient, basis: Mat::identity(ambient), pivots: (0..ambient).collect() }
    }

    /// Row space of `m`.
    pub fn row_space(m: &Mat) -> Self {
        let (r, pivots) = m.rref_with_pivots();
        let k = pivots.len();
        let basis = Mat::from_rows((0..k).map(|i| r.row(i).to_vec()).collect(), m.cols());
        Subspace { ambient: m.cols(), basis, pivots }
    }

    pub fn span(ambient: usize, vecs: &[Vec<Rational>]) -> Self {
        Self::row_space(&Mat::from_rows(vecs.to_vec(), ambient))
    }

    /// Span of standard basis vectors `e_i`, `i ∈ idx`.
    pub fn coordinate(ambient: usize, idx: impl IntoIterator<Item = usize>) -> Self {
        let vecs: Vec<Vec<Rational>> = idx.into_iter().map(|i| unit(ambient, i)).collect();
        Self::span(ambient, &vecs)
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.pivots.len()
    }

    pub fn basis(&self) -> &Mat {
        &self.basis
    }

    pub fn basis_vecs(&self) -> Vec<Vec<Rational>> {
        self.basis.row_vecs()
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Coordinates of `v` in the canonical basis, if `v` lies in the subspace.
    pub fn coords(&self, v: &[Rational]) -> Option<Vec<Rational>> {
        assert_eq!(v.len(), self.ambient);
        let c: Vec<Rational> = self.pivots.iter().map(|&p| v[p].clone()).collect();
        let back = self.basis.transpose().mul_vec(&c);
        (back.as_slice() == v).then_some(c)
    }

    pub fn contains_vec(&self, v: &[Rational]) -> bool {
        self.coords(v).is_some()
    }

    /// `self ⊆ other`.
    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.ambient == other.ambient && (0..self.dim()).all(|i| other.contains_vec(self.basis.row(i)))
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace, ExactError> {
        self.check_ambient(other)?;
        Ok(Self::row_space(&self.basis.vstack(&other.basis)))
    }

    pub fn intersect(&self, other: &Subspace) -> Result<Subspace, ExactError> {
        self.check_ambient(other)?;
        let anns = self.annihilator().sum(&other.annihilator())?;
        Ok(anns.annihilator())
    }

    /// `{φ : φ(v) = 0 for all v ∈ self}` in the coordinate dual.
    pub fn annihilator(&self) -> Subspace {
        self.basis.kernel()
    }

    /// Complement of `sub` inside `self`, chosen greedily from the rows of
    /// the canonical basis of `self`.
    pub fn quotient_complement(&self, sub: &Subspace) -> Result<Subspace, ExactError> {
        self.check_ambient(sub)?;
        if !sub.is_subspace_of(self) {
            return Err(ExactError::NotContained);
        }
        Ok(Subspace::span(self.ambient, &self.complement_rows(sub)))
    }

    fn complement_rows(&self, sub: &Subspace) -> Vec<Vec<Rational>> {
        let mut acc = sub.clone();
        let mut chosen = Vec::new();
        for i in 0..self.dim() {
            let row = self.basis.row(i);
            if !acc.contains_vec(row) {
                chosen.push(row.to_vec());
                acc = Subspace::span(self.ambient, &[acc.basis_vecs(), vec![row.to_vec()]].concat());
            }
        }
        chosen
    }

    /// Image under `m` (which maps this ambient space to `m.rows()` coordinates).
    pub fn image(&self, m: &Mat) -> Subspace {
        assert_eq!(m.cols(), self.ambient, "image shape");
        let vecs: Vec<Vec<Rational>> = (0..self.dim()).map(|i| m.mul_vec(self.basis.row(i))).collect();
        Subspace::span(m.rows(), &vecs)
    }

    /// `{v : m·v ∈ self}`.
    pub fn preimage(&self, m: &Mat) -> Subspace {
        assert_eq!(m.rows(), self.ambient, "preimage shape");
        let ann = self.annihilator().basis().clone();
        ann.mul(m).kernel()
    }

    fn check_ambient(&self, other: &Subspace) -> Result<(), ExactError> {
        if self.ambient != other.ambient {
            return Err(ExactError::DimensionMismatch { expected: self.ambient, found: other.ambient });
        }
        Ok(())
    }
}

/// Standard basis vector `e_i` of ℚⁿ.
pub fn unit(n: usize, i: usize) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); n];
    v[i] = Rational::one();
    v
}

pub fn is_zero_vec(v: &[Rational]) -> bool {
    v.iter().all(Zero::is_zero)
}

/// Fixed decomposition `whole = sub ⊕ complement`, used to put coordinates on
/// the quotient `whole / sub`.
#[derive(Debug, Clone)]
pub struct Quotient {
    whole: Subspace,
    sub: Subspace,
    complement: Vec<Vec<Rational>>,
    solver: Mat,
}

impl Quotient {
    pub fn new(whole: &Subspace, sub: &Subspace) -> Result<Self, ExactError> {
        whole.check_ambient(sub)?;
        if !sub.is_subspace_of(whole) {
            return Err(ExactError::NotContained);
        }
        let complement = whole.complement_rows(sub);
        let mut cols = complement.clone();
        cols.extend(sub.basis_vecs());
        let solver = Mat::from_rows(cols, whole.ambient).transpose();
        Ok(Quotient { whole: whole.clone(), sub: sub.clone(), complement, solver })
    }

    pub fn dim(&self) -> usize {
        self.complement.len()
    }

    pub fn whole(&self) -> &Subspace {
        &self.whole
    }

    pub fn sub(&self) -> &Subspace {
        &self.sub
    }

    /// Complement basis vectors, which represent the quotient basis.
    pub fn complement(&self) -> &[Vec<Rational>] {
        &self.complement
    }

    /// Quotient coordinates of `v ∈ whole`.
    pub fn project(&self, v: &[Rational]) -> Result<Vec<Rational>, ExactError> {
        if v.len() != self.whole.ambient {
            return Err(ExactError::DimensionMismatch { expected: self.whole.ambient, found: v.len() });
        }
        let x = self.solver.solve(v).ok_or(ExactError::NotContained)?;
        Ok(x[..self.complement.len()].to_vec())
    }

    /// Representative in `whole` of quotient coordinates.
    pub fn lift(&self, c: &[Rational]) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); self.whole.ambient];
        for (coef, b) in c.iter().zip(&self.complement) {
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi += coef * bi;
            }
        }
        v
    }
}

/// Formats a rational the way scene files write it: `a` or `a/b`.
pub fn fmt_rational(x: &Rational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses `a` or `a/b` with optional sign.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().ok()?;
    let d: BigInt = d.parse().ok()?;
    if d.is_zero() || d.is_negative() {
        return None;
    }
    Some(Rational::new(n, d))
}
