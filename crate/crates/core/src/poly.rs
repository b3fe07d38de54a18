//! Sparse multivariate polynomials over ℚ.
//!
//! Variables are 0-based in the API; the text form names them `x1..xN`.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::exact::{fmt_rational, parse_rational, q, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("variable count mismatch: {0} vs {1}")]
    VarMismatch(usize, usize),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

pub type Exponent = Vec<u32>;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Exponent, Rational>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Poly {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Rational) -> Poly {
        let mut p = Poly::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn int(nvars: usize, c: i64) -> Poly {
        Poly::constant(nvars, q(c))
    }

    pub fn one(nvars: usize) -> Poly {
        Poly::int(nvars, 1)
    }

    /// The coordinate function `x_{i+1}`.
    pub fn var(nvars: usize, i: usize) -> Poly {
        assert!(i < nvars, "variable index out of range");
        let mut e = vec![0; nvars];
        e[i] = 1;
        Poly::monomial(e, Rational::one())
    }

    pub fn monomial(exp: Exponent, c: Rational) -> Poly {
        let mut p = Poly::zero(exp.len());
        if !c.is_zero() {
            p.terms.insert(exp, c);
        }
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Exponent, Rational)>) -> Poly {
        let mut p = Poly::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent length");
            p.add_term(e, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &BTreeMap<Exponent, Rational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn constant_value(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&vec![0; self.nvars]).cloned(),
            _ => None,
        }
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// Whether variable `i` occurs.
    pub fn involves(&self, i: usize) -> bool {
        self.terms.keys().any(|e| e[i] > 0)
    }

    fn add_term(&mut self, e: Exponent, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    fn check(&self, other: &Poly) -> Result<(), PolyError> {
        if self.nvars != other.nvars {
            return Err(PolyError::VarMismatch(self.nvars, other.nvars));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Poly) -> Result<Poly, PolyError> {
        self.check(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Poly) -> Result<Poly, PolyError> {
        self.check(other)?;
        let mut acc: BTreeMap<Exponent, Rational> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Exponent = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                *acc.entry(e).or_insert_with(Rational::zero) += ca * cb;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Ok(Poly { nvars: self.nvars, terms: acc })
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly { nvars: self.nvars, terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect() }
    }

    pub fn partial(&self, i: usize) -> Poly {
        assert!(i < self.nvars, "variable index out of range");
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut e2 = e.clone();
                e2[i] -= 1;
                out.add_term(e2, c * q(e[i] as i64));
            }
        }
        out
    }

    /// Sets each listed variable to zero.
    pub fn substitute_zero(&self, vars: &[usize]) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| vars.iter().all(|&v| e[v] == 0))
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn eval(&self, point: &[Rational]) -> Result<Rational, PolyError> {
        if point.len() != self.nvars {
            return Err(PolyError::VarMismatch(self.nvars, point.len()));
        }
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (x, &k) in point.iter().zip(e) {
                if k > 0 {
                    t *= num_traits::pow(x.clone(), k as usize);
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Substitutes `subs[i]` for variable `i`; the result lives in the
    /// variables of the substituted polynomials (`nvars_out` of them).
    pub fn compose(&self, subs: &[Poly], nvars_out: usize) -> Result<Poly, PolyError> {
        if subs.len() != self.nvars {
            return Err(PolyError::VarMismatch(self.nvars, subs.len()));
        }
        if let Some(s) = subs.iter().find(|s| s.nvars != nvars_out) {
            return Err(PolyError::VarMismatch(nvars_out, s.nvars));
        }
        let mut powers: Vec<Vec<Poly>> = subs.iter().map(|s| vec![Poly::one(nvars_out), s.clone()]).collect();
        let mut out = Poly::zero(nvars_out);
        for (e, c) in &self.terms {
            let mut t = Poly::constant(nvars_out, c.clone());
            for (i, &k) in e.iter().enumerate() {
                let k = k as usize;
                while powers[i].len() <= k {
                    let next = &powers[i][powers[i].len() - 1] * &subs[i];
                    powers[i].push(next);
                }
                if k > 0 {
                    t = &t * &powers[i][k];
                }
            }
            out = &out + &t;
        }
        Ok(out)
    }

    /// Renames variables: old variable `i` becomes `map[i]` in a ring with
    /// `nvars_out` variables. Returns `None` if a variable mapped to `None` occurs.
    pub fn reindex(&self, map: &[Option<usize>], nvars_out: usize) -> Option<Poly> {
        assert_eq!(map.len(), self.nvars);
        let mut out = Poly::zero(nvars_out);
        for (e, c) in &self.terms {
            let mut e2 = vec![0; nvars_out];
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                e2[map[i]?] += k;
            }
            out.add_term(e2, c.clone());
        }
        Some(out)
    }

    /// Text parser for `x1..xN`, rationals, `+ - * ^` and parentheses.
    pub fn parse(s: &str, nvars: usize) -> Result<Poly, PolyError> {
        let mut p = Parser { src: s.as_bytes(), pos: 0, nvars };
        let out = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(out)
    }
}

impl<'a> Add for &'a Poly {
    type Output = Poly;
    fn add(self, rhs: &'a Poly) -> Poly {
        self.checked_add(rhs).expect("polynomial variable count mismatch")
    }
}

impl<'a> Sub for &'a Poly {
    type Output = Poly;
    fn sub(self, rhs: &'a Poly) -> Poly {
        self.checked_add(&-rhs).expect("polynomial variable count mismatch")
    }
}

impl<'a> Mul for &'a Poly {
    type Output = Poly;
    fn mul(self, rhs: &'a Poly) -> Poly {
        self.checked_mul(rhs).expect("polynomial variable count mismatch")
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly { nvars: self.nvars, terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect() }
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(self, rhs: Poly) -> Poly {
        &self + &rhs
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        &self - &rhs
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        &self * &rhs
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (e, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            match (n, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let a = c.abs();
            let vars: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| if k == 1 { format!("x{}", i + 1) } else { format!("x{}^{}", i + 1, k) })
                .collect();
            if vars.is_empty() {
                write!(f, "{}", fmt_rational(&a))?;
            } else if a.is_one() {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{}*{}", fmt_rational(&a), vars.join("*"))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly[{}]({})", self.nvars, self)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    nvars: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> PolyError {
        PolyError::Parse { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn digits(&mut self) -> &str {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos]).unwrap()
    }

    fn expr(&mut self) -> Result<Poly, PolyError> {
        let mut acc = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let t = self.term()?;
            acc = if c == b'+' { &acc + &t } else { &acc - &t };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Poly, PolyError> {
        let mut acc = self.unary()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            let f = self.unary()?;
            acc = &acc * &f;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Poly, PolyError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Poly, PolyError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let d = self.digits();
            let k: u32 = d.parse().map_err(|_| self.err("expected a non-negative integer exponent"))?;
            let mut out = Poly::one(self.nvars);
            for _ in 0..k {
                out = &out * &base;
            }
            return Ok(out);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Poly, PolyError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(b'x') => {
                self.pos += 1;
                let d = self.digits().to_string();
                let i: usize = d.parse().map_err(|_| self.err("expected a variable index"))?;
                if i == 0 || i > self.nvars {
                    return Err(self.err(&format!("variable x{i} outside x1..x{}", self.nvars)));
                }
                Ok(Poly::var(self.nvars, i - 1))
            }
            Some(c) if c.is_ascii_digit() => {
                let num = self.digits().to_string();
                let mut text = num;
                if self.src.get(self.pos) == Some(&b'.') {
                    return Err(self.err("floating-point literals are not accepted"));
                }
                let save = self.pos;
                if self.peek() == Some(b'/') {
                    self.pos += 1;
                    self.skip_ws();
                    let den = self.digits().to_string();
                    if den.is_empty() {
                        self.pos = save;
                        return Err(self.err("expected a denominator"));
                    }
                    text = format!("{text}/{den}");
                }
                let r = parse_rational(&text).ok_or_else(|| self.err("invalid rational literal"))?;
                Ok(Poly::constant(self.nvars, r))
            }
            _ => Err(self.err("expected a number, variable or '('")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::qf;

    fn p(s: &str, n: usize) -> Poly {
        Poly::parse(s, n).unwrap()
    }

    #[test]
    fn spec_examples() {
        assert_eq!(p("x1*x2", 2).partial(0), p("x2", 2));
        assert_eq!(p("x1 + x3^2", 3).substitute_zero(&[2]), p("x1", 3));
        assert_eq!(p("x1^2 - x2", 2).eval(&[q(2), q(1)]).unwrap(), q(3));
    }

    #[test]
    fn var_mismatch() {
        assert_eq!(Poly::one(2).checked_add(&Poly::one(3)), Err(PolyError::VarMismatch(2, 3)));
        assert_eq!(Poly::one(2).eval(&[q(1)]), Err(PolyError::VarMismatch(2, 1)));
    }

    #[test]
    fn parse_and_print() {
        let f = p("(x1 - 1/2)^2 + 3*x2*x1 - 2", 2);
        assert_eq!(f, p("x1^2 - x1 + 1/4 + 3*x1*x2 - 2", 2));
        assert_eq!(p(&f.to_string(), 2), f);
        assert_eq!(p("-x1", 1).to_string(), "-x1");
        assert_eq!(p("0", 3), Poly::zero(3));
        assert_eq!(p("2/4", 1), Poly::constant(1, qf(1, 2)));
        assert!(Poly::parse("x3", 2).is_err());
        assert!(Poly::parse("1.5", 1).is_err());
        assert!(Poly::parse("x1 +", 1).is_err());
        assert!(Poly::parse("(x1", 1).is_err());
    }

    #[test]
    fn compose_and_reindex() {
        let f = p("x1*x2 + x1", 2);
        let g = f.compose(&[p("x1 + 1", 1), p("x1", 1)], 1).unwrap();
        assert_eq!(g, p("x1^2 + 2*x1 + 1", 1));
        let h = p("x2^2", 3).reindex(&[None, Some(0), None], 1).unwrap();
        assert_eq!(h, p("x1^2", 1));
        assert!(p("x1", 3).reindex(&[None, Some(0), None], 1).is_none());
    }

    #[test]
    fn cancellation_removes_terms() {
        let f = &p("x1 + x2", 2) - &p("x1", 2);
        assert_eq!(f.terms().len(), 1);
        assert!((&f - &p("x2", 2)).is_zero());
    }
}
