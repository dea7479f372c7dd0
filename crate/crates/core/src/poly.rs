//! Exact multivariate polynomials over the complex rationals.
//!
//! Coefficients are stored exactly as pairs of big rationals and only
//! converted to `f64` when a polynomial is evaluated numerically. Exponent
//! vectors are dense, one entry per variable.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A complex number with exact rational real and imaginary parts.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ComplexRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl ComplexRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    pub fn zero() -> Self {
        Self::new(BigRational::zero(), BigRational::zero())
    }

    pub fn one() -> Self {
        Self::from_integer(1)
    }

    pub fn from_integer(n: i64) -> Self {
        Self::new(BigRational::from_integer(BigInt::from(n)), BigRational::zero())
    }

    pub fn i() -> Self {
        Self::new(BigRational::zero(), BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    /// Parses a pair of decimal rational strings such as `"3/4"` and `"-2"`.
    pub fn parse(re: &str, im: &str) -> Result<Self> {
        Ok(Self::new(parse_rational(re)?, parse_rational(im)?))
    }

    pub fn to_complex64(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self> {
        if rhs.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let denom = &rhs.re * &rhs.re + &rhs.im * &rhs.im;
        let num = self * &rhs.conj();
        Ok(Self::new(num.re / &denom, num.im / &denom))
    }
}

pub(crate) fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    BigRational::from_str(s).map_err(|_| Error::Parse(format!("invalid rational literal {s:?}")))
}

impl fmt::Display for ComplexRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => write!(f, "{}i", self.im),
            (false, false) => write!(f, "({}+{}i)", self.re, self.im),
        }
    }
}

impl<'a> Add<&'a ComplexRational> for &'a ComplexRational {
    type Output = ComplexRational;
    fn add(self, rhs: &ComplexRational) -> ComplexRational {
        ComplexRational::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl<'a> Sub<&'a ComplexRational> for &'a ComplexRational {
    type Output = ComplexRational;
    fn sub(self, rhs: &ComplexRational) -> ComplexRational {
        ComplexRational::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl<'a> Mul<&'a ComplexRational> for &'a ComplexRational {
    type Output = ComplexRational;
    fn mul(self, rhs: &ComplexRational) -> ComplexRational {
        ComplexRational::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

impl Neg for ComplexRational {
    type Output = ComplexRational;
    fn neg(self) -> ComplexRational {
        ComplexRational::new(-self.re, -self.im)
    }
}

/// Sparse multivariate polynomial with a fixed number of variables.
///
/// Invariant: every stored coefficient is nonzero and every exponent vector
/// has length `num_vars`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    num_vars: usize,
    terms: BTreeMap<Vec<u32>, ComplexRational>,
}

impl Poly {
    pub fn zero(num_vars: usize) -> Self {
        Self {
            num_vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(num_vars: usize, c: ComplexRational) -> Self {
        let mut p = Self::zero(num_vars);
        p.add_term(vec![0; num_vars], c);
        p
    }

    pub fn variable(num_vars: usize, i: usize) -> Result<Self> {
        if i >= num_vars {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: num_vars,
            });
        }
        let mut exp = vec![0; num_vars];
        exp[i] = 1;
        Self::monomial(num_vars, exp, ComplexRational::one())
    }

    pub fn monomial(num_vars: usize, exp: Vec<u32>, c: ComplexRational) -> Result<Self> {
        Self::from_terms(num_vars, [(exp, c)])
    }

    /// Builds a polynomial from `(exponent, coefficient)` pairs, summing
    /// repeated exponents and dropping zero coefficients.
    pub fn from_terms<I>(num_vars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, ComplexRational)>,
    {
        let mut p = Self::zero(num_vars);
        for (exp, c) in terms {
            if exp.len() != num_vars {
                return Err(Error::DimensionMismatch {
                    expected: num_vars,
                    got: exp.len(),
                });
            }
            p.add_term(exp, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, exp: Vec<u32>, c: ComplexRational) {
        if c.is_zero() {
            return;
        }
        let sum = match self.terms.get(&exp) {
            Some(old) => old + &c,
            None => c,
        };
        if sum.is_zero() {
            self.terms.remove(&exp);
        } else {
            self.terms.insert(exp, sum);
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &ComplexRational)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, exp: &[u32]) -> ComplexRational {
        self.terms.get(exp).cloned().unwrap_or_else(ComplexRational::zero)
    }

    /// Maximum total degree over all terms, `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// The common total degree when all terms share it.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut degrees = self.terms.keys().map(|e| e.iter().sum::<u32>());
        let first = degrees.next()?;
        degrees.all(|d| d == first).then_some(first)
    }

    pub fn scale(&self, c: &ComplexRational) -> Poly {
        Poly::from_terms(self.num_vars, self.terms.iter().map(|(e, v)| (e.clone(), v * c)))
            .expect("exponent lengths preserved")
    }

    pub fn evaluate(&self, z: &[Complex64]) -> Result<Complex64> {
        if z.len() != self.num_vars {
            return Err(Error::DimensionMismatch {
                expected: self.num_vars,
                got: z.len(),
            });
        }
        Ok(self
            .terms
            .iter()
            .map(|(exp, c)| {
                exp.iter()
                    .zip(z)
                    .fold(c.to_complex64(), |acc, (&e, &zi)| acc * zi.powu(e))
            })
            .sum())
    }

    pub fn partial_derivative(&self, i: usize) -> Result<Poly> {
        if i >= self.num_vars {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.num_vars,
            });
        }
        let terms = self.terms.iter().filter(|(e, _)| e[i] > 0).map(|(e, c)| {
            let mut exp = e.clone();
            let k = exp[i];
            exp[i] -= 1;
            (exp, c * &ComplexRational::from_integer(k as i64))
        });
        Poly::from_terms(self.num_vars, terms)
    }

    /// Matrix of second partials over `vars`, evaluated at `z`.
    pub fn hessian(&self, z: &[Complex64], vars: &[usize]) -> Result<DMatrix<Complex64>> {
        if z.len() != self.num_vars {
            return Err(Error::DimensionMismatch {
                expected: self.num_vars,
                got: z.len(),
            });
        }
        let n = vars.len();
        let mut h = DMatrix::<Complex64>::zeros(n, n);
        for (a, &i) in vars.iter().enumerate() {
            let di = self.partial_derivative(i)?;
            for (b, &j) in vars.iter().enumerate().skip(a) {
                let v = di.partial_derivative(j)?.evaluate(z)?;
                h[(a, b)] = v;
                h[(b, a)] = v;
            }
        }
        Ok(h)
    }

    /// Substitutes `x_i = 1` and drops the variable.
    pub fn dehomogenize(&self, i: usize) -> Result<Poly> {
        if i >= self.num_vars {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.num_vars,
            });
        }
        let terms = self.terms.iter().map(|(e, c)| {
            let mut exp = e.clone();
            exp.remove(i);
            (exp, c.clone())
        });
        Poly::from_terms(self.num_vars - 1, terms)
    }

    pub fn from_json_str(s: &str) -> Result<Poly> {
        let lit: PolyLiteral =
            serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        lit.to_poly()
    }

    pub fn to_literal(&self) -> PolyLiteral {
        PolyLiteral {
            vars: self.num_vars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| TermLiteral {
                    exp: e.clone(),
                    re: c.re.to_string(),
                    im: c.im.to_string(),
                })
                .collect(),
        }
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        // highest degree first reads more naturally
        for (exp, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (i, &e) in exp.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*x{i}")?,
                    _ => write!(f, "*x{i}^{e}")?,
                }
            }
        }
        Ok(())
    }
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        assert_eq!(self.num_vars, rhs.num_vars, "variable count mismatch");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        assert_eq!(self.num_vars, rhs.num_vars, "variable count mismatch");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        assert_eq!(self.num_vars, rhs.num_vars, "variable count mismatch");
        let mut out = Poly::zero(self.num_vars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let exp = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(exp, ca * cb);
            }
        }
        out
    }
}

/// A polynomial whose terms all share one total degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomogeneousPoly {
    poly: Poly,
}

impl HomogeneousPoly {
    pub fn new(poly: Poly) -> Result<Self> {
        if !poly.is_zero() && poly.homogeneous_degree().is_none() {
            return Err(Error::NotHomogeneous);
        }
        Ok(Self { poly })
    }

    pub fn zero(num_vars: usize) -> Self {
        Self {
            poly: Poly::zero(num_vars),
        }
    }

    /// Degree of the polynomial; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.poly.homogeneous_degree()
    }

    pub fn as_poly(&self) -> &Poly {
        &self.poly
    }

    pub fn into_poly(self) -> Poly {
        self.poly
    }

    pub fn num_vars(&self) -> usize {
        self.poly.num_vars()
    }

    pub fn evaluate(&self, z: &[Complex64]) -> Result<Complex64> {
        self.poly.evaluate(z)
    }

    pub fn partial_derivative(&self, i: usize) -> Result<HomogeneousPoly> {
        Ok(Self {
            poly: self.poly.partial_derivative(i)?,
        })
    }

    pub fn hessian(&self, z: &[Complex64], vars: &[usize]) -> Result<DMatrix<Complex64>> {
        for &v in vars {
            if v >= self.num_vars() {
                return Err(Error::IndexOutOfRange {
                    index: v,
                    len: self.num_vars(),
                });
            }
        }
        self.poly.hessian(z, vars)
    }

    pub fn dehomogenize(&self, i: usize) -> Result<Poly> {
        self.poly.dehomogenize(i)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Self::new(Poly::from_json_str(s)?)
    }
}

impl fmt::Display for HomogeneousPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.poly.fmt(f)
    }
}

/// JSON literal: `{"vars": n, "terms": [{"exp": [..], "re": "p/q", "im": "p/q"}]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolyLiteral {
    pub vars: usize,
    pub terms: Vec<TermLiteral>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermLiteral {
    pub exp: Vec<u32>,
    #[serde(default = "zero_str")]
    pub re: String,
    #[serde(default = "zero_str")]
    pub im: String,
}

fn zero_str() -> String {
    "0".to_string()
}

impl PolyLiteral {
    pub fn to_poly(&self) -> Result<Poly> {
        let terms = self
            .terms
            .iter()
            .map(|t| Ok((t.exp.clone(), ComplexRational::parse(&t.re, &t.im)?)))
            .collect::<Result<Vec<_>>>()?;
        Poly::from_terms(self.vars, terms)
    }
}

/// A point of complex projective space, normalized so that its
/// largest-modulus coordinate equals one.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectivePoint {
    coords: Vec<Complex64>,
}

impl ProjectivePoint {
    pub fn new(coords: Vec<Complex64>) -> Result<Self> {
        let (idx, max) = coords
            .iter()
            .enumerate()
            .map(|(i, c)| (i, c.norm()))
            .fold((0, 0.0_f64), |best, cur| if cur.1 > best.1 { cur } else { best });
        if max == 0.0 || !max.is_finite() {
            return Err(Error::InvalidArgument(
                "projective point needs a nonzero finite coordinate".into(),
            ));
        }
        let pivot = coords[idx];
        let mut coords: Vec<Complex64> = coords.iter().map(|c| c / pivot).collect();
        coords[idx] = Complex64::new(1.0, 0.0);
        Ok(Self { coords })
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    /// Chordal (Fubini-Study sine) distance to another point.
    pub fn chordal_distance(&self, other: &ProjectivePoint) -> f64 {
        chordal_distance(&self.coords, &other.coords)
    }
}

/// `sqrt(1 - |<u,v>|^2 / (|u|^2 |v|^2))` for nonzero complex vectors,
/// evaluated as `|u ∧ v| / (|u| |v|)` to stay accurate for nearby points.
pub fn chordal_distance(u: &[Complex64], v: &[Complex64]) -> f64 {
    let uu: f64 = u.iter().map(|c| c.norm_sqr()).sum();
    let vv: f64 = v.iter().map(|c| c.norm_sqr()).sum();
    let mut wedge = 0.0;
    for i in 0..u.len() {
        for j in i + 1..u.len() {
            wedge += (u[i] * v[j] - u[j] * v[i]).norm_sqr();
        }
    }
    (wedge / (uu * vv)).sqrt()
}

/// Convenience: integer-coefficient polynomial from `(coefficient, exponent)` pairs.
pub fn int_poly(num_vars: usize, terms: &[(i64, &[u32])]) -> Result<Poly> {
    Poly::from_terms(
        num_vars,
        terms
            .iter()
            .map(|(c, e)| (e.to_vec(), ComplexRational::from_integer(*c))),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_polynomial_evaluates_to_zero() {
        let p = Poly::zero(3);
        assert_eq!(p.evaluate(&[c(1.0, 2.0), c(3.0, 0.0), c(0.0, 1.0)]).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn monomial_evaluation() {
        let p = int_poly(2, &[(1, &[4, 0])]).unwrap();
        assert_eq!(p.evaluate(&[c(2.0, 0.0), c(7.0, 0.0)]).unwrap(), c(16.0, 0.0));
    }

    #[test]
    fn evaluate_dimension_mismatch() {
        let p = int_poly(2, &[(1, &[1, 0])]).unwrap();
        assert!(matches!(
            p.evaluate(&[c(1.0, 0.0)]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn derivative_of_sample() {
        // x0^4 + x3^3 x0 in 5 variables
        let p = int_poly(5, &[(1, &[4, 0, 0, 0, 0]), (1, &[1, 0, 0, 3, 0])]).unwrap();
        let d = p.partial_derivative(0).unwrap();
        let expected = int_poly(5, &[(4, &[3, 0, 0, 0, 0]), (1, &[0, 0, 0, 3, 0])]).unwrap();
        assert_eq!(d, expected);
        assert!(p.partial_derivative(5).is_err());
    }

    #[test]
    fn derivative_of_constant_is_zero() {
        let p = Poly::constant(3, ComplexRational::from_integer(7));
        assert!(p.partial_derivative(1).unwrap().is_zero());
    }

    #[test]
    fn hessian_of_quadric_and_cube() {
        let q = int_poly(3, &[(1, &[2, 0, 0]), (1, &[0, 2, 0]), (1, &[0, 0, 2])]).unwrap();
        let h = q.hessian(&[c(0.3, 1.0), c(2.0, 0.0), c(0.0, 0.0)], &[0, 1, 2]).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 2.0 } else { 0.0 };
                assert_eq!(h[(i, j)], c(want, 0.0));
            }
        }
        let cube = int_poly(1, &[(1, &[3])]).unwrap();
        assert_eq!(cube.hessian(&[c(1.0, 0.0)], &[0]).unwrap()[(0, 0)], c(6.0, 0.0));
    }

    #[test]
    fn dehomogenize_examples() {
        let p = int_poly(4, &[(1, &[4, 0, 0, 0]), (1, &[0, 0, 0, 4])]).unwrap();
        let q = p.dehomogenize(3).unwrap();
        assert_eq!(q, int_poly(3, &[(1, &[4, 0, 0]), (1, &[0, 0, 0])]).unwrap());
        let p = int_poly(4, &[(4, &[0, 0, 3, 0]), (100, &[0, 0, 0, 3])]).unwrap();
        assert_eq!(
            p.dehomogenize(3).unwrap(),
            int_poly(3, &[(4, &[0, 0, 3]), (100, &[0, 0, 0])]).unwrap()
        );
        assert!(Poly::zero(4).dehomogenize(3).unwrap().is_zero());
    }

    #[test]
    fn cancellation_drops_terms() {
        let a = int_poly(2, &[(1, &[1, 0]), (2, &[0, 1])]).unwrap();
        let b = int_poly(2, &[(1, &[1, 0])]).unwrap();
        let d = &a - &b;
        assert_eq!(d.num_terms(), 1);
        assert!((&b - &b).is_zero());
    }

    #[test]
    fn homogeneity_is_enforced() {
        let p = int_poly(2, &[(1, &[2, 0]), (1, &[0, 1])]).unwrap();
        assert_eq!(HomogeneousPoly::new(p), Err(Error::NotHomogeneous));
        assert_eq!(HomogeneousPoly::zero(3).degree(), None);
    }

    #[test]
    fn json_literal_round_trip() {
        let src = r#"{"vars": 2, "terms": [{"exp": [2, 0], "re": "3/4", "im": "-1"}, {"exp": [1, 1], "re": "5"}]}"#;
        let p = Poly::from_json_str(src).unwrap();
        assert_eq!(p.coefficient(&[2, 0]), ComplexRational::parse("3/4", "-1").unwrap());
        let back = serde_json::to_string(&p.to_literal()).unwrap();
        assert_eq!(Poly::from_json_str(&back).unwrap(), p);
        assert!(Poly::from_json_str(r#"{"vars": 2, "terms": [{"exp": [1], "re": "1"}]}"#).is_err());
        assert!(Poly::from_json_str(r#"{"vars": 1, "terms": [{"exp": [1], "re": "x"}]}"#).is_err());
    }

    #[test]
    fn complex_rational_division() {
        let a = ComplexRational::parse("1", "1").unwrap();
        let b = ComplexRational::parse("0", "1").unwrap();
        assert_eq!(a.checked_div(&b).unwrap(), ComplexRational::parse("1", "-1").unwrap());
        assert_eq!(a.checked_div(&ComplexRational::zero()), Err(Error::DivisionByZero));
    }

    #[test]
    fn projective_normalization() {
        let p = ProjectivePoint::new(vec![c(0.0, 2.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(p.coords()[0], c(1.0, 0.0));
        assert!((p.coords()[1] - c(0.0, -0.5)).norm() < 1e-15);
        assert!(ProjectivePoint::new(vec![c(0.0, 0.0); 3]).is_err());
        let q = ProjectivePoint::new(vec![c(0.0, 4.0), c(2.0, 0.0)]).unwrap();
        assert!(p.chordal_distance(&q) < 1e-12);
    }
}
