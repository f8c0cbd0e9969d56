//! Exact bivariate integer polynomials in `u`, `v`.
//!
//! Every E-polynomial in the crate is a [`BivariatePoly`]. Terms live in the
//! nonnegative quadrant and coefficients are arbitrary-precision integers, so
//! nothing here can round or overflow.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Exponent pair `(a, b)` of the monomial `u^a v^b`.
pub type Monomial = (u32, u32);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("not exactly divisible: remainder {remainder}")]
    NotDivisible { remainder: BivariatePoly },
    #[error("monomial u^{a}*v^{b} exceeds the duality degree {degree}")]
    DegreeOverflow { a: u32, b: u32, degree: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("polynomial syntax error at byte {position}: {message}")]
pub struct PolyParseError {
    pub position: usize,
    pub message: String,
}

/// A polynomial with integer coefficients in two variables.
///
/// Zero coefficients are never stored, so `==` is equality of polynomials.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BivariatePoly {
    terms: BTreeMap<Monomial, BigInt>,
}

/// Graded-lex order on monomials: total degree first, then the `u` exponent.
fn grlex(x: &Monomial, y: &Monomial) -> Ordering {
    (x.0 + x.1, x.0).cmp(&(y.0 + y.1, y.0))
}

impl BivariatePoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(1)
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        Self::monomial(0, 0, c)
    }

    pub fn monomial(a: u32, b: u32, c: impl Into<BigInt>) -> Self {
        let mut p = Self::zero();
        p.add_term((a, b), c.into());
        p
    }

    /// `(uv)^n`.
    pub fn uv_pow(n: u32) -> Self {
        Self::monomial(n, n, 1)
    }

    pub fn from_terms<I, C>(terms: I) -> Self
    where
        I: IntoIterator<Item = (u32, u32, C)>,
        C: Into<BigInt>,
    {
        let mut p = Self::zero();
        for (a, b, c) in terms {
            p.add_term((a, b), c.into());
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }

    pub fn coeff(&self, a: u32, b: u32) -> BigInt {
        self.terms.get(&(a, b)).cloned().unwrap_or_default()
    }

    /// Terms in display order: descending total degree, then descending `a`.
    pub fn terms(&self) -> impl Iterator<Item = (Monomial, &BigInt)> + '_ {
        let mut v: Vec<_> = self.terms.iter().map(|(m, c)| (*m, c)).collect();
        v.sort_by(|x, y| grlex(&y.0, &x.0));
        v.into_iter()
    }

    /// Largest monomial under graded-lex order.
    pub fn leading_term(&self) -> Option<(Monomial, &BigInt)> {
        self.terms
            .iter()
            .max_by(|x, y| grlex(x.0, y.0))
            .map(|(m, c)| (*m, c))
    }

    /// Largest total degree `a + b` among the terms.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|(a, b)| a + b).max()
    }

    fn add_term(&mut self, m: Monomial, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(m).or_default();
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(m, c)| (*m, c * k)).collect(),
        }
    }

    /// Multiplies by the monomial `u^a v^b`.
    pub fn shift(&self, a: u32, b: u32) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|((x, y), c)| ((x + a, y + b), c.clone()))
                .collect(),
        }
    }

    /// Returns `r` with `r * divisor == self`, or `NotDivisible` if no such
    /// polynomial exists.
    ///
    /// Repeatedly cancels the graded-lex leading term of the running
    /// remainder. When `divisor` really divides `self`, the leading term of
    /// the remainder is always a multiple of the divisor's leading term; any
    /// failure of that is a proof of non-divisibility.
    pub fn exact_div(&self, divisor: &Self) -> Result<Self, PolyError> {
        let ((da, db), dc) = divisor.leading_term().ok_or(PolyError::DivisionByZero)?;
        let dc = dc.clone();
        let mut rem = self.clone();
        let mut quot = Self::zero();
        while let Some(((ra, rb), rc)) = rem.leading_term() {
            if ra < da || rb < db || !(rc % &dc).is_zero() {
                return Err(PolyError::NotDivisible { remainder: rem });
            }
            let t = Self::monomial(ra - da, rb - db, rc / &dc);
            rem -= &(&t * divisor);
            quot += &t;
        }
        Ok(quot)
    }

    /// `(uv)^d * p(1/u, 1/v)`: each term `u^a v^b` goes to `u^(d-a) v^(d-b)`.
    ///
    /// On a smooth variety of dimension `d` this exchanges the ordinary and
    /// compactly supported E-polynomials.
    pub fn reciprocal_dual(&self, d: u32) -> Result<Self, PolyError> {
        let mut out = Self::zero();
        for (&(a, b), c) in &self.terms {
            if a > d || b > d {
                return Err(PolyError::DegreeOverflow { a, b, degree: d });
            }
            out.add_term((d - a, d - b), c.clone());
        }
        Ok(out)
    }

    /// Sums coefficients by weight `a + b`. Weights whose sum cancels are
    /// omitted.
    pub fn weight_sums(&self) -> BTreeMap<u32, BigInt> {
        let mut out: BTreeMap<u32, BigInt> = BTreeMap::new();
        for (&(a, b), c) in &self.terms {
            *out.entry(a + b).or_default() += c;
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    pub fn eval(&self, u: &BigInt, v: &BigInt) -> BigInt {
        self.terms
            .iter()
            .map(|(&(a, b), c)| c * u.pow(a) * v.pow(b))
            .sum()
    }

    /// `[a, b, c]` triples in display order.
    pub fn to_triples(&self) -> Vec<(u32, u32, BigInt)> {
        self.terms().map(|((a, b), c)| (a, b, c.clone())).collect()
    }
}

impl fmt::Display for BivariatePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, ((a, b), c)) in self.terms().enumerate() {
            let neg = c.is_negative();
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let mag = c.abs();
            let mut factors = Vec::new();
            if !mag.is_one() || (a == 0 && b == 0) {
                factors.push(mag.to_string());
            }
            for (var, e) in [("u", a), ("v", b)] {
                match e {
                    0 => {}
                    1 => factors.push(var.to_string()),
                    _ => factors.push(format!("{var}^{e}")),
                }
            }
            f.write_str(&factors.join("*"))?;
        }
        Ok(())
    }
}

impl fmt::Debug for BivariatePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BivariatePoly({self})")
    }
}

impl FromStr for BivariatePoly {
    type Err = PolyParseError;

    /// Accepts `3*u^2*v^4`, `3u^2v^4`, `uv`, `u^{10}`, `-16` joined by `+`/`-`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Parser { src: s.as_bytes(), pos: 0 }.parse()
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, PolyParseError> {
        Err(PolyParseError { position: self.pos, message: message.into() })
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

    fn digits(&mut self) -> Option<&str> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        (self.pos > start).then(|| std::str::from_utf8(&self.src[start..self.pos]).unwrap())
    }

    fn exponent(&mut self) -> Result<u32, PolyParseError> {
        if self.peek() != Some(b'^') {
            return Ok(1);
        }
        self.pos += 1;
        let braced = self.peek() == Some(b'{');
        if braced {
            self.pos += 1;
            self.skip_ws();
        }
        let Some(d) = self.digits() else {
            return self.err("expected exponent");
        };
        let Ok(e) = d.parse::<u32>() else {
            return self.err("exponent too large");
        };
        if braced {
            if self.peek() != Some(b'}') {
                return self.err("expected '}'");
            }
            self.pos += 1;
        }
        Ok(e)
    }

    fn parse(mut self) -> Result<BivariatePoly, PolyParseError> {
        let mut out = BivariatePoly::zero();
        let mut first = true;
        loop {
            let mut sign = BigInt::one();
            match self.peek() {
                None if first => return self.err("empty polynomial"),
                None => break,
                Some(b'+') => self.pos += 1,
                Some(b'-') => {
                    sign = -sign;
                    self.pos += 1;
                }
                Some(_) if first => {}
                Some(c) => return self.err(format!("expected '+' or '-', found '{}'", c as char)),
            }
            first = false;
            self.skip_ws();
            let mut coeff = sign;
            let mut seen = false;
            if let Some(d) = self.digits() {
                coeff *= d.parse::<BigInt>().unwrap();
                seen = true;
            }
            let (mut a, mut b) = (0u32, 0u32);
            loop {
                self.skip_ws();
                let save = self.pos;
                if seen && self.peek() == Some(b'*') {
                    self.pos += 1;
                }
                match self.peek() {
                    Some(b'u') => {
                        self.pos += 1;
                        a += self.exponent()?;
                    }
                    Some(b'v') => {
                        self.pos += 1;
                        b += self.exponent()?;
                    }
                    _ => {
                        if self.pos != save {
                            return self.err("expected 'u' or 'v' after '*'");
                        }
                        break;
                    }
                }
                seen = true;
            }
            if !seen {
                return self.err("expected a term");
            }
            out.add_term((a, b), coeff);
        }
        Ok(out)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident) => {
        impl $tr<BivariatePoly> for BivariatePoly {
            type Output = BivariatePoly;
            fn $method(self, rhs: BivariatePoly) -> BivariatePoly {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&BivariatePoly> for BivariatePoly {
            type Output = BivariatePoly;
            fn $method(self, rhs: &BivariatePoly) -> BivariatePoly {
                (&self).$method(rhs)
            }
        }
        impl $tr<BivariatePoly> for &BivariatePoly {
            type Output = BivariatePoly;
            fn $method(self, rhs: BivariatePoly) -> BivariatePoly {
                self.$method(&rhs)
            }
        }
    };
}

impl Add<&BivariatePoly> for &BivariatePoly {
    type Output = BivariatePoly;
    fn add(self, rhs: &BivariatePoly) -> BivariatePoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub<&BivariatePoly> for &BivariatePoly {
    type Output = BivariatePoly;
    fn sub(self, rhs: &BivariatePoly) -> BivariatePoly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Mul<&BivariatePoly> for &BivariatePoly {
    type Output = BivariatePoly;
    fn mul(self, rhs: &BivariatePoly) -> BivariatePoly {
        let mut out = BivariatePoly::zero();
        for (&(a, b), c) in &self.terms {
            for (&(x, y), d) in &rhs.terms {
                out.add_term((a + x, b + y), c * d);
            }
        }
        out
    }
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl AddAssign<&BivariatePoly> for BivariatePoly {
    fn add_assign(&mut self, rhs: &BivariatePoly) {
        for (m, c) in &rhs.terms {
            self.add_term(*m, c.clone());
        }
    }
}

impl SubAssign<&BivariatePoly> for BivariatePoly {
    fn sub_assign(&mut self, rhs: &BivariatePoly) {
        for (m, c) in &rhs.terms {
            self.add_term(*m, -c);
        }
    }
}

impl Neg for &BivariatePoly {
    type Output = BivariatePoly;
    fn neg(self) -> BivariatePoly {
        BivariatePoly {
            terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect(),
        }
    }
}

impl Neg for BivariatePoly {
    type Output = BivariatePoly;
    fn neg(self) -> BivariatePoly {
        -&self
    }
}

impl std::iter::Sum for BivariatePoly {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::zero(), |acc, p| acc + p)
    }
}

/// JSON coefficient: a plain number when it fits in `i64`, a decimal string
/// otherwise.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
pub(crate) enum JsonInt {
    Small(i64),
    Big(String),
}

impl From<&BigInt> for JsonInt {
    fn from(c: &BigInt) -> Self {
        match c.to_i64() {
            Some(x) => JsonInt::Small(x),
            None => JsonInt::Big(c.to_string()),
        }
    }
}

impl JsonInt {
    pub(crate) fn to_bigint<E: serde::de::Error>(&self) -> Result<BigInt, E> {
        match self {
            JsonInt::Small(x) => Ok(BigInt::from(*x)),
            JsonInt::Big(s) => s.parse().map_err(E::custom),
        }
    }
}

impl Serialize for BivariatePoly {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let triples: Vec<(u32, u32, JsonInt)> =
            self.terms().map(|((a, b), c)| (a, b, JsonInt::from(c))).collect();
        triples.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BivariatePoly {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let triples: Vec<(u32, u32, JsonInt)> = Vec::deserialize(deserializer)?;
        let mut p = BivariatePoly::zero();
        for (a, b, c) in triples {
            p.add_term((a, b), c.to_bigint()?);
        }
        Ok(p)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn p(s: &str) -> BivariatePoly {
        s.parse().unwrap()
    }

    pub(crate) fn arb_poly() -> impl Strategy<Value = BivariatePoly> {
        prop::collection::vec((0u32..6, 0u32..6, -20i64..20), 0..8)
            .prop_map(BivariatePoly::from_terms)
    }

    #[test]
    fn add_examples() {
        assert_eq!(
            p("u^3v^3 - 3uv - u^2 - v^2") + p("1 + 4uv + u^2 + v^2 + u^2v^2"),
            p("1 + uv + u^2v^2 + u^3v^3")
        );
        assert_eq!(p("uv - 1") + p("1"), p("uv"));
        let q = p("3u^2v - 7");
        assert_eq!(&q + &BivariatePoly::zero(), q);
    }

    #[test]
    fn mul_examples() {
        assert_eq!(
            p("u^2v^2 + 4uv + u^2 + v^2 - 15") * p("u^3v^3 - u^2v^2"),
            p("u^5v^5 + 3u^4v^4 + u^5v^3 + u^3v^5 - 19u^3v^3 - u^2v^4 - u^4v^2 + 15u^2v^2")
        );
        assert_eq!(p("uv + 1") * p("uv - 1"), p("u^2v^2 - 1"));
        let q = p("5u^4 - v");
        assert_eq!(&q * &BivariatePoly::one(), q);
    }

    #[test]
    fn exact_div_examples() {
        assert_eq!(
            p("u^6v^6 - u^5v^5 - u^4v^4 + u^3v^3").exact_div(&p("u^3v^3 - uv")).unwrap(),
            p("u^3v^3 - u^2v^2")
        );
        assert_eq!(p("u^2v^2 - 1").exact_div(&p("uv - 1")).unwrap(), p("uv + 1"));
        let q = p("2u - 9v^3");
        assert_eq!(q.exact_div(&BivariatePoly::one()).unwrap(), q);
    }

    #[test]
    fn exact_div_errors() {
        assert!(matches!(
            p("u^2 + 1").exact_div(&p("u - 1")),
            Err(PolyError::NotDivisible { .. })
        ));
        assert!(matches!(p("2u").exact_div(&p("3")), Err(PolyError::NotDivisible { .. })));
        assert_eq!(p("u").exact_div(&BivariatePoly::zero()), Err(PolyError::DivisionByZero));
        assert_eq!(BivariatePoly::zero().exact_div(&p("uv")).unwrap(), BivariatePoly::zero());
    }

    #[test]
    fn reciprocal_dual_examples() {
        assert_eq!(
            p("u^3v^3 - 3uv - u^2 - v^2").reciprocal_dual(3).unwrap(),
            p("1 - 3u^2v^2 - uv^3 - u^3v")
        );
        assert_eq!(p("1").reciprocal_dual(0).unwrap(), p("1"));
        assert_eq!(
            p("u^4").reciprocal_dual(3),
            Err(PolyError::DegreeOverflow { a: 4, b: 0, degree: 3 })
        );
    }

    #[test]
    fn weight_sums_examples() {
        let w = p("u^6v^6 + u^5v^5 + 15u^4v^4 + u^5v^3 + u^3v^5 + 17u^3v^3").weight_sums();
        let expect: BTreeMap<u32, BigInt> =
            [(12, 1), (10, 1), (8, 17), (6, 17)].map(|(k, c)| (k, c.into())).into();
        assert_eq!(w, expect);
        assert!(BivariatePoly::zero().weight_sums().is_empty());
        let expect: BTreeMap<u32, BigInt> = [(2, 1), (0, -1)].map(|(k, c)| (k, c.into())).into();
        assert_eq!(p("uv - 1").weight_sums(), expect);
    }

    #[test]
    fn render_and_parse() {
        let q = p("1 + uv - 3u^2 + u^{10}v^9");
        assert_eq!(q.to_string(), "u^10*v^9 - 3*u^2 + u*v + 1");
        assert_eq!(p(&q.to_string()), q);
        assert_eq!(p("-16").to_string(), "-16");
        assert_eq!(p("0").to_string(), "0");
        assert_eq!(p("2*u*v^2"), p("2uv^2"));
        assert_eq!(p("u v"), p("uv"));
        assert!("".parse::<BivariatePoly>().is_err());
        assert!("3x".parse::<BivariatePoly>().is_err());
        assert!("u^".parse::<BivariatePoly>().is_err());
        assert_eq!("1 + + 2".parse::<BivariatePoly>().unwrap_err().position, 4);
    }

    #[test]
    fn json_triples() {
        let q = p("u^2v - 4 + 99999999999999999999999uv");
        let js = serde_json::to_string(&q).unwrap();
        assert_eq!(js, r#"[[2,1,1],[1,1,"99999999999999999999999"],[0,0,-4]]"#);
        let back: BivariatePoly = serde_json::from_str(&js).unwrap();
        assert_eq!(back, q);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn ring_axioms(a in arb_poly(), b in arb_poly(), c in arb_poly()) {
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert!((&a - &a).is_zero());
        }

        #[test]
        fn exact_div_round_trip(a in arb_poly(), b in arb_poly()) {
            prop_assume!(!b.is_zero());
            prop_assert_eq!((&a * &b).exact_div(&b).unwrap(), a);
        }

        #[test]
        fn evaluation_is_a_ring_hom(a in arb_poly(), b in arb_poly(), x in -5i64..5, y in -5i64..5) {
            let (x, y) = (BigInt::from(x), BigInt::from(y));
            prop_assert_eq!((&a * &b).eval(&x, &y), a.eval(&x, &y) * b.eval(&x, &y));
            prop_assert_eq!((&a + &b).eval(&x, &y), a.eval(&x, &y) + b.eval(&x, &y));
        }

        #[test]
        fn reciprocal_dual_involution(a in arb_poly()) {
            let d = 5;
            prop_assert_eq!(a.reciprocal_dual(d).unwrap().reciprocal_dual(d).unwrap(), a);
        }

        #[test]
        fn display_parses_back(a in arb_poly()) {
            prop_assert_eq!(a.to_string().parse::<BivariatePoly>().unwrap(), a);
        }
    }
}
