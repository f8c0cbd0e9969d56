//! Expressions describing the class of a variety, and their evaluation to
//! E-polynomials.
//!
//! Fibrations are taken to be Zariski locally trivial, so a bundle evaluates
//! exactly like a product.

use std::fmt;

use num_bigint::BigInt;
use thiserror::Error;

use crate::hodge::{exterior_from_h1, minus_one_invariants, HodgeDiamond, HodgeError, SignConvention};
use crate::poly::{BivariatePoly, PolyError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpaceError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Hodge(#[from] HodgeError),
    #[error("{0} has no Hodge diamond in this calculus")]
    NoDiamond(String),
}

/// The class of a variety, built from primitives by cut-and-paste.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpaceExpr {
    Point,
    Affine(u32),
    /// The multiplicative group `C^*`.
    Gm,
    Proj(u32),
    /// Smooth quadric threefold (the Lagrangian Grassmannian fiber).
    Quadric3,
    /// A `g`-dimensional abelian variety, e.g. a Jacobian.
    Abelian(u32),
    /// Quotient of `Abelian(g)` by `x -> -x` (a Kummer variety).
    KummerQuot(u32),
    Finite(u32),
    Product(Box<SpaceExpr>, Box<SpaceExpr>),
    /// Zariski locally trivial bundle; evaluates as a product.
    Bundle { base: Box<SpaceExpr>, fiber: Box<SpaceExpr> },
    /// `ambient` minus a closed subvariety.
    Difference { ambient: Box<SpaceExpr>, closed: Box<SpaceExpr> },
    /// Disjoint union of locally closed pieces.
    Union(Box<SpaceExpr>, Box<SpaceExpr>),
    /// Quotient of `total` by a free action of `group`.
    FreeQuotient { total: Box<SpaceExpr>, group: Box<SpaceExpr> },
    Sym2(Box<SpaceExpr>),
    /// `n` disjoint copies.
    ScaledCopies(u32, Box<SpaceExpr>),
}

impl SpaceExpr {
    pub fn product(a: SpaceExpr, b: SpaceExpr) -> Self {
        SpaceExpr::Product(Box::new(a), Box::new(b))
    }

    pub fn bundle(base: SpaceExpr, fiber: SpaceExpr) -> Self {
        SpaceExpr::Bundle { base: Box::new(base), fiber: Box::new(fiber) }
    }

    pub fn difference(ambient: SpaceExpr, closed: SpaceExpr) -> Self {
        SpaceExpr::Difference { ambient: Box::new(ambient), closed: Box::new(closed) }
    }

    pub fn union(a: SpaceExpr, b: SpaceExpr) -> Self {
        SpaceExpr::Union(Box::new(a), Box::new(b))
    }

    pub fn free_quotient(total: SpaceExpr, group: SpaceExpr) -> Self {
        SpaceExpr::FreeQuotient { total: Box::new(total), group: Box::new(group) }
    }

    pub fn sym2(inner: SpaceExpr) -> Self {
        SpaceExpr::Sym2(Box::new(inner))
    }

    pub fn copies(n: u32, inner: SpaceExpr) -> Self {
        SpaceExpr::ScaledCopies(n, Box::new(inner))
    }

    /// Compactly supported Hodge diamond, when the expression has one.
    ///
    /// Differences yield virtual diamonds. Free quotients have none: only
    /// their E-polynomial is determined.
    pub fn diamond(&self) -> Result<HodgeDiamond, SpaceError> {
        use SpaceExpr::*;
        Ok(match self {
            Point => HodgeDiamond::point(),
            Affine(n) => HodgeDiamond::affine(*n),
            Gm => HodgeDiamond::gm(),
            Proj(n) => HodgeDiamond::projective(*n),
            Quadric3 => HodgeDiamond::quadric3(),
            Abelian(g) => exterior_from_h1(*g),
            KummerQuot(g) => minus_one_invariants(&exterior_from_h1(*g))?,
            Finite(n) => HodgeDiamond::finite(*n),
            Product(a, b) | Bundle { base: a, fiber: b } => a.diamond()?.d_tensor(&b.diamond()?)?,
            Difference { ambient, closed } => ambient.diamond()?.d_sub(&closed.diamond()?)?,
            Union(a, b) => a.diamond()?.d_add(&b.diamond()?)?,
            FreeQuotient { .. } => return Err(SpaceError::NoDiamond(self.to_string())),
            Sym2(inner) => inner.diamond()?.graded_sym2()?,
            ScaledCopies(n, inner) => inner.diamond()?.scale(&BigInt::from(*n)),
        })
    }
}

/// Evaluates the E-polynomial of an expression.
///
/// The convention only matters where odd cohomology is read off a diamond:
/// `Abelian`, `KummerQuot` and `Sym2`. Every other primitive has a fixed
/// polynomial (`Gm` is always `uv - 1`).
pub fn eval_space(e: &SpaceExpr, c: SignConvention) -> Result<BivariatePoly, SpaceError> {
    use SpaceExpr::*;
    Ok(match e {
        Point => BivariatePoly::one(),
        Affine(n) => BivariatePoly::uv_pow(*n),
        Gm => BivariatePoly::uv_pow(1) - BivariatePoly::one(),
        Proj(n) => (0..=*n).map(BivariatePoly::uv_pow).sum(),
        Quadric3 => (0..=3).map(BivariatePoly::uv_pow).sum(),
        Abelian(g) => exterior_from_h1(*g).to_epoly(c),
        KummerQuot(g) => minus_one_invariants(&exterior_from_h1(*g))?.to_epoly(c),
        Finite(n) => BivariatePoly::constant(*n),
        Product(a, b) | Bundle { base: a, fiber: b } => eval_space(a, c)? * eval_space(b, c)?,
        Difference { ambient, closed } => eval_space(ambient, c)? - eval_space(closed, c)?,
        Union(a, b) => eval_space(a, c)? + eval_space(b, c)?,
        FreeQuotient { total, group } => eval_space(total, c)?.exact_div(&eval_space(group, c)?)?,
        Sym2(inner) => inner.diamond()?.graded_sym2()?.to_epoly(c),
        ScaledCopies(n, inner) => eval_space(inner, c)?.scale(&BigInt::from(*n)),
    })
}

/// `C^2` minus the origin. Its E-polynomial `u^2v^2 - 1` is also that of the
/// quadric cone minus its vertex, whose link has trivial monodromy.
pub fn cone_minus_vertex() -> SpaceExpr {
    SpaceExpr::difference(SpaceExpr::Affine(2), SpaceExpr::Point)
}

/// `SL(2, C)`, fibered over `C^2 - {0}` by its first column with affine-line
/// fibers: `E = u^3v^3 - uv`.
pub fn sl2_space() -> SpaceExpr {
    SpaceExpr::bundle(cone_minus_vertex(), SpaceExpr::Affine(1))
}

/// `PGL(2, C)` has the same E-polynomial as `SL(2, C)`.
pub fn pgl2_space() -> SpaceExpr {
    sl2_space()
}

/// `Q_0`: the fiber of `Q` over the cone vertex, where the two vectors are
/// proportional: `(C^3 - 0) x C  ⊔  {0} x C^3`.
pub fn quartic_cone_q0() -> SpaceExpr {
    SpaceExpr::union(
        SpaceExpr::product(
            SpaceExpr::difference(SpaceExpr::Affine(3), SpaceExpr::Point),
            SpaceExpr::Affine(1),
        ),
        SpaceExpr::product(SpaceExpr::Point, SpaceExpr::Affine(3)),
    )
}

/// `Q - Q_0`: fibered over the cone minus its vertex with fibers quadrics in
/// `C^4`, each isomorphic to `SL(2)`.
pub fn quartic_cone_rest() -> SpaceExpr {
    SpaceExpr::bundle(cone_minus_vertex(), sl2_space())
}

/// The quartic cone `Q ⊂ C^6` cut out by
/// `(x2 y3 - y2 x3)^2 + 4 (x1 y2 - x2 y1)(x3 y1 - x1 y3) = 0`, as
/// `Q_0 ⊔ (Q - Q_0)`.
pub fn quartic_cone_q() -> SpaceExpr {
    SpaceExpr::union(quartic_cone_q0(), quartic_cone_rest())
}

impl fmt::Display for SpaceExpr {
    /// Surface syntax of the `.sx` language, fully parenthesized.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use SpaceExpr::*;
        match self {
            Point => f.write_str("Point"),
            Affine(n) => write!(f, "Affine({n})"),
            Gm => f.write_str("Gm"),
            Proj(n) => write!(f, "Proj({n})"),
            Quadric3 => f.write_str("Quadric3"),
            Abelian(g) => write!(f, "Abelian({g})"),
            KummerQuot(g) => write!(f, "Quot2(Abelian({g}))"),
            Finite(n) => write!(f, "Finite({n})"),
            Product(a, b) | Bundle { base: a, fiber: b } => write!(f, "({a} * {b})"),
            Difference { ambient, closed } => write!(f, "({ambient} - {closed})"),
            Union(a, b) => write!(f, "({a} + {b})"),
            FreeQuotient { total, group } => write!(f, "({total} / {group})"),
            Sym2(inner) => write!(f, "Sym2({inner})"),
            ScaledCopies(n, inner) => write!(f, "({n} * {inner})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::tests::p;
    use proptest::prelude::*;
    use SignConvention::*;
    use SpaceExpr::*;

    fn ev(e: &SpaceExpr) -> BivariatePoly {
        eval_space(e, Signed).unwrap()
    }

    fn kummer_minus_16() -> SpaceExpr {
        SpaceExpr::difference(KummerQuot(2), Finite(16))
    }

    #[test]
    fn stratum_s1() {
        let s1 = SpaceExpr::bundle(kummer_minus_16(), SpaceExpr::product(Affine(2), Gm));
        assert_eq!(
            ev(&s1),
            p("u^5v^5 + u^3v^5 + u^5v^3 + 3u^4v^4 - 19u^3v^3 - u^2v^4 - u^4v^2 + 15u^2v^2")
        );
        assert_eq!(ev(&Point), p("1"));
    }

    #[test]
    fn stratum_s3_base() {
        let s3 = SpaceExpr::free_quotient(SpaceExpr::difference(Affine(6), quartic_cone_q()), sl2_space());
        assert_eq!(ev(&s3), p("u^3v^3 - u^2v^2"));
    }

    #[test]
    fn quartic_cone_pieces() {
        assert_eq!(ev(&quartic_cone_rest()), p("u^5v^5 - 2u^3v^3 + uv"));
        assert_eq!(ev(&quartic_cone_q0()), p("u^4v^4 + u^3v^3 - uv"));
        assert_eq!(ev(&quartic_cone_q()), p("u^5v^5 + u^4v^4 - u^3v^3"));
    }

    #[test]
    fn sl2_examples() {
        let e = ev(&sl2_space());
        assert_eq!(e, p("u^3v^3 - uv"));
        assert_eq!(e.eval(&1.into(), &1.into()), 0.into());
        let h = SpaceExpr::product(Affine(2), quartic_cone_q());
        let n3 = SpaceExpr::free_quotient(SpaceExpr::difference(Affine(8), h), pgl2_space());
        assert_eq!(ev(&n3), p("u^5v^5 - u^4v^4"));
    }

    #[test]
    fn stable_locus_s() {
        let s = SpaceExpr::difference(Proj(3), KummerQuot(2));
        for c in [Signed, Unsigned] {
            assert_eq!(eval_space(&s, c).unwrap(), p("u^3v^3 - 3uv - u^2 - v^2"));
        }
        let weight2: BigInt = ev(&s).terms().filter(|((a, b), _)| a + b == 2).map(|(_, c)| c.clone()).sum();
        assert_eq!(weight2, (-5).into());
    }

    #[test]
    fn conventions_differ_only_on_odd_classes() {
        assert_eq!(eval_space(&Abelian(2), Unsigned).unwrap(), p("1 + u") * p("1 + u") * p("1 + v") * p("1 + v"));
        assert_eq!(eval_space(&Gm, Unsigned).unwrap(), p("uv - 1"));
        let j2 = SpaceExpr::sym2(Abelian(2));
        assert_eq!(eval_space(&j2, Unsigned).unwrap().coeff(1, 1), 8.into());
    }

    #[test]
    fn eval_errors() {
        let bad = SpaceExpr::free_quotient(Affine(1), Proj(1));
        assert!(matches!(eval_space(&bad, Signed), Err(SpaceError::Poly(PolyError::NotDivisible { .. }))));
        let virt = SpaceExpr::sym2(SpaceExpr::difference(Point, Abelian(1)));
        assert!(matches!(
            eval_space(&virt, Signed),
            Err(SpaceError::Hodge(HodgeError::NegativeMultiplicity { .. }))
        ));
        let quot = SpaceExpr::sym2(SpaceExpr::free_quotient(Affine(3), Affine(1)));
        assert!(matches!(eval_space(&quot, Signed), Err(SpaceError::NoDiamond(_))));
    }

    #[test]
    fn sym2_of_jacobian_times_plane() {
        let lhs = SpaceExpr::sym2(SpaceExpr::product(Abelian(2), Affine(2)));
        let rhs = SpaceExpr::product(SpaceExpr::sym2(Abelian(2)), Affine(4));
        assert_eq!(eval_space(&lhs, Unsigned).unwrap(), eval_space(&rhs, Unsigned).unwrap());
    }

    fn arb_leaf() -> impl Strategy<Value = SpaceExpr> {
        prop_oneof![
            Just(Point),
            (0u32..3).prop_map(Affine),
            Just(Gm),
            (0u32..3).prop_map(Proj),
            Just(Quadric3),
            (0u32..3).prop_map(Abelian),
            (0u32..3).prop_map(KummerQuot),
            (0u32..5).prop_map(Finite),
        ]
    }

    fn arb_expr() -> impl Strategy<Value = SpaceExpr> {
        arb_leaf().prop_recursive(3, 16, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| SpaceExpr::product(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| SpaceExpr::bundle(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| SpaceExpr::difference(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| SpaceExpr::union(a, b)),
                (0u32..4, inner).prop_map(|(n, a)| SpaceExpr::copies(n, a)),
            ]
        })
    }

    proptest! {
        #[test]
        fn multiplicative(a in arb_expr(), b in arb_expr()) {
            for c in [Signed, Unsigned] {
                let prod = eval_space(&SpaceExpr::product(a.clone(), b.clone()), c).unwrap();
                prop_assert_eq!(prod, eval_space(&a, c).unwrap() * eval_space(&b, c).unwrap());
            }
        }

        #[test]
        fn additive(a in arb_expr(), z in arb_expr()) {
            let diff = SpaceExpr::difference(a.clone(), z.clone());
            prop_assert_eq!(ev(&diff) + ev(&z), ev(&a));
        }

        #[test]
        fn signed_eval_matches_diamond(a in arb_expr()) {
            prop_assert_eq!(a.diamond().unwrap().to_epoly(Signed), ev(&a));
        }
    }
}
