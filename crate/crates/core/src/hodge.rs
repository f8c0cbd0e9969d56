//! Hodge diamonds: multiplicities `h^{i,p,q}` graded by cohomological degree
//! `i` and Hodge type `(p, q)`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::{BivariatePoly, JsonInt};

/// `(i, p, q)`: degree `i`, Hodge type `(p, q)`.
pub type HodgeIndex = (u32, u32, u32);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HodgeError {
    #[error("cannot combine an ordinary diamond with a compactly supported one")]
    FlavorMismatch,
    #[error("entry ({i},{p},{q}) does not fit duality in dimension {dim}")]
    DegreeOverflow { i: u32, p: u32, q: u32, dim: u32 },
    #[error("negative multiplicity {m} at ({i},{p},{q}); virtual classes are not squared")]
    NegativeMultiplicity { i: u32, p: u32, q: u32, m: BigInt },
    #[error("diamond is not an exterior algebra generated in degree 1")]
    NotExteriorAlgebra,
    #[error("weight {weight} has negative total {total}; the Hodge structure cannot be pure")]
    NegativeBetti { weight: u32, total: BigInt },
}

/// Whether the multiplicities are of ordinary or compactly supported
/// cohomology.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    Ordinary,
    CompactSupport,
}

impl Flavor {
    pub fn toggled(self) -> Self {
        match self {
            Flavor::Ordinary => Flavor::CompactSupport,
            Flavor::CompactSupport => Flavor::Ordinary,
        }
    }
}

/// How a diamond is collapsed into an E-polynomial.
///
/// `Signed` weighs degree `i` by `(-1)^i`. `Unsigned` counts every class
/// positively, which is what odd classes of a Jacobian need in order to match
/// the printed genus-2 `GL` polynomials.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignConvention {
    #[default]
    Signed,
    Unsigned,
}

impl fmt::Display for SignConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SignConvention::Signed => "signed",
            SignConvention::Unsigned => "unsigned",
        })
    }
}

impl std::str::FromStr for SignConvention {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "signed" => Ok(SignConvention::Signed),
            "unsigned" => Ok(SignConvention::Unsigned),
            _ => Err(format!("unknown sign convention '{s}' (expected signed or unsigned)")),
        }
    }
}

/// A finitely supported multiplicity map on `(i, p, q)`.
///
/// Multiplicities may be negative for virtual classes produced by
/// subtraction. A diamond built by [`exterior_from_h1`] remembers its rank so
/// that [`minus_one_invariants`] can check its input; every other operation
/// drops that tag. Equality ignores the tag.
#[derive(Clone, Debug)]
pub struct HodgeDiamond {
    entries: BTreeMap<HodgeIndex, BigInt>,
    flavor: Flavor,
    exterior_rank: Option<u32>,
}

impl PartialEq for HodgeDiamond {
    fn eq(&self, other: &Self) -> bool {
        self.flavor == other.flavor && self.entries == other.entries
    }
}

impl Eq for HodgeDiamond {}

impl HodgeDiamond {
    pub fn zero(flavor: Flavor) -> Self {
        Self { entries: BTreeMap::new(), flavor, exterior_rank: None }
    }

    pub fn from_entries<I, M>(flavor: Flavor, entries: I) -> Self
    where
        I: IntoIterator<Item = (HodgeIndex, M)>,
        M: Into<BigInt>,
    {
        let mut d = Self::zero(flavor);
        for (k, m) in entries {
            d.bump(k, m.into());
        }
        d
    }

    /// A single class of type `(0,0)` in degree 0.
    pub fn point() -> Self {
        Self::from_entries(Flavor::CompactSupport, [((0, 0, 0), 1)])
    }

    /// `n` isolated points.
    pub fn finite(n: u32) -> Self {
        Self::from_entries(Flavor::CompactSupport, [((0, 0, 0), n)])
    }

    /// `P^n`: one class `(k,k)` in each even degree `2k <= 2n`.
    pub fn projective(n: u32) -> Self {
        Self::from_entries(Flavor::CompactSupport, (0..=n).map(|k| ((2 * k, k, k), 1)))
    }

    /// Compactly supported cohomology of `A^n`: a single `(n,n)` class in
    /// degree `2n`.
    pub fn affine(n: u32) -> Self {
        Self::from_entries(Flavor::CompactSupport, [((2 * n, n, n), 1)])
    }

    /// Compactly supported cohomology of `C^*`.
    pub fn gm() -> Self {
        Self::from_entries(Flavor::CompactSupport, [((1, 0, 0), 1), ((2, 1, 1), 1)])
    }

    /// The smooth quadric threefold, with the Betti numbers of `P^3`.
    pub fn quadric3() -> Self {
        Self::projective(3)
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    /// Reinterprets the multiplicities under another flavor. Only meaningful
    /// for compact varieties, where the two agree.
    pub fn with_flavor(mut self, flavor: Flavor) -> Self {
        self.flavor = flavor;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, i: u32, p: u32, q: u32) -> BigInt {
        self.entries.get(&(i, p, q)).cloned().unwrap_or_default()
    }

    pub fn entries(&self) -> impl Iterator<Item = (HodgeIndex, &BigInt)> + '_ {
        self.entries.iter().map(|(k, m)| (*k, m))
    }

    /// Sum of all multiplicities.
    pub fn total_dimension(&self) -> BigInt {
        self.entries.values().sum()
    }

    /// Total multiplicity in each degree `0..=max degree`.
    pub fn betti(&self) -> Vec<BigInt> {
        let top = self.entries.keys().map(|k| k.0).max().unwrap_or(0);
        let mut out = vec![BigInt::zero(); top as usize + 1];
        for (&(i, _, _), m) in &self.entries {
            out[i as usize] += m;
        }
        out
    }

    fn bump(&mut self, k: HodgeIndex, m: BigInt) {
        if m.is_zero() {
            return;
        }
        let slot = self.entries.entry(k).or_default();
        *slot += m;
        if slot.is_zero() {
            self.entries.remove(&k);
        }
    }

    fn same_flavor(&self, other: &Self) -> Result<(), HodgeError> {
        if self.flavor == other.flavor {
            Ok(())
        } else {
            Err(HodgeError::FlavorMismatch)
        }
    }

    /// Direct sum.
    pub fn d_add(&self, other: &Self) -> Result<Self, HodgeError> {
        self.same_flavor(other)?;
        let mut out = Self { exterior_rank: None, ..self.clone() };
        for (k, m) in &other.entries {
            out.bump(*k, m.clone());
        }
        Ok(out)
    }

    /// Virtual difference; may introduce negative multiplicities.
    pub fn d_sub(&self, other: &Self) -> Result<Self, HodgeError> {
        self.d_add(&other.scale(&BigInt::from(-1)))
    }

    /// Künneth product.
    pub fn d_tensor(&self, other: &Self) -> Result<Self, HodgeError> {
        self.same_flavor(other)?;
        let mut out = Self::zero(self.flavor);
        for ((i, p, q), m) in &self.entries {
            for ((j, r, s), n) in &other.entries {
                out.bump((i + j, p + r, q + s), m * n);
            }
        }
        Ok(out)
    }

    /// `n` disjoint copies.
    pub fn scale(&self, n: &BigInt) -> Self {
        let mut out = Self::zero(self.flavor);
        for (k, m) in &self.entries {
            out.bump(*k, m * n);
        }
        out
    }

    /// Tensor with `Q(-n)`: `(i,p,q) -> (i+2n, p+n, q+n)`.
    pub fn tate_twist(&self, n: u32) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .map(|(&(i, p, q), m)| ((i + 2 * n, p + n, q + n), m.clone()))
                .collect(),
            flavor: self.flavor,
            exterior_rank: None,
        }
    }

    /// Poincaré duality on a smooth variety of dimension `dim`; switches
    /// between ordinary and compactly supported cohomology.
    pub fn d_dual(&self, dim: u32) -> Result<Self, HodgeError> {
        let mut out = Self::zero(self.flavor.toggled());
        for (&(i, p, q), m) in &self.entries {
            if i > 2 * dim || p > dim || q > dim {
                return Err(HodgeError::DegreeOverflow { i, p, q, dim });
            }
            out.bump((2 * dim - i, dim - p, dim - q), m.clone());
        }
        Ok(out)
    }

    /// Cohomology of the symmetric square.
    ///
    /// Pairs of distinct basis classes always survive the swap. A class
    /// paired with itself survives in even degree and dies in odd degree
    /// (odd classes anticommute), so a key of multiplicity `m` contributes
    /// `C(m+1, 2)` in even degree and `C(m, 2)` in odd degree.
    pub fn graded_sym2(&self) -> Result<Self, HodgeError> {
        if let Some((&(i, p, q), m)) = self.entries.iter().find(|(_, m)| m.is_negative()) {
            return Err(HodgeError::NegativeMultiplicity { i, p, q, m: m.clone() });
        }
        let mut out = Self::zero(self.flavor);
        let keys: Vec<_> = self.entries.iter().collect();
        for (x, &(&(i, p, q), m)) in keys.iter().enumerate() {
            let self_pairs = if i % 2 == 0 {
                m * (m + 1u32) / 2u32
            } else {
                m * (m - 1u32) / 2u32
            };
            out.bump((2 * i, 2 * p, 2 * q), self_pairs);
            for &(&(j, r, s), n) in &keys[x + 1..] {
                out.bump((i + j, p + r, q + s), m * n);
            }
        }
        Ok(out)
    }

    /// Collapses the diamond into an E-polynomial.
    pub fn to_epoly(&self, convention: SignConvention) -> BivariatePoly {
        let mut out = BivariatePoly::zero();
        for (&(i, p, q), m) in &self.entries {
            let m = match convention {
                SignConvention::Signed if i % 2 == 1 => -m,
                _ => m.clone(),
            };
            out += &BivariatePoly::monomial(p, q, m);
        }
        out
    }

    /// True iff every class of degree `i` has weight `p + q = i`.
    pub fn purity_check(&self) -> bool {
        self.entries.keys().all(|&(i, p, q)| p + q == i)
    }

    /// Degree-grouped text, one line per degree: `4: (1,3) + 15(2,2) + (3,1)`.
    pub fn render_text(&self) -> String {
        let mut lines = Vec::new();
        let mut by_degree: BTreeMap<u32, Vec<String>> = BTreeMap::new();
        for (&(i, p, q), m) in &self.entries {
            let mult = if *m == BigInt::from(1) {
                String::new()
            } else if *m == BigInt::from(-1) {
                "-".to_string()
            } else {
                m.to_string()
            };
            by_degree.entry(i).or_default().push(format!("{mult}({p},{q})"));
        }
        for (i, parts) in by_degree {
            lines.push(format!("{i}: {}", parts.join(" + ")));
        }
        lines.join("\n")
    }
}

impl Serialize for HodgeDiamond {
    /// Sorted `[i, p, q, m]` rows.
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<(u32, u32, u32, JsonInt)> = self
            .entries
            .iter()
            .map(|(&(i, p, q), m)| (i, p, q, JsonInt::from(m)))
            .collect();
        rows.serialize(serializer)
    }
}

/// Diamond of a `g`-dimensional abelian variety: the exterior algebra on
/// `H^1 = g(1,0) + g(0,1)`, so `h^{p+q,p,q} = C(g,p) C(g,q)`.
pub fn exterior_from_h1(g: u32) -> HodgeDiamond {
    let mut d = HodgeDiamond::zero(Flavor::CompactSupport);
    for p in 0..=g {
        for q in 0..=g {
            d.bump((p + q, p, q), binomial(g, p) * binomial(g, q));
        }
    }
    d.exterior_rank = Some(g);
    d
}

/// Invariants of the involution `x -> -x` on an abelian variety: it acts by
/// `(-1)^i` on `H^i`, leaving the even-degree part.
pub fn minus_one_invariants(d: &HodgeDiamond) -> Result<HodgeDiamond, HodgeError> {
    if d.exterior_rank.is_none() {
        return Err(HodgeError::NotExteriorAlgebra);
    }
    let mut out = HodgeDiamond::zero(d.flavor);
    for (&(i, p, q), m) in &d.entries {
        if i % 2 == 0 {
            out.bump((i, p, q), m.clone());
        }
    }
    Ok(out)
}

/// Betti numbers `b_0..b_{2d}` of a pure variety of dimension `d` from its
/// compactly supported E-polynomial: `b_k` is the weight sum at `2d - k`.
pub fn betti_from_pure_e(e: &BivariatePoly, dim: u32) -> Result<Vec<BigUint>, HodgeError> {
    let sums = e.weight_sums();
    let top = 2 * dim;
    if let Some((&w, _)) = sums.range(top + 1..).next() {
        return Err(HodgeError::DegreeOverflow { i: w, p: w, q: 0, dim });
    }
    (0..=top)
        .map(|k| {
            let w = top - k;
            let total = sums.get(&w).cloned().unwrap_or_default();
            total.to_biguint().ok_or(HodgeError::NegativeBetti { weight: w, total })
        })
        .collect()
}

/// Drops trailing zeros, for printing Betti vectors.
pub fn trim_betti(b: &[BigUint]) -> &[BigUint] {
    let n = b.iter().rposition(|x| !x.is_zero()).map_or(0, |i| i + 1);
    &b[..n.max(1).min(b.len())]
}

pub(crate) fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut acc = BigInt::from(1);
    for j in 0..k {
        acc = acc * (n - j) / (j + 1);
    }
    acc
}

/// Small-number convenience for tests and reports.
pub fn betti_to_u64(b: &[BigUint]) -> Option<Vec<u64>> {
    b.iter().map(|x| x.to_u64()).collect()
}
