//! Semismall maps and the numerical decomposition theorem.
//!
//! For a semismall resolution `f: X~ -> X` whose relevant strata carry rank-1
//! local systems with trivial monodromy, the decomposition theorem reads, at
//! the level of E-polynomials,
//!
//! ```text
//! E(X~) = IE(X) + sum over singular relevant strata S of (uv)^{d_S} * E(closure of S)
//! ```
//!
//! where `d_S` is the fiber dimension over `S`. [`ie_from_desing`] performs
//! that subtraction.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use serde::Serialize;
use thiserror::Error;

use crate::poly::BivariatePoly;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StratError {
    #[error("unknown stratum '{0}'")]
    UnknownStratum(String),
    #[error("stratum '{0}' is not relevant, so it does not contribute to the decomposition")]
    NotRelevant(String),
    #[error("duplicate stratum name '{0}'")]
    DuplicateStratum(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stratum {
    pub name: String,
    /// Compactly supported E-polynomial of the stratum closure.
    pub e_closure: BivariatePoly,
    pub dim_stratum: u32,
    pub fiber_dim: u32,
    /// Number of top-dimensional irreducible components of the fiber.
    pub top_fiber_multiplicity: u32,
}

impl Stratum {
    pub fn new(name: impl Into<String>, e_closure: BivariatePoly, dim_stratum: u32, fiber_dim: u32) -> Self {
        Self { name: name.into(), e_closure, dim_stratum, fiber_dim, top_fiber_multiplicity: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemismallMap {
    pub total_dim: u32,
    /// E-polynomial of the resolution.
    pub e_total: BivariatePoly,
    strata: Vec<Stratum>,
}

impl SemismallMap {
    pub fn new(total_dim: u32, e_total: BivariatePoly, strata: Vec<Stratum>) -> Result<Self, StratError> {
        let mut seen = BTreeSet::new();
        for s in &strata {
            if !seen.insert(s.name.as_str()) {
                return Err(StratError::DuplicateStratum(s.name.clone()));
            }
        }
        Ok(Self { total_dim, e_total, strata })
    }

    pub fn strata(&self) -> &[Stratum] {
        &self.strata
    }

    pub fn stratum(&self, name: &str) -> Option<&Stratum> {
        self.strata.iter().find(|s| s.name == name)
    }

    fn bound(&self, s: &Stratum) -> (bool, bool) {
        // 2 * fiber <= total - dim, in integers
        match self.total_dim.checked_sub(s.dim_stratum) {
            Some(codim) => (2 * s.fiber_dim <= codim, 2 * s.fiber_dim == codim),
            None => (false, false),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StratumCheck {
    pub name: String,
    pub bound_ok: bool,
    pub relevant: bool,
}

/// Checks `fiber_dim <= (total_dim - dim_stratum) / 2` for every stratum;
/// equality makes the stratum relevant.
pub fn check_semismall(m: &SemismallMap) -> Vec<StratumCheck> {
    m.strata
        .iter()
        .map(|s| {
            let (bound_ok, relevant) = m.bound(s);
            StratumCheck { name: s.name.clone(), bound_ok, relevant }
        })
        .collect()
}

/// Intersection E-polynomial of the target: `e_total` minus the Tate-twisted
/// top-fiber contribution `(uv)^fiber * mult * E(closure)` of each named
/// singular stratum.
pub fn ie_from_desing<S: AsRef<str>>(m: &SemismallMap, singular: &[S]) -> Result<BivariatePoly, StratError> {
    let mut out = m.e_total.clone();
    for name in singular {
        let name = name.as_ref();
        let s = m.stratum(name).ok_or_else(|| StratError::UnknownStratum(name.to_string()))?;
        if !m.bound(s).1 {
            return Err(StratError::NotRelevant(name.to_string()));
        }
        let contrib = s
            .e_closure
            .shift(s.fiber_dim, s.fiber_dim)
            .scale(&BigInt::from(s.top_fiber_multiplicity));
        out -= &contrib;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::tests::p;

    fn sl_map() -> SemismallMap {
        let sigma = p("u^2v^2") * p("1 + 4uv + u^2 + v^2 + u^2v^2");
        SemismallMap::new(
            6,
            p("u^6v^6 + 2u^5v^5 + 21u^4v^4 + u^5v^3 + u^3v^5 + 34u^3v^3"),
            vec![
                Stratum::new("smooth", p("u^6v^6"), 6, 0),
                Stratum::new("sigma", sigma, 4, 1),
                Stratum::new("omega", p("16"), 0, 3),
            ],
        )
        .unwrap()
    }

    #[test]
    fn sl_strata_are_relevant() {
        for c in check_semismall(&sl_map()) {
            assert!(c.bound_ok && c.relevant, "{c:?}");
        }
    }

    #[test]
    fn gl_strata_are_relevant() {
        let m = SemismallMap::new(
            10,
            p("0"),
            vec![
                Stratum::new("smooth", p("0"), 10, 0),
                Stratum::new("sigma", p("0"), 8, 1),
                Stratum::new("omega", p("0"), 4, 3),
            ],
        )
        .unwrap();
        assert!(check_semismall(&m).iter().all(|c| c.bound_ok && c.relevant));
    }

    #[test]
    fn bound_without_equality() {
        let m = SemismallMap::new(
            6,
            p("0"),
            vec![
                Stratum::new("iso", p("0"), 6, 0),
                Stratum::new("small", p("0"), 2, 1),
                Stratum::new("big", p("0"), 4, 2),
                Stratum::new("overdim", p("0"), 7, 0),
            ],
        )
        .unwrap();
        let checks = check_semismall(&m);
        assert_eq!((checks[0].bound_ok, checks[0].relevant), (true, true));
        assert_eq!((checks[1].bound_ok, checks[1].relevant), (true, false));
        assert_eq!((checks[2].bound_ok, checks[2].relevant), (false, false));
        assert_eq!((checks[3].bound_ok, checks[3].relevant), (false, false));
        assert_eq!(ie_from_desing(&m, &["small"]), Err(StratError::NotRelevant("small".into())));
    }

    #[test]
    fn sl_intersection_weights() {
        let ie = ie_from_desing(&sl_map(), &["sigma", "omega"]).unwrap();
        let w: Vec<(u32, i64)> = ie
            .weight_sums()
            .into_iter()
            .map(|(k, c)| (k, i64::try_from(c).unwrap()))
            .collect();
        assert_eq!(w, vec![(6, 17), (8, 17), (10, 1), (12, 1)]);
    }

    #[test]
    fn empty_list_and_round_trip() {
        let m = sl_map();
        let empty: [&str; 0] = [];
        assert_eq!(ie_from_desing(&m, &empty).unwrap(), m.e_total);
        let ie = ie_from_desing(&m, &["sigma", "omega"]).unwrap();
        let readded = ie
            + m.stratum("sigma").unwrap().e_closure.shift(1, 1)
            + m.stratum("omega").unwrap().e_closure.shift(3, 3);
        assert_eq!(readded, m.e_total);
    }

    #[test]
    fn errors() {
        assert_eq!(
            ie_from_desing(&sl_map(), &["nope"]),
            Err(StratError::UnknownStratum("nope".into()))
        );
        let dup = SemismallMap::new(
            2,
            p("1"),
            vec![Stratum::new("a", p("1"), 2, 0), Stratum::new("a", p("1"), 0, 1)],
        );
        assert_eq!(dup, Err(StratError::DuplicateStratum("a".into())));
    }

    #[test]
    fn multiplicity_scales_contribution() {
        let mut s = Stratum::new("pt", p("1"), 0, 1);
        s.top_fiber_multiplicity = 3;
        let m = SemismallMap::new(2, p("u^2v^2 + 5uv"), vec![s]).unwrap();
        assert_eq!(ie_from_desing(&m, &["pt"]).unwrap(), p("u^2v^2 + 2uv"));
    }
}
