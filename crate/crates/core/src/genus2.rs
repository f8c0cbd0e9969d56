//! Rank-2 Higgs bundle moduli on a genus-2 curve, SL and GL flavors.
//!
//! Both stratifications ship as `.sx` programs next to `expected.json`,
//! which holds the printed polynomials and Betti lists they are audited
//! against. Expected values are data: the audit never rewrites them, it
//! classifies each one as `ok`, `documented` (a disagreement already
//! recorded in the dataset), `mismatch` or `error`.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{self, Computed, Env, Program, Report, RunError, Status};
use crate::hodge::{betti_from_pure_e, exterior_from_h1, trim_betti, HodgeDiamond, SignConvention};
use crate::poly::BivariatePoly;
use crate::spaces::{eval_space, SpaceExpr};
use crate::strat::check_semismall;

pub const SL_SOURCE: &str = include_str!("../data/sl.sx");
pub const GL_SOURCE: &str = include_str!("../data/gl.sx");
pub const EXPECTED_JSON: &str = include_str!("../data/expected.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Sl,
    Gl,
}

impl Suite {
    pub const ALL: [Suite; 2] = [Suite::Sl, Suite::Gl];

    pub fn program(self) -> Program {
        match self {
            Suite::Sl => build_sl_suite(),
            Suite::Gl => build_gl_suite(),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Sl => "sl",
            Suite::Gl => "gl",
        })
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sl" => Ok(Suite::Sl),
            "gl" => Ok(Suite::Gl),
            _ => Err(format!("unknown suite '{s}' (expected sl or gl)")),
        }
    }
}

pub fn build_sl_suite() -> Program {
    dsl::parse(SL_SOURCE).expect("bundled sl.sx parses")
}

pub fn build_gl_suite() -> Program {
    dsl::parse(GL_SOURCE).expect("bundled gl.sx parses")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatusClass {
    Pin,
    KnownDiscrepancy,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExpectedData {
    Poly { value: BivariatePoly },
    Betti { dim: u32, value: Vec<u64> },
}

/// One printed value. `target` names a binding of the suite's program.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectedValue {
    pub label: String,
    pub suite: Suite,
    pub target: String,
    #[serde(flatten)]
    pub data: ExpectedData,
    pub source: String,
    pub convention: SignConvention,
    pub status_class: StatusClass,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Error)]
pub enum ExpectedError {
    #[error("expected values: {0}")]
    Json(#[from] serde_json::Error),
    #[error("expected values: duplicate label '{0}'")]
    DuplicateLabel(String),
}

pub fn load_expected(json: &str) -> Result<Vec<ExpectedValue>, ExpectedError> {
    let values: Vec<ExpectedValue> = serde_json::from_str(json)?;
    let mut seen = std::collections::BTreeSet::new();
    for v in &values {
        if !seen.insert(v.label.as_str()) {
            return Err(ExpectedError::DuplicateLabel(v.label.clone()));
        }
    }
    Ok(values)
}

pub fn bundled_expected() -> Vec<ExpectedValue> {
    load_expected(EXPECTED_JSON).expect("bundled expected.json is valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditStatus {
    Ok,
    /// Disagrees with a value the dataset already classes as a known discrepancy.
    Documented,
    Mismatch,
    Error,
}

impl AuditStatus {
    pub fn is_failure(self) -> bool {
        matches!(self, AuditStatus::Mismatch | AuditStatus::Error)
    }
}

impl fmt::Display for AuditStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AuditStatus::Ok => "ok",
            AuditStatus::Documented => "documented",
            AuditStatus::Mismatch => "mismatch",
            AuditStatus::Error => "error",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditEntry {
    pub label: String,
    pub suite: Suite,
    pub target: String,
    pub status: AuditStatus,
    pub status_class: StatusClass,
    pub convention: SignConvention,
    /// Conventions under which the computed polynomial equals the printed one.
    pub reproduced_by: Vec<SignConvention>,
    pub computed: Option<Computed>,
    pub expected: ExpectedData,
    pub source: String,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleCheck {
    pub name: String,
    pub suite: Suite,
    pub status: AuditStatus,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuiteRun {
    pub suite: Suite,
    pub report: Report,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub entries: Vec<AuditEntry>,
    pub oracles: Vec<OracleCheck>,
    pub runs: Vec<SuiteRun>,
}

impl AuditReport {
    pub fn entry(&self, label: &str) -> Option<&AuditEntry> {
        self.entries.iter().find(|e| e.label == label)
    }

    pub fn oracle(&self, name: &str) -> Option<&OracleCheck> {
        self.oracles.iter().find(|o| o.name == name)
    }

    pub fn failures(&self) -> usize {
        self.entries.iter().filter(|e| e.status.is_failure()).count()
            + self.oracles.iter().filter(|o| o.status.is_failure()).count()
    }

    pub fn documented(&self) -> usize {
        self.entries.iter().filter(|e| e.status == AuditStatus::Documented).count()
    }

    pub fn passed(&self) -> bool {
        self.failures() == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("audit report serializes")
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let _ = writeln!(
                out,
                "{:<3}{:<11}{:<28}{} ({})",
                e.suite.to_string(),
                e.status.to_string(),
                e.label,
                e.target,
                e.convention
            );
            if e.status != AuditStatus::Ok && !e.note.is_empty() {
                let _ = writeln!(out, "              {}", e.note);
            }
        }
        for o in &self.oracles {
            let _ = writeln!(out, "{:<3}{:<11}oracle: {}", o.suite.to_string(), o.status.to_string(), o.name);
            if !o.note.is_empty() {
                let _ = writeln!(out, "              {}", o.note);
            }
        }
        let _ = writeln!(
            out,
            "{} checks, {} failures, {} documented discrepancies",
            self.entries.len() + self.oracles.len(),
            self.failures(),
            self.documented()
        );
        out
    }
}

/// Basis-level Sym²: every unordered pair of basis classes `{x, y}` with
/// `x != y`, plus `{x, x}` for even `x`. Only for small diamonds.
pub fn sym2_brute_force(d: &HodgeDiamond) -> HodgeDiamond {
    let mut basis = Vec::new();
    for (key, m) in d.entries() {
        let m = u64::try_from(m).expect("small nonnegative multiplicity");
        basis.extend(std::iter::repeat_n(key, m as usize));
    }
    let mut out: BTreeMap<(u32, u32, u32), BigInt> = BTreeMap::new();
    for (x, &(i, p, q)) in basis.iter().enumerate() {
        for (y, &(j, r, s)) in basis.iter().enumerate().skip(x) {
            if y == x && i % 2 == 1 {
                continue;
            }
            *out.entry((i + j, p + r, q + s)).or_default() += 1;
        }
    }
    HodgeDiamond::from_entries(d.flavor(), out)
}

fn poly_note(computed: &BivariatePoly, expected: &BivariatePoly) -> String {
    let diff = computed - expected;
    let weights = if diff.weight_sums().is_empty() { "weight sums agree; " } else { "" };
    format!("{weights}computed - expected = {diff}")
}

fn check_entry(env: &Env<'_>, ev: &ExpectedValue) -> AuditEntry {
    let mut entry = AuditEntry {
        label: ev.label.clone(),
        suite: ev.suite,
        target: ev.target.clone(),
        status: AuditStatus::Ok,
        status_class: ev.status_class,
        convention: ev.convention,
        reproduced_by: Vec::new(),
        computed: None,
        expected: ev.data.clone(),
        source: ev.source.clone(),
        note: String::new(),
    };
    let result: Result<(Computed, Option<String>), RunError> = match &ev.data {
        ExpectedData::Poly { value } => env.value(&ev.target, ev.convention).map(|got| {
            entry.reproduced_by = [SignConvention::Signed, SignConvention::Unsigned]
                .into_iter()
                .filter(|&c| env.value(&ev.target, c).is_ok_and(|p| p == *value))
                .collect();
            let note = (got != *value).then(|| poly_note(&got, value));
            (Computed::Poly(got), note)
        }),
        ExpectedData::Betti { dim, value } => env.value(&ev.target, ev.convention).and_then(|p| {
            let b = betti_from_pure_e(&p, *dim)?;
            let want: Vec<BigUint> = value.iter().map(|&x| BigUint::from(x)).collect();
            let note = (trim_betti(&b) != trim_betti(&want)).then(|| "Betti lists differ".to_string());
            Ok((Computed::Betti(b), note))
        }),
    };
    match result {
        Ok((computed, None)) => entry.computed = Some(computed),
        Ok((computed, Some(note))) => {
            entry.computed = Some(computed);
            entry.status = match ev.status_class {
                StatusClass::KnownDiscrepancy => AuditStatus::Documented,
                StatusClass::Pin => AuditStatus::Mismatch,
            };
            entry.note = note;
        }
        Err(e) => {
            entry.status = AuditStatus::Error;
            entry.note = e.to_string();
        }
    }
    if entry.status == AuditStatus::Ok && ev.status_class == StatusClass::KnownDiscrepancy {
        // a fixed discrepancy is still news
        entry.status = AuditStatus::Mismatch;
        entry.note = "classed as a known discrepancy but now agrees".to_string();
    }
    if let Some(n) = &ev.note {
        if !entry.note.is_empty() {
            entry.note.push_str("; ");
        }
        entry.note.push_str(n);
    }
    entry
}

fn oracle(name: &str, suite: Suite, ok: bool, note: String) -> OracleCheck {
    OracleCheck {
        name: name.to_string(),
        suite,
        status: if ok { AuditStatus::Ok } else { AuditStatus::Mismatch },
        note,
    }
}

fn sym2_oracle(name: &str, suite: Suite, d: &HodgeDiamond) -> OracleCheck {
    match d.graded_sym2() {
        Ok(formula) => {
            let brute = sym2_brute_force(d);
            let note = if formula == brute { String::new() } else { format!("formula {} vs brute force {}", formula.render_text(), brute.render_text()) };
            oracle(name, suite, formula == brute, note)
        }
        Err(e) => OracleCheck { name: name.to_string(), suite, status: AuditStatus::Error, note: e.to_string() },
    }
}

fn oracles(suite: Suite, program: &Program, env: &Env<'_>, run: &Report, expected: &[ExpectedValue]) -> Vec<OracleCheck> {
    let mut out = Vec::new();
    match suite {
        Suite::Sl => {
            let ie = env.value("IE", program.default_convention());
            let printed = expected.iter().find_map(|e| match (&e.data, e.suite == Suite::Sl && e.target == "IE") {
                (ExpectedData::Poly { value }, true) => Some(value.clone()),
                _ => None,
            });
            let (ok, note) = match (ie, printed) {
                (Ok(ie), Some(printed)) => {
                    let ok = ie.weight_sums() == printed.weight_sums();
                    let w: Vec<String> = ie.weight_sums().iter().rev().map(|(k, c)| format!("{k}:{c}")).collect();
                    (ok, format!("computed weight sums {{{}}}", w.join(", ")))
                }
                (Err(e), _) => (false, e.to_string()),
                (_, None) => (false, "no printed IE value in the dataset".to_string()),
            };
            out.push(oracle("IE weight sums equal the printed ones", suite, ok, note));
            out.push(sym2_oracle("graded Sym2 formula vs brute force: elliptic curve", suite, &exterior_from_h1(1)));
        }
        Suite::Gl => {
            out.push(sym2_oracle("graded Sym2 formula vs brute force: genus-2 Jacobian", suite, &exterior_from_h1(2)));
            let jac = SpaceExpr::Abelian(2);
            let lhs = eval_space(&SpaceExpr::sym2(SpaceExpr::product(jac.clone(), SpaceExpr::Affine(2))), SignConvention::Unsigned);
            let rhs = eval_space(&SpaceExpr::sym2(jac), SignConvention::Unsigned).map(|p| p.shift(4, 4));
            let (ok, note) = match (lhs, rhs) {
                (Ok(l), Ok(r)) if l == r => (true, String::new()),
                (Ok(l), Ok(r)) => (false, format!("difference {}", &l - &r)),
                (Err(e), _) | (_, Err(e)) => (false, e.to_string()),
            };
            out.push(oracle("Sym2(Jac x A^2) = E(Sym2 Jac) (uv)^4", suite, ok, note));
        }
    }
    let (ok, note) = match env.map("Desing", program.default_convention()) {
        Ok(m) => {
            let checks = check_semismall(&m);
            let ok = checks.iter().all(|c| c.bound_ok && c.relevant);
            (ok, Computed::Semismall(checks).to_string())
        }
        Err(e) => (false, e.to_string()),
    };
    out.push(oracle("every stratum attains the semismall bound", suite, ok, note));
    let failed: Vec<String> = run
        .entries
        .iter()
        .filter(|e| e.status != Status::Ok)
        .map(|e| format!("{}({})", e.directive, e.input))
        .collect();
    out.push(oracle("suite program runs cleanly", suite, failed.is_empty(), failed.join(", ")));
    out
}

/// Runs the selected suites and checks every expected value belonging to them.
pub fn audit_with(expected: &[ExpectedValue], suites: &[Suite]) -> AuditReport {
    let mut report = AuditReport { entries: Vec::new(), oracles: Vec::new(), runs: Vec::new() };
    for &suite in suites {
        let program = suite.program();
        let env = Env::new(&program);
        let run = dsl::run(&program);
        report
            .entries
            .extend(expected.iter().filter(|e| e.suite == suite).map(|e| check_entry(&env, e)));
        report.oracles.extend(oracles(suite, &program, &env, &run, expected));
        report.runs.push(SuiteRun { suite, report: run });
    }
    report
}

pub fn audit() -> AuditReport {
    audit_with(&bundled_expected(), &Suite::ALL)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LookupError {
    #[error("'{0}' is neither an expected-value label nor a binding of either suite")]
    Unknown(String),
    #[error("'{0}' is bound in both suites; write sl:{0} or gl:{0}")]
    Ambiguous(String),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error(transparent)]
    Hodge(#[from] crate::hodge::HodgeError),
}

/// Finds the suite, binding and convention behind a label (`IE.SL`), a
/// qualified binding (`gl:Mt`) or an unambiguous binding name.
pub fn resolve_name(name: &str, expected: &[ExpectedValue]) -> Result<(Suite, String, SignConvention), LookupError> {
    if let Some(e) = expected.iter().find(|e| e.label == name) {
        return Ok((e.suite, e.target.clone(), e.convention));
    }
    let (suites, binding): (Vec<Suite>, &str) = match name.split_once(':') {
        Some((s, b)) => (vec![s.parse().map_err(|_| LookupError::Unknown(name.to_string()))?], b),
        None => (Suite::ALL.to_vec(), name),
    };
    let hits: Vec<(Suite, SignConvention)> = suites
        .into_iter()
        .filter_map(|s| {
            let p = s.program();
            p.binding(binding).map(|_| (s, p.default_convention()))
        })
        .collect();
    match hits.as_slice() {
        [] => Err(LookupError::Unknown(name.to_string())),
        [(s, c)] => Ok((*s, binding.to_string(), *c)),
        _ => Err(LookupError::Ambiguous(name.to_string())),
    }
}

/// Betti numbers of a named suite value, read off its weights at dimension
/// `dim`, without trailing zeros. `convention` overrides the one the name
/// resolves to.
pub fn betti_of(
    name: &str,
    dim: u32,
    convention: Option<SignConvention>,
    expected: &[ExpectedValue],
) -> Result<Vec<BigUint>, LookupError> {
    let (suite, target, resolved) = resolve_name(name, expected)?;
    let convention = convention.unwrap_or(resolved);
    let program = suite.program();
    let env = Env::new(&program);
    let e = env.value(&target, convention)?;
    Ok(trim_betti(&betti_from_pure_e(&e, dim)?).to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::tests::p;

    fn value(suite: Suite, name: &str) -> BivariatePoly {
        let program = suite.program();
        let env = Env::new(&program);
        env.value(name, program.default_convention()).unwrap()
    }

    #[test]
    fn suites_parse_and_render() {
        for s in Suite::ALL {
            let prog = s.program();
            assert_eq!(dsl::parse(&prog.to_string()).unwrap(), prog);
        }
    }

    #[test]
    fn sl_examples() {
        assert_eq!(value(Suite::Sl, "TS"), p("u^6v^6 - u^3v^5 - u^5v^3 - 3u^4v^4"));
        assert_eq!(value(Suite::Sl, "S4"), p("16u^4v^4 - 16u^2v^2"));
        assert_eq!(value(Suite::Sl, "S2"), p("0"));
        let b = betti_of("IE.SL", 6, None, &bundled_expected()).unwrap();
        assert_eq!(b.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "), "1 0 1 0 17 0 17");
    }

    #[test]
    fn gl_examples() {
        assert_eq!(
            value(Suite::Gl, "NU"),
            p("u^5v^5 + 2u^6v^5 + u^7v^5 + 2u^5v^6 + 4u^6v^6 + 2u^7v^6 + u^5v^7 + 2u^6v^7 + u^7v^7")
        );
        let j2 = value(Suite::Gl, "J2");
        assert_eq!((j2.coeff(0, 0), j2.coeff(1, 0), j2.coeff(0, 1)), (1.into(), 2.into(), 2.into()));
        let b = betti_of("IP.GL", 10, None, &bundled_expected()).unwrap();
        assert_eq!(b, [1u32, 4, 7, 8, 9, 12, 15, 16, 14, 8, 2].map(BigUint::from).to_vec());
    }

    #[test]
    fn audit_classifies_everything() {
        let r = audit();
        assert!(r.passed(), "{}", r.render_text());
        let documented: Vec<&str> = r
            .entries
            .iter()
            .filter(|e| e.status == AuditStatus::Documented)
            .map(|e| e.label.as_str())
            .collect();
        assert_eq!(documented, ["IE.SL", "E.N4.statement", "E.Ms.GL.statement", "E.SigmaMinusOmega.GL"]);
        let ie = r.entry("IE.SL").unwrap();
        assert!(ie.note.starts_with("weight sums agree; computed - expected = "), "{}", ie.note);
        assert!(r.oracles.iter().all(|o| o.status == AuditStatus::Ok));
    }

    #[test]
    fn sl_audit_has_one_documented_discrepancy() {
        let r = audit_with(&bundled_expected(), &[Suite::Sl]);
        assert!(r.passed());
        assert_eq!(r.documented(), 1);
    }

    #[test]
    fn conventions_recorded() {
        let r = audit();
        let e = r.entry("E.S1").unwrap();
        assert_eq!(e.reproduced_by, [SignConvention::Signed, SignConvention::Unsigned]);
        assert_eq!(r.entry("E.NU").unwrap().reproduced_by, [SignConvention::Unsigned]);
        assert_eq!(r.entry("IE.GL").unwrap().reproduced_by, [SignConvention::Unsigned]);
    }

    #[test]
    fn sx_expects_match_pins() {
        let expected = bundled_expected();
        for s in Suite::ALL {
            let prog = s.program();
            let expects: Vec<(String, BivariatePoly)> = prog
                .directives
                .iter()
                .filter_map(|d| match d {
                    dsl::Directive::Expect { name, value } => Some((name.clone(), value.clone())),
                    _ => None,
                })
                .collect();
            let pins: Vec<(String, BivariatePoly)> = expected
                .iter()
                .filter(|e| e.suite == s && e.status_class == StatusClass::Pin)
                .filter_map(|e| match &e.data {
                    ExpectedData::Poly { value } => Some((e.target.clone(), value.clone())),
                    ExpectedData::Betti { .. } => None,
                })
                .collect();
            assert_eq!(expects, pins, "suite {s}");
        }
    }

    #[test]
    fn tampered_pin_fails() {
        let mut expected = bundled_expected();
        let e = expected.iter_mut().find(|e| e.label == "E.U").unwrap();
        e.data = ExpectedData::Poly { value: p("17u^3v^3") };
        let r = audit_with(&expected, &[Suite::Sl]);
        assert_eq!(r.entry("E.U").unwrap().status, AuditStatus::Mismatch);
        assert!(!r.passed());
        let e = expected.iter_mut().find(|e| e.label == "E.U").unwrap();
        e.status_class = StatusClass::KnownDiscrepancy;
        let r = audit_with(&expected, &[Suite::Sl]);
        assert_eq!(r.entry("E.U").unwrap().status, AuditStatus::Documented);
    }

    #[test]
    fn duplicate_labels_rejected() {
        let one = r#"{"label":"A","suite":"sl","target":"K","kind":"betti","dim":2,"value":[1],"source":"s","convention":"signed","status_class":"pin"}"#;
        assert!(matches!(load_expected(&format!("[{one},{one}]")), Err(ExpectedError::DuplicateLabel(_))));
        assert_eq!(load_expected(&format!("[{one}]")).unwrap().len(), 1);
    }

    #[test]
    fn name_resolution() {
        let ex = bundled_expected();
        assert_eq!(resolve_name("IE.SL", &ex).unwrap(), (Suite::Sl, "IE".into(), SignConvention::Signed));
        assert_eq!(resolve_name("gl:Mt", &ex).unwrap(), (Suite::Gl, "Mt".into(), SignConvention::Unsigned));
        assert_eq!(resolve_name("K3", &ex).unwrap().0, Suite::Sl);
        assert_eq!(resolve_name("Mt", &ex), Err(LookupError::Ambiguous("Mt".into())));
        assert_eq!(resolve_name("nope", &ex), Err(LookupError::Unknown("nope".into())));
    }

    #[test]
    fn brute_force_matches_known_cases() {
        let e = exterior_from_h1(1);
        let s = sym2_brute_force(&e);
        // Sym² of an elliptic curve is a P^1-bundle over it
        assert_eq!(s.to_epoly(SignConvention::Signed), p("1 - u - v + uv") * p("1 + uv"));
    }
}
