//! The `.sx` stratification language.
//!
//! A program binds spaces, polynomials and semismall maps, then runs
//! directives over them:
//!
//! ```text
//! # Kummer surface and one stratum built from it
//! convention signed;
//! space K = Quot2(Abelian(2));
//! space S1 = (K - Finite(16)) * Affine(2) * Gm;
//! poly P = u^2v^2 + 4uv - 15;
//! map M = semismall(dim=6, total=X) {
//!     stratum smooth (dim=6, fiber=0, closure=u^6v^6);
//!     stratum sigma (dim=4, fiber=1, closure=Sigma);
//! };
//! epoly(S1, signed);
//! weights(S1);
//! betti(X, 6);
//! semismall(M);
//! ie(M, sigma);
//! expect(S1, u^5v^5 + 3u^4v^4 - 19u^3v^3);
//! ```
//!
//! Space expressions use `*` for products and bundles, `-` for removing a
//! closed piece, `+` for disjoint union, `/` for a free quotient and `n * X`
//! for `n` disjoint copies. `poly NAME = ie(MAP, strata...)` binds an
//! intersection E-polynomial for later directives. The optional
//! `convention` statement sets the sign convention used wherever a
//! directive does not name one; it defaults to `signed`.
//!
//! `expect` failures and evaluation errors are report entries: a run never
//! stops early.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};

use num_bigint::{BigInt, BigUint};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::hodge::{betti_from_pure_e, HodgeError, SignConvention};
use crate::poly::{BivariatePoly, JsonInt};
use crate::spaces::{eval_space, SpaceError, SpaceExpr};
use crate::strat::{check_semismall, ie_from_desing, SemismallMap, StratError, Stratum, StratumCheck};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DslError {
    #[error("{line}:{col}: syntax error: expected {}, found {found}", expected.join(" or "))]
    Syntax { line: usize, col: usize, expected: Vec<String>, found: String },
    #[error("{line}:{col}: unbound name '{name}'")]
    UnboundName { line: usize, col: usize, name: String },
    #[error("{line}:{col}: '{name}' is already bound")]
    DuplicateName { line: usize, col: usize, name: String },
    #[error("{line}:{col}: '{name}' is a {found}, expected a {expected}")]
    WrongKind { line: usize, col: usize, name: String, expected: &'static str, found: &'static str },
}

/// Surface syntax of a space expression. Names refer to earlier `space`
/// bindings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Name(String),
    Point,
    Affine(u32),
    Gm,
    Proj(u32),
    Quadric3,
    Abelian(u32),
    Quot2(Box<Expr>),
    Finite(u32),
    Sym2(Box<Expr>),
    Scale(u32, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
}

/// A space or polynomial name, or an inline polynomial literal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ref {
    Name(String),
    Literal(BivariatePoly),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StratumDecl {
    pub name: String,
    pub dim: u32,
    pub fiber: u32,
    pub closure: Ref,
    pub mult: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapDecl {
    pub dim: u32,
    pub total: Ref,
    pub strata: Vec<StratumDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PolyDef {
    Literal(BivariatePoly),
    Ie { map: String, strata: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BindingValue {
    Space(Expr),
    Poly(PolyDef),
    Map(MapDecl),
}

impl BindingValue {
    fn kind(&self) -> &'static str {
        match self {
            BindingValue::Space(_) => "space",
            BindingValue::Poly(_) => "poly",
            BindingValue::Map(_) => "map",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Binding {
    pub name: String,
    pub value: BindingValue,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Directive {
    Epoly { name: String, convention: Option<SignConvention> },
    Weights { name: String },
    Betti { name: String, dim: u32 },
    Semismall { name: String },
    Ie { map: String, strata: Vec<String> },
    Expect { name: String, value: BivariatePoly },
}

impl Directive {
    pub fn keyword(&self) -> &'static str {
        match self {
            Directive::Epoly { .. } => "epoly",
            Directive::Weights { .. } => "weights",
            Directive::Betti { .. } => "betti",
            Directive::Semismall { .. } => "semismall",
            Directive::Ie { .. } => "ie",
            Directive::Expect { .. } => "expect",
        }
    }

    /// Rendered arguments, without the keyword.
    pub fn input(&self) -> String {
        match self {
            Directive::Epoly { name, convention: Some(c) } => format!("{name}, {c}"),
            Directive::Epoly { name, convention: None }
            | Directive::Weights { name }
            | Directive::Semismall { name } => name.clone(),
            Directive::Betti { name, dim } => format!("{name}, {dim}"),
            Directive::Ie { map, strata } => std::iter::once(map.as_str())
                .chain(strata.iter().map(String::as_str))
                .collect::<Vec<_>>()
                .join(", "),
            Directive::Expect { name, value } => format!("{name}, {value}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Program {
    pub convention: Option<SignConvention>,
    pub bindings: Vec<Binding>,
    pub directives: Vec<Directive>,
}

impl Program {
    pub fn binding(&self, name: &str) -> Option<&BindingValue> {
        self.bindings.iter().find(|b| b.name == name).map(|b| &b.value)
    }

    pub fn default_convention(&self) -> SignConvention {
        self.convention.unwrap_or_default()
    }
}

/// Parses `.sx` source, stopping at the first error.
pub fn parse(source: &str) -> Result<Program, DslError> {
    Parser { src: source, pos: 0, program: Program::default(), convention_seen: false }.program()
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    program: Program,
    convention_seen: bool,
}

const SPACE_KEYWORDS: &[&str] =
    &["Point", "Affine", "Gm", "Proj", "Quadric3", "Abelian", "Quot2", "Finite", "Sym2"];
const STATEMENT_KEYWORDS: &[&str] = &[
    "space", "poly", "map", "convention", "epoly", "weights", "betti", "semismall", "ie", "expect",
    "stratum",
];

impl Parser<'_> {
    fn line_col(&self, pos: usize) -> (usize, usize) {
        let before = &self.src[..pos.min(self.src.len())];
        let line = before.matches('\n').count() + 1;
        let col = before.rfind('\n').map_or(before.chars().count(), |i| before[i + 1..].chars().count()) + 1;
        (line, col)
    }

    fn found(&self) -> String {
        match self.src[self.pos..].chars().next() {
            None => "end of input".to_string(),
            Some(c) if c.is_alphanumeric() || c == '_' => {
                let word: String = self.src[self.pos..]
                    .chars()
                    .take_while(|c| c.is_alphanumeric() || *c == '_')
                    .collect();
                format!("'{word}'")
            }
            Some(c) => format!("'{c}'"),
        }
    }

    fn syntax<T>(&self, expected: &[&str]) -> Result<T, DslError> {
        let (line, col) = self.line_col(self.pos);
        Err(DslError::Syntax {
            line,
            col,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.found(),
        })
    }

    fn skip_trivia(&mut self) {
        loop {
            let rest = &self.src[self.pos..];
            let trimmed = rest.trim_start();
            self.pos += rest.len() - trimmed.len();
            if trimmed.starts_with('#') {
                self.pos += trimmed.find('\n').unwrap_or(trimmed.len());
            } else {
                break;
            }
        }
    }

    fn peek_char(&mut self) -> Option<char> {
        self.skip_trivia();
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek_char() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), DslError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.syntax(&[&format!("'{c}'")])
        }
    }

    fn peek_ident(&mut self) -> Option<&str> {
        self.skip_trivia();
        let rest = &self.src[self.pos..];
        let mut chars = rest.char_indices();
        match chars.next() {
            Some((_, c)) if c.is_alphabetic() || c == '_' => {}
            _ => return None,
        }
        let end = chars
            .find(|(_, c)| !(c.is_alphanumeric() || *c == '_'))
            .map_or(rest.len(), |(i, _)| i);
        Some(&rest[..end])
    }

    /// Reads an identifier; returns it with its starting byte offset.
    fn ident(&mut self, what: &str) -> Result<(String, usize), DslError> {
        match self.peek_ident() {
            Some(id) => {
                let id = id.to_string();
                let start = self.pos;
                self.pos += id.len();
                Ok((id, start))
            }
            None => self.syntax(&[what]),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), DslError> {
        if self.peek_ident() == Some(kw) {
            self.pos += kw.len();
            Ok(())
        } else {
            self.syntax(&[&format!("'{kw}'")])
        }
    }

    fn int(&mut self) -> Result<u32, DslError> {
        self.skip_trivia();
        let rest = &self.src[self.pos..];
        let end = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
        match rest[..end].parse::<u32>() {
            Ok(n) if end > 0 => {
                self.pos += end;
                Ok(n)
            }
            _ => self.syntax(&["integer"]),
        }
    }

    fn peek_is_int(&mut self) -> bool {
        self.peek_char().is_some_and(|c| c.is_ascii_digit())
    }

    fn key(&mut self, k: &str) -> Result<(), DslError> {
        self.keyword(k)?;
        self.expect('=')
    }

    /// Reads a polynomial literal up to the next top-level `,`, `)` or `;`.
    fn poly_literal(&mut self) -> Result<BivariatePoly, DslError> {
        self.skip_trivia();
        let start = self.pos;
        let mut depth = 0i32;
        let rest = &self.src[start..];
        let end = rest
            .char_indices()
            .find(|&(_, c)| match c {
                '{' => {
                    depth += 1;
                    false
                }
                '}' if depth > 0 => {
                    depth -= 1;
                    false
                }
                ',' | ')' | ';' | '}' | '#' | '\n' => depth == 0,
                _ => false,
            })
            .map_or(rest.len(), |(i, _)| i);
        match rest[..end].parse::<BivariatePoly>() {
            Ok(p) => {
                self.pos = start + end;
                Ok(p)
            }
            Err(e) => {
                self.pos = start + e.position.min(end);
                self.syntax(&["polynomial literal"])
            }
        }
    }

    fn lookup(&self, name: &str, at: usize) -> Result<&BindingValue, DslError> {
        self.program.binding(name).ok_or_else(|| {
            let (line, col) = self.line_col(at);
            DslError::UnboundName { line, col, name: name.to_string() }
        })
    }

    fn require_kind(&self, name: &str, at: usize, expected: &'static str) -> Result<(), DslError> {
        let found = self.lookup(name, at)?.kind();
        if found == expected {
            Ok(())
        } else {
            let (line, col) = self.line_col(at);
            Err(DslError::WrongKind { line, col, name: name.to_string(), expected, found })
        }
    }

    fn require_value(&self, name: &str, at: usize) -> Result<(), DslError> {
        self.lookup(name, at).map(|_| ())
    }

    fn reference(&mut self) -> Result<Ref, DslError> {
        self.skip_trivia();
        let save = self.pos;
        if let Some(id) = self.peek_ident() {
            if id.parse::<BivariatePoly>().is_err() {
                let (id, at) = self.ident("name")?;
                let kind = self.lookup(&id, at)?.kind();
                if kind == "map" {
                    let (line, col) = self.line_col(at);
                    return Err(DslError::WrongKind { line, col, name: id, expected: "space or poly", found: kind });
                }
                return Ok(Ref::Name(id));
            }
        }
        self.pos = save;
        self.poly_literal().map(Ref::Literal)
    }

    fn program(mut self) -> Result<Program, DslError> {
        while self.peek_char().is_some() {
            self.statement()?;
        }
        Ok(self.program)
    }

    fn new_name(&mut self) -> Result<(String, usize), DslError> {
        let (name, at) = self.ident("name")?;
        if STATEMENT_KEYWORDS.contains(&name.as_str())
            || SPACE_KEYWORDS.contains(&name.as_str())
            || name.parse::<BivariatePoly>().is_ok()
        {
            self.pos = at;
            return self.syntax(&["a name that is neither a keyword nor a monomial"]);
        }
        Ok((name, at))
    }

    fn bind(&mut self, name: String, at: usize, value: BindingValue) -> Result<(), DslError> {
        if self.program.binding(&name).is_some() {
            let (line, col) = self.line_col(at);
            return Err(DslError::DuplicateName { line, col, name });
        }
        self.program.bindings.push(Binding { name, value });
        Ok(())
    }

    fn statement(&mut self) -> Result<(), DslError> {
        let start = self.pos;
        let Ok((kw, _)) = self.ident("statement") else {
            return self.syntax(&["statement"]);
        };
        match kw.as_str() {
            "convention" => {
                if self.convention_seen {
                    self.pos = start;
                    return self.syntax(&["at most one 'convention' statement"]);
                }
                self.convention_seen = true;
                self.program.convention = Some(self.convention()?);
            }
            "space" => {
                let (name, at) = self.new_name()?;
                self.expect('=')?;
                let e = self.expr()?;
                self.bind(name, at, BindingValue::Space(e))?;
            }
            "poly" => {
                let (name, at) = self.new_name()?;
                self.expect('=')?;
                let def = if self.peek_ident() == Some("ie") {
                    self.pos += 2;
                    let (map, strata) = self.ie_args()?;
                    PolyDef::Ie { map, strata }
                } else {
                    PolyDef::Literal(self.poly_literal()?)
                };
                self.bind(name, at, BindingValue::Poly(def))?;
            }
            "map" => {
                let (name, at) = self.new_name()?;
                self.expect('=')?;
                let decl = self.map_decl()?;
                self.bind(name, at, BindingValue::Map(decl))?;
            }
            "epoly" => {
                self.expect('(')?;
                let name = self.value_name()?;
                let convention = if self.eat(',') { Some(self.convention()?) } else { None };
                self.expect(')')?;
                self.program.directives.push(Directive::Epoly { name, convention });
            }
            "weights" => {
                self.expect('(')?;
                let name = self.value_name()?;
                self.expect(')')?;
                self.program.directives.push(Directive::Weights { name });
            }
            "betti" => {
                self.expect('(')?;
                let name = self.value_name()?;
                self.expect(',')?;
                let dim = self.int()?;
                self.expect(')')?;
                self.program.directives.push(Directive::Betti { name, dim });
            }
            "semismall" => {
                self.expect('(')?;
                let (name, at) = self.ident("map name")?;
                self.require_kind(&name, at, "map")?;
                self.expect(')')?;
                self.program.directives.push(Directive::Semismall { name });
            }
            "ie" => {
                let (map, strata) = self.ie_args()?;
                self.program.directives.push(Directive::Ie { map, strata });
            }
            "expect" => {
                self.expect('(')?;
                let name = self.value_name()?;
                self.expect(',')?;
                let value = self.poly_literal()?;
                self.expect(')')?;
                self.program.directives.push(Directive::Expect { name, value });
            }
            _ => {
                self.pos = start;
                return self.syntax(&["statement"]);
            }
        }
        self.expect(';')
    }

    fn convention(&mut self) -> Result<SignConvention, DslError> {
        match self.peek_ident() {
            Some("signed") => {
                self.pos += 6;
                Ok(SignConvention::Signed)
            }
            Some("unsigned") => {
                self.pos += 8;
                Ok(SignConvention::Unsigned)
            }
            _ => self.syntax(&["'signed'", "'unsigned'"]),
        }
    }

    fn value_name(&mut self) -> Result<String, DslError> {
        let (name, at) = self.ident("name")?;
        self.require_value(&name, at)?;
        Ok(name)
    }

    fn ie_args(&mut self) -> Result<(String, Vec<String>), DslError> {
        self.expect('(')?;
        let (map, at) = self.ident("map name")?;
        self.require_kind(&map, at, "map")?;
        let mut strata = Vec::new();
        while self.eat(',') {
            strata.push(self.ident("stratum name")?.0);
        }
        self.expect(')')?;
        Ok((map, strata))
    }

    fn map_decl(&mut self) -> Result<MapDecl, DslError> {
        self.keyword("semismall")?;
        self.expect('(')?;
        self.key("dim")?;
        let dim = self.int()?;
        self.expect(',')?;
        self.key("total")?;
        let total = self.reference()?;
        self.expect(')')?;
        self.expect('{')?;
        let mut strata = Vec::new();
        while !self.eat('}') {
            self.keyword("stratum")?;
            let (name, _) = self.ident("stratum name")?;
            self.expect('(')?;
            self.key("dim")?;
            let sdim = self.int()?;
            self.expect(',')?;
            self.key("fiber")?;
            let fiber = self.int()?;
            self.expect(',')?;
            self.key("closure")?;
            let closure = self.reference()?;
            let mult = if self.eat(',') {
                self.key("mult")?;
                self.int()?
            } else {
                1
            };
            self.expect(')')?;
            self.expect(';')?;
            strata.push(StratumDecl { name, dim: sdim, fiber, closure, mult });
        }
        Ok(MapDecl { dim, total, strata })
    }

    fn expr(&mut self) -> Result<Expr, DslError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, DslError> {
        if self.peek_is_int() {
            let n = self.int()?;
            self.expect('*')?;
            return Ok(Expr::Scale(n, Box::new(self.term()?)));
        }
        let mut lhs = self.factor()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn paren_int(&mut self) -> Result<u32, DslError> {
        self.expect('(')?;
        let n = self.int()?;
        self.expect(')')?;
        Ok(n)
    }

    fn paren_expr(&mut self) -> Result<Box<Expr>, DslError> {
        self.expect('(')?;
        let e = self.expr()?;
        self.expect(')')?;
        Ok(Box::new(e))
    }

    fn factor(&mut self) -> Result<Expr, DslError> {
        if self.eat('(') {
            let e = self.expr()?;
            self.expect(')')?;
            return Ok(e);
        }
        let Some(id) = self.peek_ident() else {
            return self.syntax(&["space expression"]);
        };
        let id = id.to_string();
        let at = self.pos;
        self.pos += id.len();
        Ok(match id.as_str() {
            "Point" => Expr::Point,
            "Gm" => Expr::Gm,
            "Quadric3" => Expr::Quadric3,
            "Affine" => Expr::Affine(self.paren_int()?),
            "Proj" => Expr::Proj(self.paren_int()?),
            "Abelian" => Expr::Abelian(self.paren_int()?),
            "Finite" => Expr::Finite(self.paren_int()?),
            "Quot2" => Expr::Quot2(self.paren_expr()?),
            "Sym2" => Expr::Sym2(self.paren_expr()?),
            _ => {
                self.require_kind(&id, at, "space")?;
                Expr::Name(id)
            }
        })
    }
}

// ---------------------------------------------------------------------------
// Rendering

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Scale(..) => 0,
        _ => 3,
    }
}

fn render_child(e: &Expr, parens: bool) -> String {
    if parens {
        format!("({e})")
    } else {
        e.to_string()
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Name(n) => f.write_str(n),
            Expr::Point => f.write_str("Point"),
            Expr::Gm => f.write_str("Gm"),
            Expr::Quadric3 => f.write_str("Quadric3"),
            Expr::Affine(n) => write!(f, "Affine({n})"),
            Expr::Proj(n) => write!(f, "Proj({n})"),
            Expr::Abelian(n) => write!(f, "Abelian({n})"),
            Expr::Finite(n) => write!(f, "Finite({n})"),
            Expr::Quot2(e) => write!(f, "Quot2({e})"),
            Expr::Sym2(e) => write!(f, "Sym2({e})"),
            Expr::Scale(n, e) => write!(f, "{n} * {}", render_child(e, prec(e) == 1)),
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                let op = if matches!(self, Expr::Add(..)) { "+" } else { "-" };
                write!(f, "{} {op} {}", a, render_child(b, prec(b) == 1))
            }
            Expr::Mul(a, b) | Expr::Div(a, b) => {
                let op = if matches!(self, Expr::Mul(..)) { "*" } else { "/" };
                let left = render_child(a, prec(a) < 2);
                write!(f, "{left} {op} {}", render_child(b, prec(b) < 3))
            }
        }
    }
}

impl fmt::Display for Ref {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ref::Name(n) => f.write_str(n),
            Ref::Literal(p) => write!(f, "{p}"),
        }
    }
}

impl fmt::Display for Program {
    /// Canonical source: convention, then bindings, then directives.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(c) = self.convention {
            writeln!(f, "convention {c};")?;
        }
        for b in &self.bindings {
            match &b.value {
                BindingValue::Space(e) => writeln!(f, "space {} = {e};", b.name)?,
                BindingValue::Poly(PolyDef::Literal(p)) => writeln!(f, "poly {} = {p};", b.name)?,
                BindingValue::Poly(PolyDef::Ie { map, strata }) => {
                    let args = Directive::Ie { map: map.clone(), strata: strata.clone() }.input();
                    writeln!(f, "poly {} = ie({args});", b.name)?
                }
                BindingValue::Map(m) => {
                    writeln!(f, "map {} = semismall(dim={}, total={}) {{", b.name, m.dim, m.total)?;
                    for s in &m.strata {
                        write!(f, "    stratum {} (dim={}, fiber={}, closure={}", s.name, s.dim, s.fiber, s.closure)?;
                        if s.mult != 1 {
                            write!(f, ", mult={}", s.mult)?;
                        }
                        writeln!(f, ");")?;
                    }
                    writeln!(f, "}};")?;
                }
            }
        }
        for d in &self.directives {
            writeln!(f, "{}({});", d.keyword(), d.input())?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Evaluation

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RunError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Strat(#[from] StratError),
    #[error(transparent)]
    Hodge(#[from] HodgeError),
    #[error("'{0}' is not a semismall map")]
    NotAMap(String),
    #[error("unbound name '{0}'")]
    Unbound(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Mismatch,
    Error,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Ok => "ok",
            Status::Mismatch => "mismatch",
            Status::Error => "error",
        })
    }
}

/// What a directive produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Computed {
    Poly(BivariatePoly),
    Weights(BTreeMap<u32, BigInt>),
    Betti(Vec<BigUint>),
    Semismall(Vec<StratumCheck>),
}

impl Serialize for Computed {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Computed::Poly(p) => p.serialize(serializer),
            Computed::Weights(w) => {
                let mut map = serializer.serialize_map(Some(w.len()))?;
                for (k, c) in w {
                    map.serialize_entry(&k.to_string(), &JsonInt::from(c))?;
                }
                map.end()
            }
            Computed::Betti(b) => b
                .iter()
                .map(|x| JsonInt::from(&BigInt::from(x.clone())))
                .collect::<Vec<_>>()
                .serialize(serializer),
            Computed::Semismall(c) => c.serialize(serializer),
        }
    }
}

impl fmt::Display for Computed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Computed::Poly(p) => write!(f, "{p}"),
            Computed::Weights(w) => {
                let parts: Vec<String> = w.iter().rev().map(|(k, c)| format!("{k}:{c}")).collect();
                write!(f, "{{{}}}", parts.join(", "))
            }
            Computed::Betti(b) => {
                let parts: Vec<String> = crate::hodge::trim_betti(b).iter().map(|x| x.to_string()).collect();
                f.write_str(&parts.join(" "))
            }
            Computed::Semismall(cs) => {
                let parts: Vec<String> = cs
                    .iter()
                    .map(|c| {
                        let tag = match (c.bound_ok, c.relevant) {
                            (true, true) => "relevant",
                            (true, false) => "ok",
                            _ => "violates bound",
                        };
                        format!("{}: {tag}", c.name)
                    })
                    .collect();
                f.write_str(&parts.join(", "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReportEntry {
    pub directive: String,
    pub input: String,
    pub computed: Option<Computed>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<BivariatePoly>,
    pub status: Status,
    pub note: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Report {
    pub entries: Vec<ReportEntry>,
}

impl Report {
    pub fn failures(&self) -> usize {
        self.entries.iter().filter(|e| e.status != Status::Ok).count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let _ = write!(out, "{:<9}{}({})", e.status.to_string(), e.directive, e.input);
            if let Some(c) = &e.computed {
                if !matches!(e.directive.as_str(), "expect") || e.status != Status::Ok {
                    let _ = write!(out, "\n         = {c}");
                }
            }
            if !e.note.is_empty() {
                let _ = write!(out, "\n         note: {}", e.note);
            }
            out.push('\n');
        }
        out
    }
}

/// Evaluation context: space bindings are resolved once, in source order.
pub struct Env<'a> {
    program: &'a Program,
    spaces: HashMap<&'a str, Result<SpaceExpr, RunError>>,
}

impl<'a> Env<'a> {
    pub fn new(program: &'a Program) -> Self {
        let mut env = Env { program, spaces: HashMap::new() };
        for b in &program.bindings {
            if let BindingValue::Space(e) = &b.value {
                let resolved = env.resolve(e);
                env.spaces.insert(b.name.as_str(), resolved);
            }
        }
        env
    }

    fn resolve(&self, e: &Expr) -> Result<SpaceExpr, RunError> {
        let bx = |e: &Expr| self.resolve(e);
        Ok(match e {
            Expr::Name(n) => self.space(n)?,
            Expr::Point => SpaceExpr::Point,
            Expr::Gm => SpaceExpr::Gm,
            Expr::Quadric3 => SpaceExpr::Quadric3,
            Expr::Affine(n) => SpaceExpr::Affine(*n),
            Expr::Proj(n) => SpaceExpr::Proj(*n),
            Expr::Abelian(g) => SpaceExpr::Abelian(*g),
            Expr::Finite(n) => SpaceExpr::Finite(*n),
            Expr::Quot2(inner) => match bx(inner)? {
                SpaceExpr::Abelian(g) => SpaceExpr::KummerQuot(g),
                _ => return Err(HodgeError::NotExteriorAlgebra.into()),
            },
            Expr::Sym2(inner) => SpaceExpr::sym2(bx(inner)?),
            Expr::Scale(n, inner) => SpaceExpr::copies(*n, bx(inner)?),
            Expr::Mul(a, b) => SpaceExpr::bundle(bx(a)?, bx(b)?),
            Expr::Sub(a, b) => SpaceExpr::difference(bx(a)?, bx(b)?),
            Expr::Add(a, b) => SpaceExpr::union(bx(a)?, bx(b)?),
            Expr::Div(a, b) => SpaceExpr::free_quotient(bx(a)?, bx(b)?),
        })
    }

    /// The resolved expression bound to a `space` name.
    pub fn space(&self, name: &str) -> Result<SpaceExpr, RunError> {
        self.spaces.get(name).cloned().unwrap_or_else(|| Err(RunError::Unbound(name.to_string())))
    }

    fn reference(&self, r: &Ref, c: SignConvention) -> Result<BivariatePoly, RunError> {
        match r {
            Ref::Literal(p) => Ok(p.clone()),
            Ref::Name(n) => self.value(n, c),
        }
    }

    /// E-polynomial of any binding, with every space underneath evaluated
    /// under `c`. A map yields the E-polynomial of its total space.
    pub fn value(&self, name: &str, c: SignConvention) -> Result<BivariatePoly, RunError> {
        match self.program.binding(name) {
            None => Err(RunError::Unbound(name.to_string())),
            Some(BindingValue::Space(_)) => Ok(eval_space(&self.space(name)?, c)?),
            Some(BindingValue::Poly(PolyDef::Literal(p))) => Ok(p.clone()),
            Some(BindingValue::Poly(PolyDef::Ie { map, strata })) => Ok(ie_from_desing(&self.map(map, c)?, strata)?),
            Some(BindingValue::Map(m)) => self.reference(&m.total, c),
        }
    }

    /// Builds the semismall map bound to `name`, evaluating the total space
    /// and every closure under `c`.
    pub fn map(&self, name: &str, c: SignConvention) -> Result<SemismallMap, RunError> {
        let Some(BindingValue::Map(m)) = self.program.binding(name) else {
            return Err(RunError::NotAMap(name.to_string()));
        };
        let strata = m
            .strata
            .iter()
            .map(|s| {
                Ok(Stratum {
                    name: s.name.clone(),
                    e_closure: self.reference(&s.closure, c)?,
                    dim_stratum: s.dim,
                    fiber_dim: s.fiber,
                    top_fiber_multiplicity: s.mult,
                })
            })
            .collect::<Result<Vec<_>, RunError>>()?;
        Ok(SemismallMap::new(m.dim, self.reference(&m.total, c)?, strata)?)
    }

    fn directive(&self, d: &Directive) -> ReportEntry {
        let c = self.program.default_convention();
        let mut entry = ReportEntry {
            directive: d.keyword().to_string(),
            input: d.input(),
            computed: None,
            expected: None,
            status: Status::Ok,
            note: String::new(),
        };
        let result: Result<Computed, RunError> = match d {
            Directive::Epoly { name, convention } => {
                self.value(name, convention.unwrap_or(c)).map(Computed::Poly)
            }
            Directive::Weights { name } => self.value(name, c).map(|p| Computed::Weights(p.weight_sums())),
            Directive::Betti { name, dim } => self
                .value(name, c)
                .and_then(|p| Ok(Computed::Betti(betti_from_pure_e(&p, *dim)?))),
            Directive::Semismall { name } => self.map(name, c).map(|m| Computed::Semismall(check_semismall(&m))),
            Directive::Ie { map, strata } => self
                .map(map, c)
                .and_then(|m| Ok(Computed::Poly(ie_from_desing(&m, strata)?))),
            Directive::Expect { name, value } => {
                entry.expected = Some(value.clone());
                self.value(name, c).map(Computed::Poly)
            }
        };
        match result {
            Ok(computed) => {
                match (&computed, d) {
                    (Computed::Poly(got), Directive::Expect { value, .. }) if got != value => {
                        entry.status = Status::Mismatch;
                        entry.note = format!("computed - expected = {}", got - value);
                    }
                    (Computed::Semismall(cs), _) if cs.iter().any(|s| !s.bound_ok) => {
                        entry.status = Status::Mismatch;
                        entry.note = "semismall bound violated".to_string();
                    }
                    _ => {}
                }
                entry.computed = Some(computed);
            }
            Err(e) => {
                entry.status = Status::Error;
                entry.note = e.to_string();
            }
        }
        entry
    }
}

/// Runs every directive in order.
pub fn run(program: &Program) -> Report {
    let env = Env::new(program);
    Report { entries: program.directives.iter().map(|d| env.directive(d)).collect() }
}
