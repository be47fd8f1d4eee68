//! Formulas of the ◇/□ fragment of propositional linear temporal logic.
//!
//! The concrete syntax is plain ASCII:
//!
//! ```text
//! ~a      not          <>a    eventually      []a    always
//! a & b   and          a | b  or              a => b implies
//! ```
//!
//! Unary operators bind tightest, then `&`, then `|`, then `=>` which is
//! right-associative. `&` and `|` chains written without parentheses
//! associate to the left.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Pos, SyntaxError};

/// A formula AST. Equality is syntactic.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Eventually(Box<Formula>),
    Always(Box<Formula>),
}

/// True when `s` matches `[A-Za-z_][A-Za-z0-9_]*`.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        let name = name.into();
        debug_assert!(is_identifier(&name), "invalid atom name {name:?}");
        Formula::Atom(name)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(l: Formula, r: Formula) -> Self {
        Formula::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Self {
        Formula::Or(Box::new(l), Box::new(r))
    }

    pub fn implies(l: Formula, r: Formula) -> Self {
        Formula::Implies(Box::new(l), Box::new(r))
    }

    pub fn eventually(f: Formula) -> Self {
        Formula::Eventually(Box::new(f))
    }

    pub fn always(f: Formula) -> Self {
        Formula::Always(Box::new(f))
    }

    /// Parses the ASCII syntax. The whole input must be consumed.
    pub fn parse(text: &str) -> Result<Formula, SyntaxError> {
        parse_formula(text)
    }

    /// Every atom name occurring in the formula.
    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atom(a) => {
                out.insert(a.clone());
            }
            Formula::Not(g) | Formula::Eventually(g) | Formula::Always(g) => g.collect_atoms(out),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
                l.collect_atoms(out);
                r.collect_atoms(out);
            }
        }
    }

    /// True iff no `<>` or `[]` occurs.
    pub fn is_propositional(&self) -> bool {
        match self {
            Formula::Atom(_) => true,
            Formula::Not(g) => g.is_propositional(),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
                l.is_propositional() && r.is_propositional()
            }
            Formula::Eventually(_) | Formula::Always(_) => false,
        }
    }

    /// Simultaneous substitution of atoms. Substituted subtrees are not
    /// revisited.
    pub fn substitute(&self, binding: &BTreeMap<String, PropExpr>) -> Formula {
        self.substitute_with(&|name| binding.get(name).map(PropExpr::as_formula))
    }

    pub(crate) fn substitute_with<'a>(
        &self,
        lookup: &dyn Fn(&str) -> Option<&'a Formula>,
    ) -> Formula {
        let rec = |g: &Formula| Box::new(g.substitute_with(lookup));
        match self {
            Formula::Atom(a) => match lookup(a) {
                Some(replacement) => replacement.clone(),
                None => self.clone(),
            },
            Formula::Not(g) => Formula::Not(rec(g)),
            Formula::Eventually(g) => Formula::Eventually(rec(g)),
            Formula::Always(g) => Formula::Always(rec(g)),
            Formula::And(l, r) => Formula::And(rec(l), rec(r)),
            Formula::Or(l, r) => Formula::Or(rec(l), rec(r)),
            Formula::Implies(l, r) => Formula::Implies(rec(l), rec(r)),
        }
    }

    /// Nesting depth; an atom has depth 1.
    pub fn depth(&self) -> usize {
        match self {
            Formula::Atom(_) => 1,
            Formula::Not(g) | Formula::Eventually(g) | Formula::Always(g) => 1 + g.depth(),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
                1 + l.depth().max(r.depth())
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Implies(..) => 1,
            Formula::Or(..) => 2,
            Formula::And(..) => 3,
            _ => 4,
        }
    }
}

pub fn atoms_of(f: &Formula) -> BTreeSet<String> {
    f.atoms()
}

pub fn is_propositional(f: &Formula) -> bool {
    f.is_propositional()
}

pub fn substitute(f: &Formula, binding: &BTreeMap<String, PropExpr>) -> Formula {
    f.substitute(binding)
}

pub fn print_formula(f: &Formula) -> String {
    f.to_string()
}

/// A formula with no temporal operator, used for ini/fin conditions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PropExpr(Formula);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("temporal operator in propositional expression `{0}`")]
pub struct NotPropositional(pub Formula);

impl PropExpr {
    pub fn new(f: Formula) -> Result<Self, NotPropositional> {
        if f.is_propositional() {
            Ok(PropExpr(f))
        } else {
            Err(NotPropositional(f))
        }
    }

    pub fn atom(name: impl Into<String>) -> Self {
        PropExpr(Formula::atom(name))
    }

    pub fn as_formula(&self) -> &Formula {
        &self.0
    }

    pub fn into_formula(self) -> Formula {
        self.0
    }

    pub fn atoms(&self) -> BTreeSet<String> {
        self.0.atoms()
    }

    pub fn substitute(&self, binding: &BTreeMap<String, PropExpr>) -> PropExpr {
        PropExpr(self.0.substitute(binding))
    }
}

impl TryFrom<Formula> for PropExpr {
    type Error = NotPropositional;

    fn try_from(f: Formula) -> Result<Self, Self::Error> {
        PropExpr::new(f)
    }
}

impl From<PropExpr> for Formula {
    fn from(p: PropExpr) -> Formula {
        p.0
    }
}

impl fmt::Display for PropExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl serde::Serialize for Formula {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl serde::Serialize for PropExpr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(&self.0)
    }
}

// Printing. `&` and `|` never chain without parentheses, so `(d | e) | f`
// stays as written; `=>` is right-associative.

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(a) => f.write_str(a),
            Formula::Not(g) => {
                f.write_str("~")?;
                write_operand(f, g)
            }
            Formula::Eventually(g) => {
                f.write_str("<>")?;
                write_operand(f, g)
            }
            Formula::Always(g) => {
                f.write_str("[]")?;
                write_operand(f, g)
            }
            Formula::And(l, r) => {
                write_operand(f, l)?;
                f.write_str(" & ")?;
                write_operand(f, r)
            }
            Formula::Or(l, r) => {
                write_operand(f, l)?;
                f.write_str(" | ")?;
                write_operand(f, r)
            }
            Formula::Implies(l, r) => {
                if matches!(**l, Formula::Implies(..)) {
                    write!(f, "({l})")?;
                } else {
                    write!(f, "{l}")?;
                }
                write!(f, " => {r}")
            }
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, g: &Formula) -> fmt::Result {
    if g.precedence() < 4 {
        write!(f, "({g})")
    } else {
        write!(f, "{g}")
    }
}

// Lexing and parsing.

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Not,
    And,
    Or,
    Implies,
    Eventually,
    Always,
    LParen,
    RParen,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Not => f.write_str("`~`"),
            Tok::And => f.write_str("`&`"),
            Tok::Or => f.write_str("`|`"),
            Tok::Implies => f.write_str("`=>`"),
            Tok::Eventually => f.write_str("`<>`"),
            Tok::Always => f.write_str("`[]`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, SyntaxError> {
    let mut out = Vec::new();
    let mut pos = Pos::start();
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        let here = pos;
        pos.advance(c);
        let tok = match c {
            c if c.is_whitespace() => continue,
            '~' => Tok::Not,
            '&' => Tok::And,
            '|' => Tok::Or,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '=' | '<' | '[' => {
                let (want, tok) = match c {
                    '=' => ('>', Tok::Implies),
                    '<' => ('>', Tok::Eventually),
                    _ => (']', Tok::Always),
                };
                match chars.peek() {
                    Some(&(_, n)) if n == want => {
                        chars.next();
                        pos.advance(n);
                        tok
                    }
                    _ => {
                        return Err(SyntaxError::new(
                            here,
                            format!("unknown token `{c}` (expected `{c}{want}`)"),
                        ))
                    }
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut end = i + c.len_utf8();
                while let Some(&(j, n)) = chars.peek() {
                    if n.is_ascii_alphanumeric() || n == '_' {
                        chars.next();
                        pos.advance(n);
                        end = j + n.len_utf8();
                    } else {
                        break;
                    }
                }
                Tok::Ident(text[i..end].to_string())
            }
            other => return Err(SyntaxError::new(here, format!("unknown token `{other}`"))),
        };
        out.push((tok, here));
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    idx: usize,
    end: Pos,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(t, _)| t)
    }

    fn pos(&self) -> Pos {
        self.toks.get(self.idx).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.idx).map(|(t, _)| t.clone());
        self.idx += 1;
        t
    }

    fn implication(&mut self) -> Result<Formula, SyntaxError> {
        let lhs = self.disjunction()?;
        if self.peek() == Some(&Tok::Implies) {
            self.bump();
            let rhs = self.implication()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, SyntaxError> {
        let mut lhs = self.conjunction()?;
        while self.peek() == Some(&Tok::Or) {
            self.bump();
            let rhs = self.conjunction()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, SyntaxError> {
        let mut lhs = self.unary()?;
        while self.peek() == Some(&Tok::And) {
            self.bump();
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, SyntaxError> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Not) => Ok(Formula::not(self.unary()?)),
            Some(Tok::Eventually) => Ok(Formula::eventually(self.unary()?)),
            Some(Tok::Always) => Ok(Formula::always(self.unary()?)),
            Some(Tok::Ident(name)) => Ok(Formula::Atom(name)),
            Some(Tok::LParen) => {
                let inner = self.implication()?;
                match self.bump() {
                    Some(Tok::RParen) => Ok(inner),
                    Some(other) => Err(SyntaxError::new(
                        self.toks[self.idx - 1].1,
                        format!("expected `)` to close `(` at column {}, found {other}", pos.column),
                    )),
                    None => Err(SyntaxError::new(
                        pos,
                        "unbalanced parenthesis: `(` is never closed",
                    )),
                }
            }
            Some(other) => Err(SyntaxError::new(
                pos,
                format!("expected a formula, found {other}"),
            )),
            None => Err(SyntaxError::new(
                pos,
                "dangling operator: expected a formula, found end of input",
            )),
        }
    }
}

/// Parses a formula; every token must be consumed.
pub fn parse_formula(text: &str) -> Result<Formula, SyntaxError> {
    let toks = lex(text)?;
    let mut end = Pos::start();
    text.chars().for_each(|c| end.advance(c));
    if toks.is_empty() {
        return Err(SyntaxError::new(end, "empty formula"));
    }
    let mut p = Parser { toks, idx: 0, end };
    let f = p.implication()?;
    match p.peek() {
        None => Ok(f),
        Some(Tok::RParen) => Err(SyntaxError::new(
            p.pos(),
            "unbalanced parenthesis: unexpected `)`",
        )),
        Some(t) => Err(SyntaxError::new(
            p.pos(),
            format!("unexpected {t} after complete formula"),
        )),
    }
}
