//! Pattern definitions and the plain-text pattern library format.
//!
//! A library file is a sequence of blocks:
//!
//! ```text
//! # comment
//! Seq(f1,f2):
//! ini= f1 / fin= f2
//! f1 => <>f2 / ~f1=>~<>f2
//! []~(f1 & f2)
//! ```
//!
//! A header `Name(args):` opens a block. The `ini=` and `fin=` conditions
//! follow, on one line separated by `/` or on two lines, and then at least
//! one line of basic formulas, again `/`-separated.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;

use crate::error::{Pos, SyntaxError};
use crate::formula::{is_identifier, parse_formula, Formula, PropExpr};

/// The standard library: sequence, concurrency and exclusive branch.
pub const STANDARD_PATTERNS: &str = include_str!("../patterns/standard.pat");

/// Where an argument sits in the pattern's partial order: every ini
/// argument precedes every ordinary one, which precedes every fin one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ArgRole {
    Ini,
    Ordinary,
    Fin,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DefinitionError {
    #[error("pattern name `{0}` is not an identifier")]
    BadName(String),
    #[error("formal argument `{0}` is not an identifier")]
    BadFormal(String),
    #[error("formal argument `{0}` is declared twice")]
    DuplicateFormal(String),
    #[error("{which} mentions unknown argument `{arg}`")]
    UnknownArg { which: &'static str, arg: String },
    #[error("{0} must name at least one argument")]
    EmptyCondition(&'static str),
    #[error("ini and fin share argument(s) {}", .0.join(", "))]
    Overlap(Vec<String>),
    #[error("pattern has no basic formulas")]
    NoBasicFormulas,
}

/// One named entry of a pattern library.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternDefinition {
    name: String,
    formal_args: Vec<String>,
    ini: PropExpr,
    fin: PropExpr,
    basic_formulas: Vec<Formula>,
    roles: Vec<ArgRole>,
}

/// A pattern instantiated with actual arguments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub ini: PropExpr,
    pub fin: PropExpr,
    pub formulas: Vec<Formula>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("pattern `{pattern}` expects {expected} argument(s), got {found}")]
pub struct ArityError {
    pub pattern: String,
    pub expected: usize,
    pub found: usize,
}

impl PatternDefinition {
    pub fn new(
        name: impl Into<String>,
        formal_args: Vec<String>,
        ini: PropExpr,
        fin: PropExpr,
        basic_formulas: Vec<Formula>,
    ) -> Result<Self, DefinitionError> {
        let def = Self::unchecked(name, formal_args, ini, fin, basic_formulas);
        def.validate()?;
        Ok(def)
    }

    /// Builds a definition without checking the structural invariants.
    /// Degenerate patterns (e.g. `ini = fin`) can only be built this way.
    pub fn unchecked(
        name: impl Into<String>,
        formal_args: Vec<String>,
        ini: PropExpr,
        fin: PropExpr,
        basic_formulas: Vec<Formula>,
    ) -> Self {
        let ini_atoms = ini.atoms();
        let fin_atoms = fin.atoms();
        let roles = formal_args
            .iter()
            .map(|a| {
                if ini_atoms.contains(a) {
                    ArgRole::Ini
                } else if fin_atoms.contains(a) {
                    ArgRole::Fin
                } else {
                    ArgRole::Ordinary
                }
            })
            .collect();
        PatternDefinition {
            name: name.into(),
            formal_args,
            ini,
            fin,
            basic_formulas,
            roles,
        }
    }

    fn validate(&self) -> Result<(), DefinitionError> {
        if !is_identifier(&self.name) {
            return Err(DefinitionError::BadName(self.name.clone()));
        }
        let mut seen = BTreeSet::new();
        for a in &self.formal_args {
            if !is_identifier(a) {
                return Err(DefinitionError::BadFormal(a.clone()));
            }
            if !seen.insert(a.as_str()) {
                return Err(DefinitionError::DuplicateFormal(a.clone()));
            }
        }
        let check = |which: &'static str, atoms: BTreeSet<String>| {
            match atoms.into_iter().find(|a| !seen.contains(a.as_str())) {
                Some(arg) => Err(DefinitionError::UnknownArg { which, arg }),
                None => Ok(()),
            }
        };
        let ini_atoms = self.ini.atoms();
        let fin_atoms = self.fin.atoms();
        check("ini", ini_atoms.clone())?;
        check("fin", fin_atoms.clone())?;
        for f in &self.basic_formulas {
            check("basic formula", f.atoms())?;
        }
        if ini_atoms.is_empty() {
            return Err(DefinitionError::EmptyCondition("ini"));
        }
        if fin_atoms.is_empty() {
            return Err(DefinitionError::EmptyCondition("fin"));
        }
        let shared: Vec<String> = ini_atoms.intersection(&fin_atoms).cloned().collect();
        if !shared.is_empty() {
            return Err(DefinitionError::Overlap(shared));
        }
        if self.basic_formulas.is_empty() {
            return Err(DefinitionError::NoBasicFormulas);
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn formal_args(&self) -> &[String] {
        &self.formal_args
    }

    pub fn arity(&self) -> usize {
        self.formal_args.len()
    }

    pub fn ini(&self) -> &PropExpr {
        &self.ini
    }

    pub fn fin(&self) -> &PropExpr {
        &self.fin
    }

    pub fn basic_formulas(&self) -> &[Formula] {
        &self.basic_formulas
    }

    /// Role of each formal argument, in declaration order.
    pub fn roles(&self) -> &[ArgRole] {
        &self.roles
    }

    pub fn arg_roles(&self) -> BTreeMap<&str, ArgRole> {
        self.formal_args
            .iter()
            .map(String::as_str)
            .zip(self.roles.iter().copied())
            .collect()
    }

    /// Positional, simultaneous substitution of `actuals` for the formal
    /// arguments in ini, fin and every basic formula.
    pub fn instantiate(&self, actuals: &[PropExpr]) -> Result<Instance, ArityError> {
        if actuals.len() != self.formal_args.len() {
            return Err(ArityError {
                pattern: self.name.clone(),
                expected: self.formal_args.len(),
                found: actuals.len(),
            });
        }
        let binding: BTreeMap<String, PropExpr> = self
            .formal_args
            .iter()
            .cloned()
            .zip(actuals.iter().cloned())
            .collect();
        Ok(Instance {
            ini: self.ini.substitute(&binding),
            fin: self.fin.substitute(&binding),
            formulas: self
                .basic_formulas
                .iter()
                .map(|f| f.substitute(&binding))
                .collect(),
        })
    }

    /// The four formulas describing the pattern as a whole:
    /// `<>ini`, `ini => <>fin`, `<>fin`, `[]~(ini & fin)`.
    pub fn transition_formulas(&self) -> [Formula; 4] {
        transition_formulas(&self.ini, &self.fin)
    }

    /// Basic formulas followed by the transition formulas, deduplicated.
    pub fn consistency_obligations(&self) -> Vec<Formula> {
        let mut out: Vec<Formula> = Vec::new();
        for f in self.basic_formulas.iter().cloned().chain(self.transition_formulas()) {
            if !out.contains(&f) {
                out.push(f);
            }
        }
        out
    }
}

pub fn transition_formulas(ini: &PropExpr, fin: &PropExpr) -> [Formula; 4] {
    let ini = ini.as_formula();
    let fin = fin.as_formula();
    [
        Formula::eventually(ini.clone()),
        Formula::implies(ini.clone(), Formula::eventually(fin.clone())),
        Formula::eventually(fin.clone()),
        Formula::always(Formula::not(Formula::and(ini.clone(), fin.clone()))),
    ]
}

pub fn instantiate(def: &PatternDefinition, actuals: &[PropExpr]) -> Result<Instance, ArityError> {
    def.instantiate(actuals)
}

pub fn consistency_obligations(def: &PatternDefinition) -> Vec<Formula> {
    def.consistency_obligations()
}

impl fmt::Display for PatternDefinition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}({}):", self.name, self.formal_args.join(","))?;
        writeln!(f, "ini= {} / fin= {}", self.ini, self.fin)?;
        for g in &self.basic_formulas {
            writeln!(f, "{g}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LibraryError {
    #[error("{0}")]
    Syntax(SyntaxError),
    #[error("{pos}: duplicate pattern name `{name}`")]
    DuplicatePattern { pos: Pos, name: String },
    #[error("{pos}: pattern `{pattern}` is missing `{which}=`")]
    MissingCondition {
        pos: Pos,
        pattern: String,
        which: &'static str,
    },
    #[error("{pos}: pattern `{pattern}` defines `{which}=` twice")]
    RepeatedCondition {
        pos: Pos,
        pattern: String,
        which: &'static str,
    },
    #[error("{pos}: temporal operator in `{which}=` of pattern `{pattern}`")]
    TemporalCondition {
        pos: Pos,
        pattern: String,
        which: &'static str,
    },
    #[error("{pos}: pattern `{pattern}`: {source}")]
    Invalid {
        pos: Pos,
        pattern: String,
        source: DefinitionError,
    },
    #[error("library contains no pattern definitions")]
    Empty,
}

impl LibraryError {
    pub fn pos(&self) -> Option<Pos> {
        match self {
            LibraryError::Syntax(e) => Some(e.pos),
            LibraryError::DuplicatePattern { pos, .. }
            | LibraryError::MissingCondition { pos, .. }
            | LibraryError::RepeatedCondition { pos, .. }
            | LibraryError::TemporalCondition { pos, .. }
            | LibraryError::Invalid { pos, .. } => Some(*pos),
            LibraryError::Empty => None,
        }
    }
}

impl From<SyntaxError> for LibraryError {
    fn from(e: SyntaxError) -> Self {
        LibraryError::Syntax(e)
    }
}

/// An ordered, name-indexed collection of pattern definitions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternLibrary {
    definitions: Vec<PatternDefinition>,
    index: HashMap<String, usize>,
}

impl PatternLibrary {
    pub fn new(definitions: Vec<PatternDefinition>) -> Result<Self, LibraryError> {
        if definitions.is_empty() {
            return Err(LibraryError::Empty);
        }
        let mut index = HashMap::new();
        for (i, d) in definitions.iter().enumerate() {
            if index.insert(d.name.clone(), i).is_some() {
                return Err(LibraryError::DuplicatePattern {
                    pos: Pos::start(),
                    name: d.name.clone(),
                });
            }
        }
        Ok(PatternLibrary { definitions, index })
    }

    pub fn parse(text: &str) -> Result<Self, LibraryError> {
        parse_pattern_library(text)
    }

    /// The built-in sequence/concurrency/branch library.
    pub fn standard() -> Self {
        Self::parse(STANDARD_PATTERNS).expect("built-in library parses")
    }

    pub fn get(&self, name: &str) -> Option<&PatternDefinition> {
        self.index.get(name).map(|&i| &self.definitions[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = &PatternDefinition> {
        self.definitions.iter()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.definitions.iter().map(|d| d.name.as_str())
    }

    pub fn len(&self) -> usize {
        self.definitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.definitions.is_empty()
    }
}

struct Block {
    header: Pos,
    name: String,
    formals: Vec<String>,
    ini: Option<PropExpr>,
    fin: Option<PropExpr>,
    formulas: Vec<Formula>,
    last_line: Pos,
}

fn column_of(line: &str, sub: &str) -> usize {
    // `sub` is always a subslice of `line`.
    let offset = sub.as_ptr() as usize - line.as_ptr() as usize;
    line[..offset].chars().count() + 1
}

fn parse_header(line: &str, lineno: usize) -> Result<Option<(String, Vec<String>)>, SyntaxError> {
    let t = line.trim_end();
    let Some(body) = t.strip_suffix(':') else {
        return Ok(None);
    };
    let at = |sub: &str| Pos {
        line: lineno,
        column: column_of(line, sub),
    };
    let body = body.trim_end();
    let Some(open) = body.find('(') else {
        return Err(SyntaxError::new(at(t), "pattern header must look like `Name(args):`"));
    };
    let name = body[..open].trim();
    if !is_identifier(name) {
        return Err(SyntaxError::new(at(t), format!("invalid pattern name `{name}`")));
    }
    let Some(args) = body[open + 1..].strip_suffix(')') else {
        return Err(SyntaxError::new(
            at(&body[open..]),
            "unbalanced parenthesis in pattern header",
        ));
    };
    let mut formals = Vec::new();
    for raw in args.split(',') {
        let arg = raw.trim();
        if !is_identifier(arg) {
            let msg = if arg.is_empty() {
                "empty formal argument".to_string()
            } else {
                format!("invalid formal argument `{arg}`")
            };
            return Err(SyntaxError::new(at(raw), msg));
        }
        formals.push(arg.to_string());
    }
    Ok(Some((name.to_string(), formals)))
}

/// Parses a pattern library. Errors carry the line and column of the
/// offending block or token.
pub fn parse_pattern_library(text: &str) -> Result<PatternLibrary, LibraryError> {
    let mut blocks: Vec<Block> = Vec::new();

    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let line_pos = Pos {
            line: lineno,
            column: column_of(line, trimmed),
        };
        if let Some((name, formals)) = parse_header(line, lineno)? {
            blocks.push(Block {
                header: line_pos,
                name,
                formals,
                ini: None,
                fin: None,
                formulas: Vec::new(),
                last_line: line_pos,
            });
            continue;
        }
        let Some(block) = blocks.last_mut() else {
            return Err(SyntaxError::new(line_pos, "expected a pattern header `Name(args):`").into());
        };
        block.last_line = line_pos;
        for segment in line.split('/') {
            let seg = segment.trim();
            if seg.is_empty() {
                return Err(SyntaxError::new(
                    Pos {
                        line: lineno,
                        column: column_of(line, segment),
                    },
                    "empty formula between `/` separators",
                )
                .into());
            }
            let seg_pos = Pos {
                line: lineno,
                column: column_of(line, seg),
            };
            let condition = if let Some(rest) = seg.strip_prefix("ini=") {
                Some(("ini", rest))
            } else {
                seg.strip_prefix("fin=").map(|rest| ("fin", rest))
            };
            match condition {
                Some((which, rest)) => {
                    let origin = Pos {
                        line: lineno,
                        column: column_of(line, rest),
                    };
                    let f = parse_formula(rest).map_err(|e| e.offset_by(origin))?;
                    let prop = PropExpr::new(f).map_err(|_| LibraryError::TemporalCondition {
                        pos: seg_pos,
                        pattern: block.name.clone(),
                        which,
                    })?;
                    let slot = if which == "ini" { &mut block.ini } else { &mut block.fin };
                    if slot.is_some() {
                        return Err(LibraryError::RepeatedCondition {
                            pos: seg_pos,
                            pattern: block.name.clone(),
                            which,
                        });
                    }
                    if !block.formulas.is_empty() {
                        return Err(SyntaxError::new(
                            seg_pos,
                            format!("`{which}=` must precede the basic formulas"),
                        )
                        .into());
                    }
                    *slot = Some(prop);
                }
                None => {
                    for (which, slot) in [("ini", &block.ini), ("fin", &block.fin)] {
                        if slot.is_none() {
                            return Err(LibraryError::MissingCondition {
                                pos: seg_pos,
                                pattern: block.name.clone(),
                                which,
                            });
                        }
                    }
                    let f = parse_formula(seg).map_err(|e| e.offset_by(seg_pos))?;
                    block.formulas.push(f);
                }
            }
        }
    }

    let mut defs = Vec::with_capacity(blocks.len());
    let mut seen: HashMap<String, Pos> = HashMap::new();
    for b in blocks {
        if seen.insert(b.name.clone(), b.header).is_some() {
            return Err(LibraryError::DuplicatePattern {
                pos: b.header,
                name: b.name,
            });
        }
        let missing = |which| LibraryError::MissingCondition {
            pos: b.last_line,
            pattern: b.name.clone(),
            which,
        };
        let ini = b.ini.clone().ok_or_else(|| missing("ini"))?;
        let fin = b.fin.clone().ok_or_else(|| missing("fin"))?;
        let def = PatternDefinition::new(b.name.clone(), b.formals, ini, fin, b.formulas).map_err(
            |source| LibraryError::Invalid {
                pos: b.header,
                pattern: b.name.clone(),
                source,
            },
        )?;
        defs.push(def);
    }
    PatternLibrary::new(defs)
}
