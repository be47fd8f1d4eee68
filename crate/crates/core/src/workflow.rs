//! Workflow expressions: nested pattern applications over atomic activities,
//! e.g. `Concur(Seq(a,b),c,d)`, and their labeled serialization.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::Serialize;

use crate::error::{Pos, SyntaxError};
use crate::library::PatternLibrary;

/// Child indices from the root to a node. The root has the empty path.
pub type NodePath = Vec<usize>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum WorkflowNode {
    Atomic(String),
    Application {
        pattern: String,
        args: Vec<WorkflowNode>,
    },
}

impl WorkflowNode {
    pub fn atomic(name: impl Into<String>) -> Self {
        WorkflowNode::Atomic(name.into())
    }

    pub fn app(pattern: impl Into<String>, args: Vec<WorkflowNode>) -> Self {
        WorkflowNode::Application {
            pattern: pattern.into(),
            args,
        }
    }

    pub fn parse(text: &str) -> Result<Self, SyntaxError> {
        parse_workflow(text)
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, WorkflowNode::Atomic(_))
    }

    /// Nesting depth counted in application nodes.
    pub fn depth(&self) -> usize {
        match self {
            WorkflowNode::Atomic(_) => 0,
            WorkflowNode::Application { args, .. } => {
                1 + args.iter().map(WorkflowNode::depth).max().unwrap_or(0)
            }
        }
    }

    /// Atomic names in textual order, duplicates included.
    pub fn atoms(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk(&mut Vec::new(), &mut |_, n| {
            if let WorkflowNode::Atomic(a) = n {
                out.push(a.as_str());
            }
        });
        out
    }

    /// Every application node with its path and nesting level (root = 1),
    /// in textual (pre-)order.
    pub fn occurrences(&self) -> Vec<(NodePath, usize, &WorkflowNode)> {
        let mut out = Vec::new();
        self.walk(&mut Vec::new(), &mut |path, n| {
            if !n.is_atomic() {
                out.push((path.to_vec(), path.len() + 1, n));
            }
        });
        out
    }

    pub fn at(&self, path: &[usize]) -> Option<&WorkflowNode> {
        let mut node = self;
        for &i in path {
            match node {
                WorkflowNode::Application { args, .. } => node = args.get(i)?,
                WorkflowNode::Atomic(_) => return None,
            }
        }
        Some(node)
    }

    fn walk<'a>(
        &'a self,
        path: &mut NodePath,
        visit: &mut dyn FnMut(&[usize], &'a WorkflowNode),
    ) {
        visit(path, self);
        if let WorkflowNode::Application { args, .. } = self {
            for (i, a) in args.iter().enumerate() {
                path.push(i);
                a.walk(path, visit);
                path.pop();
            }
        }
    }
}

impl fmt::Display for WorkflowNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WorkflowNode::Atomic(a) => f.write_str(a),
            WorkflowNode::Application { pattern, args } => {
                write!(f, "{pattern}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

// Parsing.

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
}

fn lex(text: &str) -> Result<(Vec<(Tok, Pos)>, Pos), SyntaxError> {
    let mut out = Vec::new();
    let mut pos = Pos::start();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        let here = pos;
        pos.advance(c);
        let tok = match c {
            c if c.is_whitespace() => continue,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::from(c);
                while let Some(&n) = chars.peek() {
                    if n.is_ascii_alphanumeric() || n == '_' {
                        s.push(n);
                        pos.advance(n);
                        chars.next();
                    } else {
                        break;
                    }
                }
                Tok::Ident(s)
            }
            other => return Err(SyntaxError::new(here, format!("unexpected character `{other}`"))),
        };
        out.push((tok, here));
    }
    Ok((out, pos))
}

struct Parser<'s> {
    toks: Vec<(Tok, Pos)>,
    idx: usize,
    end: Pos,
    spans: &'s mut BTreeMap<NodePath, Pos>,
    path: NodePath,
}

impl Parser<'_> {
    fn pos(&self) -> Pos {
        self.toks.get(self.idx).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn describe(&self) -> String {
        match self.toks.get(self.idx) {
            Some((Tok::Ident(s), _)) => format!("`{s}`"),
            Some((Tok::LParen, _)) => "`(`".into(),
            Some((Tok::RParen, _)) => "`)`".into(),
            Some((Tok::Comma, _)) => "`,`".into(),
            None => "end of input".into(),
        }
    }

    fn node(&mut self) -> Result<WorkflowNode, SyntaxError> {
        let start = self.pos();
        let name = match self.toks.get(self.idx) {
            Some((Tok::Ident(s), _)) => s.clone(),
            _ => {
                return Err(SyntaxError::new(
                    start,
                    format!("expected an activity or pattern name, found {}", self.describe()),
                ))
            }
        };
        self.idx += 1;
        self.spans.insert(self.path.clone(), start);
        if !matches!(self.toks.get(self.idx), Some((Tok::LParen, _))) {
            return Ok(WorkflowNode::Atomic(name));
        }
        let open = self.pos();
        self.idx += 1;
        if matches!(self.toks.get(self.idx), Some((Tok::RParen, _))) {
            return Err(SyntaxError::new(
                open,
                format!("empty argument list for `{name}`"),
            ));
        }
        let mut args = Vec::new();
        loop {
            self.path.push(args.len());
            let arg = self.node();
            self.path.pop();
            args.push(arg?);
            match self.toks.get(self.idx) {
                Some((Tok::Comma, _)) => self.idx += 1,
                Some((Tok::RParen, _)) => {
                    self.idx += 1;
                    break;
                }
                None => {
                    return Err(SyntaxError::new(
                        open,
                        "unbalanced parenthesis: `(` is never closed",
                    ))
                }
                Some(_) => {
                    return Err(SyntaxError::new(
                        self.pos(),
                        format!("expected `,` or `)`, found {}", self.describe()),
                    ))
                }
            }
        }
        Ok(WorkflowNode::Application {
            pattern: name,
            args,
        })
    }
}

/// Parses a workflow expression and records the source position of every
/// node, keyed by path.
pub fn parse_workflow_spanned(
    text: &str,
) -> Result<(WorkflowNode, BTreeMap<NodePath, Pos>), SyntaxError> {
    let (toks, end) = lex(text)?;
    if toks.is_empty() {
        return Err(SyntaxError::new(end, "empty workflow expression"));
    }
    let mut spans = BTreeMap::new();
    let mut p = Parser {
        toks,
        idx: 0,
        end,
        spans: &mut spans,
        path: Vec::new(),
    };
    let node = p.node()?;
    if node.is_atomic() {
        return Err(SyntaxError::new(
            Pos::start(),
            "a workflow expression must be a pattern application",
        ));
    }
    if p.idx < p.toks.len() {
        let msg = if p.toks[p.idx].0 == Tok::RParen {
            "unbalanced parenthesis: unexpected `)`".to_string()
        } else {
            format!("unexpected {} after complete expression", p.describe())
        };
        return Err(SyntaxError::new(p.pos(), msg));
    }
    Ok((node, spans))
}

pub fn parse_workflow(text: &str) -> Result<WorkflowNode, SyntaxError> {
    parse_workflow_spanned(text).map(|(n, _)| n)
}

// Labeling.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "label", rename_all = "lowercase")]
pub enum TokenKind {
    Name,
    Open(u32),
    Close(u32),
    Comma,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LabeledToken {
    pub lexeme: String,
    pub kind: TokenKind,
}

/// How bracket labels are assigned.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum LabelingMode {
    /// Each bracket pair is labeled with its nesting depth (outermost = 1).
    #[default]
    Depth,
    /// Literal reading of the scan-based labeling: the counter goes up on
    /// every `(` but only comes down on a `)` that directly follows another
    /// `)`. Sibling patterns after the first nested one get labels deeper
    /// than their depth.
    LegacyScan,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LabeledExpression {
    pub tokens: Vec<LabeledToken>,
    pub max_label: u32,
}

impl LabeledExpression {
    /// The serialization with labels removed.
    pub fn strip_labels(&self) -> String {
        self.tokens.iter().map(|t| t.lexeme.as_str()).collect()
    }

    pub fn max_label(&self) -> u32 {
        self.max_label
    }
}

impl fmt::Display for LabeledExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.tokens {
            match t.kind {
                TokenKind::Name | TokenKind::Comma => f.write_str(&t.lexeme)?,
                TokenKind::Open(l) => write!(f, "({l}]")?,
                TokenKind::Close(l) => write!(f, "[{l})")?,
            }
        }
        Ok(())
    }
}

fn plain_tokens(w: &WorkflowNode, out: &mut Vec<LabeledToken>) {
    let tok = |lexeme: &str, kind| LabeledToken {
        lexeme: lexeme.to_string(),
        kind,
    };
    match w {
        WorkflowNode::Atomic(a) => out.push(tok(a, TokenKind::Name)),
        WorkflowNode::Application { pattern, args } => {
            out.push(tok(pattern, TokenKind::Name));
            out.push(tok("(", TokenKind::Open(0)));
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push(tok(",", TokenKind::Comma));
                }
                plain_tokens(a, out);
            }
            out.push(tok(")", TokenKind::Close(0)));
        }
    }
}

pub fn label_expression(w: &WorkflowNode) -> LabeledExpression {
    label_expression_with(w, LabelingMode::Depth)
}

pub fn label_expression_with(w: &WorkflowNode, mode: LabelingMode) -> LabeledExpression {
    let mut tokens = Vec::new();
    plain_tokens(w, &mut tokens);
    let mut label: u32 = 0;
    let mut max = 0;
    let mut prev_close = false;
    for t in &mut tokens {
        match (&mut t.kind, mode) {
            (TokenKind::Open(l), _) => {
                label += 1;
                *l = label;
            }
            (TokenKind::Close(l), LabelingMode::Depth) => {
                *l = label;
                label -= 1;
            }
            (TokenKind::Close(l), LabelingMode::LegacyScan) => {
                if prev_close {
                    label -= 1;
                }
                *l = label;
            }
            _ => {}
        }
        if let TokenKind::Open(l) | TokenKind::Close(l) = t.kind {
            max = max.max(l);
        }
        prev_close = matches!(t.kind, TokenKind::Close(_));
    }
    LabeledExpression {
        tokens,
        max_label: max,
    }
}

pub fn max_label(lw: &LabeledExpression) -> u32 {
    lw.max_label
}

// Validation.

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Finding {
    NotAnApplication,
    UnknownPattern { pattern: String },
    Arity { pattern: String, expected: usize, found: usize },
    DuplicateAtom { atom: String, first: NodePath },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub path: NodePath,
    pub finding: Finding,
}

impl Diagnostic {
    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finding::NotAnApplication => f.write_str("expression must be a pattern application"),
            Finding::UnknownPattern { pattern } => write!(f, "unknown pattern `{pattern}`"),
            Finding::Arity {
                pattern,
                expected,
                found,
            } => write!(f, "`{pattern}` expects {expected} argument(s), got {found}"),
            Finding::DuplicateAtom { atom, .. } => {
                write!(f, "activity `{atom}` occurs more than once")
            }
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{sev}: {}", self.finding)
    }
}

/// Checks `w` against `lib`. An empty result means the expression is well
/// formed. Repeated activity names are errors under `strict_atoms` and
/// warnings otherwise.
pub fn validate(w: &WorkflowNode, lib: &PatternLibrary, strict_atoms: bool) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if w.is_atomic() {
        out.push(Diagnostic {
            severity: Severity::Error,
            path: Vec::new(),
            finding: Finding::NotAnApplication,
        });
    }
    let mut first_seen: HashMap<&str, NodePath> = HashMap::new();
    w.walk(&mut Vec::new(), &mut |path, node| match node {
        WorkflowNode::Atomic(a) => {
            if let Some(first) = first_seen.get(a.as_str()) {
                out.push(Diagnostic {
                    severity: if strict_atoms {
                        Severity::Error
                    } else {
                        Severity::Warning
                    },
                    path: path.to_vec(),
                    finding: Finding::DuplicateAtom {
                        atom: a.clone(),
                        first: first.clone(),
                    },
                });
            } else {
                first_seen.insert(a, path.to_vec());
            }
        }
        WorkflowNode::Application { pattern, args } => match lib.get(pattern) {
            None => out.push(Diagnostic {
                severity: Severity::Error,
                path: path.to_vec(),
                finding: Finding::UnknownPattern {
                    pattern: pattern.clone(),
                },
            }),
            Some(def) if def.arity() != args.len() => out.push(Diagnostic {
                severity: Severity::Error,
                path: path.to_vec(),
                finding: Finding::Arity {
                    pattern: pattern.clone(),
                    expected: def.arity(),
                    found: args.len(),
                },
            }),
            Some(_) => {}
        },
    });
    out
}
