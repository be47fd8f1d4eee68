//! Consolidated ini/fin expressions and specification generation.
//!
//! Generation walks the pattern occurrences of a workflow expression from the
//! deepest level up to the root, left to right within a level. An occurrence
//! whose arguments are all atomic contributes its instantiated basic
//! formulas. An occurrence with nested arguments contributes one
//! instantiation per combination of ini/fin choices for those arguments, each
//! nested argument replaced by its consolidated expression.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::Serialize;

use crate::formula::{Formula, PropExpr};
use crate::library::PatternLibrary;
use crate::workflow::{validate, Diagnostic, NodePath, WorkflowNode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Ini,
    Fin,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Ini => "ini",
            Side::Fin => "fin",
        })
    }
}

/// The ini/fin choice for every nested argument position of one occurrence.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct Combination {
    pub binding: BTreeMap<usize, Side>,
}

impl Combination {
    pub fn is_identity(&self) -> bool {
        self.binding.is_empty()
    }
}

impl fmt::Display for Combination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (pos, side)) in self.binding.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{pos}:{side}")?;
        }
        f.write_str("}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenerateError {
    #[error("workflow expression is not valid against the pattern library ({} finding(s))", .0.len())]
    Invalid(Vec<Diagnostic>),
}

fn check_node<'a>(
    node: &'a WorkflowNode,
    lib: &'a PatternLibrary,
) -> Result<(&'a crate::library::PatternDefinition, &'a [WorkflowNode]), GenerateError> {
    let diags = validate(node, lib, false);
    if diags.iter().any(Diagnostic::is_error) {
        return Err(GenerateError::Invalid(diags));
    }
    match node {
        WorkflowNode::Application { pattern, args } => Ok((lib.get(pattern).expect("validated"), args)),
        WorkflowNode::Atomic(_) => unreachable!("validation rejects atomic roots"),
    }
}

fn consolidated_unchecked(node: &WorkflowNode, side: Side, lib: &PatternLibrary) -> PropExpr {
    match node {
        WorkflowNode::Atomic(a) => PropExpr::atom(a.clone()),
        WorkflowNode::Application { pattern, args } => {
            let def = lib.get(pattern).expect("validated");
            let cond = match side {
                Side::Ini => def.ini(),
                Side::Fin => def.fin(),
            };
            let used = cond.atoms();
            let binding: BTreeMap<String, PropExpr> = def
                .formal_args()
                .iter()
                .zip(args)
                .filter(|(formal, _)| used.contains(*formal))
                .map(|(formal, arg)| (formal.clone(), consolidated_unchecked(arg, side, lib)))
                .collect();
            cond.substitute(&binding)
        }
    }
}

/// The consolidated ini- or fin-expression of an application: its pattern's
/// condition with each nested argument replaced, recursively, by that
/// argument's consolidated expression of the same side.
pub fn consolidated_expression(
    w: &WorkflowNode,
    side: Side,
    lib: &PatternLibrary,
) -> Result<PropExpr, GenerateError> {
    check_node(w, lib)?;
    Ok(consolidated_unchecked(w, side, lib))
}

fn combinations_unchecked(args: &[WorkflowNode], lib: &PatternLibrary) -> Vec<(Combination, Vec<PropExpr>)> {
    let nested: Vec<usize> = (0..args.len()).filter(|&i| !args[i].is_atomic()).collect();
    let consolidated: BTreeMap<usize, [PropExpr; 2]> = nested
        .iter()
        .map(|&i| {
            (
                i,
                [
                    consolidated_unchecked(&args[i], Side::Ini, lib),
                    consolidated_unchecked(&args[i], Side::Fin, lib),
                ],
            )
        })
        .collect();
    let m = nested.len();
    (0..1usize << m)
        .map(|counter| {
            let binding: BTreeMap<usize, Side> = nested
                .iter()
                .enumerate()
                .map(|(j, &pos)| {
                    let side = if counter >> (m - 1 - j) & 1 == 0 {
                        Side::Ini
                    } else {
                        Side::Fin
                    };
                    (pos, side)
                })
                .collect();
            let actuals = args
                .iter()
                .enumerate()
                .map(|(i, a)| match (a, binding.get(&i)) {
                    (WorkflowNode::Atomic(name), _) => PropExpr::atom(name.clone()),
                    (_, Some(Side::Ini)) => consolidated[&i][0].clone(),
                    (_, Some(Side::Fin)) => consolidated[&i][1].clone(),
                    (_, None) => unreachable!(),
                })
                .collect();
            (Combination { binding }, actuals)
        })
        .collect()
}

/// All `2^m` argument combinations of an application with `m` nested
/// arguments, in binary-counter order (leftmost position most significant,
/// ini before fin). With no nested arguments the single identity
/// combination is returned.
pub fn expand_combinations(
    node: &WorkflowNode,
    lib: &PatternLibrary,
) -> Result<Vec<(Combination, Vec<PropExpr>)>, GenerateError> {
    let (_, args) = check_node(node, lib)?;
    Ok(combinations_unchecked(args, lib))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub path: NodePath,
    pub pattern: String,
    pub combination: Combination,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpecEntry {
    pub formula: Formula,
    pub provenance: Provenance,
}

/// A deduplicated, ordered set of generated formulas. Each formula keeps the
/// provenance of its first producer.
#[derive(Debug, Clone, Default)]
pub struct Specification {
    entries: Vec<SpecEntry>,
    seen: HashSet<Formula>,
}

impl PartialEq for Specification {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl Eq for Specification {}

impl Specification {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `formula` unless an equal one is already present.
    pub fn insert(&mut self, formula: Formula, provenance: Provenance) -> bool {
        if self.seen.contains(&formula) {
            return false;
        }
        self.seen.insert(formula.clone());
        self.entries.push(SpecEntry { formula, provenance });
        true
    }

    pub fn entries(&self) -> &[SpecEntry] {
        &self.entries
    }

    pub fn formulas(&self) -> impl Iterator<Item = &Formula> + '_ {
        self.entries.iter().map(|e| &e.formula)
    }

    pub fn contains(&self, f: &Formula) -> bool {
        self.seen.contains(f)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl fmt::Display for Specification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            writeln!(f, "{}", e.formula)?;
        }
        Ok(())
    }
}

/// Generates the specification of `w`, rejecting repeated activity names.
pub fn generate(w: &WorkflowNode, lib: &PatternLibrary) -> Result<Specification, GenerateError> {
    generate_with(w, lib, true)
}

pub fn generate_with(
    w: &WorkflowNode,
    lib: &PatternLibrary,
    strict_atoms: bool,
) -> Result<Specification, GenerateError> {
    let diags = validate(w, lib, strict_atoms);
    if diags.iter().any(Diagnostic::is_error) {
        return Err(GenerateError::Invalid(diags));
    }
    let mut occurrences = w.occurrences();
    // Stable: textual order is kept within a level.
    occurrences.sort_by_key(|o| std::cmp::Reverse(o.1));

    let mut spec = Specification::new();
    for (path, _, node) in occurrences {
        let WorkflowNode::Application { pattern, args } = node else {
            unreachable!()
        };
        let def = lib.get(pattern).expect("validated");
        for (combination, actuals) in combinations_unchecked(args, lib) {
            let inst = def.instantiate(&actuals).expect("validated arity");
            for formula in inst.formulas {
                spec.insert(
                    formula,
                    Provenance {
                        path: path.clone(),
                        pattern: pattern.clone(),
                        combination: combination.clone(),
                    },
                );
            }
        }
    }
    Ok(spec)
}
