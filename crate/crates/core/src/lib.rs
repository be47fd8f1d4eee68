//! Compiles nested workflow-pattern expressions such as
//! `Concur(Seq(a,b),c,d)` into sets of ◇/□ temporal formulas, using a
//! plain-text library of logical patterns, and checks the results for
//! satisfiability over lasso-shaped models.
//!
//! ```
//! use patgen::{generate, parse_workflow, PatternLibrary};
//!
//! let lib = PatternLibrary::standard();
//! let spec = generate(&parse_workflow("Seq(a,b)").unwrap(), &lib).unwrap();
//! assert_eq!(spec.to_string(), "a => <>b\n~a => ~<>b\n[]~(a & b)\n");
//! ```

pub mod checker;
pub mod error;
pub mod formula;
pub mod generator;
pub mod library;
pub mod workflow;

pub use checker::{
    check_pattern, check_sat, check_specification, eval_at, Bounds, CheckError, CheckResult,
    Checker, LassoModel, State,
};
pub use error::{Pos, SyntaxError};
pub use formula::{atoms_of, is_propositional, parse_formula, print_formula, substitute, Formula, PropExpr};
pub use generator::{
    consolidated_expression, expand_combinations, generate, generate_with, Combination,
    GenerateError, Provenance, Side, SpecEntry, Specification,
};
pub use library::{
    consistency_obligations, instantiate, parse_pattern_library, ArgRole, LibraryError,
    PatternDefinition, PatternLibrary, STANDARD_PATTERNS,
};
pub use workflow::{
    label_expression, label_expression_with, max_label, parse_workflow, parse_workflow_spanned,
    validate, Diagnostic, LabeledExpression, LabelingMode, NodePath, Severity, WorkflowNode,
};
