//! `patgen`: workflow expression in, temporal-logic specification out.
//!
//! Exit status: 0 on success, 1 on syntax, validation or I/O errors, 2 when
//! `--check` finds the specification unsatisfiable, 3 when the check is
//! inconclusive within the bounds.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use patgen::{
    check_specification, consolidated_expression, generate_with, label_expression_with, parse_workflow_spanned,
    validate, Bounds, CheckError, CheckResult, LabelingMode, PatternLibrary, Side, Specification,
};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Emit {
    Spec,
    Labeled,
    Consolidated,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "patgen", version, about = "Generate temporal-logic specifications from workflow-pattern expressions")]
struct RunConfig {
    /// Workflow expression file.
    #[arg(long, visible_alias = "model-path")]
    model: PathBuf,

    /// Pattern library file.
    #[arg(long, visible_alias = "patterns-path", env = "PATGEN_PATTERNS")]
    patterns: PathBuf,

    #[arg(long, value_enum, default_value_t = Emit::Spec)]
    emit: Emit,

    /// Check the generated specification for satisfiability.
    #[arg(long)]
    check: bool,

    /// Treat repeated activity names as errors (`--strict-atoms false` to warn only).
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    strict_atoms: bool,

    #[arg(long, default_value_t = 8)]
    max_prefix: usize,

    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
    max_loop: u64,

    /// Write output here instead of standard output.
    #[arg(long, visible_alias = "output-path")]
    output: Option<PathBuf>,

    /// Label brackets with the scan counter instead of nesting depth.
    #[arg(long)]
    legacy_labels: bool,
}

struct Failure {
    code: u8,
    messages: Vec<String>,
}

impl Failure {
    fn one(message: String) -> Self {
        Failure {
            code: 1,
            messages: vec![message],
        }
    }
}

fn read(path: &Path, what: &str) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::one(format!("{}: cannot read {what}: {e}", path.display())))
}

#[derive(Serialize)]
struct JsonOut<'a> {
    formulas: Vec<String>,
    provenance: Vec<&'a patgen::Provenance>,
    expression_labeled: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    check: Option<&'a CheckResult>,
}

fn run(cfg: &RunConfig) -> Result<(String, u8), Failure> {
    let lib_text = read(&cfg.patterns, "pattern library")?;
    let lib = PatternLibrary::parse(&lib_text).map_err(|e| {
        let at = match e.pos() {
            Some(_) => format!("{}:{e}", cfg.patterns.display()),
            None => format!("{}: {e}", cfg.patterns.display()),
        };
        Failure::one(at)
    })?;

    let model_text = read(&cfg.model, "workflow expression")?;
    let (workflow, spans) =
        parse_workflow_spanned(&model_text).map_err(|e| Failure::one(format!("{}:{e}", cfg.model.display())))?;

    // Labeling is purely syntactic; every other mode needs a valid expression.
    let needs_library = cfg.emit != Emit::Labeled || cfg.check;
    let diagnostics = if needs_library {
        validate(&workflow, &lib, cfg.strict_atoms)
    } else {
        Vec::new()
    };
    let mut warnings = Vec::new();
    let mut errors = Vec::new();
    for d in &diagnostics {
        let pos = spans.get(&d.path).copied().unwrap_or_else(patgen::Pos::start);
        let line = format!("{}:{pos}: {d}", cfg.model.display());
        if d.is_error() {
            errors.push(line);
        } else {
            warnings.push(line);
        }
    }
    for w in &warnings {
        eprintln!("{w}");
    }
    if !errors.is_empty() {
        return Err(Failure {
            code: 1,
            messages: errors,
        });
    }

    let mode = if cfg.legacy_labels {
        LabelingMode::LegacyScan
    } else {
        LabelingMode::Depth
    };
    let labeled = label_expression_with(&workflow, mode).to_string();

    let generated = || -> Result<Specification, Failure> {
        generate_with(&workflow, &lib, cfg.strict_atoms).map_err(|e| Failure::one(format!("{}: {e}", cfg.model.display())))
    };
    let spec = match cfg.emit {
        Emit::Spec | Emit::Json => Some(generated()?),
        _ if cfg.check => Some(generated()?),
        _ => None,
    };

    let bounds = Bounds::new(cfg.max_prefix, cfg.max_loop as usize);
    let mut code = 0;
    let check = match (&spec, cfg.check) {
        (Some(spec), true) => match check_specification(spec, bounds) {
            Ok(r) => {
                code = match r {
                    CheckResult::Satisfiable { .. } => 0,
                    CheckResult::Unsatisfiable { .. } => 2,
                    CheckResult::Unknown { .. } => 3,
                };
                Some(r)
            }
            Err(e @ CheckError::BoundOverflow(_)) => {
                eprintln!("{}: {e}", cfg.model.display());
                code = 3;
                Some(CheckResult::Unknown { bounds })
            }
            Err(e) => return Err(Failure::one(format!("{}: {e}", cfg.model.display()))),
        },
        _ => None,
    };

    let mut out = String::new();
    match cfg.emit {
        Emit::Spec => out.push_str(&spec.as_ref().unwrap().to_string()),
        Emit::Labeled => writeln!(out, "{labeled}").unwrap(),
        Emit::Consolidated => {
            let side = |s| {
                consolidated_expression(&workflow, s, &lib).map_err(|e| Failure::one(format!("{}: {e}", cfg.model.display())))
            };
            writeln!(out, "ini: {}", side(Side::Ini)?).unwrap();
            writeln!(out, "fin: {}", side(Side::Fin)?).unwrap();
        }
        Emit::Json => {
            let spec = spec.as_ref().unwrap();
            let json = JsonOut {
                formulas: spec.formulas().map(|f| f.to_string()).collect(),
                provenance: spec.entries().iter().map(|e| &e.provenance).collect(),
                expression_labeled: labeled,
                check: check.as_ref(),
            };
            out = serde_json::to_string_pretty(&json).unwrap();
            out.push('\n');
        }
    }
    if cfg.emit != Emit::Json {
        if let Some(r) = &check {
            writeln!(out, "{r}").unwrap();
        }
    }
    Ok((out, code))
}

fn main() -> ExitCode {
    let cfg = RunConfig::parse();
    match run(&cfg) {
        Ok((text, code)) => {
            let written = match &cfg.output {
                Some(path) => fs::write(path, &text).map_err(|e| format!("{}: cannot write output: {e}", path.display())),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            match written {
                Ok(()) => ExitCode::from(code),
                Err(msg) => {
                    eprintln!("{msg}");
                    ExitCode::from(1)
                }
            }
        }
        Err(f) => {
            for m in &f.messages {
                eprintln!("{m}");
            }
            ExitCode::from(f.code)
        }
    }
}
