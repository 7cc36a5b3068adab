//! Deterministic scripted verifier.
//!
//! A rule set maps the annotation state of a program to a canned verification
//! report. The `fakeverus` binary renders these reports over its command-line
//! interface so the whole subprocess adapter path can be exercised without a
//! real verifier; `ScriptedOracle` evaluates the same rules in-process and
//! feeds the same text through the same output parser, so both paths agree.

use super::output::{assemble, parse_output};
use super::{Oracle, VerificationOutcome, VerifierError};
use crate::lexer;
use crate::program::{self, VerusProgram};
use serde::{Deserialize, Serialize};

/// Marker pseudo-annotation a rule can require: present when the program
/// carries `#[verifier::loop_isolation(false)]`.
pub const LOOP_ISOLATION_MARKER: &str = "@loop_isolation_false";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RuleSet {
    pub version: u32,
    #[serde(default = "default_version_string")]
    pub verifier_version: String,
    pub tasks: Vec<TaskRule>,
    /// Used when no task rule matches the program's function names.
    pub fallback: Case,
}

fn default_version_string() -> String {
    "fakeverus 0.1.0".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TaskRule {
    /// Matches programs containing an exec fn with this name.
    pub match_fn: String,
    /// First matching case wins.
    pub cases: Vec<Case>,
    pub default: Case,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Case {
    /// Annotation texts (or markers) that must all be present.
    #[serde(default)]
    pub present: Vec<String>,
    /// Annotation texts that must all be absent.
    #[serde(default)]
    pub absent: Vec<String>,
    /// When set, the report is a compile failure with this message and no
    /// verification summary.
    #[serde(default)]
    pub compile_error: Option<String>,
    #[serde(default)]
    pub verified: u32,
    #[serde(default)]
    pub errors: Vec<CannedError>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CannedError {
    pub message: String,
    /// Source snippet the error points at, located by normalized token
    /// search; empty means line 1.
    #[serde(default)]
    pub at: String,
    /// Extra note line included in the block (feeds classification).
    #[serde(default)]
    pub note: Option<String>,
}

impl RuleSet {
    pub fn from_json(json: &str) -> Result<RuleSet, serde_json::Error> {
        serde_json::from_str(json)
    }

    pub fn load(path: &std::path::Path) -> Result<RuleSet, String> {
        let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
        RuleSet::from_json(&text).map_err(|e| e.to_string())
    }
}

/// Evaluates the rules against a source text; returns the report text and
/// the process exit code `fakeverus` should use.
pub fn evaluate(rules: &RuleSet, source: &str) -> (String, i32) {
    let program = match program::parse(source) {
        Ok(p) => p,
        Err(e) => {
            let report = format!(
                "error: cannot parse input: {}\n  --> task.rs:{}:{}\n   |\n",
                e.message, e.line, e.col
            );
            return (report, 1);
        }
    };

    let mut states: Vec<String> = program::list_annotations(&program)
        .into_iter()
        .map(|(_, a)| a.text)
        .collect();
    if program.has_region_attr("# [ verifier :: loop_isolation ( false ) ]") {
        states.push(LOOP_ISOLATION_MARKER.to_string());
    }

    let fn_names: Vec<String> = program
        .items()
        .iter()
        .filter(|it| it.kind == program::ItemKind::ExecFn)
        .filter_map(|it| it.name.clone())
        .collect();

    let case = rules
        .tasks
        .iter()
        .find(|t| fn_names.iter().any(|n| *n == t.match_fn))
        .map(|t| t.cases.iter().find(|c| case_matches(c, &states)).unwrap_or(&t.default))
        .unwrap_or(&rules.fallback);

    render_report(case, source)
}

fn case_matches(case: &Case, states: &[String]) -> bool {
    let norm = |s: &str| {
        if s.starts_with('@') {
            s.to_string()
        } else {
            lexer::normalize_snippet(s)
        }
    };
    case.present.iter().all(|p| states.contains(&norm(p)))
        && case.absent.iter().all(|a| !states.contains(&norm(a)))
}

fn render_report(case: &Case, source: &str) -> (String, i32) {
    let mut out = String::new();
    if let Some(msg) = &case.compile_error {
        out.push_str(&format!("error: {msg}\n  --> task.rs:1:1\n   |\n"));
        return (out, 1);
    }
    for err in &case.errors {
        let (line, col, snippet) = locate(source, &err.at);
        out.push_str(&format!("error: {}\n", err.message));
        out.push_str(&format!("  --> task.rs:{line}:{col}\n"));
        out.push_str("   |\n");
        let caret_len = snippet.trim_end().len().max(1);
        out.push_str(&format!("{line:>2} | {snippet}\n"));
        out.push_str(&format!(
            "   | {}{}\n",
            " ".repeat(col.saturating_sub(1)),
            "^".repeat(caret_len.saturating_sub(col.saturating_sub(1)).max(1))
        ));
        if let Some(note) = &err.note {
            out.push_str(&format!("   = note: {note}\n"));
        }
        out.push_str("   |\n\n");
    }
    let e = case.errors.len();
    out.push_str(&format!("verification results:: {} verified, {} errors\n", case.verified, e));
    (out, if e == 0 { 0 } else { 1 })
}

/// Finds `needle` in `source` by normalized token-window search; returns
/// (1-based line, 1-based col, full source line).
fn locate(source: &str, needle: &str) -> (usize, usize, String) {
    let fallback = (1, 1, source.lines().next().unwrap_or("").to_string());
    if needle.is_empty() {
        return fallback;
    }
    let Ok(hay) = lexer::lex(source) else { return fallback };
    let hay: Vec<_> = hay.into_iter().filter(|t| t.kind != lexer::TokenKind::Comment).collect();
    let Ok(pat) = lexer::lex(needle) else { return fallback };
    let pat: Vec<String> = lexer::normalized_texts(&pat);
    if pat.is_empty() || hay.len() < pat.len() {
        return fallback;
    }
    for w in 0..=(hay.len() - pat.len()) {
        if hay[w..w + pat.len()].iter().zip(&pat).all(|(t, p)| t.text == *p) {
            let start = hay[w].start;
            let mut line = 1usize;
            let mut line_start = 0usize;
            for (i, c) in source.char_indices() {
                if i >= start {
                    break;
                }
                if c == '\n' {
                    line += 1;
                    line_start = i + 1;
                }
            }
            let col = start - line_start + 1;
            let text = source[line_start..].lines().next().unwrap_or("").to_string();
            return (line, col, text);
        }
    }
    fallback
}

/// In-process oracle over a rule set; behaviourally identical to running the
/// `fakeverus` binary through the subprocess adapter.
pub struct ScriptedOracle {
    rules: RuleSet,
}

impl ScriptedOracle {
    pub fn new(rules: RuleSet) -> Self {
        ScriptedOracle { rules }
    }
}

impl Oracle for ScriptedOracle {
    fn verify(&self, p: &VerusProgram) -> Result<VerificationOutcome, VerifierError> {
        let source = program::render(p);
        let (raw, exit) = evaluate(&self.rules, &source);
        let parsed = parse_output(&raw, &source);
        Ok(assemble(parsed, Some(exit), raw))
    }

    fn version(&self) -> String {
        self.rules.verifier_version.clone()
    }
}

/// Closure-backed oracle for scripted unit scenarios.
pub struct FnOracle<F>(pub F);

impl<F> Oracle for FnOracle<F>
where
    F: Fn(&VerusProgram) -> VerificationOutcome,
{
    fn verify(&self, p: &VerusProgram) -> Result<VerificationOutcome, VerifierError> {
        Ok((self.0)(p))
    }

    fn version(&self) -> String {
        "scripted".into()
    }
}
