//! External verifier adapter: diagnostics, (V, E) scoring, classification,
//! and error-selection priority.

mod exec;
mod output;
pub mod scripted;

pub use exec::{VerifierError, VerusOracle};
pub use output::{parse_output, ParsedOutput};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ErrorKind {
    MismatchedType,
    PreCondFail,
    PreCondVecLen,
    PostCondFail,
    InvFailFront,
    InvFailEnd,
    AssertFail,
    ArithmeticFlow,
    Unclassified,
}

impl ErrorKind {
    pub const ALL: [ErrorKind; 9] = [
        ErrorKind::MismatchedType,
        ErrorKind::PreCondFail,
        ErrorKind::PreCondVecLen,
        ErrorKind::PostCondFail,
        ErrorKind::InvFailFront,
        ErrorKind::InvFailEnd,
        ErrorKind::AssertFail,
        ErrorKind::ArithmeticFlow,
        ErrorKind::Unclassified,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Severity {
    Error,
    Warning,
    Note,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanInfo {
    /// Byte range into the rendered source the verifier ran on.
    pub byte_range: (usize, usize),
    pub line: usize,
    pub col: usize,
    /// Source line the span points at, when the output carried it.
    pub snippet: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub kind: ErrorKind,
    pub message: String,
    pub primary_span: SpanInfo,
    pub related_spans: Vec<SpanInfo>,
    pub severity: Severity,
    /// Message plus span snippets and notes; the classification input.
    pub detail: String,
}

impl Diagnostic {
    pub fn full_text(&self) -> String {
        if self.detail.is_empty() {
            self.message.clone()
        } else {
            format!("{}\n{}", self.message, self.detail)
        }
    }
}

/// Sentinel error count for outcomes whose output could not be parsed.
pub const E_SENTINEL: u32 = u32::MAX;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationOutcome {
    /// Functions verified; the verifier counts each loop separately.
    pub verified_count: u32,
    /// Number of error-severity diagnostics.
    pub error_count: u32,
    pub diagnostics: Vec<Diagnostic>,
    pub timed_out: bool,
    /// False when the verifier never reached verification (compile failure
    /// or unparsable output); such outcomes are treated as invalid.
    pub compiled: bool,
    pub raw_output: String,
}

impl VerificationOutcome {
    pub fn score(&self) -> ScoreTuple {
        ScoreTuple { verified: self.verified_count, errors: self.error_count }
    }

    pub fn fully_verified(&self) -> bool {
        self.compiled && !self.timed_out && self.error_count == 0
    }

    /// Timed-out or compile-failed candidates are never accepted or ranked
    /// above any well-formed one.
    pub fn is_valid(&self) -> bool {
        self.compiled && !self.timed_out
    }

    pub fn errors_of_kind(&self, kind: ErrorKind) -> usize {
        self.diagnostics
            .iter()
            .filter(|d| d.severity == Severity::Error && d.kind == kind)
            .count()
    }
}

/// The candidate-ranking signal: higher V wins, ties break toward lower E.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreTuple {
    pub verified: u32,
    pub errors: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    Better,
    Equal,
    Worse,
}

/// Lexicographic comparison of `a` against `b`.
pub fn compare(a: ScoreTuple, b: ScoreTuple) -> Comparison {
    match a.verified.cmp(&b.verified) {
        std::cmp::Ordering::Greater => Comparison::Better,
        std::cmp::Ordering::Less => Comparison::Worse,
        std::cmp::Ordering::Equal => match a.errors.cmp(&b.errors) {
            std::cmp::Ordering::Less => Comparison::Better,
            std::cmp::Ordering::Greater => Comparison::Worse,
            std::cmp::Ordering::Equal => Comparison::Equal,
        },
    }
}

impl ScoreTuple {
    pub fn beats(self, other: ScoreTuple) -> bool {
        compare(self, other) == Comparison::Better
    }

    pub fn at_least(self, other: ScoreTuple) -> bool {
        compare(self, other) != Comparison::Worse
    }
}

/// Deterministic substring rules mapping a diagnostic's text to one kind.
/// Vector-length precondition failures classify before generic precondition
/// failures. Falls back to Unclassified.
pub fn classify(diagnostic_text: &str) -> ErrorKind {
    let t = diagnostic_text.to_ascii_lowercase();
    let has = |s: &str| t.contains(s);

    if has("mismatched types")
        || has("type int is expected")
        || has("type nat is expected")
        || has("expected `int`")
        || has("expected `nat`")
        || has("cannot be cast")
    {
        return ErrorKind::MismatchedType;
    }
    if (has("precondition not satisfied") || has("failed precondition"))
        && (has(".len()") || has("len ()") || has("out of bounds") || has("index"))
    {
        return ErrorKind::PreCondVecLen;
    }
    if has("arithmetic underflow") || has("arithmetic overflow") || has("underflow/overflow") {
        return ErrorKind::ArithmeticFlow;
    }
    if has("invariant not satisfied before") || has("not satisfied before the loop") {
        return ErrorKind::InvFailFront;
    }
    if has("invariant not satisfied at end") || has("not satisfied at the end of the loop") {
        return ErrorKind::InvFailEnd;
    }
    if has("precondition not satisfied") || has("failed precondition") {
        return ErrorKind::PreCondFail;
    }
    if has("postcondition not satisfied") || has("post-condition") || has("postcondition") {
        return ErrorKind::PostCondFail;
    }
    if has("assertion failed") || has("assert failed") {
        return ErrorKind::AssertFail;
    }
    ErrorKind::Unclassified
}

/// Repair priority: type errors block compilation, bound errors poison every
/// property touching the expression, front-invariant failures are the easiest
/// fixes; everything else goes in report order.
fn priority(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::MismatchedType => 0,
        ErrorKind::PreCondVecLen | ErrorKind::ArithmeticFlow => 1,
        ErrorKind::InvFailFront => 2,
        _ => 3,
    }
}

#[derive(Debug, Clone, Copy, thiserror::Error)]
#[error("outcome has no error diagnostics")]
pub struct NoErrors;

/// Picks the error to fix next: the first diagnostic of the highest-priority
/// kind present, in report order within a priority class.
pub fn select_error(outcome: &VerificationOutcome) -> Result<&Diagnostic, NoErrors> {
    outcome
        .diagnostics
        .iter()
        .filter(|d| d.severity == Severity::Error)
        .enumerate()
        .min_by_key(|(idx, d)| (priority(d.kind), *idx))
        .map(|(_, d)| d)
        .ok_or(NoErrors)
}

/// Options for one verifier invocation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub verifier_path: std::path::PathBuf,
    pub extra_flags: Vec<String>,
    pub timeout_s: u64,
    /// When set, `#[verifier::loop_isolation(false)]` is injected at the top
    /// of the verus region before rendering.
    pub loop_isolation: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            verifier_path: "verus".into(),
            extra_flags: Vec::new(),
            timeout_s: 60,
            loop_isolation: false,
        }
    }
}

/// Verification oracle: renders a program, runs the verifier, returns the
/// parsed outcome. Implementations: [`VerusOracle`] (subprocess) and
/// [`scripted::ScriptedOracle`] (deterministic mock for tests).
pub trait Oracle {
    fn verify(&self, program: &crate::program::VerusProgram) -> Result<VerificationOutcome, VerifierError>;

    /// Version string reported by the backing verifier.
    fn version(&self) -> String {
        "unknown".into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(kind: ErrorKind, line: usize) -> Diagnostic {
        Diagnostic {
            kind,
            message: format!("{kind:?}"),
            primary_span: SpanInfo { byte_range: (0, 0), line, col: 1, snippet: String::new() },
            related_spans: Vec::new(),
            severity: Severity::Error,
            detail: String::new(),
        }
    }

    fn outcome(kinds: &[ErrorKind]) -> VerificationOutcome {
        VerificationOutcome {
            verified_count: 0,
            error_count: kinds.len() as u32,
            diagnostics: kinds.iter().enumerate().map(|(i, k)| diag(*k, i + 1)).collect(),
            timed_out: false,
            compiled: true,
            raw_output: String::new(),
        }
    }

    #[test]
    fn compare_orders_lexicographically() {
        let s = |v, e| ScoreTuple { verified: v, errors: e };
        assert_eq!(compare(s(4, 2), s(3, 2)), Comparison::Better);
        assert_eq!(compare(s(3, 1), s(3, 2)), Comparison::Better);
        assert_eq!(compare(s(3, 2), s(3, 2)), Comparison::Equal);
        assert_eq!(compare(s(2, 0), s(3, 5)), Comparison::Worse);
    }

    #[test]
    fn classify_core_messages() {
        assert_eq!(classify("invariant not satisfied before loop"), ErrorKind::InvFailFront);
        assert_eq!(classify("possible arithmetic underflow/overflow"), ErrorKind::ArithmeticFlow);
        assert_eq!(classify("solver resource exhausted"), ErrorKind::Unclassified);
        assert_eq!(
            classify("precondition not satisfied\nrequired by: i < v.len()"),
            ErrorKind::PreCondVecLen
        );
        assert_eq!(classify("precondition not satisfied"), ErrorKind::PreCondFail);
    }

    #[test]
    fn select_error_respects_priority() {
        let o = outcome(&[ErrorKind::AssertFail, ErrorKind::MismatchedType]);
        assert_eq!(select_error(&o).unwrap().kind, ErrorKind::MismatchedType);

        let o = outcome(&[ErrorKind::InvFailEnd, ErrorKind::ArithmeticFlow]);
        assert_eq!(select_error(&o).unwrap().kind, ErrorKind::ArithmeticFlow);

        let o = outcome(&[ErrorKind::PostCondFail]);
        assert_eq!(select_error(&o).unwrap().kind, ErrorKind::PostCondFail);

        assert!(select_error(&outcome(&[])).is_err());
    }
}
