//! Verifier output parsing.
//!
//! Two formats are understood: rustc-style JSON diagnostics (one object per
//! line, as emitted under `--error-format=json`) and the human-readable
//! report with `error:` blocks and the
//! `verification results:: N verified, M errors` summary line. JSON is
//! preferred when present so format drift in the human text stays isolated.

use super::{classify, Diagnostic, ErrorKind, Severity, SpanInfo};

#[derive(Debug, Clone)]
pub struct ParsedOutput {
    pub verified: Option<u32>,
    pub errors_reported: Option<u32>,
    pub diagnostics: Vec<Diagnostic>,
    /// True when a verification summary was found; absence signals a compile
    /// failure or unparsable output.
    pub has_summary: bool,
}

/// Parses combined stdout+stderr of a verifier run. `source` is the rendered
/// text the verifier ran on; spans are resolved against it.
pub fn parse_output(raw: &str, source: &str) -> ParsedOutput {
    let mut diagnostics = parse_json_lines(raw, source);
    if diagnostics.is_empty() {
        diagnostics = parse_human(raw, source);
    }

    let mut verified = None;
    let mut errors_reported = None;
    let mut has_summary = false;
    for line in raw.lines() {
        if let Some(rest) = line.trim().strip_prefix("verification results::") {
            // "N verified, M errors"
            let nums: Vec<u32> = rest
                .split(|c: char| !c.is_ascii_digit())
                .filter(|s| !s.is_empty())
                .filter_map(|s| s.parse().ok())
                .collect();
            if nums.len() >= 2 {
                verified = Some(nums[0]);
                errors_reported = Some(nums[1]);
                has_summary = true;
            }
        }
    }

    // keep the invariant E == |error diagnostics| even when blocks were
    // missed: pad with unclassified placeholders
    if let Some(m) = errors_reported {
        let seen = diagnostics.iter().filter(|d| d.severity == Severity::Error).count() as u32;
        for _ in seen..m {
            diagnostics.push(Diagnostic {
                kind: ErrorKind::Unclassified,
                message: "unreported verification error (summary count mismatch)".into(),
                primary_span: SpanInfo::default(),
                related_spans: Vec::new(),
                severity: Severity::Error,
                detail: String::new(),
            });
        }
    }

    ParsedOutput { verified, errors_reported, diagnostics, has_summary }
}

/// Builds the final outcome from parsed output plus the exit status, applying
/// the adapter's validity rules: a missing verification summary means the
/// verifier never reached verification (compile failure / unreadable output),
/// and the exit status must agree with `E == 0` iff fully verified.
pub(crate) fn assemble(
    parsed: ParsedOutput,
    exit_code: Option<i32>,
    raw: String,
) -> super::VerificationOutcome {
    let diagnostics = parsed.diagnostics;
    let error_count =
        diagnostics.iter().filter(|d| d.severity == Severity::Error).count() as u32;

    if !parsed.has_summary {
        let error_count = if diagnostics.is_empty() { super::E_SENTINEL } else { error_count };
        return super::VerificationOutcome {
            verified_count: 0,
            error_count,
            diagnostics,
            timed_out: false,
            compiled: false,
            raw_output: raw,
        };
    }

    let consistent = (exit_code == Some(0)) == (error_count == 0);
    super::VerificationOutcome {
        verified_count: parsed.verified.unwrap_or(0),
        error_count,
        diagnostics,
        timed_out: false,
        compiled: consistent,
        raw_output: raw,
    }
}

fn severity_of(level: &str) -> Option<Severity> {
    match level {
        "error" => Some(Severity::Error),
        "warning" => Some(Severity::Warning),
        "note" | "help" => Some(Severity::Note),
        _ => None,
    }
}

fn parse_json_lines(raw: &str, source: &str) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for line in raw.lines() {
        let line = line.trim();
        if !line.starts_with('{') {
            continue;
        }
        let Ok(value) = serde_json::from_str::<serde_json::Value>(line) else { continue };
        let Some(message) = value.get("message").and_then(|m| m.as_str()) else { continue };
        let Some(severity) = value.get("level").and_then(|l| l.as_str()).and_then(severity_of)
        else {
            continue;
        };
        let mut primary = SpanInfo::default();
        let mut related = Vec::new();
        if let Some(spans) = value.get("spans").and_then(|s| s.as_array()) {
            for sp in spans {
                let info = SpanInfo {
                    byte_range: (
                        sp.get("byte_start").and_then(|v| v.as_u64()).unwrap_or(0) as usize,
                        sp.get("byte_end").and_then(|v| v.as_u64()).unwrap_or(0) as usize,
                    ),
                    line: sp.get("line_start").and_then(|v| v.as_u64()).unwrap_or(0) as usize,
                    col: sp.get("column_start").and_then(|v| v.as_u64()).unwrap_or(0) as usize,
                    snippet: sp
                        .get("text")
                        .and_then(|t| t.as_array())
                        .and_then(|a| a.first())
                        .and_then(|t| t.get("text"))
                        .and_then(|t| t.as_str())
                        .unwrap_or("")
                        .to_string(),
                };
                if sp.get("is_primary").and_then(|v| v.as_bool()).unwrap_or(false) {
                    primary = info;
                } else {
                    related.push(info);
                }
            }
        }
        if primary.byte_range == (0, 0) && primary.line > 0 {
            primary.byte_range = byte_range_for(source, primary.line, primary.col, 1);
        }
        let rendered =
            value.get("rendered").and_then(|r| r.as_str()).unwrap_or("").to_string();
        let detail = if rendered.is_empty() { primary.snippet.clone() } else { rendered };
        let full = format!("{message}\n{detail}");
        out.push(Diagnostic {
            kind: classify(&full),
            message: message.to_string(),
            primary_span: primary,
            related_spans: related,
            severity,
            detail,
        });
    }
    out
}

/// Human-readable rustc/verus blocks:
/// ```text
/// error: invariant not satisfied before loop
///   --> file.rs:24:13
///    |
/// 24 |             fib.len() == n,
///    |             ^^^^^^^^^^^^^^
/// ```
fn parse_human(raw: &str, source: &str) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let lines: Vec<&str> = raw.lines().collect();
    let mut i = 0;
    while i < lines.len() {
        let line = lines[i];
        let Some((level, message)) = split_header(line) else {
            i += 1;
            continue;
        };
        let Some(severity) = severity_of(level) else {
            i += 1;
            continue;
        };
        // gather the indented block that follows
        let mut block = Vec::new();
        let mut j = i + 1;
        while j < lines.len()
            && (lines[j].starts_with(' ') || lines[j].starts_with('\t') || lines[j].is_empty())
        {
            if lines[j].is_empty() && j + 1 < lines.len() && split_header(lines[j + 1]).is_some() {
                break;
            }
            block.push(lines[j]);
            j += 1;
        }

        let mut span = SpanInfo::default();
        let mut caret_len = 1usize;
        for (bi, bl) in block.iter().enumerate() {
            let t = bl.trim_start();
            if let Some(loc) = t.strip_prefix("--> ") {
                let parts: Vec<&str> = loc.rsplitn(3, ':').collect();
                if parts.len() == 3 {
                    span.line = parts[1].parse().unwrap_or(0);
                    span.col = parts[0].trim().parse().unwrap_or(0);
                }
            }
            if t.starts_with('^') {
                caret_len = t.chars().filter(|c| *c == '^').count().max(1);
                // source line sits one row above the caret line
                if bi > 0 {
                    if let Some(idx) = block[bi - 1].find('|') {
                        span.snippet = block[bi - 1][idx + 1..].trim().to_string();
                    }
                }
            }
        }
        if span.line > 0 {
            span.byte_range = byte_range_for(source, span.line, span.col, caret_len);
        }

        let detail = block.join("\n");
        let full = format!("{message}\n{detail}");
        out.push(Diagnostic {
            kind: classify(&full),
            message: message.to_string(),
            primary_span: span,
            related_spans: Vec::new(),
            severity,
            detail,
        });
        i = j.max(i + 1);
    }
    out
}

fn split_header(line: &str) -> Option<(&str, &str)> {
    for level in ["error", "warning", "note"] {
        if let Some(rest) = line.strip_prefix(level) {
            // allow "error[E0308]: ..." style codes
            let rest = rest.strip_prefix(|c: char| c == '[').map_or(rest, |r| {
                r.split_once(']').map(|(_, tail)| tail).unwrap_or(rest)
            });
            if let Some(msg) = rest.strip_prefix(": ") {
                return Some((level, msg));
            }
        }
    }
    None
}

/// 1-based line/col to a byte range in `source`.
fn byte_range_for(source: &str, line: usize, col: usize, len: usize) -> (usize, usize) {
    let mut offset = 0usize;
    for (idx, l) in source.lines().enumerate() {
        if idx + 1 == line {
            let start = offset + col.saturating_sub(1).min(l.len());
            let end = (start + len).min(offset + l.len()).max(start);
            return (start, end);
        }
        offset += l.len() + 1;
    }
    (0, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SOURCE: &str = "line one\nlet x = v[i];\nassert(a == b);\n";

    #[test]
    fn human_block_with_span() {
        let raw = "\
error: assertion failed
  --> task.rs:3:1
   |
3  | assert(a == b);
   | ^^^^^^^^^^^^^^
   |

verification results:: 1 verified, 1 errors
";
        let parsed = parse_output(raw, SOURCE);
        assert!(parsed.has_summary);
        assert_eq!(parsed.verified, Some(1));
        assert_eq!(parsed.errors_reported, Some(1));
        assert_eq!(parsed.diagnostics.len(), 1);
        let d = &parsed.diagnostics[0];
        assert_eq!(d.kind, ErrorKind::AssertFail);
        assert_eq!(d.primary_span.line, 3);
        let (s, e) = d.primary_span.byte_range;
        assert_eq!(&SOURCE[s..e], "assert(a == b)");
    }

    #[test]
    fn json_lines_preferred() {
        let raw = concat!(
            r#"{"message":"mismatched types","level":"error","spans":[{"byte_start":19,"byte_end":20,"line_start":2,"column_start":11,"is_primary":true,"text":[{"text":"let x = v[i];"}]}]}"#,
            "\nverification results:: 0 verified, 1 errors\n"
        );
        let parsed = parse_output(raw, SOURCE);
        assert_eq!(parsed.diagnostics.len(), 1);
        assert_eq!(parsed.diagnostics[0].kind, ErrorKind::MismatchedType);
        assert_eq!(parsed.diagnostics[0].primary_span.byte_range, (19, 20));
    }

    #[test]
    fn summary_mismatch_pads_unclassified() {
        let raw = "verification results:: 2 verified, 3 errors\n";
        let parsed = parse_output(raw, SOURCE);
        assert_eq!(parsed.diagnostics.len(), 3);
        assert!(parsed.diagnostics.iter().all(|d| d.kind == ErrorKind::Unclassified));
    }

    #[test]
    fn warnings_do_not_become_errors() {
        let raw = "\
warning: unused variable
  --> task.rs:1:1

verification results:: 2 verified, 0 errors
";
        let parsed = parse_output(raw, SOURCE);
        assert_eq!(parsed.errors_reported, Some(0));
        assert!(parsed
            .diagnostics
            .iter()
            .all(|d| d.severity != Severity::Error));
    }
}
