//! Safety checking, proof merging, annotation deletion, and mechanical
//! quick-fixes over parsed programs — the discipline layer over creative LLM
//! output.

use crate::lexer;
use crate::program::{
    self, exec_fingerprint, list_annotations, parse, render, AnnKind, Item, ItemKind, Stmt,
    TokenRun, VerusProgram,
};
use crate::verifier::{Diagnostic, ErrorKind};
use std::collections::HashSet;

pub use crate::program::delete_annotation;
pub use crate::program::UnknownRef;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum ViolationKind {
    ExecModified,
    SpecModified,
    ForbiddenGhost,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub detail: String,
    pub span: Option<(usize, usize)>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct SafetyVerdict {
    pub safe: bool,
    pub violations: Vec<Violation>,
}

impl SafetyVerdict {
    fn from_violations(violations: Vec<Violation>) -> Self {
        SafetyVerdict { safe: violations.is_empty(), violations }
    }
}

/// Ghost constructs that bypass proof obligations; candidates containing any
/// of these are rejected outright.
const FORBIDDEN_CALLS: &[&str] = &["assume", "admit"];
const FORBIDDEN_ATTRS: &[&str] = &["external", "external_body"];

/// Checks that a candidate did not modify the executable code or the
/// specifications under proof, and contains no proof-bypassing ghost code.
/// New ghost items (proof fns, asserts, invariants) are permitted.
pub fn is_safe(original: &VerusProgram, candidate: &VerusProgram) -> SafetyVerdict {
    let mut violations = Vec::new();

    if exec_fingerprint(original) != exec_fingerprint(candidate) {
        violations.push(Violation {
            kind: ViolationKind::ExecModified,
            detail: "executable skeleton differs from the original".into(),
            span: None,
        });
    }

    // requires/ensures clause sets of every original function must survive
    for item in original.items() {
        let Some(name) = &item.name else { continue };
        if !matches!(item.kind, ItemKind::ExecFn | ItemKind::ProofFn | ItemKind::SpecFn) {
            continue;
        }
        let cand_item = candidate
            .items()
            .iter()
            .find(|it| it.name.as_deref() == Some(name.as_str()) && it.kind == item.kind);
        let Some(cand_item) = cand_item else {
            violations.push(Violation {
                kind: ViolationKind::SpecModified,
                detail: format!("original {:?} `{}` is missing from the candidate", item.kind, name),
                span: None,
            });
            continue;
        };
        if item.kind == ItemKind::SpecFn {
            if !spec_fn_equal(item, cand_item) {
                violations.push(Violation {
                    kind: ViolationKind::SpecModified,
                    detail: format!("spec fn `{name}` was modified"),
                    span: None,
                });
            }
            continue;
        }
        for kind in [crate::program::ClauseKind::Requires, crate::program::ClauseKind::Ensures] {
            let orig_set = clause_set(item, kind);
            let cand_set = clause_set(cand_item, kind);
            if orig_set != cand_set {
                violations.push(Violation {
                    kind: ViolationKind::SpecModified,
                    detail: format!("`{}` clauses of `{}` differ from the original", kind.keyword(), name),
                    span: None,
                });
            }
        }
    }

    violations.extend(forbidden_ghost(candidate));
    SafetyVerdict::from_violations(violations)
}

fn clause_set(item: &Item, kind: crate::program::ClauseKind) -> HashSet<String> {
    item.clause_section(kind)
        .map(|s| s.clauses.iter().map(|c| c.norm_text()).collect())
        .unwrap_or_default()
}

fn spec_fn_equal(a: &Item, b: &Item) -> bool {
    // head keeps attrs/vis/mode, which may legitimately reformat; compare
    // normalized tokens of head, clauses, and body
    let norm = |it: &Item| lexer::normalize_snippet(&program::render_item(it));
    norm(a) == norm(b)
}

fn forbidden_ghost(candidate: &VerusProgram) -> Vec<Violation> {
    let mut out = Vec::new();
    let text = render(candidate);
    let Ok(tokens) = lexer::lex(&text) else { return out };
    let sig: Vec<_> = tokens.iter().filter(|t| t.kind != lexer::TokenKind::Comment).collect();
    for w in 0..sig.len() {
        let t = &sig[w];
        if FORBIDDEN_CALLS.contains(&t.text.as_str())
            && sig.get(w + 1).map(|n| n.is("(")).unwrap_or(false)
        {
            out.push(Violation {
                kind: ViolationKind::ForbiddenGhost,
                detail: format!("`{}(` bypasses proof obligations", t.text),
                span: Some((t.start, t.end)),
            });
        }
        // #[verifier::external] / #[verifier::external_body]
        if t.is("verifier")
            && sig.get(w + 1).map(|n| n.is("::")).unwrap_or(false)
            && sig
                .get(w + 2)
                .map(|n| FORBIDDEN_ATTRS.contains(&n.text.as_str()))
                .unwrap_or(false)
        {
            out.push(Violation {
                kind: ViolationKind::ForbiddenGhost,
                detail: format!("`#[verifier::{}]` attribute", sig[w + 2].text),
                span: Some((t.start, sig[w + 2].end)),
            });
        }
    }
    out
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum MergeError {
    #[error("executable skeletons differ; programs are not merge-compatible")]
    FingerprintMismatch,
}

/// Merges the ghost annotations of `other` into `base`. At each anchor the
/// result holds the deduplicated union: base's annotations in base order,
/// then other's novel annotations in other's order. The executable skeleton
/// is base's; `merge(p, p) == p`.
pub fn merge(base: &VerusProgram, other: &VerusProgram) -> Result<VerusProgram, MergeError> {
    if exec_fingerprint(base) != exec_fingerprint(other) {
        return Err(MergeError::FingerprintMismatch);
    }
    let mut out = base.clone();

    for attr in &other.region_attrs {
        out.add_region_attr(&attr.raw);
    }

    // align skeleton items pairwise (equal fingerprints guarantee the same
    // executable item sequence)
    let base_idx: Vec<usize> = out
        .items
        .iter()
        .enumerate()
        .filter(|(_, it)| !it.is_ghost())
        .map(|(i, _)| i)
        .collect();
    let other_exec: Vec<&Item> = other.items.iter().filter(|it| !it.is_ghost()).collect();
    if base_idx.len() != other_exec.len() {
        return Err(MergeError::FingerprintMismatch);
    }
    for (bi, oit) in base_idx.iter().zip(other_exec.iter()) {
        merge_item(&mut out.items[*bi], oit)?;
    }

    // novel proof fn items from `other` are appended at the end
    let existing: HashSet<(AnnKind, String)> = list_annotations(&out)
        .into_iter()
        .map(|(_, a)| a.dedupe_key())
        .collect();
    for oit in &other.items {
        if oit.kind != ItemKind::ProofFn {
            continue;
        }
        let key = (AnnKind::ProofFnItem, lexer::normalize_snippet(&program::render_item(oit)));
        if !existing.contains(&key) {
            out.items.push((*oit).clone());
        }
    }
    Ok(out)
}

fn merge_item(base: &mut Item, other: &Item) -> Result<(), MergeError> {
    // union of spec clauses (identical for safe candidates; dedupe keeps
    // merge(p, p) == p)
    for osec in &other.clauses {
        match base.clauses.iter_mut().find(|s| s.kind == osec.kind) {
            Some(bsec) => merge_runs(&mut bsec.clauses, &osec.clauses),
            None => base.clauses.push(osec.clone()),
        }
    }
    match (&mut base.body, &other.body) {
        (Some(bb), Some(ob)) => merge_block(bb, ob),
        (None, None) => Ok(()),
        _ => Err(MergeError::FingerprintMismatch),
    }
}

fn merge_runs(base: &mut Vec<TokenRun>, other: &[TokenRun]) {
    for run in other {
        if !base.iter().any(|b| b.norm == run.norm) {
            base.push(run.clone());
        }
    }
}

fn merge_block(base: &mut crate::program::Block, other: &crate::program::Block) -> Result<(), MergeError> {
    // group ghost statements by the executable position they precede
    let exec_count = base.stmts.iter().filter(|s| !s.is_ghost()).count();
    let other_groups = ghost_groups(other);

    // walk positions from the back so insert indices stay valid
    for pos in (0..=exec_count).rev() {
        let Some(others) = other_groups.get(&pos) else { continue };
        let existing: Vec<Vec<String>> = ghost_at(base, pos).iter().map(|s| stmt_norm(s)).collect();
        let insert_at = insertion_index(base, pos);
        let mut offset = 0usize;
        for ostmt in others {
            let key = stmt_norm(ostmt);
            if existing.contains(&key) {
                continue;
            }
            base.stmts.insert(insert_at + offset, (*ostmt).clone());
            offset += 1;
        }
    }

    // recurse into aligned executable statements
    let mut base_execs: Vec<&mut Stmt> =
        base.stmts.iter_mut().filter(|s| !s.is_ghost()).collect();
    let other_execs: Vec<&Stmt> = other.stmts.iter().filter(|s| !s.is_ghost()).collect();
    if base_execs.len() != other_execs.len() {
        return Err(MergeError::FingerprintMismatch);
    }
    for (bs, os) in base_execs.iter_mut().zip(other_execs.iter()) {
        match (&mut **bs, *os) {
            (
                Stmt::Loop { invariants: bi, decreases: bd, body: bb, .. },
                Stmt::Loop { invariants: oi, decreases: od, body: ob, .. },
            ) => {
                merge_runs(bi, oi);
                merge_runs(bd, od);
                merge_block(bb, ob)?;
            }
            (
                Stmt::If { then_block: bt, else_block: be, .. },
                Stmt::If { then_block: ot, else_block: oe, .. },
            ) => {
                merge_block(bt, ot)?;
                if let (Some(be), Some(oe)) = (be, oe) {
                    merge_block(be, oe)?;
                }
            }
            _ => {}
        }
    }
    Ok(())
}

fn stmt_norm(s: &Stmt) -> Vec<String> {
    match s {
        Stmt::Assert { text, .. } | Stmt::ProofBlock { text } => text.norm.clone(),
        _ => Vec::new(),
    }
}

/// Ghost statements of `block` that sit immediately before exec position
/// `pos` (pos == exec count means trailing).
fn ghost_at(block: &crate::program::Block, pos: usize) -> Vec<&Stmt> {
    let mut out = Vec::new();
    let mut exec_pos = 0usize;
    for s in &block.stmts {
        if s.is_ghost() {
            if exec_pos == pos {
                out.push(s);
            }
        } else {
            exec_pos += 1;
        }
    }
    out
}

fn ghost_groups(block: &crate::program::Block) -> std::collections::HashMap<usize, Vec<&Stmt>> {
    let mut map: std::collections::HashMap<usize, Vec<&Stmt>> = std::collections::HashMap::new();
    let mut exec_pos = 0usize;
    for s in &block.stmts {
        if s.is_ghost() {
            map.entry(exec_pos).or_default().push(s);
        } else {
            exec_pos += 1;
        }
    }
    map
}

/// Raw index in `block.stmts` where novel ghost statements for exec position
/// `pos` go: right after the last ghost statement already at that position,
/// otherwise right before the pos-th exec statement.
fn insertion_index(block: &crate::program::Block, pos: usize) -> usize {
    let mut exec_pos = 0usize;
    let mut result: Option<usize> = None;
    for (i, s) in block.stmts.iter().enumerate() {
        if s.is_ghost() {
            if exec_pos == pos {
                result = Some(i + 1);
            }
        } else {
            if exec_pos == pos && result.is_none() {
                result = Some(i);
            }
            exec_pos += 1;
        }
    }
    result.unwrap_or(block.stmts.len())
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum QuickFixError {
    #[error("no mechanical fix for this diagnostic")]
    NoFix,
}

/// Wraps the expression blamed by a mismatched-type diagnostic in an integer
/// cast (`v[i]` becomes `v[i as int]`). One fix per call; the diagnostic's
/// span must refer to `render(program)`.
pub fn apply_cast_quickfix(
    program: &VerusProgram,
    diagnostic: &Diagnostic,
) -> Result<VerusProgram, QuickFixError> {
    if diagnostic.kind != ErrorKind::MismatchedType {
        return Err(QuickFixError::NoFix);
    }
    let text = render(program);
    let (start, end) = diagnostic.primary_span.byte_range;
    if start >= end || end > text.len() {
        return Err(QuickFixError::NoFix);
    }
    if !text.is_char_boundary(start) || !text.is_char_boundary(end) {
        return Err(QuickFixError::NoFix);
    }
    let snippet = &text[start..end];
    let Ok(tokens) = lexer::lex(snippet) else { return Err(QuickFixError::NoFix) };
    let norm = lexer::normalized_texts(&tokens);
    if norm.is_empty() || norm.iter().any(|t| t == ";" || t == "{" || t == "}") {
        return Err(QuickFixError::NoFix);
    }

    // `container[index]` pattern (span on the index) or bare arithmetic
    let before = text[..start].trim_end().chars().last();
    let after = text[end..].trim_start().chars().next();
    let indexed = before == Some('[') && after == Some(']');
    let arithmetic = norm.iter().all(|t| {
        t.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
            || ["+", "-", "*", "/", "%", "(", ")", ".", "::"].contains(&t.as_str())
    });
    if !indexed && !arithmetic {
        return Err(QuickFixError::NoFix);
    }

    let target_ty = if diagnostic.full_text().contains("nat") { "nat" } else { "int" };
    let replacement = if norm.len() == 1 {
        format!("{snippet} as {target_ty}")
    } else {
        format!("({snippet}) as {target_ty}")
    };
    let fixed = format!("{}{}{}", &text[..start], replacement, &text[end..]);
    parse(&fixed).map_err(|_| QuickFixError::NoFix)
}

/// The mechanical phase-3 edit: `#[verifier::loop_isolation(false)]` at the
/// top of the verus region. Idempotent.
pub fn with_loop_isolation_disabled(program: &VerusProgram) -> VerusProgram {
    let mut out = program.clone();
    out.add_region_attr("#[verifier::loop_isolation(false)]");
    out
}
