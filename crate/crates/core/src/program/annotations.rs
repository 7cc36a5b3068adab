//! Annotation listing, anchor resolution, and single-annotation deletion.

use super::ast::*;
use super::render::render_item;

#[derive(Debug, Clone, thiserror::Error)]
#[error("annotation reference does not resolve: {0:?}")]
pub struct UnknownRef(pub AnnotationRef);

/// All ghost annotations in deterministic document order. A proof fn item is
/// listed as one `ProofFnItem` annotation followed by the annotations inside
/// its own body.
pub fn list_annotations(p: &VerusProgram) -> Vec<(AnnotationRef, GhostAnnotation)> {
    let mut out = Vec::new();
    for item in &p.items {
        if item.kind == ItemKind::ProofFn {
            let raw = render_item(item);
            let text = crate::lexer::normalize_snippet(&raw);
            let anchor = AnchorPath {
                function: item.name.clone(),
                steps: Vec::new(),
                site: Site::WholeItem,
                slot: 0,
            };
            let span = item_span(item);
            push(&mut out, AnnKind::ProofFnItem, anchor, text, raw, span);
        }
        let function = item.name.clone();
        for section in &item.clauses {
            let (kind, site) = match section.kind {
                ClauseKind::Requires => (AnnKind::SpecClause, Site::Requires),
                ClauseKind::Ensures => (AnnKind::SpecClause, Site::Ensures),
                ClauseKind::Decreases => (AnnKind::DecreasesClause, Site::FnDecreases),
                ClauseKind::Recommends => (AnnKind::SpecClause, Site::Recommends),
            };
            for (slot, clause) in section.clauses.iter().enumerate() {
                let anchor =
                    AnchorPath { function: function.clone(), steps: Vec::new(), site, slot };
                push(&mut out, kind, anchor, clause.norm_text(), clause.raw.clone(), clause.span);
            }
        }
        if let Some(body) = &item.body {
            walk_block(&mut out, body, &function, &mut Vec::new());
        }
    }
    out
}

fn push(
    out: &mut Vec<(AnnotationRef, GhostAnnotation)>,
    kind: AnnKind,
    anchor: AnchorPath,
    text: String,
    raw: String,
    span: Option<(usize, usize)>,
) {
    let ann = GhostAnnotation { kind, anchor: anchor.clone(), text, raw, span };
    out.push((AnnotationRef { kind, anchor }, ann));
}

fn item_span(item: &Item) -> Option<(usize, usize)> {
    let (start, mut end) = item.head.span?;
    for s in &item.clauses {
        for c in &s.clauses {
            if let Some((_, e)) = c.span {
                end = end.max(e);
            }
        }
    }
    if let Some(body) = &item.body {
        if let Some((_, e)) = block_span(body) {
            end = end.max(e);
        }
    }
    Some((start, end))
}

fn block_span(block: &Block) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for stmt in &block.stmts {
        let sp = match stmt {
            Stmt::Exec(r) | Stmt::Assert { text: r, .. } | Stmt::ProofBlock { text: r } => r.span,
            Stmt::If { head, then_block, else_block } => {
                let mut sp = join_span(head.span, block_span(then_block));
                if let Some(eb) = else_block {
                    sp = join_span(sp, block_span(eb));
                }
                sp
            }
            Stmt::Loop { head, invariants, decreases, body, .. } => {
                let mut sp = head.span;
                for r in invariants.iter().chain(decreases) {
                    sp = join_span(sp, r.span);
                }
                join_span(sp, block_span(body))
            }
        };
        best = join_span(best, sp);
    }
    best
}

fn join_span(a: Option<(usize, usize)>, b: Option<(usize, usize)>) -> Option<(usize, usize)> {
    match (a, b) {
        (Some((s1, e1)), Some((s2, e2))) => Some((s1.min(s2), e1.max(e2))),
        (x, None) => x,
        (None, y) => y,
    }
}

fn walk_block(
    out: &mut Vec<(AnnotationRef, GhostAnnotation)>,
    block: &Block,
    function: &Option<String>,
    steps: &mut Vec<Step>,
) {
    let mut exec_pos = 0usize;
    let mut ghost_slot = 0usize;
    for stmt in &block.stmts {
        match stmt {
            Stmt::Assert { text, has_by_block } => {
                let kind = if *has_by_block { AnnKind::AssertBy } else { AnnKind::Assert };
                let anchor = AnchorPath {
                    function: function.clone(),
                    steps: steps.clone(),
                    site: Site::StmtAt(exec_pos),
                    slot: ghost_slot,
                };
                push(out, kind, anchor, text.norm_text(), text.raw.clone(), text.span);
                ghost_slot += 1;
            }
            Stmt::ProofBlock { text } => {
                let anchor = AnchorPath {
                    function: function.clone(),
                    steps: steps.clone(),
                    site: Site::StmtAt(exec_pos),
                    slot: ghost_slot,
                };
                push(out, AnnKind::ProofBlock, anchor, text.norm_text(), text.raw.clone(), text.span);
                ghost_slot += 1;
            }
            Stmt::Exec(_) => {
                exec_pos += 1;
                ghost_slot = 0;
            }
            Stmt::If { then_block, else_block, .. } => {
                steps.push(Step::Exec(exec_pos));
                steps.push(Step::Then);
                walk_block(out, then_block, function, steps);
                steps.pop();
                if let Some(eb) = else_block {
                    steps.push(Step::Else);
                    walk_block(out, eb, function, steps);
                    steps.pop();
                }
                steps.pop();
                exec_pos += 1;
                ghost_slot = 0;
            }
            Stmt::Loop { invariants, decreases, body, .. } => {
                steps.push(Step::Exec(exec_pos));
                for (slot, inv) in invariants.iter().enumerate() {
                    let anchor = AnchorPath {
                        function: function.clone(),
                        steps: steps.clone(),
                        site: Site::Invariants,
                        slot,
                    };
                    push(out, AnnKind::LoopInvariant, anchor, inv.norm_text(), inv.raw.clone(), inv.span);
                }
                for (slot, d) in decreases.iter().enumerate() {
                    let anchor = AnchorPath {
                        function: function.clone(),
                        steps: steps.clone(),
                        site: Site::LoopDecreases,
                        slot,
                    };
                    push(out, AnnKind::DecreasesClause, anchor, d.norm_text(), d.raw.clone(), d.span);
                }
                steps.push(Step::Body);
                walk_block(out, body, function, steps);
                steps.pop();
                steps.pop();
                exec_pos += 1;
                ghost_slot = 0;
            }
        }
    }
}

enum NavTarget<'b> {
    Block(&'b mut Block),
    LoopStmt(&'b mut Stmt),
}

/// Descends `steps` from `block`. For loop sites (invariants/decreases) the
/// final `Exec` step addresses the loop statement itself; otherwise the steps
/// end at a block.
fn navigate<'b>(block: &'b mut Block, steps: &[Step], loop_terminal: bool) -> Option<NavTarget<'b>> {
    if steps.is_empty() {
        return if loop_terminal { None } else { Some(NavTarget::Block(block)) };
    }
    let Step::Exec(n) = steps[0] else { return None };
    let stmt = nth_exec_stmt_mut(block, n)?;
    if loop_terminal && steps.len() == 1 {
        return match stmt {
            Stmt::Loop { .. } => Some(NavTarget::LoopStmt(stmt)),
            _ => None,
        };
    }
    let dir = *steps.get(1)?;
    let next: &mut Block = match (stmt, dir) {
        (Stmt::If { then_block, .. }, Step::Then) => then_block,
        (Stmt::If { else_block, .. }, Step::Else) => else_block.as_mut()?,
        (Stmt::Loop { body, .. }, Step::Body) => body,
        _ => return None,
    };
    navigate(next, &steps[2..], loop_terminal)
}

fn nth_exec_stmt_mut(block: &mut Block, n: usize) -> Option<&mut Stmt> {
    let mut exec_pos = 0usize;
    for stmt in block.stmts.iter_mut() {
        if stmt.is_ghost() {
            continue;
        }
        if exec_pos == n {
            return Some(stmt);
        }
        exec_pos += 1;
    }
    None
}

/// Removes exactly the referenced ghost annotation. The result re-parses and
/// the executable skeleton is unchanged.
pub fn delete_annotation(p: &VerusProgram, r: &AnnotationRef) -> Result<VerusProgram, UnknownRef> {
    let mut out = p.clone();
    delete_in_place(&mut out, r)?;
    Ok(out)
}

pub(crate) fn delete_in_place(out: &mut VerusProgram, r: &AnnotationRef) -> Result<(), UnknownRef> {
    let unknown = || UnknownRef(r.clone());

    if r.anchor.site == Site::WholeItem {
        let before = out.items.len();
        let mut removed = false;
        out.items.retain(|it| {
            if !removed && it.kind == ItemKind::ProofFn && it.name == r.anchor.function {
                removed = true;
                false
            } else {
                true
            }
        });
        if out.items.len() == before {
            return Err(unknown());
        }
        return Ok(());
    }

    let item = out
        .items
        .iter_mut()
        .find(|it| it.name == r.anchor.function)
        .ok_or_else(unknown)?;

    match r.anchor.site {
        Site::Requires | Site::Ensures | Site::FnDecreases | Site::Recommends => {
            let kind = match r.anchor.site {
                Site::Requires => ClauseKind::Requires,
                Site::Ensures => ClauseKind::Ensures,
                Site::FnDecreases => ClauseKind::Decreases,
                _ => ClauseKind::Recommends,
            };
            let section = item.clauses.iter_mut().find(|s| s.kind == kind).ok_or_else(unknown)?;
            if r.anchor.slot >= section.clauses.len() {
                return Err(unknown());
            }
            section.clauses.remove(r.anchor.slot);
            item.clauses.retain(|s| !s.clauses.is_empty());
            Ok(())
        }
        Site::Invariants | Site::LoopDecreases => {
            let body = item.body.as_mut().ok_or_else(unknown)?;
            let target = navigate(body, &r.anchor.steps, true).ok_or_else(unknown)?;
            let NavTarget::LoopStmt(Stmt::Loop { invariants, decreases, .. }) = target else {
                return Err(unknown());
            };
            let list = if r.anchor.site == Site::Invariants { invariants } else { decreases };
            if r.anchor.slot >= list.len() {
                return Err(unknown());
            }
            list.remove(r.anchor.slot);
            Ok(())
        }
        Site::StmtAt(pos) => {
            let body = item.body.as_mut().ok_or_else(unknown)?;
            let target = navigate(body, &r.anchor.steps, false).ok_or_else(unknown)?;
            let NavTarget::Block(block) = target else {
                return Err(unknown());
            };
            let idx = ghost_stmt_index(block, pos, r.anchor.slot).ok_or_else(unknown)?;
            block.stmts.remove(idx);
            Ok(())
        }
        Site::WholeItem => unreachable!(),
    }
}

fn ghost_stmt_index(block: &Block, exec_pos_target: usize, slot: usize) -> Option<usize> {
    let mut exec_pos = 0usize;
    let mut ghost_slot = 0usize;
    for (idx, stmt) in block.stmts.iter().enumerate() {
        if stmt.is_ghost() {
            if exec_pos == exec_pos_target {
                if ghost_slot == slot {
                    return Some(idx);
                }
                ghost_slot += 1;
            }
        } else {
            exec_pos += 1;
            ghost_slot = 0;
        }
    }
    None
}
