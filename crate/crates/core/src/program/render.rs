//! Canonical rendering of programs back to source text.
//!
//! Leaf token runs are emitted verbatim (original bytes, comments included);
//! the structural glue (clause keywords, commas, braces, indentation) is
//! canonical. `parse(render(parse(t)))` equals `parse(t)` for every supported
//! input.

use super::ast::*;

const INDENT: &str = "    ";

pub fn render(p: &VerusProgram) -> String {
    let mut out = String::new();
    out.push_str(&p.prefix);
    if !p.prefix.ends_with('\n') && !p.prefix.is_empty() {
        out.push('\n');
    }
    out.push_str("verus! {\n\n");
    for attr in &p.region_attrs {
        out.push_str(&attr.raw);
        out.push('\n');
    }
    if !p.region_attrs.is_empty() {
        out.push('\n');
    }
    for item in &p.items {
        out.push_str(&render_item(item));
        out.push('\n');
    }
    out.push_str("} // verus!\n");
    out.push_str(&p.suffix);
    out
}

pub fn render_item(item: &Item) -> String {
    let mut out = String::new();
    out.push_str(&item.head.raw);
    out.push('\n');
    for section in &item.clauses {
        out.push_str(INDENT);
        out.push_str(section.kind.keyword());
        out.push('\n');
        for clause in &section.clauses {
            out.push_str(INDENT);
            out.push_str(INDENT);
            out.push_str(&clause.raw);
            out.push_str(",\n");
        }
    }
    match &item.body {
        Some(block) => {
            out.push_str("{\n");
            render_block(&mut out, block, 1);
            out.push_str("}\n");
        }
        None => {
            // body-less fn; Const/Other carry their `;` in the head
            if matches!(item.kind, ItemKind::ExecFn | ItemKind::SpecFn | ItemKind::ProofFn) {
                out.push_str(";\n");
            }
        }
    }
    out
}

fn push_indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str(INDENT);
    }
}

fn render_block(out: &mut String, block: &Block, depth: usize) {
    for stmt in &block.stmts {
        render_stmt(out, stmt, depth);
    }
}

fn render_stmt(out: &mut String, stmt: &Stmt, depth: usize) {
    match stmt {
        Stmt::Exec(run) | Stmt::Assert { text: run, .. } | Stmt::ProofBlock { text: run } => {
            push_indent(out, depth);
            out.push_str(&run.raw);
            out.push('\n');
        }
        Stmt::If { head, then_block, else_block } => {
            push_indent(out, depth);
            render_if(out, head, then_block, else_block, depth);
            out.push('\n');
        }
        Stmt::Loop { head, invariants, decreases, body, .. } => {
            push_indent(out, depth);
            out.push_str(&head.raw);
            if invariants.is_empty() && decreases.is_empty() {
                out.push_str(" {\n");
            } else {
                out.push('\n');
                if !invariants.is_empty() {
                    push_indent(out, depth + 1);
                    out.push_str("invariant\n");
                    for inv in invariants {
                        push_indent(out, depth + 2);
                        out.push_str(&inv.raw);
                        out.push_str(",\n");
                    }
                }
                if !decreases.is_empty() {
                    push_indent(out, depth + 1);
                    out.push_str("decreases\n");
                    for d in decreases {
                        push_indent(out, depth + 2);
                        out.push_str(&d.raw);
                        out.push_str(",\n");
                    }
                }
                push_indent(out, depth);
                out.push_str("{\n");
            }
            render_block(out, body, depth + 1);
            push_indent(out, depth);
            out.push_str("}\n");
        }
    }
}

/// `else if` chains render without the wrapping braces they were parsed into.
fn render_if(out: &mut String, head: &TokenRun, then_block: &Block, else_block: &Option<Block>, depth: usize) {
    out.push_str(&head.raw);
    out.push_str(" {\n");
    render_block(out, then_block, depth + 1);
    push_indent(out, depth);
    out.push('}');
    if let Some(else_b) = else_block {
        out.push_str(" else ");
        if let [Stmt::If { head, then_block, else_block }] = else_b.stmts.as_slice() {
            render_if(out, head, then_block, else_block, depth);
        } else {
            out.push_str("{\n");
            render_block(out, else_b, depth + 1);
            push_indent(out, depth);
            out.push('}');
        }
    }
}

/// Rendering of the executable skeleton only: ghost items, spec clauses,
/// invariants, asserts, and proof blocks are all dropped.
pub fn render_erased(p: &VerusProgram) -> String {
    let mut out = String::new();
    out.push_str(&p.prefix);
    if !p.prefix.ends_with('\n') && !p.prefix.is_empty() {
        out.push('\n');
    }
    out.push_str("verus! {\n\n");
    for item in &p.items {
        if item.is_ghost() {
            continue;
        }
        out.push_str(&item.head.raw);
        out.push('\n');
        match &item.body {
            Some(block) => {
                out.push_str("{\n");
                render_block_erased(&mut out, block, 1);
                out.push_str("}\n");
            }
            None => {
                if item.kind == ItemKind::ExecFn {
                    out.push_str(";\n");
                }
            }
        }
        out.push('\n');
    }
    out.push_str("} // verus!\n");
    out.push_str(&p.suffix);
    out
}

fn render_block_erased(out: &mut String, block: &Block, depth: usize) {
    for stmt in &block.stmts {
        match stmt {
            Stmt::Assert { .. } | Stmt::ProofBlock { .. } => {}
            Stmt::Exec(run) => {
                push_indent(out, depth);
                out.push_str(&run.raw);
                out.push('\n');
            }
            Stmt::If { head, then_block, else_block } => {
                push_indent(out, depth);
                render_if_erased(out, head, then_block, else_block, depth);
                out.push('\n');
            }
            Stmt::Loop { head, body, .. } => {
                push_indent(out, depth);
                out.push_str(&head.raw);
                out.push_str(" {\n");
                render_block_erased(out, body, depth + 1);
                push_indent(out, depth);
                out.push_str("}\n");
            }
        }
    }
}

fn render_if_erased(out: &mut String, head: &TokenRun, then_block: &Block, else_block: &Option<Block>, depth: usize) {
    out.push_str(&head.raw);
    out.push_str(" {\n");
    render_block_erased(out, then_block, depth + 1);
    push_indent(out, depth);
    out.push('}');
    if let Some(else_b) = else_block {
        out.push_str(" else ");
        if let [Stmt::If { head, then_block, else_block }] = else_b.stmts.as_slice() {
            render_if_erased(out, head, then_block, else_block, depth);
        } else {
            out.push_str("{\n");
            render_block_erased(out, else_b, depth + 1);
            push_indent(out, depth);
            out.push('}');
        }
    }
}
