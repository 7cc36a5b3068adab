//! Subset parser for Verus-annotated Rust.
//!
//! Covers fn items (with requires/ensures/decreases/recommends), while/for/loop
//! with invariant blocks, assert and assert-by, proof blocks, proof fn and
//! spec fn items, and if-nesting. Anything else is preserved as an opaque
//! balanced token run attached to the enclosing node. Inputs must contain
//! exactly one `verus! { ... }` region; text outside it is kept verbatim.

use super::ast::*;
use crate::lexer::{self, Token, TokenKind};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, thiserror::Error)]
#[error("parse error at {line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

pub fn parse(source: &str) -> Result<VerusProgram, ParseError> {
    let tokens = lexer::lex(source).map_err(|e| ParseError {
        line: e.line,
        col: e.col,
        message: e.message,
    })?;
    let sig: Vec<&Token> = tokens.iter().filter(|t| t.kind != TokenKind::Comment).collect();

    // locate the single `verus ! {` opener
    let mut opener = None;
    for w in 0..sig.len().saturating_sub(2) {
        if sig[w].is("verus") && sig[w + 1].is("!") && sig[w + 2].is("{") {
            if opener.is_some() {
                return Err(err_at(source, sig[w].start, "more than one verus! region"));
            }
            opener = Some(w);
        }
    }
    let opener = opener.ok_or_else(|| ParseError {
        line: 1,
        col: 1,
        message: "no verus! { .. } region found".into(),
    })?;

    // match the region's closing brace by depth over significant tokens
    let open_idx = opener + 2;
    let mut depth = 0usize;
    let mut close_idx = None;
    for (k, t) in sig.iter().enumerate().skip(open_idx) {
        match t.text.as_str() {
            "{" => depth += 1,
            "}" => {
                depth -= 1;
                if depth == 0 {
                    close_idx = Some(k);
                    break;
                }
            }
            _ => {}
        }
    }
    let close_idx = close_idx
        .ok_or_else(|| err_at(source, sig[opener].start, "unbalanced verus! region braces"))?;

    let prefix = source[..sig[opener].start].to_string();
    let suffix = source[sig[close_idx].end..].to_string();

    let region: Vec<Token> = sig[open_idx + 1..close_idx].iter().map(|t| (*t).clone()).collect();
    let mut cx = Cursor { src: source, toks: &region, pos: 0 };

    let mut region_attrs = Vec::new();
    loop {
        let save = cx.pos;
        if let Some(attr) = cx.try_region_attr() {
            region_attrs.push(attr);
        } else {
            cx.pos = save;
            break;
        }
    }

    let mut items = Vec::new();
    while !cx.at_end() {
        items.push(parse_item(&mut cx)?);
    }

    let mut hasher = Sha256::new();
    hasher.update(source.as_bytes());
    let source_digest = format!("{:x}", hasher.finalize());

    Ok(VerusProgram { prefix, region_attrs, items, suffix, source_digest })
}

struct Cursor<'a> {
    src: &'a str,
    toks: &'a [Token],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }
    fn peek_at(&self, off: usize) -> Option<&Token> {
        self.toks.get(self.pos + off)
    }
    fn bump(&mut self) -> &Token {
        let t = &self.toks[self.pos];
        self.pos += 1;
        t
    }
    fn eat(&mut self, s: &str) -> bool {
        if self.peek().map(|t| t.is(s)).unwrap_or(false) {
            self.pos += 1;
            true
        } else {
            false
        }
    }
    fn run(&self, from: usize, to: usize) -> TokenRun {
        TokenRun::from_tokens(self.src, &self.toks[from..to])
    }
    fn error(&self, message: impl Into<String>) -> ParseError {
        let at = self
            .peek()
            .map(|t| t.start)
            .or_else(|| self.toks.last().map(|t| t.end))
            .unwrap_or(0);
        err_at(self.src, at, message)
    }

    /// `#[verifier::loop_isolation(..)]` style region attribute, or `#![..]`.
    fn try_region_attr(&mut self) -> Option<TokenRun> {
        let start = self.pos;
        if !self.peek()?.is("#") {
            return None;
        }
        let bang = self.peek_at(1)?.is("!");
        let bracket_at = if bang { 2 } else { 1 };
        if !self.peek_at(bracket_at)?.is("[") {
            return None;
        }
        if !bang {
            // only the global loop_isolation attribute is treated as
            // region-level; other outer attributes belong to the next item
            let inner = self.peek_at(bracket_at + 1)?;
            if !inner.is("verifier") || !self.peek_at(bracket_at + 2)?.is("::") {
                return None;
            }
            if !self.peek_at(bracket_at + 3)?.is("loop_isolation") {
                return None;
            }
        }
        // consume to matching `]`
        let mut k = self.pos + bracket_at;
        let mut depth = 0usize;
        while k < self.toks.len() {
            match self.toks[k].text.as_str() {
                "[" => depth += 1,
                "]" => {
                    depth -= 1;
                    if depth == 0 {
                        let run = self.run(start, k + 1);
                        self.pos = k + 1;
                        return Some(run);
                    }
                }
                _ => {}
            }
            k += 1;
        }
        None
    }
}

fn err_at(src: &str, pos: usize, message: impl Into<String>) -> ParseError {
    let mut line = 1;
    let mut col = 1;
    for (i, c) in src.char_indices() {
        if i >= pos {
            break;
        }
        if c == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
    }
    ParseError { line, col, message: message.into() }
}

const CLAUSE_KEYWORDS: &[(&str, ClauseKind)] = &[
    ("requires", ClauseKind::Requires),
    ("ensures", ClauseKind::Ensures),
    ("decreases", ClauseKind::Decreases),
    ("recommends", ClauseKind::Recommends),
];

fn clause_kind(tok: &Token) -> Option<ClauseKind> {
    CLAUSE_KEYWORDS.iter().find(|(k, _)| tok.is(k)).map(|(_, v)| *v)
}

fn parse_item(cx: &mut Cursor) -> Result<Item, ParseError> {
    let start = cx.pos;

    // leading attributes
    while cx.peek().map(|t| t.is("#")).unwrap_or(false) {
        skip_attr(cx)?;
    }
    // visibility
    if cx.peek().map(|t| t.is("pub")).unwrap_or(false) {
        cx.bump();
        if cx.peek().map(|t| t.is("(")).unwrap_or(false) {
            skip_group(cx, "(", ")")?;
        }
    }
    // mode keywords
    let mut mode: Option<&str> = None;
    loop {
        match cx.peek().map(|t| t.text.as_str()) {
            Some("open") | Some("closed") | Some("uninterp") | Some("broadcast") => {
                cx.bump();
            }
            Some("spec") => {
                mode = Some("spec");
                cx.bump();
            }
            Some("proof") if cx.peek_at(1).map(|t| t.is("fn")).unwrap_or(false) => {
                mode = Some("proof");
                cx.bump();
            }
            Some("exec") if cx.peek_at(1).map(|t| t.is("fn")).unwrap_or(false) => {
                cx.bump();
            }
            _ => break,
        }
    }

    if cx.peek().map(|t| t.is("fn")).unwrap_or(false) {
        return parse_fn_item(cx, start, mode);
    }
    if cx.peek().map(|t| t.is("const")).unwrap_or(false) {
        let (name, end) = skip_simple_item(cx)?;
        return Ok(Item {
            kind: ItemKind::Const,
            name,
            head: cx.run(start, end),
            clauses: Vec::new(),
            body: None,
        });
    }
    // opaque item: everything up to a top-level `;` or past one balanced `{..}`
    let (name, end) = skip_simple_item(cx)?;
    Ok(Item { kind: ItemKind::Other, name, head: cx.run(start, end), clauses: Vec::new(), body: None })
}

fn skip_attr(cx: &mut Cursor) -> Result<(), ParseError> {
    cx.bump(); // '#'
    if cx.peek().map(|t| t.is("!")).unwrap_or(false) {
        cx.bump();
    }
    if !cx.peek().map(|t| t.is("[")).unwrap_or(false) {
        return Err(cx.error("expected `[` after `#`"));
    }
    skip_group(cx, "[", "]")
}

fn skip_group(cx: &mut Cursor, open: &str, close: &str) -> Result<(), ParseError> {
    if !cx.peek().map(|t| t.is(open)).unwrap_or(false) {
        return Err(cx.error(format!("expected `{open}`")));
    }
    let mut depth = 0usize;
    while let Some(t) = cx.peek() {
        if t.is(open) {
            depth += 1;
        } else if t.is(close) {
            depth -= 1;
            cx.bump();
            if depth == 0 {
                return Ok(());
            }
            continue;
        }
        cx.bump();
    }
    Err(cx.error(format!("unbalanced `{open}{close}`")))
}

/// Consumes a non-fn item; returns (name-if-obvious, end position).
fn skip_simple_item(cx: &mut Cursor) -> Result<(Option<String>, usize), ParseError> {
    let mut name = None;
    let mut seen_kw = false;
    while let Some(t) = cx.peek() {
        if t.is(";") {
            cx.bump();
            return Ok((name, cx.pos));
        }
        if t.is("{") {
            skip_group(cx, "{", "}")?;
            return Ok((name, cx.pos));
        }
        if t.is("(") {
            skip_group(cx, "(", ")")?;
            continue;
        }
        if t.is("[") {
            skip_group(cx, "[", "]")?;
            continue;
        }
        if !seen_kw && t.kind == TokenKind::Ident {
            seen_kw = true;
        } else if seen_kw && name.is_none() && t.kind == TokenKind::Ident {
            name = Some(t.text.clone());
        }
        cx.bump();
    }
    Err(cx.error("unterminated item"))
}

fn parse_fn_item(cx: &mut Cursor, start: usize, mode: Option<&str>) -> Result<Item, ParseError> {
    cx.bump(); // fn
    let name = match cx.peek() {
        Some(t) if t.kind == TokenKind::Ident => {
            let n = t.text.clone();
            cx.bump();
            n
        }
        _ => return Err(cx.error("expected function name")),
    };
    // generics
    if cx.peek().map(|t| t.is("<")).unwrap_or(false) {
        skip_angles(cx)?;
    }
    // parameters
    skip_group(cx, "(", ")")?;
    // return type: tokens until clause keyword, `{`, or `;`
    if cx.eat("->") {
        while let Some(t) = cx.peek() {
            if t.is("{") || t.is(";") || clause_kind(t).is_some() {
                break;
            }
            if t.is("(") {
                skip_group(cx, "(", ")")?;
                continue;
            }
            if t.is("<") {
                skip_angles(cx)?;
                continue;
            }
            cx.bump();
        }
    }
    let head = cx.run(start, cx.pos);

    // clause sections
    let mut clauses = Vec::new();
    while let Some(kind) = cx.peek().and_then(clause_kind) {
        cx.bump();
        let list = parse_clause_list(cx)?;
        clauses.push(ClauseSection { kind, clauses: list });
    }

    let body = if cx.eat(";") {
        None
    } else if cx.peek().map(|t| t.is("{")).unwrap_or(false) {
        Some(parse_block(cx)?)
    } else {
        return Err(cx.error(format!("expected `{{` or `;` after signature of `{name}`")));
    };

    let kind = match mode {
        Some("spec") => ItemKind::SpecFn,
        Some("proof") => ItemKind::ProofFn,
        _ => ItemKind::ExecFn,
    };
    Ok(Item { kind, name: Some(name), head, clauses, body })
}

/// Comma-separated expression list ending at the next clause keyword, a
/// top-level `{` or `;`. Commas inside quantifier parameter pipes are part of
/// the clause. Trailing commas are canonicalized away.
fn parse_clause_list(cx: &mut Cursor) -> Result<Vec<TokenRun>, ParseError> {
    let mut out = Vec::new();
    let mut item_start = cx.pos;
    let mut depth = 0usize;
    loop {
        let Some(t) = cx.peek() else {
            return Err(cx.error("unterminated clause list"));
        };
        if depth == 0 {
            if t.is("{") || t.is(";") || clause_kind(t).is_some() {
                if cx.pos > item_start {
                    out.push(cx.run(item_start, cx.pos));
                }
                return Ok(out);
            }
            if t.is(",") {
                if cx.pos > item_start {
                    out.push(cx.run(item_start, cx.pos));
                }
                cx.bump();
                item_start = cx.pos;
                continue;
            }
            if is_quantifier(t) && cx.peek_at(1).map(|n| n.is("|")).unwrap_or(false) {
                cx.bump(); // quantifier
                cx.bump(); // opening pipe
                while let Some(p) = cx.peek() {
                    let done = p.is("|");
                    cx.bump();
                    if done {
                        break;
                    }
                }
                continue;
            }
        }
        match t.text.as_str() {
            "(" | "[" => depth += 1,
            ")" | "]" => {
                if depth == 0 {
                    return Err(cx.error("unbalanced bracket in clause list"));
                }
                depth -= 1;
            }
            _ => {}
        }
        cx.bump();
    }
}

fn is_quantifier(t: &Token) -> bool {
    t.is("forall") || t.is("exists") || t.is("choose")
}

fn parse_block(cx: &mut Cursor) -> Result<Block, ParseError> {
    if !cx.eat("{") {
        return Err(cx.error("expected `{`"));
    }
    let mut stmts = Vec::new();
    loop {
        let Some(t) = cx.peek() else {
            return Err(cx.error("unterminated block"));
        };
        if t.is("}") {
            cx.bump();
            return Ok(Block { stmts });
        }
        stmts.push(parse_stmt(cx)?);
    }
}

fn parse_stmt(cx: &mut Cursor) -> Result<Stmt, ParseError> {
    let t = cx.peek().expect("caller checked");
    match t.text.as_str() {
        "assert" => parse_assert(cx),
        "proof" if cx.peek_at(1).map(|n| n.is("{")).unwrap_or(false) => {
            let start = cx.pos;
            cx.bump();
            skip_group(cx, "{", "}")?;
            cx.eat(";");
            Ok(Stmt::ProofBlock { text: cx.run(start, cx.pos) })
        }
        "while" | "for" | "loop" => parse_loop(cx),
        "if" => parse_if(cx),
        _ => parse_exec_stmt(cx),
    }
}

fn parse_assert(cx: &mut Cursor) -> Result<Stmt, ParseError> {
    let start = cx.pos;
    cx.bump(); // assert
    let mut has_by_block = false;
    // scan to the statement end; a top-level `{..}` is a by-block
    let mut depth = 0usize;
    loop {
        let Some(t) = cx.peek() else { break };
        if depth == 0 {
            if t.is(";") {
                cx.bump();
                break;
            }
            if t.is("{") {
                has_by_block = true;
                skip_group(cx, "{", "}")?;
                cx.eat(";");
                break;
            }
            if t.is("}") {
                // enclosing block closes; assert had no semicolon
                break;
            }
        }
        match t.text.as_str() {
            "(" | "[" => depth += 1,
            ")" | "]" => {
                if depth == 0 {
                    return Err(cx.error("unbalanced bracket in assert"));
                }
                depth -= 1;
            }
            _ => {}
        }
        cx.bump();
    }
    Ok(Stmt::Assert { text: cx.run(start, cx.pos), has_by_block })
}

fn parse_loop(cx: &mut Cursor) -> Result<Stmt, ParseError> {
    let start = cx.pos;
    let kind = match cx.bump().text.as_str() {
        "while" => LoopKind::While,
        "for" => LoopKind::For,
        _ => LoopKind::Loop,
    };
    // header up to `invariant`/`decreases` or the body brace
    let mut depth = 0usize;
    loop {
        let Some(t) = cx.peek() else {
            return Err(cx.error("unterminated loop header"));
        };
        if depth == 0 && (t.is("{") || t.is("invariant") || t.is("decreases")) {
            break;
        }
        match t.text.as_str() {
            "(" | "[" => depth += 1,
            ")" | "]" => depth = depth.saturating_sub(1),
            _ => {}
        }
        cx.bump();
    }
    let head = cx.run(start, cx.pos);

    let mut invariants = Vec::new();
    let mut decreases = Vec::new();
    loop {
        if cx.eat("invariant") {
            invariants.extend(parse_clause_list(cx)?);
        } else if cx.eat("decreases") {
            decreases.extend(parse_clause_list(cx)?);
        } else {
            break;
        }
    }
    let body = parse_block(cx)?;
    Ok(Stmt::Loop { kind, head, invariants, decreases, body })
}

fn parse_if(cx: &mut Cursor) -> Result<Stmt, ParseError> {
    let start = cx.pos;
    cx.bump(); // if
    let mut depth = 0usize;
    loop {
        let Some(t) = cx.peek() else {
            return Err(cx.error("unterminated if condition"));
        };
        if depth == 0 && t.is("{") {
            break;
        }
        match t.text.as_str() {
            "(" | "[" => depth += 1,
            ")" | "]" => depth = depth.saturating_sub(1),
            _ => {}
        }
        cx.bump();
    }
    let head = cx.run(start, cx.pos);
    let then_block = parse_block(cx)?;
    let else_block = if cx.eat("else") {
        if cx.peek().map(|t| t.is("if")).unwrap_or(false) {
            let nested = parse_if(cx)?;
            Some(Block { stmts: vec![nested] })
        } else {
            Some(parse_block(cx)?)
        }
    } else {
        None
    };
    Ok(Stmt::If { head, then_block, else_block })
}

/// Opaque executable statement. Statements led by `match`/`unsafe`/`{` end at
/// the close of their block; everything else runs to a top-level `;` (or the
/// end of the enclosing block, for trailing expressions).
fn parse_exec_stmt(cx: &mut Cursor) -> Result<Stmt, ParseError> {
    let start = cx.pos;
    let leading = cx.peek().expect("caller checked").text.clone();
    if leading == "{" {
        skip_group(cx, "{", "}")?;
        cx.eat(";");
        return Ok(Stmt::Exec(cx.run(start, cx.pos)));
    }
    if leading == "match" || leading == "unsafe" {
        while let Some(t) = cx.peek() {
            if t.is("{") {
                break;
            }
            cx.bump();
        }
        skip_group(cx, "{", "}")?;
        cx.eat(";");
        return Ok(Stmt::Exec(cx.run(start, cx.pos)));
    }
    let mut depth = 0usize;
    loop {
        let Some(t) = cx.peek() else { break };
        if depth == 0 {
            if t.is(";") {
                cx.bump();
                break;
            }
            if t.is("}") {
                break; // trailing expression
            }
        }
        match t.text.as_str() {
            "(" | "[" | "{" => depth += 1,
            ")" | "]" | "}" => {
                if depth == 0 {
                    return Err(cx.error("unbalanced bracket in statement"));
                }
                depth -= 1;
            }
            _ => {}
        }
        cx.bump();
    }
    if cx.pos == start {
        return Err(cx.error("empty statement"));
    }
    Ok(Stmt::Exec(cx.run(start, cx.pos)))
}

/// Angle-bracket matcher for generics; splits `>>` shift tokens.
fn skip_angles(cx: &mut Cursor) -> Result<(), ParseError> {
    let mut depth = 0i32;
    while let Some(t) = cx.peek() {
        match t.text.as_str() {
            "<" => depth += 1,
            ">" => depth -= 1,
            ">>" => depth -= 2,
            "<<" => depth += 2,
            _ => {}
        }
        cx.bump();
        if depth <= 0 {
            return Ok(());
        }
    }
    Err(cx.error("unbalanced generics"))
}
