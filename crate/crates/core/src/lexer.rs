//! Rust/Verus token scanner.
//!
//! Produces a flat token stream with byte spans. Comments are kept as tokens
//! (so spans stay contiguous) but are excluded from normalized views; all
//! structural comparison in this crate happens over normalized token texts.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Ident,
    Number,
    Str,
    Char,
    Lifetime,
    Punct,
    Comment,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub start: usize,
    pub end: usize,
}

impl Token {
    pub fn is(&self, s: &str) -> bool {
        self.text == s
    }
}

#[derive(Debug, Clone, thiserror::Error)]
#[error("lex error at {line}:{col}: {message}")]
pub struct LexError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

/// Multi-character operators, longest first so maximal munch works.
const OPS: &[&str] = &[
    "<==>", "=~~=", "==>", "&&&", "|||", "..=", "=~=", "<<=", ">>=", "->", "=>", "::", "==", "!=",
    "<=", ">=", "&&", "||", "<<", ">>", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "..",
];

fn line_col(src: &str, pos: usize) -> (usize, usize) {
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
    (line, col)
}

fn err(src: &str, pos: usize, message: impl Into<String>) -> LexError {
    let (line, col) = line_col(src, pos);
    LexError { line, col, message: message.into() }
}

pub fn lex(src: &str) -> Result<Vec<Token>, LexError> {
    let bytes = src.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        // line comment
        if src[i..].starts_with("//") {
            let end = src[i..].find('\n').map(|n| i + n).unwrap_or(bytes.len());
            tokens.push(tok(TokenKind::Comment, src, start, end));
            i = end;
            continue;
        }
        // block comment, possibly nested
        if src[i..].starts_with("/*") {
            let mut depth = 1;
            let mut j = i + 2;
            while j < bytes.len() && depth > 0 {
                if src[j..].starts_with("/*") {
                    depth += 1;
                    j += 2;
                } else if src[j..].starts_with("*/") {
                    depth -= 1;
                    j += 2;
                } else {
                    j += 1;
                }
            }
            if depth > 0 {
                return Err(err(src, start, "unterminated block comment"));
            }
            tokens.push(tok(TokenKind::Comment, src, start, j));
            i = j;
            continue;
        }
        // raw string r"..." / r#"..."#
        if (c == 'r' || c == 'b') && is_raw_string_start(src, i) {
            let j = scan_raw_string(src, i).ok_or_else(|| err(src, start, "unterminated raw string"))?;
            tokens.push(tok(TokenKind::Str, src, start, j));
            i = j;
            continue;
        }
        // byte string b"..."
        if c == 'b' && i + 1 < bytes.len() && bytes[i + 1] as char == '"' {
            let j = scan_string(src, i + 1).ok_or_else(|| err(src, start, "unterminated string"))?;
            tokens.push(tok(TokenKind::Str, src, start, j));
            i = j;
            continue;
        }
        if c == '"' {
            let j = scan_string(src, i).ok_or_else(|| err(src, start, "unterminated string"))?;
            tokens.push(tok(TokenKind::Str, src, start, j));
            i = j;
            continue;
        }
        // char literal vs lifetime
        if c == '\'' {
            if let Some(j) = scan_char(src, i) {
                tokens.push(tok(TokenKind::Char, src, start, j));
                i = j;
                continue;
            }
            // lifetime: 'ident
            let mut j = i + 1;
            while j < bytes.len() && is_ident_continue(bytes[j] as char) {
                j += 1;
            }
            if j == i + 1 {
                return Err(err(src, start, "stray single quote"));
            }
            tokens.push(tok(TokenKind::Lifetime, src, start, j));
            i = j;
            continue;
        }
        if is_ident_start(c) {
            let mut j = i + 1;
            while j < bytes.len() && is_ident_continue(bytes[j] as char) {
                j += 1;
            }
            tokens.push(tok(TokenKind::Ident, src, start, j));
            i = j;
            continue;
        }
        if c.is_ascii_digit() {
            let j = scan_number(src, i);
            tokens.push(tok(TokenKind::Number, src, start, j));
            i = j;
            continue;
        }
        // operators, maximal munch
        if let Some(op) = OPS.iter().find(|op| src[i..].starts_with(**op)) {
            tokens.push(tok(TokenKind::Punct, src, start, i + op.len()));
            i += op.len();
            continue;
        }
        if c.is_ascii_punctuation() {
            tokens.push(tok(TokenKind::Punct, src, start, i + 1));
            i += 1;
            continue;
        }
        return Err(err(src, start, format!("unexpected character {c:?}")));
    }
    Ok(tokens)
}

fn tok(kind: TokenKind, src: &str, start: usize, end: usize) -> Token {
    Token { kind, text: src[start..end].to_string(), start, end }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn is_raw_string_start(src: &str, i: usize) -> bool {
    let rest = &src[i + 1..];
    rest.starts_with('"') && src[i..].starts_with('r')
        || rest.starts_with('#') && src[i..].starts_with('r')
        || src[i..].starts_with("br\"")
        || src[i..].starts_with("br#")
}

fn scan_raw_string(src: &str, i: usize) -> Option<usize> {
    let mut j = i;
    while src[j..].starts_with('b') || src[j..].starts_with('r') {
        j += 1;
    }
    let mut hashes = 0;
    while src[j..].starts_with('#') {
        hashes += 1;
        j += 1;
    }
    if !src[j..].starts_with('"') {
        return None;
    }
    j += 1;
    let closer = format!("\"{}", "#".repeat(hashes));
    src[j..].find(&closer).map(|n| j + n + closer.len())
}

fn scan_string(src: &str, quote_pos: usize) -> Option<usize> {
    let bytes = src.as_bytes();
    let mut j = quote_pos + 1;
    while j < bytes.len() {
        match bytes[j] as char {
            '\\' => j += 2,
            '"' => return Some(j + 1),
            _ => j += 1,
        }
    }
    None
}

/// Returns the end of a char literal starting at `i`, or None when the quote
/// opens a lifetime instead.
fn scan_char(src: &str, i: usize) -> Option<usize> {
    let bytes = src.as_bytes();
    let mut j = i + 1;
    if j >= bytes.len() {
        return None;
    }
    if bytes[j] as char == '\\' {
        j += 2;
        // escapes like \u{1F600}
        if j <= bytes.len() && j >= 1 && bytes[j - 1] as char == '{' {
            while j < bytes.len() && bytes[j] as char != '}' {
                j += 1;
            }
            j += 1;
        }
    } else if bytes[j] as char == '\'' {
        return None;
    } else {
        j += 1;
    }
    if j < bytes.len() && bytes[j] as char == '\'' {
        Some(j + 1)
    } else {
        None
    }
}

fn scan_number(src: &str, i: usize) -> usize {
    let bytes = src.as_bytes();
    let mut j = i;
    if src[i..].starts_with("0x") || src[i..].starts_with("0b") || src[i..].starts_with("0o") {
        j += 2;
        while j < bytes.len() && (is_ident_continue(bytes[j] as char)) {
            j += 1;
        }
        return j;
    }
    while j < bytes.len() && (bytes[j].is_ascii_digit() || bytes[j] == b'_') {
        j += 1;
    }
    // fractional part, but never eat `..` (range) or method calls on literals
    if j + 1 < bytes.len() && bytes[j] == b'.' && bytes[j + 1].is_ascii_digit() {
        j += 1;
        while j < bytes.len() && (bytes[j].is_ascii_digit() || bytes[j] == b'_') {
            j += 1;
        }
    }
    // type suffix (u32, usize, f64, ...)
    while j < bytes.len() && is_ident_continue(bytes[j] as char) {
        j += 1;
    }
    j
}

/// Token texts with comments dropped: the normalized view used for equality,
/// hashing, and keyword scanning throughout the crate.
pub fn normalized_texts(tokens: &[Token]) -> Vec<String> {
    tokens
        .iter()
        .filter(|t| t.kind != TokenKind::Comment)
        .map(|t| t.text.clone())
        .collect()
}

/// Normalize a source snippet to a canonical single-line form.
pub fn normalize_snippet(src: &str) -> String {
    match lex(src) {
        Ok(tokens) => normalized_texts(&tokens).join(" "),
        Err(_) => src.split_whitespace().collect::<Vec<_>>().join(" "),
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(src: &str) -> Vec<String> {
        normalized_texts(&lex(src).unwrap())
    }

    #[test]
    fn operators_munch_longest() {
        assert_eq!(texts("a ==> b"), vec!["a", "==>", "b"]);
        assert_eq!(texts("a <==> b"), vec!["a", "<==>", "b"]);
        assert_eq!(texts("0..n"), vec!["0", "..", "n"]);
        assert_eq!(texts("x >>= 1"), vec!["x", ">>=", "1"]);
    }

    #[test]
    fn numbers_with_separators_and_suffixes() {
        assert_eq!(texts("0x8000_0000"), vec!["0x8000_0000"]);
        assert_eq!(texts("1_000usize"), vec!["1_000usize"]);
        assert_eq!(texts("3.5 + 1."), vec!["3.5", "+", "1", "."]);
    }

    #[test]
    fn comments_are_dropped_from_normalized_view() {
        assert_eq!(texts("a /* hi */ b // tail"), vec!["a", "b"]);
        assert_eq!(texts("/* outer /* inner */ still */ x"), vec!["x"]);
    }

    #[test]
    fn char_vs_lifetime() {
        assert_eq!(texts("'a'"), vec!["'a'"]);
        assert_eq!(texts("&'a str"), vec!["&", "'a", "str"]);
        assert_eq!(texts("'\\n'"), vec!["'\\n'"]);
    }

    #[test]
    fn strings_hide_keywords() {
        let toks = lex("let s = \"assert(invariant)\";").unwrap();
        let strs: Vec<_> = toks.iter().filter(|t| t.kind == TokenKind::Str).collect();
        assert_eq!(strs.len(), 1);
    }

    #[test]
    fn unterminated_comment_errors() {
        assert!(lex("/* open").is_err());
    }
}
