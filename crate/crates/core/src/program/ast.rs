//! Data model for parsed Verus programs.
//!
//! The tree keeps structure only at ghost-expression granularity: function
//! items with their spec clauses, loops with invariant lists, ghost statements
//! (assert / assert-by / proof blocks), and `if` nesting so loops inside
//! branches stay addressable. Everything else is an opaque balanced token run.

use crate::lexer::{self, Token};
use serde::{Deserialize, Serialize};

/// A contiguous run of source tokens. `raw` preserves the original bytes
/// (including comments); `norm` is the comment-free token-text view used for
/// every comparison.
#[derive(Debug, Clone)]
pub struct TokenRun {
    pub raw: String,
    pub norm: Vec<String>,
    /// Byte range in the source this run was parsed from; None for runs
    /// synthesized by transformations. Refreshed by a render/parse cycle.
    pub span: Option<(usize, usize)>,
}

impl TokenRun {
    pub fn from_tokens(src: &str, tokens: &[Token]) -> Self {
        if tokens.is_empty() {
            return TokenRun { raw: String::new(), norm: Vec::new(), span: None };
        }
        let start = tokens[0].start;
        let end = tokens[tokens.len() - 1].end;
        TokenRun {
            raw: src[start..end].to_string(),
            norm: lexer::normalized_texts(tokens),
            span: Some((start, end)),
        }
    }

    pub fn from_source(text: &str) -> Self {
        TokenRun { raw: text.to_string(), norm: lexer::normalize_snippet(text).split(' ').filter(|s| !s.is_empty()).map(String::from).collect(), span: None }
    }

    pub fn norm_text(&self) -> String {
        self.norm.join(" ")
    }

    pub fn is_empty(&self) -> bool {
        self.norm.is_empty()
    }
}

impl PartialEq for TokenRun {
    fn eq(&self, other: &Self) -> bool {
        self.norm == other.norm
    }
}
impl Eq for TokenRun {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ItemKind {
    ExecFn,
    SpecFn,
    ProofFn,
    Const,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClauseKind {
    Requires,
    Ensures,
    Decreases,
    Recommends,
}

impl ClauseKind {
    pub fn keyword(self) -> &'static str {
        match self {
            ClauseKind::Requires => "requires",
            ClauseKind::Ensures => "ensures",
            ClauseKind::Decreases => "decreases",
            ClauseKind::Recommends => "recommends",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClauseSection {
    pub kind: ClauseKind,
    pub clauses: Vec<TokenRun>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Item {
    pub kind: ItemKind,
    /// Function or const name when the item has one.
    pub name: Option<String>,
    /// Attributes, visibility, mode keywords, `fn name(params) -> ret` for
    /// functions; the entire item for Const/Other.
    pub head: TokenRun,
    pub clauses: Vec<ClauseSection>,
    pub body: Option<Block>,
}

impl Item {
    pub fn is_ghost(&self) -> bool {
        matches!(self.kind, ItemKind::SpecFn | ItemKind::ProofFn)
    }

    pub fn clause_section(&self, kind: ClauseKind) -> Option<&ClauseSection> {
        self.clauses.iter().find(|s| s.kind == kind)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Block {
    pub stmts: Vec<Stmt>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LoopKind {
    While,
    For,
    Loop,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stmt {
    /// Opaque executable statement (let/assign/call/return/match/...).
    Exec(TokenRun),
    /// `if cond { .. } else { .. }`; else-if chains nest an If inside the
    /// else block.
    If { head: TokenRun, then_block: Block, else_block: Option<Block> },
    Loop {
        kind: LoopKind,
        head: TokenRun,
        invariants: Vec<TokenRun>,
        decreases: Vec<TokenRun>,
        body: Block,
    },
    /// `assert(..);` or `assert(..) by { .. };` — whole statement, raw.
    Assert { text: TokenRun, has_by_block: bool },
    /// `proof { .. }` — whole statement, raw.
    ProofBlock { text: TokenRun },
}

impl Stmt {
    pub fn is_ghost(&self) -> bool {
        matches!(self, Stmt::Assert { .. } | Stmt::ProofBlock { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AnnKind {
    LoopInvariant,
    Assert,
    AssertBy,
    ProofBlock,
    ProofFnItem,
    SpecClause,
    DecreasesClause,
}

/// One navigation step through the executable statement tree. Ordinals count
/// executable statements only, so paths resolve identically in any two
/// programs with equal executable skeletons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Step {
    /// n-th executable statement of the current block.
    Exec(usize),
    Then,
    Else,
    Body,
}

/// Where an annotation attaches within the node the steps lead to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Site {
    /// Invariant list of a loop statement.
    Invariants,
    /// Decreases list of a loop statement.
    LoopDecreases,
    /// Ghost statement placed before the n-th executable statement of a block
    /// (n == exec count means "at the end").
    StmtAt(usize),
    Requires,
    Ensures,
    FnDecreases,
    Recommends,
    /// The annotation is a whole item (proof fn).
    WholeItem,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AnchorPath {
    /// Name of the containing function item; for WholeItem anchors this is
    /// the item's own name.
    pub function: Option<String>,
    pub steps: Vec<Step>,
    pub site: Site,
    /// Position among sibling annotations at the same site.
    pub slot: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AnnotationRef {
    pub kind: AnnKind,
    pub anchor: AnchorPath,
}

/// One proof element with its anchor into the executable skeleton.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GhostAnnotation {
    pub kind: AnnKind,
    pub anchor: AnchorPath,
    /// Whitespace- and comment-normalized token text. Two annotations are
    /// equal iff kinds and normalized texts are equal.
    pub text: String,
    /// Original source text (kept for re-insertion on merge).
    pub raw: String,
    /// Byte range in the source the program was parsed from, when known.
    pub span: Option<(usize, usize)>,
}

impl GhostAnnotation {
    pub fn dedupe_key(&self) -> (AnnKind, String) {
        (self.kind, self.text.clone())
    }
}

/// A parsed Verus source file: raw text outside the single `verus! { .. }`
/// region, region-level verifier attributes, and the item list.
#[derive(Debug, Clone)]
pub struct VerusProgram {
    pub(crate) prefix: String,
    pub(crate) region_attrs: Vec<TokenRun>,
    pub(crate) items: Vec<Item>,
    pub(crate) suffix: String,
    /// Content hash of the original text this program was parsed from.
    pub source_digest: String,
}

impl VerusProgram {
    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn has_region_attr(&self, normalized: &str) -> bool {
        self.region_attrs.iter().any(|a| a.norm_text() == normalized)
    }

    /// Adds a region-level attribute (idempotent on normalized text).
    pub fn add_region_attr(&mut self, text: &str) {
        let run = TokenRun::from_source(text);
        if !self.region_attrs.iter().any(|a| a.norm == run.norm) {
            self.region_attrs.push(run);
        }
    }
}

impl PartialEq for VerusProgram {
    fn eq(&self, other: &Self) -> bool {
        lexer::normalize_snippet(&self.prefix) == lexer::normalize_snippet(&other.prefix)
            && self.region_attrs == other.region_attrs
            && self.items == other.items
            && lexer::normalize_snippet(&self.suffix) == lexer::normalize_snippet(&other.suffix)
    }
}
impl Eq for VerusProgram {}
