//! Program model: parse Verus-annotated source, address ghost annotations,
//! and render programs back to text.

mod annotations;
mod ast;
mod parse;
mod render;

pub use annotations::{delete_annotation, list_annotations, UnknownRef};
pub use ast::{
    AnchorPath, AnnKind, AnnotationRef, Block, ClauseKind, ClauseSection, GhostAnnotation, Item,
    ItemKind, LoopKind, Site, Step, Stmt, TokenRun, VerusProgram,
};
pub use parse::{parse, ParseError};
pub use render::{render, render_erased, render_item};

use crate::lexer;
use sha2::{Digest, Sha256};

pub(crate) use annotations::delete_in_place;

/// Source text with all ghost code removed: only executable items and
/// statements remain.
pub fn erase_ghost(p: &VerusProgram) -> String {
    render_erased(p)
}

/// Stable hash of the normalized executable skeleton. Equal iff the skeletons
/// are token-equal; ghost-only edits never change it.
pub fn exec_fingerprint(p: &VerusProgram) -> String {
    hash_normalized(&erase_ghost(p))
}

/// Stable hash of the full normalized program (ghost code included); used for
/// verification-outcome caching.
pub fn program_digest(p: &VerusProgram) -> String {
    hash_normalized(&render(p))
}

fn hash_normalized(text: &str) -> String {
    let norm = lexer::normalize_snippet(text);
    let mut hasher = Sha256::new();
    hasher.update(norm.as_bytes());
    format!("{:x}", hasher.finalize())
}
