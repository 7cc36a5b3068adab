//! Houdini fixpoint: delete every annotation the verifier refutes until a
//! self-consistent verifying subset remains, in a linear number of verifier
//! invocations. Also hosts the correctness predicate used by every phase and
//! the loop-invariant minimizer.

use crate::lynette::is_safe;
use crate::program::{
    self, delete_annotation, list_annotations, parse, render, AnnKind, AnnotationRef,
    GhostAnnotation, VerusProgram,
};
use crate::verifier::{ErrorKind, Oracle, Severity, VerifierError};

#[derive(Debug, Clone, Copy)]
pub struct HoudiniOptions {
    /// When false, only loop invariants are deletable; asserts and proof
    /// blocks are left alone even when blamed.
    pub delete_asserts: bool,
}

impl Default for HoudiniOptions {
    fn default() -> Self {
        HoudiniOptions { delete_asserts: true }
    }
}

#[derive(Debug, Clone)]
pub struct HoudiniResult {
    pub program: VerusProgram,
    pub verified: bool,
    pub deleted: Vec<GhostAnnotation>,
    pub verifier_calls: u32,
}

/// Error kinds that blame the annotation at their span.
fn blames(kind: ErrorKind) -> bool {
    matches!(kind, ErrorKind::InvFailFront | ErrorKind::InvFailEnd | ErrorKind::AssertFail)
}

fn deletable(kind: AnnKind, opts: &HoudiniOptions) -> bool {
    match kind {
        AnnKind::LoopInvariant => true,
        AnnKind::Assert | AnnKind::AssertBy | AnnKind::ProofBlock => opts.delete_asserts,
        // deleting spec or decreases clauses would change the verification
        // goal or break termination checking; whole proof fns stay because
        // their call sites would dangle
        AnnKind::SpecClause | AnnKind::DecreasesClause | AnnKind::ProofFnItem => false,
    }
}

pub fn houdini(
    program: &VerusProgram,
    oracle: &dyn Oracle,
    opts: &HoudiniOptions,
) -> Result<HoudiniResult, VerifierError> {
    // reparse the render so annotation spans line up with the text the
    // oracle will see
    let mut cur = reparse(program);
    let mut deleted = Vec::new();
    let mut calls = 0u32;

    loop {
        let outcome = oracle.verify(&cur)?;
        calls += 1;
        if outcome.fully_verified() {
            return Ok(HoudiniResult { program: cur, verified: true, deleted, verifier_calls: calls });
        }
        if !outcome.is_valid() {
            break;
        }

        let anns = list_annotations(&cur);
        let mut blamed: Vec<(usize, AnnotationRef, GhostAnnotation)> = Vec::new();
        for diag in &outcome.diagnostics {
            if diag.severity != Severity::Error || !blames(diag.kind) {
                continue;
            }
            let (ds, de) = diag.primary_span.byte_range;
            if ds == 0 && de == 0 {
                continue;
            }
            // innermost annotation whose span contains the diagnostic
            let mut best: Option<(usize, usize)> = None; // (ann index, span size)
            for (i, (_, ann)) in anns.iter().enumerate() {
                let Some((s, e)) = ann.span else { continue };
                if s <= ds && ds < e.max(s + 1) && deletable(ann.kind, opts) {
                    let size = e - s;
                    if best.map(|(_, sz)| size < sz).unwrap_or(true) {
                        best = Some((i, size));
                    }
                }
            }
            if let Some((i, _)) = best {
                if !blamed.iter().any(|(bi, _, _)| *bi == i) {
                    blamed.push((i, anns[i].0.clone(), anns[i].1.clone()));
                }
            }
        }
        if blamed.is_empty() {
            break;
        }
        // delete in reverse document order so earlier refs stay valid
        blamed.sort_by(|a, b| b.0.cmp(&a.0));
        for (_, r, ann) in blamed {
            cur = delete_annotation(&cur, &r)
                .map_err(|e| VerifierError::Io(format!("houdini deletion failed: {e}")))?;
            deleted.push(ann);
        }
        cur = reparse(&cur);
    }
    Ok(HoudiniResult { program: cur, verified: false, deleted, verifier_calls: calls })
}

fn reparse(p: &VerusProgram) -> VerusProgram {
    parse(&render(p)).expect("render of a parsed program re-parses")
}

/// The correctness predicate: a program is correct when it is safe w.r.t.
/// the task original, valid, and fully verified — either directly or after
/// Houdini prunes a refuted subset.
pub fn is_correct(
    program: &VerusProgram,
    original: &VerusProgram,
    oracle: &dyn Oracle,
    opts: &HoudiniOptions,
) -> Result<(bool, VerusProgram), VerifierError> {
    if !is_safe(original, program).safe {
        return Ok((false, program.clone()));
    }
    let outcome = oracle.verify(program)?;
    if outcome.fully_verified() {
        return Ok((true, program.clone()));
    }
    if !outcome.is_valid() {
        return Ok((false, program.clone()));
    }
    let result = houdini(program, oracle, opts)?;
    if result.verified && is_safe(original, &result.program).safe {
        return Ok((true, result.program));
    }
    Ok((false, program.clone()))
}

#[derive(Debug, thiserror::Error)]
pub enum MinimizeError {
    #[error("input program does not verify")]
    NotVerifiedInput,
    #[error(transparent)]
    Verifier(#[from] VerifierError),
}

/// Removes one loop invariant at a time; an invariant whose removal keeps the
/// program verifying is unnecessary and discarded. Sweeps repeat until no
/// single deletion survives. Only loop invariants are considered.
pub fn minimize_invariants(
    program: &VerusProgram,
    oracle: &dyn Oracle,
) -> Result<VerusProgram, MinimizeError> {
    let mut cur = reparse(program);
    if !oracle.verify(&cur)?.fully_verified() {
        return Err(MinimizeError::NotVerifiedInput);
    }
    'sweep: loop {
        let refs: Vec<AnnotationRef> = list_annotations(&cur)
            .into_iter()
            .filter(|(r, _)| r.kind == AnnKind::LoopInvariant)
            .map(|(r, _)| r)
            .collect();
        for r in refs {
            let Ok(candidate) = delete_annotation(&cur, &r) else { continue };
            if oracle.verify(&candidate)?.fully_verified() {
                cur = reparse(&candidate);
                continue 'sweep;
            }
        }
        break;
    }
    Ok(cur)
}

/// Convenience for tests and tools: all loop-invariant texts of a program.
pub fn invariant_texts(p: &VerusProgram) -> Vec<String> {
    list_annotations(p)
        .into_iter()
        .filter(|(r, _)| r.kind == AnnKind::LoopInvariant)
        .map(|(_, a)| a.text)
        .collect()
}

pub use program::program_digest;
