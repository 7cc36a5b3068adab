//! Proof-synthesis pipeline for Verus-annotated Rust.
//!
//! Given a Rust function annotated with Verus specifications but no proof
//! annotations, the pipeline orchestrates LLM agents through three phases —
//! preliminary invariant generation, generic refinement, and error-driven
//! debugging — using an external Verus binary as the oracle, and emits a
//! fully verified program or a best-effort partial proof with metrics.
//!
//! Module map:
//! - [`program`]: parse/render/erase and annotation addressing
//! - [`lynette`]: safety checking, proof merging, deletion, cast quick-fix
//! - [`verifier`]: external verifier adapter, diagnostics, (V, E) scoring
//! - [`houdini`]: fixpoint deletion of unprovable annotations, minimizer
//! - [`gateway`]: LLM completion backends (http / record / replay)
//! - [`agents`]: prompt construction for the generation/refine/repair agents
//! - [`orchestrator`]: the three-phase pipeline with budgets and acceptance
//! - [`report`]: per-task and aggregate run reports

pub mod agents;
pub mod gateway;
pub mod houdini;
pub mod lexer;
pub mod lynette;
pub mod orchestrator;
pub mod program;
pub mod report;
pub mod verifier;
