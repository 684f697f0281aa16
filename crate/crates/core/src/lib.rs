//! Build-time compiler for statically wired component systems.
//!
//! The pipeline reads a component description ([`cdl`]), resolves it into a
//! [`model::ComponentModel`], and emits component scaffolding plus an RTOS
//! configuration file ([`codegen`]). A first pass locks every stateful cell;
//! a second pass reads per-task call flows ([`callflow`]) and removes or
//! downgrades locks ([`optimizer`]). [`simcheck`] enumerates task
//! interleavings to confirm a lock plan admits no data race.

pub mod callflow;
pub mod cdl;
pub mod cli;
pub mod codegen;
pub mod fixtures;
pub mod lexer;
pub mod model;
pub mod optimizer;
pub mod simcheck;
pub mod span;

pub use callflow::{compute_access_matrix, parse_callflow, AccessMatrix, CallFlowSet, Priority};
pub use cdl::{parse_cdl, validate_ast, CdlAst};
pub use model::{build_model, check_acyclic, ComponentModel};
pub use optimizer::{initial_plan, optimize, DispatchMode, LockKind, LockPlan};
