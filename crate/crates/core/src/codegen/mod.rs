//! Scaffolding generation: component structs and lock plumbing per
//! celltype, signature traits and lock objects, the RTOS configuration, and
//! one-time user stubs.

pub mod check;
pub mod emit;
pub mod model;
pub mod names;
pub mod report;
pub mod templates;

pub use check::{orphan_identifiers, Orphan};
pub use emit::{
    emit_all, emit_rtos_config, emit_scaffolding, emit_user_stubs, EmittedFile, EmittedFileSet,
    FileKind, WriteSummary, GEN_DIR, USER_DIR,
};
pub use model::{build_generation_model, GenerationModel, LockField};
pub use report::{count_lines, line_report, LineReport};
pub use templates::{TemplateError, TemplateSet};
