//! Component description language front end: tokens, syntax tree, parser and
//! name/type validation.
//!
//! The accepted language is a flat subset of TECS CDL: signatures, celltypes
//! with entry/call ports, `attr` and `var` blocks, and cells with port
//! bindings and attribute initializers. See `docs/cdl.md` for the grammar and
//! how it differs from upstream CDL.

pub mod ast;
pub mod parser;
pub mod validate;

pub use ast::*;
pub use parser::{parse_cdl, ParseError};
pub use validate::{validate_ast, ValidationReport, Violation};
