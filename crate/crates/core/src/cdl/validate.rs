//! Name resolution and type checks over a parsed description.

use std::collections::HashMap;
use std::fmt;

use super::ast::*;
use crate::span::Span;

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    DuplicateName {
        what: &'static str,
        name: String,
        span: Span,
        first: Span,
    },
    EmptySignature {
        name: String,
        span: Span,
    },
    UnknownType {
        name: String,
        span: Span,
    },
    UnknownSignature {
        name: String,
        span: Span,
    },
    UnknownCelltype {
        name: String,
        span: Span,
    },
    UnknownAttr {
        cell: String,
        attr: String,
        span: Span,
    },
    UnknownCallPort {
        cell: String,
        port: String,
        span: Span,
    },
    UnknownCell {
        name: String,
        span: Span,
    },
    UnknownEntryPort {
        cell: String,
        port: String,
        span: Span,
    },
    DuplicateBinding {
        cell: String,
        port: String,
        span: Span,
    },
    DuplicateAttrInit {
        cell: String,
        attr: String,
        span: Span,
    },
    TypeMismatch {
        name: String,
        expected: ScalarType,
        found: Literal,
        span: Span,
    },
    /// A directed cycle in the cell-level join graph.
    JoinCycle {
        cells: Vec<String>,
    },
}

impl Violation {
    pub fn span(&self) -> Option<Span> {
        use Violation::*;
        match self {
            DuplicateName { span, .. }
            | EmptySignature { span, .. }
            | UnknownType { span, .. }
            | UnknownSignature { span, .. }
            | UnknownCelltype { span, .. }
            | UnknownAttr { span, .. }
            | UnknownCallPort { span, .. }
            | UnknownCell { span, .. }
            | UnknownEntryPort { span, .. }
            | DuplicateBinding { span, .. }
            | DuplicateAttrInit { span, .. }
            | TypeMismatch { span, .. } => Some(*span),
            JoinCycle { .. } => None,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        if let Some(span) = self.span() {
            write!(f, "{span}: ")?;
        }
        match self {
            DuplicateName {
                what, name, first, ..
            } => write!(f, "duplicate {what} `{name}` (first declared at {first})"),
            EmptySignature { name, .. } => write!(f, "signature `{name}` declares no functions"),
            UnknownType { name, .. } => write!(f, "unknown type `{name}`"),
            UnknownSignature { name, .. } => write!(f, "unknown signature `{name}`"),
            UnknownCelltype { name, .. } => write!(f, "unknown celltype `{name}`"),
            UnknownAttr { cell, attr, .. } => {
                write!(f, "cell `{cell}` initializes unknown attribute `{attr}`")
            }
            UnknownCallPort { cell, port, .. } => {
                write!(
                    f,
                    "cell `{cell}` binds `{port}`, which is not a call port of its celltype"
                )
            }
            UnknownCell { name, .. } => write!(f, "unknown cell `{name}`"),
            UnknownEntryPort { cell, port, .. } => {
                write!(f, "cell `{cell}` has no entry port `{port}`")
            }
            DuplicateBinding { cell, port, .. } => {
                write!(f, "call port `{cell}.{port}` bound more than once")
            }
            DuplicateAttrInit { cell, attr, .. } => {
                write!(f, "attribute `{cell}.{attr}` initialized more than once")
            }
            TypeMismatch {
                name,
                expected,
                found,
                ..
            } => write!(
                f,
                "`{name}` has type {} but is given {} literal `{found}`",
                expected.cdl_name(),
                found.kind_name()
            ),
            JoinCycle { cells } => write!(f, "cyclic joins: {}", cells.join(" -> ")),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub fn push(&mut self, v: Violation) {
        self.violations.push(v);
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Records `name` in `seen`, reporting a duplicate if it is already there.
fn unique<'a>(
    seen: &mut HashMap<&'a str, Span>,
    what: &'static str,
    name: &'a Ident,
    report: &mut ValidationReport,
) -> bool {
    if let Some(first) = seen.get(name.as_str()) {
        report.push(Violation::DuplicateName {
            what,
            name: name.name.clone(),
            span: name.span,
            first: *first,
        });
        false
    } else {
        seen.insert(name.as_str(), name.span);
        true
    }
}

fn check_type(ty: &Ident, report: &mut ValidationReport) -> Option<ScalarType> {
    let t = ScalarType::from_name(ty.as_str());
    if t.is_none() {
        report.push(Violation::UnknownType {
            name: ty.name.clone(),
            span: ty.span,
        });
    }
    t
}

fn check_literal(
    name: &Ident,
    ty: Option<ScalarType>,
    lit: &LiteralNode,
    report: &mut ValidationReport,
) {
    if let Some(t) = ty {
        if !t.accepts(&lit.value) {
            report.push(Violation::TypeMismatch {
                name: name.name.clone(),
                expected: t,
                found: lit.value.clone(),
                span: lit.span,
            });
        }
    }
}

/// Collects every resolution and typing violation. An empty report means the
/// tree can be turned into a component model.
pub fn validate_ast(ast: &CdlAst) -> ValidationReport {
    let mut report = ValidationReport::default();

    let mut sigs = HashMap::new();
    for s in &ast.signatures {
        unique(&mut sigs, "signature", &s.name, &mut report);
        if s.functions.is_empty() {
            report.push(Violation::EmptySignature {
                name: s.name.name.clone(),
                span: s.name.span,
            });
        }
        let mut funcs = HashMap::new();
        for f in &s.functions {
            unique(&mut funcs, "function", &f.name, &mut report);
            if let Some(r) = &f.ret {
                check_type(r, &mut report);
            }
            let mut params = HashMap::new();
            for p in &f.params {
                unique(&mut params, "parameter", &p.name, &mut report);
                check_type(&p.ty, &mut report);
            }
        }
    }

    let mut celltypes = HashMap::new();
    for c in &ast.celltypes {
        unique(&mut celltypes, "celltype", &c.name, &mut report);
        // ports, attributes and variables share one namespace per celltype
        let mut members = HashMap::new();
        for p in c.entries.iter().chain(&c.calls) {
            unique(&mut members, "member", &p.name, &mut report);
            if !sigs.contains_key(p.signature.as_str()) {
                report.push(Violation::UnknownSignature {
                    name: p.signature.name.clone(),
                    span: p.signature.span,
                });
            }
        }
        for a in &c.attrs {
            unique(&mut members, "member", &a.name, &mut report);
            let ty = check_type(&a.ty, &mut report);
            if let Some(d) = &a.default {
                check_literal(&a.name, ty, d, &mut report);
            }
        }
        for v in &c.vars {
            unique(&mut members, "member", &v.name, &mut report);
            let ty = check_type(&v.ty, &mut report);
            check_literal(&v.name, ty, &v.init, &mut report);
        }
    }

    let ct_by_name: HashMap<&str, &CelltypeDecl> = ast
        .celltypes
        .iter()
        .map(|c| (c.name.as_str(), c))
        .rev()
        .collect();
    let cell_by_name: HashMap<&str, &CellDecl> = ast
        .cells
        .iter()
        .map(|c| (c.name.as_str(), c))
        .rev()
        .collect();

    let mut cells = HashMap::new();
    for cell in &ast.cells {
        unique(&mut cells, "cell", &cell.name, &mut report);
        let Some(ct) = ct_by_name.get(cell.celltype.as_str()) else {
            report.push(Violation::UnknownCelltype {
                name: cell.celltype.name.clone(),
                span: cell.celltype.span,
            });
            continue;
        };
        let mut bound = HashMap::new();
        for b in &cell.bindings {
            if bound.insert(b.port.as_str(), b.span).is_some() {
                report.push(Violation::DuplicateBinding {
                    cell: cell.name.name.clone(),
                    port: b.port.name.clone(),
                    span: b.port.span,
                });
            }
            if ct.call(b.port.as_str()).is_none() {
                report.push(Violation::UnknownCallPort {
                    cell: cell.name.name.clone(),
                    port: b.port.name.clone(),
                    span: b.port.span,
                });
            }
            match cell_by_name.get(b.target_cell.as_str()) {
                None => report.push(Violation::UnknownCell {
                    name: b.target_cell.name.clone(),
                    span: b.target_cell.span,
                }),
                Some(target) => {
                    let has_entry = ct_by_name
                        .get(target.celltype.as_str())
                        .is_some_and(|tct| tct.entry(b.target_entry.as_str()).is_some());
                    // an unknown target celltype is already reported on the target itself
                    if ct_by_name.contains_key(target.celltype.as_str()) && !has_entry {
                        report.push(Violation::UnknownEntryPort {
                            cell: b.target_cell.name.clone(),
                            port: b.target_entry.name.clone(),
                            span: b.target_entry.span,
                        });
                    }
                }
            }
        }
        let mut inited = HashMap::new();
        for a in &cell.attr_inits {
            if inited.insert(a.name.as_str(), a.span).is_some() {
                report.push(Violation::DuplicateAttrInit {
                    cell: cell.name.name.clone(),
                    attr: a.name.name.clone(),
                    span: a.name.span,
                });
            }
            match ct.attr(a.name.as_str()) {
                None => report.push(Violation::UnknownAttr {
                    cell: cell.name.name.clone(),
                    attr: a.name.name.clone(),
                    span: a.name.span,
                }),
                Some(decl) => {
                    let ty = ScalarType::from_name(decl.ty.as_str());
                    check_literal(&a.name, ty, &a.value, &mut report);
                }
            }
        }
    }

    report
}
