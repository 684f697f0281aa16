//! Resolved component graph: cells with attribute values applied and call
//! ports joined to entry ports.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::cdl::{
    validate_ast, CdlAst, CelltypeDecl, Literal, SignatureDecl, ValidationReport, Violation,
};

#[derive(Debug, Clone, PartialEq)]
pub struct CellInstance {
    pub name: String,
    pub celltype: String,
    /// Every declared attribute, explicit initializer or default.
    pub attr_values: BTreeMap<String, Literal>,
    pub has_vars: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PortRef {
    pub cell: String,
    pub port: String,
}

impl fmt::Display for PortRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.cell, self.port)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Join {
    pub caller: PortRef,
    pub callee: PortRef,
    pub signature: String,
}

impl fmt::Display for Join {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {} [{}]", self.caller, self.callee, self.signature)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("description does not resolve:\n{0}")]
    Invalid(ValidationReport),
    #[error("call port `{cell}.{port}` is not bound")]
    UnboundCallPort { cell: String, port: String },
    #[error("attribute `{cell}.{attr}` has neither an initializer nor a default")]
    MissingAttrValue { cell: String, attr: String },
    #[error("join {join} connects `{caller_sig}` to `{callee_sig}`")]
    SignatureMismatch {
        join: String,
        caller_sig: String,
        callee_sig: String,
    },
}

/// The static structure of a system. Maps are keyed by name so the model is
/// independent of declaration order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentModel {
    pub signatures: BTreeMap<String, SignatureDecl>,
    pub celltypes: BTreeMap<String, CelltypeDecl>,
    pub cells: BTreeMap<String, CellInstance>,
    /// Sorted by caller.
    pub joins: Vec<Join>,
}

impl ComponentModel {
    pub fn celltype_of(&self, cell: &str) -> Option<&CelltypeDecl> {
        self.cells
            .get(cell)
            .and_then(|c| self.celltypes.get(&c.celltype))
    }

    pub fn has_vars(&self, cell: &str) -> bool {
        self.cells.get(cell).is_some_and(|c| c.has_vars)
    }

    /// Signature served by `cell`'s entry port `entry`.
    pub fn entry_signature(&self, cell: &str, entry: &str) -> Option<&SignatureDecl> {
        let port = self.celltype_of(cell)?.entry(entry)?;
        self.signatures.get(port.signature.as_str())
    }

    pub fn joins_from<'a>(&'a self, cell: &'a str) -> impl Iterator<Item = &'a Join> + 'a {
        self.joins.iter().filter(move |j| j.caller.cell == cell)
    }

    /// Whether some call port of `caller` is joined to `callee.entry`.
    pub fn is_joined(&self, caller: &str, callee: &str, entry: &str) -> bool {
        self.joins_from(caller)
            .any(|j| j.callee.cell == callee && j.callee.port == entry)
    }

    pub fn cells_of<'a>(
        &'a self,
        celltype: &'a str,
    ) -> impl Iterator<Item = &'a CellInstance> + 'a {
        self.cells.values().filter(move |c| c.celltype == celltype)
    }
}

pub fn build_model(ast: &CdlAst) -> Result<ComponentModel, ModelError> {
    let report = validate_ast(ast);
    if !report.is_empty() {
        return Err(ModelError::Invalid(report));
    }

    let signatures: BTreeMap<_, _> = ast
        .signatures
        .iter()
        .map(|s| (s.name.name.clone(), s.clone()))
        .collect();
    let celltypes: BTreeMap<_, _> = ast
        .celltypes
        .iter()
        .map(|c| (c.name.name.clone(), c.clone()))
        .collect();

    let mut cells = BTreeMap::new();
    let mut joins = Vec::new();
    // iterate cells by name so the first reported error does not depend on declaration order
    let mut decls: Vec<_> = ast.cells.iter().collect();
    decls.sort_by(|a, b| a.name.name.cmp(&b.name.name));
    for decl in decls {
        let ct = &celltypes[decl.celltype.as_str()];
        let mut attr_values = BTreeMap::new();
        for attr in &ct.attrs {
            let init = decl
                .attr_inits
                .iter()
                .find(|i| i.name.name == attr.name.name)
                .map(|i| &i.value)
                .or(attr.default.as_ref());
            match init {
                Some(lit) => {
                    attr_values.insert(attr.name.name.clone(), lit.value.clone());
                }
                None => {
                    return Err(ModelError::MissingAttrValue {
                        cell: decl.name.name.clone(),
                        attr: attr.name.name.clone(),
                    })
                }
            }
        }
        for call in &ct.calls {
            let Some(b) = decl.bindings.iter().find(|b| b.port.name == call.name.name) else {
                return Err(ModelError::UnboundCallPort {
                    cell: decl.name.name.clone(),
                    port: call.name.name.clone(),
                });
            };
            let target = ast
                .cells
                .iter()
                .find(|c| c.name.name == b.target_cell.name)
                .expect("validated target cell");
            let entry = celltypes[target.celltype.as_str()]
                .entry(b.target_entry.as_str())
                .expect("validated entry port");
            let join = Join {
                caller: PortRef {
                    cell: decl.name.name.clone(),
                    port: call.name.name.clone(),
                },
                callee: PortRef {
                    cell: b.target_cell.name.clone(),
                    port: b.target_entry.name.clone(),
                },
                signature: call.signature.name.clone(),
            };
            if entry.signature.name != call.signature.name {
                return Err(ModelError::SignatureMismatch {
                    join: join.to_string(),
                    caller_sig: call.signature.name.clone(),
                    callee_sig: entry.signature.name.clone(),
                });
            }
            joins.push(join);
        }
        cells.insert(
            decl.name.name.clone(),
            CellInstance {
                name: decl.name.name.clone(),
                celltype: ct.name.name.clone(),
                attr_values,
                has_vars: ct.has_vars(),
            },
        );
    }
    joins.sort();

    Ok(ComponentModel {
        signatures,
        celltypes,
        cells,
        joins,
    })
}

/// Reports one witness cycle if the cell-level join graph has any.
pub fn check_acyclic(model: &ComponentModel) -> ValidationReport {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Unvisited,
        OnStack,
        Done,
    }

    let mut succ: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for j in &model.joins {
        succ.entry(j.caller.cell.as_str())
            .or_default()
            .insert(j.callee.cell.as_str());
    }
    let mut mark: BTreeMap<&str, Mark> = model
        .cells
        .keys()
        .map(|c| (c.as_str(), Mark::Unvisited))
        .collect();
    let mut report = ValidationReport::default();

    for root in model.cells.keys() {
        if mark[root.as_str()] != Mark::Unvisited {
            continue;
        }
        // iterative DFS; `path` mirrors the cells currently on the stack
        let mut stack: Vec<(&str, Vec<&str>)> = vec![(root.as_str(), succ_list(&succ, root))];
        let mut path = vec![root.as_str()];
        mark.insert(root.as_str(), Mark::OnStack);
        while let Some((node, rest)) = stack.last_mut() {
            if let Some(next) = rest.pop() {
                match mark.get(next).copied().unwrap_or(Mark::Done) {
                    Mark::Unvisited => {
                        mark.insert(next, Mark::OnStack);
                        path.push(next);
                        stack.push((next, succ_list(&succ, next)));
                    }
                    Mark::OnStack => {
                        let at = path.iter().position(|c| *c == next).unwrap();
                        report.push(Violation::JoinCycle {
                            cells: path[at..].iter().map(|c| c.to_string()).collect(),
                        });
                        return report;
                    }
                    Mark::Done => {}
                }
            } else {
                mark.insert(node, Mark::Done);
                stack.pop();
                path.pop();
            }
        }
    }
    report
}

fn succ_list<'a>(succ: &BTreeMap<&'a str, BTreeSet<&'a str>>, node: &str) -> Vec<&'a str> {
    // reversed so `pop` visits successors in name order
    succ.get(node)
        .map(|s| s.iter().rev().copied().collect())
        .unwrap_or_default()
}
