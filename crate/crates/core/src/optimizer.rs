//! Lock placement and lock-kind selection.
//!
//! Pass 1 protects every cell that has variables. Pass 2 uses the call flows:
//! a cell needs a lock only when two or more tasks reach it, a lock is dropped
//! when every invocation of the cell already runs inside another locked
//! cell's entry function, and the remaining locks become a binary semaphore
//! or a priority-ceiling mutex depending on the contending tasks.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::callflow::{compute_access_matrix, AccessMatrix, CallFlowSet, Priority, TaskDef};
use crate::model::ComponentModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LockKind {
    NoLock,
    BinarySemaphore,
    CeilingMutex { ceiling: Priority },
}

impl LockKind {
    pub fn is_lock(self) -> bool {
        self != LockKind::NoLock
    }
}

impl fmt::Display for LockKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LockKind::NoLock => f.write_str("none"),
            LockKind::BinarySemaphore => f.write_str("semaphore"),
            LockKind::CeilingMutex { ceiling } => write!(f, "mutex(ceiling={ceiling})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LockReason {
    NoVars,
    /// Reached by at most one task.
    SingleTask,
    /// Every invocation happens inside the locked entry function of `head`.
    ChainElided {
        head: String,
    },
    Required,
}

impl fmt::Display for LockReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LockReason::NoVars => f.write_str("no-vars"),
            LockReason::SingleTask => f.write_str("single-task"),
            LockReason::ChainElided { head } => write!(f, "chain-elided({head})"),
            LockReason::Required => f.write_str("required"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellLock {
    pub kind: LockKind,
    pub reason: LockReason,
}

/// How a celltype's lock field is represented in generated code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DispatchMode {
    /// No cell is locked; the field is omitted.
    FieldRemoved,
    /// Every cell uses this one lock kind; the field holds it directly.
    DirectHandle(LockKind),
    /// Locked and unlocked cells (or different kinds) share the celltype;
    /// the field is an abstract lock manager and unlocked cells get a dummy.
    DynamicDispatch,
}

impl fmt::Display for DispatchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DispatchMode::FieldRemoved => f.write_str("field-removed"),
            DispatchMode::DirectHandle(k) => write!(f, "direct({k})"),
            DispatchMode::DynamicDispatch => f.write_str("dynamic"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LockPlan {
    pub per_cell: BTreeMap<String, CellLock>,
    pub per_celltype: BTreeMap<String, DispatchMode>,
}

impl LockPlan {
    pub fn kind(&self, cell: &str) -> LockKind {
        self.per_cell.get(cell).map_or(LockKind::NoLock, |c| c.kind)
    }

    pub fn locked_cells(&self) -> impl Iterator<Item = (&str, LockKind)> {
        self.per_cell
            .iter()
            .filter(|(_, c)| c.kind.is_lock())
            .map(|(n, c)| (n.as_str(), c.kind))
    }

    /// Tab-separated diagnostic listing: cell, kind, reason, celltype, mode.
    pub fn report(&self, model: &ComponentModel) -> String {
        let mut out = String::from("cell\tkind\treason\tcelltype\tmode\n");
        for (name, lock) in &self.per_cell {
            let ct = &model.cells[name].celltype;
            let mode = self
                .per_celltype
                .get(ct)
                .map_or_else(|| "-".to_string(), |m| m.to_string());
            out.push_str(&format!(
                "{name}\t{}\t{}\t{ct}\t{mode}\n",
                lock.kind, lock.reason
            ));
        }
        out
    }
}

/// Pass-1 plan: every cell with variables gets a ceiling mutex at the
/// highest task priority (1 when no flows are known).
pub fn initial_plan(model: &ComponentModel, flows: Option<&CallFlowSet>) -> LockPlan {
    let ceiling = flows
        .and_then(CallFlowSet::highest_priority)
        .unwrap_or(Priority(1));
    let per_cell = model
        .cells
        .values()
        .map(|c| {
            let lock = if c.has_vars {
                CellLock {
                    kind: LockKind::CeilingMutex { ceiling },
                    reason: LockReason::Required,
                }
            } else {
                CellLock {
                    kind: LockKind::NoLock,
                    reason: LockReason::NoVars,
                }
            };
            (c.name.clone(), lock)
        })
        .collect();
    let mut plan = LockPlan {
        per_cell,
        per_celltype: BTreeMap::new(),
    };
    plan.per_celltype = classify_celltypes(model, &plan);
    plan
}

/// A cell needs exclusive control iff it has variables and at least two
/// tasks reach it.
pub fn necessity(matrix: &AccessMatrix, model: &ComponentModel) -> BTreeMap<String, bool> {
    model
        .cells
        .values()
        .map(|c| {
            (
                c.name.clone(),
                c.has_vars && matrix.task_count(&c.name) >= 2,
            )
        })
        .collect()
}

/// Lock kind for a cell contended by `tasks` (at least two).
///
/// Three or more tasks with at least two distinct priorities get a ceiling
/// mutex whose ceiling is the highest (numerically smallest) priority;
/// everything else gets a binary semaphore.
pub fn select_kind(tasks: &[&TaskDef]) -> LockKind {
    assert!(
        tasks.len() >= 2,
        "select_kind needs at least two contending tasks, got {}",
        tasks.len()
    );
    let prios: BTreeSet<Priority> = tasks.iter().map(|t| t.priority).collect();
    if tasks.len() >= 3 && prios.len() >= 2 {
        LockKind::CeilingMutex {
            ceiling: *prios.first().unwrap(),
        }
    } else {
        LockKind::BinarySemaphore
    }
}

/// Cells that are ancestors of *every* invocation of `cell`, listed
/// outermost first. Empty when the cell is never invoked.
fn nesting_dominators(flows: &CallFlowSet, cell: &str) -> Vec<String> {
    let mut common: Option<Vec<String>> = None;
    for task in &flows.tasks {
        task.walk(|node, ancestors| {
            if node.target.cell != cell {
                return;
            }
            let path: Vec<&str> = ancestors.iter().map(|a| a.target.cell.as_str()).collect();
            common = Some(match common.take() {
                None => path.iter().map(|s| s.to_string()).collect(),
                Some(prev) => prev
                    .into_iter()
                    .filter(|c| path.contains(&c.as_str()))
                    .collect(),
            });
        });
    }
    common.unwrap_or_default()
}

/// Drops the lock of every locked cell whose invocations all run inside the
/// entry function of another locked cell; the outermost such cell keeps its
/// lock and is recorded as the chain head.
pub fn elide_chains(model: &ComponentModel, flows: &CallFlowSet, plan: &LockPlan) -> LockPlan {
    let locked: BTreeSet<&str> = plan.locked_cells().map(|(c, _)| c).collect();
    let mut out = plan.clone();
    for &cell in &locked {
        // Ancestor order along a path follows the acyclic join graph, so the
        // first locked dominator is the outermost one; it cannot itself be
        // elided because anything dominating it would dominate `cell` first.
        let head = nesting_dominators(flows, cell)
            .into_iter()
            .find(|d| locked.contains(d.as_str()));
        if let Some(head) = head {
            debug_assert!(head_covers_tasks(model, flows, cell, &head));
            out.per_cell.insert(
                cell.to_string(),
                CellLock {
                    kind: LockKind::NoLock,
                    reason: LockReason::ChainElided { head },
                },
            );
        }
    }
    out.per_celltype = classify_celltypes(model, &out);
    out
}

fn head_covers_tasks(model: &ComponentModel, flows: &CallFlowSet, cell: &str, head: &str) -> bool {
    let am = compute_access_matrix(model, flows);
    let covered = am.tasks_of(cell).all(|t| am.count(head, t) > 0);
    covered
}

pub fn classify_celltypes(
    model: &ComponentModel,
    plan: &LockPlan,
) -> BTreeMap<String, DispatchMode> {
    model
        .celltypes
        .keys()
        .map(|ct| {
            let kinds: BTreeSet<LockKind> =
                model.cells_of(ct).map(|c| plan.kind(&c.name)).collect();
            let mode = match kinds.len() {
                0 => DispatchMode::FieldRemoved,
                1 => match kinds.into_iter().next().unwrap() {
                    LockKind::NoLock => DispatchMode::FieldRemoved,
                    k => DispatchMode::DirectHandle(k),
                },
                _ => DispatchMode::DynamicDispatch,
            };
            (ct.clone(), mode)
        })
        .collect()
}

/// Pass-2 plan: necessity, kind selection, chain elision, classification.
pub fn optimize(model: &ComponentModel, flows: &CallFlowSet) -> LockPlan {
    let matrix = compute_access_matrix(model, flows);
    let needed = necessity(&matrix, model);
    let per_cell = model
        .cells
        .values()
        .map(|c| {
            let lock = if !c.has_vars {
                CellLock {
                    kind: LockKind::NoLock,
                    reason: LockReason::NoVars,
                }
            } else if needed[&c.name] {
                let tasks: Vec<&TaskDef> = matrix
                    .tasks_of(&c.name)
                    .map(|t| flows.task(t).expect("task from matrix"))
                    .collect();
                CellLock {
                    kind: select_kind(&tasks),
                    reason: LockReason::Required,
                }
            } else {
                CellLock {
                    kind: LockKind::NoLock,
                    reason: LockReason::SingleTask,
                }
            };
            (c.name.clone(), lock)
        })
        .collect();
    let plan = LockPlan {
        per_cell,
        per_celltype: BTreeMap::new(),
    };
    elide_chains(model, flows, &plan)
}
