//! Per-task call flows and the cell/task access matrix derived from them.
//!
//! A flow file lists, for each task, the entry-port functions its body
//! invokes. A nested block means the inner invocations happen while the
//! outer entry function is still running:
//!
//! ```text
//! task Main priority 1 {
//!     Ctrl1.eBody.run {
//!         Sensor1.eSensor.get_distance;
//!         Motor1.eMotor.set_speed;
//!     }
//! }
//! ```

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::cdl::parser::Parser;
use crate::cdl::ParseError;
use crate::lexer::{tokenize_dialect, Dialect, Keyword, TokenKind};
use crate::model::ComponentModel;
use crate::span::Span;

/// Task priority in ITRON order: smaller value means higher priority.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Priority(pub u32);

impl fmt::Display for Priority {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FlowTarget {
    pub cell: String,
    pub entry: String,
    pub function: String,
}

impl fmt::Display for FlowTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}.{}", self.cell, self.entry, self.function)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowNode {
    pub target: FlowTarget,
    /// Invocations made while this entry function is active.
    pub children: Vec<FlowNode>,
    pub span: Span,
}

impl FlowNode {
    /// Pre-order walk passing each node with its ancestors (outermost first).
    pub fn walk<'a>(
        &'a self,
        ancestors: &mut Vec<&'a FlowNode>,
        visit: &mut impl FnMut(&'a FlowNode, &[&'a FlowNode]),
    ) {
        visit(self, ancestors);
        ancestors.push(self);
        for c in &self.children {
            c.walk(ancestors, visit);
        }
        ancestors.pop();
    }

    pub fn node_count(&self) -> usize {
        1 + self
            .children
            .iter()
            .map(FlowNode::node_count)
            .sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(FlowNode::depth).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskDef {
    pub name: String,
    pub priority: Priority,
    /// Direct calls made by the task body.
    pub roots: Vec<FlowNode>,
    pub span: Span,
}

impl TaskDef {
    pub fn walk<'a>(&'a self, mut visit: impl FnMut(&'a FlowNode, &[&'a FlowNode])) {
        let mut ancestors = Vec::new();
        for r in &self.roots {
            r.walk(&mut ancestors, &mut visit);
        }
    }

    pub fn node_count(&self) -> usize {
        self.roots.iter().map(FlowNode::node_count).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CallFlowSet {
    pub tasks: Vec<TaskDef>,
}

impl CallFlowSet {
    pub fn task(&self, name: &str) -> Option<&TaskDef> {
        self.tasks.iter().find(|t| t.name == name)
    }

    /// Numerically smallest priority value over all tasks.
    pub fn highest_priority(&self) -> Option<Priority> {
        self.tasks.iter().map(|t| t.priority).min()
    }
}

impl fmt::Display for CallFlowSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn node(f: &mut fmt::Formatter<'_>, n: &FlowNode, indent: usize) -> fmt::Result {
            write!(f, "{:indent$}{}", "", n.target, indent = indent)?;
            if n.children.is_empty() {
                return writeln!(f, ";");
            }
            writeln!(f, " {{")?;
            for c in &n.children {
                node(f, c, indent + 4)?;
            }
            writeln!(f, "{:indent$}}}", "", indent = indent)
        }
        for t in &self.tasks {
            writeln!(f, "task {} priority {} {{", t.name, t.priority)?;
            for r in &t.roots {
                node(f, r, 4)?;
            }
            writeln!(f, "}}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlowError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{span}: `{target}` does not name a cell, entry port and function of the model")]
    UnknownCellOrEntry { target: String, span: Span },
    #[error("{span}: `{child}` is invoked inside `{parent}`, but no join connects them")]
    IllegalNesting {
        parent: String,
        child: String,
        span: Span,
    },
    #[error("{span}: task `{name}` declared twice")]
    DuplicateTask { name: String, span: Span },
    #[error("{span}: task `{name}` has priority {value}; priorities start at 1")]
    BadPriority {
        name: String,
        value: i128,
        span: Span,
    },
    #[error("flow file declares no tasks")]
    NoTasks,
}

impl FlowError {
    pub fn span(&self) -> Option<Span> {
        match self {
            FlowError::Parse(e) => Some(e.span()),
            FlowError::UnknownCellOrEntry { span, .. }
            | FlowError::IllegalNesting { span, .. }
            | FlowError::DuplicateTask { span, .. }
            | FlowError::BadPriority { span, .. } => Some(*span),
            FlowError::NoTasks => None,
        }
    }
}

/// Parses a flow file and resolves every invocation against `model`.
pub fn parse_callflow(text: &str, model: &ComponentModel) -> Result<CallFlowSet, FlowError> {
    let tokens = tokenize_dialect(text, Dialect::Flow).map_err(ParseError::from)?;
    let mut p = Parser::new(&tokens, text);
    let mut tasks: Vec<TaskDef> = Vec::new();
    while !p.at_end() {
        let start = p.expect(TokenKind::Keyword(Keyword::Task))?.span;
        let name = p.ident()?;
        p.expect(TokenKind::Keyword(Keyword::Priority))?;
        let (prio, prio_span) = p.int()?;
        if !(1..=u32::MAX as i128).contains(&prio) {
            return Err(FlowError::BadPriority {
                name: name.name,
                value: prio,
                span: prio_span,
            });
        }
        if tasks.iter().any(|t| t.name == name.name) {
            return Err(FlowError::DuplicateTask {
                name: name.name,
                span: name.span,
            });
        }
        p.expect(TokenKind::LBrace)?;
        let roots = invocation_list(&mut p, model, None)?;
        let end = p.expect(TokenKind::RBrace)?.span;
        tasks.push(TaskDef {
            name: name.name,
            priority: Priority(prio as u32),
            roots,
            span: start.to(end),
        });
    }
    if tasks.is_empty() {
        return Err(FlowError::NoTasks);
    }
    Ok(CallFlowSet { tasks })
}

fn invocation_list(
    p: &mut Parser<'_>,
    model: &ComponentModel,
    parent: Option<&FlowTarget>,
) -> Result<Vec<FlowNode>, FlowError> {
    let mut out = Vec::new();
    while p.peek_kind(0) == Some(TokenKind::Ident) {
        let cell = p.ident()?;
        p.expect(TokenKind::Dot)?;
        let entry = p.ident()?;
        p.expect(TokenKind::Dot)?;
        let function = p.ident()?;
        let span = cell.span.to(function.span);
        let target = FlowTarget {
            cell: cell.name,
            entry: entry.name,
            function: function.name,
        };
        let resolved = model
            .entry_signature(&target.cell, &target.entry)
            .is_some_and(|sig| sig.function(&target.function).is_some());
        if !resolved {
            return Err(FlowError::UnknownCellOrEntry {
                target: target.to_string(),
                span,
            });
        }
        if let Some(parent) = parent {
            if !model.is_joined(&parent.cell, &target.cell, &target.entry) {
                return Err(FlowError::IllegalNesting {
                    parent: parent.to_string(),
                    child: target.to_string(),
                    span,
                });
            }
        }
        let children = if p.eat(TokenKind::LBrace).is_some() {
            let c = invocation_list(p, model, Some(&target))?;
            p.expect(TokenKind::RBrace)?;
            c
        } else {
            Vec::new()
        };
        p.eat(TokenKind::Semi);
        out.push(FlowNode {
            target,
            children,
            span: span.to(p.prev_span()),
        });
    }
    if !matches!(p.peek_kind(0), Some(TokenKind::RBrace)) {
        return Err(p.unexpected(&[TokenKind::Ident, TokenKind::RBrace]).into());
    }
    Ok(out)
}

/// Which tasks reach which cells, and how often.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AccessMatrix {
    /// Every model cell is present; unreached cells map to the empty set.
    pub access: BTreeMap<String, BTreeSet<String>>,
    pub invocation_count: BTreeMap<(String, String), usize>,
}

impl AccessMatrix {
    pub fn tasks_of(&self, cell: &str) -> impl Iterator<Item = &str> {
        self.access
            .get(cell)
            .into_iter()
            .flatten()
            .map(String::as_str)
    }

    pub fn task_count(&self, cell: &str) -> usize {
        self.access.get(cell).map_or(0, BTreeSet::len)
    }

    pub fn count(&self, cell: &str, task: &str) -> usize {
        self.invocation_count
            .get(&(cell.to_string(), task.to_string()))
            .copied()
            .unwrap_or(0)
    }
}

pub fn compute_access_matrix(model: &ComponentModel, flows: &CallFlowSet) -> AccessMatrix {
    let mut access: BTreeMap<String, BTreeSet<String>> = model
        .cells
        .keys()
        .map(|c| (c.clone(), BTreeSet::new()))
        .collect();
    let mut counts: HashMap<(String, String), usize> = HashMap::new();
    for task in &flows.tasks {
        task.walk(|node, _| {
            *counts
                .entry((node.target.cell.clone(), task.name.clone()))
                .or_default() += 1;
            access
                .entry(node.target.cell.clone())
                .or_default()
                .insert(task.name.clone());
        });
    }
    AccessMatrix {
        access,
        invocation_count: counts.into_iter().collect(),
    }
}
