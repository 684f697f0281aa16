//! Exhaustive interleaving checker for lock plans.
//!
//! Each task's call flow is flattened into a step list in which a locked
//! cell's entry function is bracketed by `Acquire`/`Release`, so the critical
//! section spans the whole entry function including nested calls. Every
//! interleaving of the task step lists is then enumerated (acquire blocks
//! while another task holds the lock) looking for two tasks inside the same
//! stateful cell at once, and for states where no task can move.
//!
//! Priorities are not scheduled: all interleavings are explored, which covers
//! every fixed-priority schedule. Semaphores and ceiling mutexes are both
//! modeled as binary locks.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::callflow::{CallFlowSet, FlowNode};
use crate::model::ComponentModel;
use crate::optimizer::LockPlan;

/// Index into [`SimProgram::cells`]; locks are identified by their owning cell.
pub type CellId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Step {
    Acquire(CellId),
    Enter(CellId),
    Access(CellId),
    Exit(CellId),
    Release(CellId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimTask {
    pub name: String,
    pub steps: Vec<Step>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimProgram {
    pub cells: Vec<String>,
    pub has_vars: Vec<bool>,
    pub tasks: Vec<SimTask>,
}

impl SimProgram {
    pub fn cell_id(&self, name: &str) -> Option<CellId> {
        self.cells.iter().position(|c| c == name)
    }

    pub fn step_name(&self, step: Step) -> String {
        match step {
            Step::Acquire(c) => format!("Acquire({})", self.cells[c]),
            Step::Enter(c) => format!("Enter({})", self.cells[c]),
            Step::Access(c) => format!("Access({})", self.cells[c]),
            Step::Exit(c) => format!("Exit({})", self.cells[c]),
            Step::Release(c) => format!("Release({})", self.cells[c]),
        }
    }

    /// Lock ids held by `task` just before it executes step `pc`.
    fn held_at(&self, task: usize, pc: usize) -> BTreeSet<CellId> {
        let mut held = BTreeSet::new();
        for s in &self.tasks[task].steps[..pc] {
            match *s {
                Step::Acquire(l) => {
                    held.insert(l);
                }
                Step::Release(l) => {
                    held.remove(&l);
                }
                _ => {}
            }
        }
        held
    }

    /// Cells `task` is inside (entered, not exited) just before step `pc`.
    fn inside_at(&self, task: usize, pc: usize) -> BTreeSet<CellId> {
        let mut inside = BTreeSet::new();
        for s in &self.tasks[task].steps[..pc] {
            match *s {
                Step::Enter(c) => {
                    inside.insert(c);
                }
                Step::Exit(c) => {
                    inside.remove(&c);
                }
                _ => {}
            }
        }
        inside
    }
}

/// Flattens every task's flow under `plan`.
pub fn lower_to_sim(model: &ComponentModel, flows: &CallFlowSet, plan: &LockPlan) -> SimProgram {
    let cells: Vec<String> = model.cells.keys().cloned().collect();
    let has_vars = model.cells.values().map(|c| c.has_vars).collect();
    let index: HashMap<&str, CellId> = cells
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_str(), i))
        .collect();

    fn lower(
        node: &FlowNode,
        index: &HashMap<&str, CellId>,
        model: &ComponentModel,
        plan: &LockPlan,
        out: &mut Vec<Step>,
    ) {
        let c = index[node.target.cell.as_str()];
        let locked = plan.kind(&node.target.cell).is_lock();
        if locked {
            out.push(Step::Acquire(c));
        }
        out.push(Step::Enter(c));
        if model.has_vars(&node.target.cell) {
            out.push(Step::Access(c));
        }
        for child in &node.children {
            lower(child, index, model, plan, out);
        }
        out.push(Step::Exit(c));
        if locked {
            out.push(Step::Release(c));
        }
    }

    let tasks = flows
        .tasks
        .iter()
        .map(|t| {
            let mut steps = Vec::new();
            for r in &t.roots {
                lower(r, &index, model, plan, &mut steps);
            }
            SimTask {
                name: t.name.clone(),
                steps,
            }
        })
        .collect();
    SimProgram {
        cells,
        has_vars,
        tasks,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    pub max_states: usize,
    pub max_depth: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            max_states: 1_000_000,
            max_depth: 100_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TraceStep {
    pub task: usize,
    pub step: Step,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Race {
    pub cell: String,
    /// Task already inside the cell.
    pub holder: String,
    /// Task entering it.
    pub intruder: String,
    /// Ends with the intruder's `Enter`.
    pub witness: Vec<TraceStep>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Deadlock {
    /// Blocked tasks, in task order.
    pub tasks: Vec<String>,
    pub witness: Vec<TraceStep>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OverheadReport {
    pub total: usize,
    pub per_cell: BTreeMap<String, usize>,
}

impl fmt::Display for OverheadReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} acquires", self.total)?;
        if !self.per_cell.is_empty() {
            let parts: Vec<String> = self
                .per_cell
                .iter()
                .map(|(c, n)| format!("{c}x{n}"))
                .collect();
            write!(f, " ({})", parts.join(", "))?;
        }
        Ok(())
    }
}

/// Static count of acquire steps, per owning cell and in total. Every
/// complete interleaving executes each step exactly once, so this is also
/// the dynamic count.
pub fn count_lock_ops(program: &SimProgram) -> OverheadReport {
    let mut report = OverheadReport::default();
    for t in &program.tasks {
        for s in &t.steps {
            if let Step::Acquire(l) = s {
                report.total += 1;
                *report
                    .per_cell
                    .entry(program.cells[*l].clone())
                    .or_default() += 1;
            }
        }
    }
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("state bound exceeded after {states_visited} states; result is inconclusive")]
    BoundExceeded { states_visited: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exploration {
    pub states_visited: usize,
    /// Number of distinct maximal interleavings (saturating).
    pub interleavings: u128,
    pub races: Vec<Race>,
    pub deadlocks: Vec<Deadlock>,
    pub overhead: OverheadReport,
    /// Set when a bound stopped the search early.
    pub incomplete: Option<SimError>,
}

impl Exploration {
    pub fn is_clean(&self) -> bool {
        self.incomplete.is_none() && self.races.is_empty() && self.deadlocks.is_empty()
    }

    pub fn report(&self, program: &SimProgram) -> String {
        let mut out = String::new();
        let status = match self.incomplete {
            None => "complete".to_string(),
            Some(e) => format!("inconclusive ({e})"),
        };
        out.push_str(&format!("status\t{status}\n"));
        out.push_str(&format!("states\t{}\n", self.states_visited));
        out.push_str(&format!("interleavings\t{}\n", self.interleavings));
        out.push_str(&format!("races\t{}\n", self.races.len()));
        for r in &self.races {
            out.push_str(&format!(
                "race\t{}\t{}\t{}\t{}\n",
                r.cell,
                r.holder,
                r.intruder,
                format_trace(program, &r.witness)
            ));
        }
        out.push_str(&format!("deadlocks\t{}\n", self.deadlocks.len()));
        for d in &self.deadlocks {
            out.push_str(&format!(
                "deadlock\t{}\t{}\n",
                d.tasks.join(","),
                format_trace(program, &d.witness)
            ));
        }
        out.push_str(&format!("acquires\t{}\n", self.overhead.total));
        for (c, n) in &self.overhead.per_cell {
            out.push_str(&format!("acquires\t{c}\t{n}\n"));
        }
        out
    }
}

pub fn format_trace(program: &SimProgram, trace: &[TraceStep]) -> String {
    trace
        .iter()
        .map(|t| {
            format!(
                "{}:{}",
                program.tasks[t.task].name,
                program.step_name(t.step)
            )
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Per-(task, pc) facts the search consults on every state.
struct Tables {
    held: Vec<Vec<BTreeSet<CellId>>>,
    inside: Vec<Vec<BTreeSet<CellId>>>,
}

impl Tables {
    fn new(p: &SimProgram) -> Self {
        let per = |f: &dyn Fn(usize, usize) -> BTreeSet<CellId>| {
            (0..p.tasks.len())
                .map(|t| (0..=p.tasks[t].steps.len()).map(|pc| f(t, pc)).collect())
                .collect()
        };
        Tables {
            held: per(&|t, pc| p.held_at(t, pc)),
            inside: per(&|t, pc| p.inside_at(t, pc)),
        }
    }
}

fn next_step(p: &SimProgram, pcs: &[u32], task: usize) -> Option<Step> {
    p.tasks[task].steps.get(pcs[task] as usize).copied()
}

fn enabled(p: &SimProgram, tables: &Tables, pcs: &[u32], task: usize) -> bool {
    match next_step(p, pcs, task) {
        None => false,
        Some(Step::Acquire(l)) => {
            (0..pcs.len()).all(|o| !tables.held[o][pcs[o] as usize].contains(&l))
        }
        Some(_) => true,
    }
}

/// If `task` stepping now is a racing `Enter`, the task already inside.
fn race_partner(p: &SimProgram, tables: &Tables, pcs: &[u32], task: usize) -> Option<usize> {
    let Some(Step::Enter(c)) = next_step(p, pcs, task) else {
        return None;
    };
    if !p.has_vars[c] {
        return None;
    }
    let mine = &tables.held[task][pcs[task] as usize];
    (0..pcs.len()).find(|&o| {
        o != task
            && tables.inside[o][pcs[o] as usize].contains(&c)
            && tables.held[o][pcs[o] as usize].is_disjoint(mine)
    })
}

/// Depth-first enumeration of all interleavings with state deduplication.
pub fn explore(program: &SimProgram, bounds: Bounds) -> Exploration {
    assert!(
        bounds.max_states > 0 && bounds.max_depth > 0,
        "bounds must be positive"
    );
    let tables = Tables::new(program);
    let ntasks = program.tasks.len();

    struct Frame {
        pcs: Vec<u32>,
        succ: Vec<usize>,
        next: usize,
        paths: u128,
    }

    // completed states -> number of maximal interleavings from there
    let mut memo: HashMap<Vec<u32>, u128> = HashMap::new();
    let mut races = Vec::new();
    let mut race_keys: HashSet<(CellId, usize, usize)> = HashSet::new();
    let mut deadlocks = Vec::new();
    let mut trace: Vec<TraceStep> = Vec::new();
    let mut incomplete = None;

    // Checks a freshly reached state; returns a frame, or the path count if it is terminal.
    let mut open = |pcs: Vec<u32>,
                    trace: &[TraceStep],
                    races: &mut Vec<Race>,
                    deadlocks: &mut Vec<Deadlock>|
     -> Result<Frame, (Vec<u32>, u128)> {
        let succ: Vec<usize> = (0..ntasks)
            .filter(|&t| enabled(program, &tables, &pcs, t))
            .collect();
        for &t in &succ {
            if let Some(o) = race_partner(program, &tables, &pcs, t) {
                let Some(Step::Enter(c)) = next_step(program, &pcs, t) else {
                    unreachable!()
                };
                let key = (c, o.min(t), o.max(t));
                if race_keys.insert(key) {
                    let mut witness = trace.to_vec();
                    witness.push(TraceStep {
                        task: t,
                        step: Step::Enter(c),
                    });
                    races.push(Race {
                        cell: program.cells[c].clone(),
                        holder: program.tasks[o].name.clone(),
                        intruder: program.tasks[t].name.clone(),
                        witness,
                    });
                }
            }
        }
        if succ.is_empty() {
            let blocked: Vec<String> = (0..ntasks)
                .filter(|&t| next_step(program, &pcs, t).is_some())
                .map(|t| program.tasks[t].name.clone())
                .collect();
            if !blocked.is_empty() {
                deadlocks.push(Deadlock {
                    tasks: blocked,
                    witness: trace.to_vec(),
                });
            }
            return Err((pcs, 1));
        }
        Ok(Frame {
            pcs,
            succ,
            next: 0,
            paths: 0,
        })
    };

    let mut stack: Vec<Frame> = Vec::new();
    match open(vec![0; ntasks], &trace, &mut races, &mut deadlocks) {
        Ok(f) => stack.push(f),
        Err((pcs, n)) => {
            memo.insert(pcs, n);
        }
    }

    while let Some(top) = stack.last_mut() {
        if top.next == top.succ.len() {
            let done = stack.pop().unwrap();
            trace.pop();
            if let Some(parent) = stack.last_mut() {
                parent.paths = parent.paths.saturating_add(done.paths);
            }
            memo.insert(done.pcs, done.paths);
            continue;
        }
        let task = top.succ[top.next];
        top.next += 1;
        let step = next_step(program, &top.pcs, task).unwrap();
        let mut pcs = top.pcs.clone();
        pcs[task] += 1;
        if let Some(&n) = memo.get(&pcs) {
            top.paths = top.paths.saturating_add(n);
            continue;
        }
        if memo.len() + stack.len() >= bounds.max_states || trace.len() + 1 > bounds.max_depth {
            incomplete = Some(SimError::BoundExceeded {
                states_visited: memo.len() + stack.len(),
            });
            break;
        }
        trace.push(TraceStep { task, step });
        match open(pcs, &trace, &mut races, &mut deadlocks) {
            Ok(f) => stack.push(f),
            Err((pcs, n)) => {
                trace.pop();
                let top = stack.last_mut().unwrap();
                top.paths = top.paths.saturating_add(n);
                memo.insert(pcs, n);
            }
        }
    }

    let interleavings = memo.get(&vec![0; ntasks]).copied().unwrap_or(0);
    Exploration {
        states_visited: memo.len() + stack.len(),
        interleavings,
        races,
        deadlocks,
        overhead: count_lock_ops(program),
        incomplete,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("step {index}: task {task} is finished")]
    Finished { index: usize, task: usize },
    #[error("step {index}: task {task} would execute a different step")]
    WrongStep { index: usize, task: usize },
    #[error("step {index}: task {task} is blocked")]
    Blocked { index: usize, task: usize },
}

/// Re-executes `trace` from the initial state, returning the final program
/// counters. Fails if any step is not the task's next step or is blocked.
pub fn replay(program: &SimProgram, trace: &[TraceStep]) -> Result<Vec<u32>, ReplayError> {
    let tables = Tables::new(program);
    let mut pcs = vec![0u32; program.tasks.len()];
    for (index, ts) in trace.iter().enumerate() {
        let task = ts.task;
        match next_step(program, &pcs, task) {
            None => return Err(ReplayError::Finished { index, task }),
            Some(s) if s != ts.step => return Err(ReplayError::WrongStep { index, task }),
            Some(_) => {}
        }
        if !enabled(program, &tables, &pcs, task) {
            return Err(ReplayError::Blocked { index, task });
        }
        pcs[task] += 1;
    }
    Ok(pcs)
}

impl Race {
    /// Whether the witness replays and its final step is an unprotected
    /// entry into a cell the holder is inside.
    pub fn replays(&self, program: &SimProgram) -> bool {
        let Some((last, prefix)) = self.witness.split_last() else {
            return false;
        };
        let Ok(pcs) = replay(program, prefix) else {
            return false;
        };
        if replay(program, &self.witness).is_err() {
            return false;
        }
        let tables = Tables::new(program);
        let holder = program.tasks.iter().position(|t| t.name == self.holder);
        race_partner(program, &tables, &pcs, last.task) == holder
            && program.tasks[last.task].name == self.intruder
            && matches!(last.step, Step::Enter(c) if program.cells[c] == self.cell)
    }
}

impl Deadlock {
    pub fn replays(&self, program: &SimProgram) -> bool {
        let Ok(pcs) = replay(program, &self.witness) else {
            return false;
        };
        let tables = Tables::new(program);
        let unfinished = (0..pcs.len()).any(|t| next_step(program, &pcs, t).is_some());
        unfinished && (0..pcs.len()).all(|t| !enabled(program, &tables, &pcs, t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::callflow::parse_callflow;
    use crate::cdl::parse_cdl;
    use crate::fixtures;
    use crate::model::build_model;
    use crate::optimizer::{initial_plan, optimize, CellLock, LockKind, LockReason};

    fn demo() -> (ComponentModel, CallFlowSet) {
        let m = build_model(&parse_cdl(fixtures::DEMO_CDL).unwrap()).unwrap();
        let f = parse_callflow(fixtures::DEMO_FLOW, &m).unwrap();
        (m, f)
    }

    fn names(p: &SimProgram, task: usize) -> Vec<String> {
        p.tasks[task]
            .steps
            .iter()
            .map(|s| p.step_name(*s))
            .collect()
    }

    #[test]
    fn demo_main_lowering() {
        let (m, f) = demo();
        let p = lower_to_sim(&m, &f, &optimize(&m, &f));
        assert_eq!(
            names(&p, 0),
            vec![
                "Enter(Ctrl1)",
                "Acquire(Sensor1)",
                "Enter(Sensor1)",
                "Access(Sensor1)",
                "Exit(Sensor1)",
                "Release(Sensor1)",
                "Enter(Motor1)",
                "Access(Motor1)",
                "Exit(Motor1)",
                "Exit(Ctrl1)",
            ]
        );
    }

    #[test]
    fn chain_member_access_is_inside_head_lock() {
        let m = build_model(&parse_cdl(fixtures::CHAIN_CDL).unwrap()).unwrap();
        let f = parse_callflow(fixtures::CHAIN_FLOW, &m).unwrap();
        let p = lower_to_sim(&m, &f, &optimize(&m, &f));
        let steps = names(&p, 0);
        let acq = steps.iter().position(|s| s == "Acquire(Ctrl2)").unwrap();
        let acc = steps.iter().position(|s| s == "Access(Filter1)").unwrap();
        let rel = steps.iter().position(|s| s == "Release(Ctrl2)").unwrap();
        assert!(acq < acc && acc < rel);
        assert!(!steps.iter().any(|s| s == "Acquire(Filter1)"));
        let e = explore(&p, Bounds::default());
        assert!(e.is_clean(), "{}", e.report(&p));
    }

    #[test]
    fn demo_optimized_is_clean() {
        let (m, f) = demo();
        let p = lower_to_sim(&m, &f, &optimize(&m, &f));
        let e = explore(&p, Bounds::default());
        assert!(e.is_clean(), "{}", e.report(&p));
        assert_eq!(e.overhead.total, 2);
    }

    #[test]
    fn demo_without_sensor_lock_races() {
        let (m, f) = demo();
        let mut plan = optimize(&m, &f);
        plan.per_cell.insert(
            "Sensor1".into(),
            CellLock {
                kind: LockKind::NoLock,
                reason: LockReason::SingleTask,
            },
        );
        let p = lower_to_sim(&m, &f, &plan);
        let e = explore(&p, Bounds::default());
        assert!(!e.races.is_empty());
        assert!(e.races.iter().all(|r| r.cell == "Sensor1"));
        assert!(e.races.iter().all(|r| r.replays(&p)));
        assert!(e.deadlocks.is_empty());
    }

    #[test]
    fn single_task_has_one_interleaving() {
        let (m, _) = demo();
        let f = parse_callflow(
            "task Solo priority 1 { Ctrl1.eBody.run { Motor1.eMotor.stop; } }",
            &m,
        )
        .unwrap();
        let p = lower_to_sim(&m, &f, &initial_plan(&m, Some(&f)));
        let e = explore(&p, Bounds::default());
        assert_eq!(e.interleavings, 1);
        assert!(e.is_clean());
    }

    #[test]
    fn interleaving_count_matches_binomial() {
        // two independent, unlocked tasks of a and b steps interleave C(a+b, a) ways
        let (m, _) = demo();
        let f = parse_callflow(
            "task A priority 1 { Motor1.eMotor.stop; }\ntask B priority 2 { Log1.eLog.put; }",
            &m,
        )
        .unwrap();
        let plan = optimize(&m, &f);
        let p = lower_to_sim(&m, &f, &plan);
        assert_eq!((p.tasks[0].steps.len(), p.tasks[1].steps.len()), (3, 3));
        assert_eq!(explore(&p, Bounds::default()).interleavings, 20);
    }

    #[test]
    fn lock_ops_demo() {
        let (m, f) = demo();
        let pass1 = count_lock_ops(&lower_to_sim(&m, &f, &initial_plan(&m, Some(&f))));
        assert_eq!(pass1.total, 4);
        assert_eq!(pass1.per_cell["Sensor1"], 2);
        assert_eq!(pass1.per_cell["Motor1"], 1);
        assert_eq!(pass1.per_cell["Log1"], 1);
        let pass2 = count_lock_ops(&lower_to_sim(&m, &f, &optimize(&m, &f)));
        assert_eq!(pass2.total, 2);
        assert_eq!(pass2.per_cell.keys().collect::<Vec<_>>(), vec!["Sensor1"]);
        let none = count_lock_ops(&lower_to_sim(&m, &f, &LockPlan::default()));
        assert_eq!(none.total, 0);
    }

    #[test]
    fn opposite_lock_order_deadlocks() {
        let p = SimProgram {
            cells: vec!["A".into(), "B".into()],
            has_vars: vec![true, true],
            tasks: vec![
                SimTask {
                    name: "X".into(),
                    steps: vec![
                        Step::Acquire(0),
                        Step::Acquire(1),
                        Step::Release(1),
                        Step::Release(0),
                    ],
                },
                SimTask {
                    name: "Y".into(),
                    steps: vec![
                        Step::Acquire(1),
                        Step::Acquire(0),
                        Step::Release(0),
                        Step::Release(1),
                    ],
                },
            ],
        };
        let e = explore(&p, Bounds::default());
        assert!(!e.deadlocks.is_empty());
        assert!(e.deadlocks.iter().all(|d| d.replays(&p)));
        assert_eq!(e.deadlocks[0].tasks, vec!["X", "Y"]);
    }

    #[test]
    fn bound_makes_result_inconclusive() {
        let (m, f) = demo();
        let p = lower_to_sim(&m, &f, &optimize(&m, &f));
        let e = explore(
            &p,
            Bounds {
                max_states: 5,
                max_depth: 1000,
            },
        );
        assert!(matches!(e.incomplete, Some(SimError::BoundExceeded { .. })));
        assert!(!e.is_clean());
    }

    #[test]
    fn replay_rejects_bad_traces() {
        let (m, f) = demo();
        let p = lower_to_sim(&m, &f, &optimize(&m, &f));
        let bad = [TraceStep {
            task: 0,
            step: Step::Exit(0),
        }];
        assert!(matches!(
            replay(&p, &bad),
            Err(ReplayError::WrongStep { .. })
        ));
    }
}
