//! Seeded random systems and an independent race oracle, shared by the
//! property and acceptance suites.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tecsoe::callflow::{CallFlowSet, FlowNode};
use tecsoe::model::ComponentModel;
use tecsoe::optimizer::LockPlan;

pub const MAX_CELLS: usize = 5;
pub const MAX_TASKS: usize = 3;
pub const MAX_INVOCATIONS: usize = 6;
pub const MAX_DEPTH: usize = 3;

#[derive(Debug, Clone)]
pub struct RandomSystem {
    pub seed: u64,
    pub cdl: String,
    pub flow: String,
}

struct CellSpec {
    name: String,
    celltype: String,
    callees: Vec<usize>,
}

/// A valid, acyclic system: cells only call cells with a higher index, so
/// nesting follows one global order. Leaf cells share celltypes, which
/// exercises every dispatch mode.
pub fn random_system(seed: u64) -> RandomSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=MAX_CELLS);

    let mut cells = Vec::new();
    for i in 0..n {
        let callees: Vec<usize> = (i + 1..n).filter(|_| rng.gen_bool(0.4)).collect();
        let stateful = rng.gen_bool(0.7);
        let celltype = if callees.is_empty() {
            if stateful { "tLeafV" } else { "tLeafN" }.to_string()
        } else {
            format!("tNode{i}")
        };
        cells.push((
            CellSpec {
                name: format!("C{i}"),
                celltype,
                callees,
            },
            stateful,
        ));
    }

    let mut cdl = String::from("signature sOp {\n    void op(void);\n    int32 get(void);\n};\n\n");
    cdl.push_str(
        "celltype tLeafV {\n    entry sOp eOp;\n    var {\n        int32 v = 0;\n    };\n};\n\n",
    );
    cdl.push_str(
        "celltype tLeafN {\n    entry sOp eOp;\n    attr {\n        int32 a = 1;\n    };\n};\n\n",
    );
    for (c, stateful) in &cells {
        if c.callees.is_empty() {
            continue;
        }
        cdl.push_str(&format!("celltype {} {{\n    entry sOp eOp;\n", c.celltype));
        for j in &c.callees {
            cdl.push_str(&format!("    call sOp cC{j};\n"));
        }
        if *stateful {
            cdl.push_str("    var {\n        int32 v = 0;\n    };\n");
        }
        cdl.push_str("};\n\n");
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    for i in order {
        let c = &cells[i].0;
        cdl.push_str(&format!("cell {} {} {{\n", c.celltype, c.name));
        for j in &c.callees {
            cdl.push_str(&format!("    cC{j} = C{j}.eOp;\n"));
        }
        cdl.push_str("};\n\n");
    }

    let specs: Vec<&CellSpec> = cells.iter().map(|(c, _)| c).collect();
    let tasks = rng.gen_range(1..=MAX_TASKS);
    let mut flow = String::new();
    for t in 0..tasks {
        let prio = rng.gen_range(1..=3);
        flow.push_str(&format!("task T{t} priority {prio} {{\n"));
        let mut budget = rng.gen_range(1..=MAX_INVOCATIONS);
        while budget > 0 {
            let root = rng.gen_range(0..n);
            flow.push_str(&node(&mut rng, &specs, root, 1, &mut budget));
        }
        flow.push_str("}\n");
    }
    RandomSystem { seed, cdl, flow }
}

fn node(
    rng: &mut ChaCha8Rng,
    cells: &[&CellSpec],
    i: usize,
    depth: usize,
    budget: &mut usize,
) -> String {
    *budget -= 1;
    let indent = "    ".repeat(depth);
    let f = if rng.gen_bool(0.5) { "op" } else { "get" };
    let c = cells[i];
    let mut body = String::new();
    while depth < MAX_DEPTH && *budget > 0 && !c.callees.is_empty() && rng.gen_bool(0.5) {
        let k = *c.callees.choose(rng).unwrap();
        body.push_str(&node(rng, cells, k, depth + 1, budget));
    }
    if body.is_empty() {
        format!("{indent}{}.eOp.{f};\n", c.name)
    } else {
        format!("{indent}{}.eOp.{f} {{\n{body}{indent}}}\n", c.name)
    }
}

/// Locks held by a task at the moment it enters one invocation: its own
/// lock (taken just before entering) plus those of its locked ancestors.
fn held_at_entry<'a>(
    node: &'a FlowNode,
    ancestors: &[&'a FlowNode],
    plan: &LockPlan,
) -> BTreeSet<String> {
    ancestors
        .iter()
        .chain(std::iter::once(&node))
        .filter(|n| plan.kind(&n.target.cell).is_lock())
        .map(|n| n.target.cell.clone())
        .collect()
}

/// Cells a correct simulator must report as racy under `plan`: stateful
/// cells invoked by two different tasks whose lock sets at entry are
/// disjoint. Nesting follows one global order, so any such pair of
/// positions is jointly reachable.
pub fn expected_races(
    model: &ComponentModel,
    flows: &CallFlowSet,
    plan: &LockPlan,
) -> BTreeSet<String> {
    let mut entries: BTreeMap<String, Vec<(usize, BTreeSet<String>)>> = BTreeMap::new();
    for (t, task) in flows.tasks.iter().enumerate() {
        task.walk(|n, anc| {
            if model.has_vars(&n.target.cell) {
                entries
                    .entry(n.target.cell.clone())
                    .or_default()
                    .push((t, held_at_entry(n, anc, plan)));
            }
        });
    }
    entries
        .into_iter()
        .filter(|(_, es)| {
            es.iter()
                .any(|(ta, ha)| es.iter().any(|(tb, hb)| ta != tb && ha.is_disjoint(hb)))
        })
        .map(|(c, _)| c)
        .collect()
}
