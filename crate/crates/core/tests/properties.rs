mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{expected_races, random_system};
use tecsoe::callflow::{compute_access_matrix, parse_callflow, CallFlowSet, Priority, TaskDef};
use tecsoe::cdl::parse_cdl;
use tecsoe::model::{build_model, ComponentModel};
use tecsoe::optimizer::{initial_plan, necessity, optimize, CellLock, LockKind, LockReason};
use tecsoe::simcheck::{count_lock_ops, explore, lower_to_sim, Bounds};

fn load(seed: u64) -> (ComponentModel, CallFlowSet) {
    let sys = random_system(seed);
    let m = build_model(&parse_cdl(&sys.cdl).unwrap())
        .unwrap_or_else(|e| panic!("seed {seed}: {e}\n{}", sys.cdl));
    let f =
        parse_callflow(&sys.flow, &m).unwrap_or_else(|e| panic!("seed {seed}: {e}\n{}", sys.flow));
    (m, f)
}

fn racy_cells(m: &ComponentModel, f: &CallFlowSet, plan: &tecsoe::LockPlan) -> BTreeSet<String> {
    let program = lower_to_sim(m, f, plan);
    let ex = explore(&program, Bounds::default());
    assert!(ex.incomplete.is_none());
    assert!(
        ex.deadlocks.is_empty(),
        "nested locks in one global order cannot deadlock"
    );
    for r in &ex.races {
        assert!(
            r.replays(&program),
            "witness for {} does not replay",
            r.cell
        );
    }
    ex.races.iter().map(|r| r.cell.clone()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cdl_round_trips(seed in any::<u64>()) {
        let sys = random_system(seed);
        let ast = parse_cdl(&sys.cdl).unwrap();
        let printed = ast.to_string();
        let again = parse_cdl(&printed).unwrap();
        prop_assert_eq!(ast.without_spans(), again.without_spans());
        prop_assert_eq!(printed.clone(), again.to_string());
    }

    #[test]
    fn flows_round_trip(seed in any::<u64>()) {
        let (m, f) = load(seed);
        let again = parse_callflow(&f.to_string(), &m).unwrap();
        prop_assert_eq!(f.to_string(), again.to_string());
    }

    #[test]
    fn declaration_order_is_irrelevant(seed in any::<u64>(), shuffle in any::<u64>()) {
        let sys = random_system(seed);
        let (m, f) = load(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(shuffle);
        let mut ast = parse_cdl(&sys.cdl).unwrap();
        ast.signatures.shuffle(&mut rng);
        ast.celltypes.shuffle(&mut rng);
        ast.cells.shuffle(&mut rng);
        let m2 = build_model(&ast).unwrap();
        prop_assert_eq!(&m.cells, &m2.cells);
        prop_assert_eq!(&m.joins, &m2.joins);

        let mut f2 = f.clone();
        f2.tasks.shuffle(&mut rng);
        prop_assert_eq!(compute_access_matrix(&m, &f), compute_access_matrix(&m2, &f2));
        prop_assert_eq!(optimize(&m, &f), optimize(&m2, &f2));
    }

    #[test]
    fn invocation_counts_sum_to_node_count(seed in any::<u64>()) {
        let (m, f) = load(seed);
        let am = compute_access_matrix(&m, &f);
        let total: usize = am.invocation_count.values().sum();
        let nodes: usize = f.tasks.iter().map(TaskDef::node_count).sum();
        prop_assert_eq!(total, nodes);
        for (cell, tasks) in &am.access {
            for t in tasks {
                prop_assert!(am.count(cell, t) > 0);
            }
        }
    }

    #[test]
    fn necessity_is_monotone_in_tasks(seed in any::<u64>(), prio in 1u32..4) {
        let (m, f) = load(seed);
        let before = necessity(&compute_access_matrix(&m, &f), &m);
        let mut more = f.clone();
        let mut extra = more.tasks[0].clone();
        extra.name = "Extra".into();
        extra.priority = Priority(prio);
        more.tasks.push(extra);
        let after = necessity(&compute_access_matrix(&m, &more), &m);
        for (cell, needed) in before {
            prop_assert!(!needed || after[&cell], "{cell} lost its lock");
        }
    }

    #[test]
    fn optimized_plan_is_race_free(seed in any::<u64>()) {
        let (m, f) = load(seed);
        let plan = optimize(&m, &f);
        prop_assert_eq!(expected_races(&m, &f, &plan), BTreeSet::new());
        prop_assert_eq!(racy_cells(&m, &f, &plan), BTreeSet::new());
    }

    #[test]
    fn simulator_agrees_with_oracle_on_weakened_plans(seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let (m, f) = load(seed);
        let mut plan = optimize(&m, &f);
        let locked: Vec<String> = plan.locked_cells().map(|(c, _)| c.to_string()).collect();
        prop_assume!(!locked.is_empty());
        let victim = pick.get(&locked).clone();
        plan.per_cell.insert(victim, CellLock { kind: LockKind::NoLock, reason: LockReason::Required });
        prop_assert_eq!(racy_cells(&m, &f, &plan), expected_races(&m, &f, &plan));
    }

    #[test]
    fn optimization_never_adds_acquires(seed in any::<u64>()) {
        let (m, f) = load(seed);
        let p1 = count_lock_ops(&lower_to_sim(&m, &f, &initial_plan(&m, Some(&f)))).total;
        let p2 = count_lock_ops(&lower_to_sim(&m, &f, &optimize(&m, &f))).total;
        prop_assert!(p2 <= p1);
    }
}
