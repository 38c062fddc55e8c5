//! Randomized invariants across the library surface.

use proptest::prelude::*;

use elimq::ordering::{greedy_order, symbolic_fill_count, OrderingAction};
use elimq::qlearn::{q_update, Domain, QTable, StateKey, TrainConfig};
use elimq::scheduling::{
    list_schedule, validate_schedule, MachineModel, SchedulerAction, Task, TaskDag,
};
use elimq::sparse::{
    load_matrix_market, write_matrix_market, Permutation, SparseMatrix, SparsePattern,
};

fn symmetric_pattern() -> impl Strategy<Value = SparsePattern> {
    (2usize..10, any::<u64>()).prop_map(|(n, seed)| {
        let mut entries: Vec<(usize, usize)> = (0..n).map(|i| (i, i)).collect();
        let mut state = seed;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 33) as f64 / (1u64 << 31) as f64
        };
        for i in 0..n {
            for j in i + 1..n {
                if next() < 0.4 {
                    entries.push((i, j));
                    entries.push((j, i));
                }
            }
        }
        SparsePattern::new(n, entries).unwrap()
    })
}

fn shuffled_permutation(n: usize, seed: u64) -> Permutation {
    let mut state = seed;
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let j = ((state >> 33) as usize) % (i + 1);
        order.swap(i, j);
    }
    Permutation::from_order(order).unwrap()
}

proptest! {
    #[test]
    fn permute_round_trips(p in symmetric_pattern(), seed in any::<u64>()) {
        let perm = shuffled_permutation(p.n(), seed);
        let there = p.permute(&perm).unwrap();
        let back = there.permute(&perm.inverted()).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn symmetrize_is_idempotent(p in symmetric_pattern()) {
        let s = p.symmetrize();
        prop_assert_eq!(s.symmetrize(), s);
    }

    #[test]
    fn matrix_market_round_trips(p in symmetric_pattern(), scale in 1.0f64..100.0) {
        let values: Vec<f64> = p
            .entries()
            .iter()
            .map(|&(r, c)| if r == c { scale + r as f64 } else { -1.0 / (1.0 + (r + c) as f64) })
            .collect();
        let m = SparseMatrix::new(p, values).unwrap();
        let text = write_matrix_market(&m);
        let back: SparseMatrix<f64> = load_matrix_market(&text).unwrap();
        prop_assert_eq!(back, m);
    }

    #[test]
    fn greedy_fill_matches_symbolic_recount(
        p in symmetric_pattern(),
        action_id in 0usize..5,
    ) {
        let action = OrderingAction::from_id(action_id).unwrap();
        let r = greedy_order(&p, action);
        let recount = symbolic_fill_count(&p, &r.perm).unwrap();
        prop_assert_eq!(recount, r.total_fill);
    }

    #[test]
    fn list_schedules_are_valid(
        n in 2usize..9,
        seed in any::<u64>(),
        workers in 1usize..4,
        heuristic_id in 0usize..4,
    ) {
        let mut state = seed;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            state >> 33
        };
        let tasks: Vec<Task> = (0..n)
            .map(|id| Task {
                id,
                work: (next() % 5 + 1) as f64,
                memory: (next() % 3 + 1) as f64,
                frontal: id,
            })
            .collect();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if next() % 10 < 3 {
                    edges.push((i, j));
                }
            }
        }
        let dag = TaskDag::new(tasks, edges).unwrap();
        let machine = MachineModel::uniform(workers, 1.0, 0.0);
        let h = SchedulerAction::from_id(heuristic_id).unwrap();
        let s = list_schedule(&dag, &machine, h).unwrap();
        prop_assert!(validate_schedule(&dag, &machine, &s));
        // makespan can never beat the critical path or perfect speedup
        let lb = dag.critical_path().max(dag.total_work() / workers as f64);
        prop_assert!(s.metrics.makespan >= lb - 1e-9);
    }

    #[test]
    fn q_update_moves_toward_target(
        q0 in -10.0f64..10.0,
        r in -5.0f64..5.0,
        alpha in 0.01f64..1.0,
        gamma in 0.0f64..1.0,
    ) {
        let mut t = QTable::new(Domain::Ordering);
        let s = StateKey::new(Domain::Ordering, vec![0]);
        let s2 = StateKey::terminal(Domain::Ordering, vec![1]);
        let cfg = TrainConfig { alpha: 1.0, gamma, ..TrainConfig::default() };
        // seed Q(s, 0) = q0 exactly with a full-strength update
        q_update(&mut t, &s, 0, q0, &s2, true, &cfg).unwrap();
        let cfg = TrainConfig { alpha, gamma, ..TrainConfig::default() };
        let q1 = q_update(&mut t, &s, 0, r, &s2, true, &cfg).unwrap();
        // terminal backup: target is exactly r
        let before = (q0 - r).abs();
        let after = (q1 - r).abs();
        prop_assert!(after <= before + 1e-12);
        prop_assert!((q1 - (q0 + alpha * (r - q0))).abs() <= 1e-12);
    }
}
