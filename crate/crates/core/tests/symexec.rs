mod common;

use std::time::{Duration, Instant};

use common::{corpus, grid, load};
use deobbench_core::frontend::{parse_checked, Outcome, Program, RuntimeError, SourceUnit, DEFAULT_FUEL};
use deobbench_core::symexec::{explore, ExecStats, Exploration, ExplorationLimits, PathStatus, SymExpr};
use deobbench_core::transforms::{apply, TransformConfig, TransformKind};

fn entry_name(unit: &SourceUnit) -> &str {
    &unit.functions.last().unwrap().name
}

fn run_entry(unit: &SourceUnit, args: &[i32]) -> Outcome {
    let f = unit.functions.last().unwrap();
    let program = Program::compile(unit).unwrap();
    let entry = program.entry(&f.name, f.params.len()).unwrap();
    program.run(entry, args, DEFAULT_FUEL, None)
}

fn holds(constraints: &[SymExpr], input: &[i32]) -> bool {
    constraints.iter().all(|c| c.eval(input) != 0)
}

fn feasible(x: &Exploration) -> usize {
    x.records
        .iter()
        .filter(|r| matches!(r.status, PathStatus::Completed | PathStatus::Error))
        .count()
}

/// Every witness satisfies its path constraints and reproduces the recorded
/// outcome when run concretely.
fn check_witnesses(unit: &SourceUnit, x: &Exploration) {
    for r in &x.records {
        let Some(w) = &r.witness else { continue };
        let input = w.values();
        assert!(holds(&r.constraints, &input), "witness {input:?} violates its path");
        let expected = match (r.status, r.error) {
            (PathStatus::Error, Some(e)) => Outcome::RuntimeError(e),
            (PathStatus::Completed, None) => Outcome::Returned(r.return_value),
            other => panic!("unexpected record shape {other:?}"),
        };
        assert_eq!(run_entry(unit, &input), expected, "replaying {input:?}");
    }
}

#[test]
fn f_has_two_paths_split_on_sign() {
    let unit = load("listings", "f_before.c");
    let x = explore(&unit, "f", &ExplorationLimits::default()).unwrap();
    assert_eq!(
        x.stats,
        ExecStats {
            paths_explored: 2,
            tests_generated: 2,
            solver_calls: 2,
            timeouts: 0,
            max_depth_reached: 1,
        }
    );
    let mut shown: Vec<String> = x
        .records
        .iter()
        .map(|r| r.constraints.iter().map(|c| c.display(&x.params)).collect::<Vec<_>>().join(" && "))
        .collect();
    shown.sort();
    assert_eq!(shown, vec!["!(x > 0)".to_string(), "x > 0".to_string()]);
    check_witnesses(&unit, &x);
}

#[test]
fn opaque_guard_is_pruned_without_losing_paths() {
    let g = load("listings", "g_before.c");
    let limits = ExplorationLimits::default();
    let plain = explore(&g, "g", &limits).unwrap();
    for seed in [0, 1, 2, 3] {
        let cfg = TransformConfig { seed, ..TransformConfig::default() };
        let op = apply(TransformKind::OP, &g, &cfg).unwrap().output;
        let x = explore(&op, "g", &limits).unwrap();
        assert_eq!(feasible(&x), feasible(&plain));
        assert!(x.records.iter().any(|r| r.status == PathStatus::PrunedInfeasible));
        check_witnesses(&op, &x);
    }
}

#[test]
fn straight_line_code_has_one_path() {
    let unit = parse_checked("id.c", "int id(int x) { return x; }").unwrap();
    let x = explore(&unit, "id", &ExplorationLimits::default()).unwrap();
    assert_eq!(x.records.len(), 1);
    assert!(x.records[0].constraints.is_empty());
    assert_eq!(x.stats.tests_generated, 1);
    assert_eq!(x.stats.max_depth_reached, 0);
}

#[test]
fn division_by_symbolic_zero_is_an_error_path() {
    let unit = load("corpus", "unchecked_ratio.c");
    let x = explore(&unit, entry_name(&unit), &ExplorationLimits::default()).unwrap();
    let errors: Vec<_> = x.records.iter().filter(|r| r.status == PathStatus::Error).collect();
    assert_eq!(errors.len(), 1);
    assert_eq!(errors[0].error, Some(RuntimeError::DivisionByZero));
    assert_eq!(errors[0].witness.as_ref().unwrap().values(), vec![5]);
}

#[test]
fn unbounded_loop_hits_the_unroll_cap() {
    let unit = load("corpus", "drain_tank.c");
    let limits = ExplorationLimits::default();
    let x = explore(&unit, entry_name(&unit), &limits).unwrap();
    assert!(x.hit_limits(&limits));
    assert!(x.records.iter().any(|r| r.status == PathStatus::BudgetExhausted));
}

#[test]
fn corpus_paths_partition_the_input_domain() {
    let limits = ExplorationLimits::default();
    for (name, _, unit) in corpus() {
        let f = unit.functions.last().unwrap();
        let x = explore(&unit, &f.name, &limits).unwrap();
        check_witnesses(&unit, &x);
        if x.hit_limits(&limits) {
            continue;
        }
        let paths: Vec<_> = x
            .records
            .iter()
            .filter(|r| matches!(r.status, PathStatus::Completed | PathStatus::Error))
            .collect();
        // Dense for one input, a lattice over the domain otherwise.
        for input in grid(f.params.len(), limits.domain.0, limits.domain.1, 4096) {
            let matching: Vec<_> = paths.iter().filter(|r| holds(&r.constraints, &input)).collect();
            assert_eq!(matching.len(), 1, "{name}: {input:?} lies on {} paths", matching.len());
            let outcome = run_entry(&unit, &input);
            match matching[0].status {
                PathStatus::Error => assert_eq!(outcome, Outcome::RuntimeError(matching[0].error.unwrap())),
                _ => assert!(matches!(outcome, Outcome::Returned(_)), "{name}: {input:?} -> {outcome}"),
            }
        }
    }
}

#[test]
fn exploration_is_deterministic() {
    let limits = ExplorationLimits::default();
    for (_, _, unit) in corpus().into_iter().take(8) {
        let a = explore(&unit, entry_name(&unit), &limits).unwrap();
        let b = explore(&unit, entry_name(&unit), &limits).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn tighter_path_cap_never_explores_more() {
    let unit = load("corpus", "parity_bits.c");
    let mut previous = 0;
    for max_paths in [1, 4, 16, 64, 2000] {
        let limits = ExplorationLimits { max_paths, ..ExplorationLimits::default() };
        let x = explore(&unit, entry_name(&unit), &limits).unwrap();
        assert!(x.stats.paths_explored <= max_paths as u64);
        assert!(x.stats.paths_explored >= previous);
        previous = x.stats.paths_explored;
    }
    assert_eq!(previous, 256);
}

#[test]
fn obfuscated_corpus_explores_in_desk_time() {
    let limits = ExplorationLimits::default();
    let start = Instant::now();
    for (name, _, unit) in corpus() {
        for kind in TransformKind::ALL {
            let out = apply(kind, &unit, &TransformConfig::default()).unwrap().output;
            let x = explore(&out, entry_name(&out), &limits).unwrap();
            check_witnesses(&out, &x);
            assert!(x.stats.paths_explored > 0, "{name} {kind:?}");
        }
    }
    assert!(start.elapsed() < Duration::from_secs(120), "took {:?}", start.elapsed());
}

#[test]
fn solve_returns_first_value_in_scan_order() {
    use deobbench_core::frontend::BinaryOp;
    use deobbench_core::symexec::{solve, SolveOutcome, TestCase};
    let limits = ExplorationLimits::default();
    let params = vec!["x".to_string()];
    let gt = SymExpr::binary(BinaryOp::Gt, SymExpr::Var(0), SymExpr::Const(0));
    let brute = (limits.domain.0..=limits.domain.1).find(|&v| gt.eval(&[v]) != 0).unwrap();
    assert_eq!(
        solve(std::slice::from_ref(&gt), &params, &limits),
        SolveOutcome::Sat(TestCase { objects: vec![("x".into(), brute)] })
    );
    let lt = SymExpr::binary(BinaryOp::Lt, SymExpr::Var(0), SymExpr::Const(0));
    assert_eq!(solve(&[gt, lt], &params, &limits), SolveOutcome::UnsatWithinDomain);
    assert_eq!(
        solve(&[], &params, &limits),
        SolveOutcome::Sat(TestCase { objects: vec![("x".into(), 0)] })
    );
}

#[test]
fn count_tests_counts_witnesses() {
    use deobbench_core::symexec::count_tests;
    let unit = load("listings", "f_before.c");
    let x = explore(&unit, "f", &ExplorationLimits::default()).unwrap();
    assert_eq!(count_tests(&x.records), 2);
    assert_eq!(count_tests(&[]), 0);
    let g = load("listings", "g_after_op.c");
    let x = explore(&g, "g", &ExplorationLimits::default()).unwrap();
    let pruned: Vec<_> = x.records.iter().filter(|r| r.status == PathStatus::PrunedInfeasible).cloned().collect();
    assert_eq!(pruned.len(), 1);
    assert_eq!(count_tests(&pruned), 0);
}

#[test]
fn bad_entry_and_limits_are_rejected() {
    use deobbench_core::symexec::ExploreError;
    let unit = load("listings", "f_before.c");
    assert!(matches!(
        explore(&unit, "nope", &ExplorationLimits::default()),
        Err(ExploreError::UnknownEntry(_))
    ));
    let empty = ExplorationLimits { domain: (1, 0), ..ExplorationLimits::default() };
    assert!(matches!(explore(&unit, "f", &empty), Err(ExploreError::Limits(_))));
}

mod properties {
    use super::common::strategies::sym_expr;
    use deobbench_core::symexec::fold_constants;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn folding_preserves_value(e in sym_expr(3), seed in any::<u64>()) {
            let folded = fold_constants(&e);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..1000 {
                let env: Vec<i32> = if rng.random_bool(0.5) {
                    (0..3).map(|_| rng.random_range(-4..=4)).collect()
                } else {
                    (0..3).map(|_| rng.random()).collect()
                };
                prop_assert_eq!(folded.eval(&env), e.eval(&env), "{:?} folded to {:?} at {:?}", e, folded, env);
            }
        }

        #[test]
        fn folding_is_idempotent(e in sym_expr(2)) {
            let once = fold_constants(&e);
            prop_assert_eq!(fold_constants(&once), once);
        }
    }
}
