use proptest::prelude::*;

use voteops_core::gsr::rule_by_name;
use voteops_core::vo_solver::{solve_vo, Method, SolveOptions, VoInstance, VoValue};
use voteops_core::vote_ops::{ops_bribery_bounded, ops_cdv_bounded, ops_uco};
use voteops_core::{Alternative, Alternatives, BehaviorGoal, LinearOrder, OperationSet, Profile};

fn profile(m: usize, picks: &[usize]) -> Profile {
    let all = LinearOrder::all(m);
    let votes = picks.iter().map(|&i| all[i % all.len()].clone()).collect();
    Profile::new(Alternatives::new(m).unwrap(), votes).unwrap()
}

fn opts() -> SolveOptions {
    SolveOptions {
        bfs_cap: Some(40),
        ..SolveOptions::default()
    }
}

fn same(e: VoValue, f: VoValue) -> bool {
    match (e, f) {
        (VoValue::Finite(x), VoValue::Finite(y)) => x == y,
        (VoValue::Infinite, VoValue::Infinite | VoValue::UnknownAtCap(_)) => true,
        _ => false,
    }
}

const RULES: [&str; 4] = ["plurality", "borda", "veto", "maximin"];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn methods_agree_on_uco(
        rule_idx in 0..RULES.len(),
        picks in prop::collection::vec(0usize..6, 1..9),
        target in 0usize..3,
        constructive in any::<bool>(),
    ) {
        let rule = rule_by_name(RULES[rule_idx], 3).unwrap();
        let p = profile(3, &picks);
        let ops = ops_uco(&rule);
        let c = Alternative(target);
        let goal = if constructive { BehaviorGoal::Cvo(c) } else { BehaviorGoal::Dvo(c) };
        let inst = VoInstance::new(&rule, &p, &ops, goal).unwrap();
        let e = solve_vo(&inst, Method::PreorderEnum, &opts()).unwrap();
        let f = solve_vo(&inst, Method::BruteForceBfs, &opts()).unwrap();
        prop_assert!(same(e.value, f.value), "enum {} bfs {}", e.value, f.value);
        for sol in [&e, &f] {
            if let Some(w) = &sol.witness {
                prop_assert!(inst.verify(w));
                prop_assert_eq!(VoValue::Finite(w.iter().sum()), sol.value);
            }
        }
    }

    #[test]
    fn methods_agree_on_bounded_bribery_and_deletion(
        rule_idx in 0..2usize,
        picks in prop::collection::vec(0usize..6, 1..8),
        target in 0usize..3,
        delete in any::<bool>(),
    ) {
        let rule = rule_by_name(RULES[rule_idx], 3).unwrap();
        let p = profile(3, &picks);
        let ops = if delete {
            ops_cdv_bounded(&rule, &p).unwrap()
        } else {
            ops_bribery_bounded(&rule, &p).unwrap()
        };
        let inst = VoInstance::new(&rule, &p, &ops, BehaviorGoal::Cvo(Alternative(target))).unwrap();
        let e = solve_vo(&inst, Method::PreorderEnum, &opts()).unwrap().value;
        let f = solve_vo(&inst, Method::BruteForceBfs, &opts()).unwrap().value;
        // both searches are finite here, so ∞ must match exactly
        prop_assert_eq!(e, f);
    }

    #[test]
    fn change_winner_is_destroying_the_winner(
        rule_idx in 0..3usize,
        picks in prop::collection::vec(0usize..6, 1..9),
    ) {
        let rule = rule_by_name(RULES[rule_idx], 3).unwrap();
        let p = profile(3, &picks);
        let ops = ops_bribery_bounded(&rule, &p).unwrap();
        let w = rule.winner(&p).unwrap();
        let cw = VoInstance::new(&rule, &p, &ops, BehaviorGoal::Cwvo).unwrap();
        let dw = VoInstance::new(&rule, &p, &ops, BehaviorGoal::Dvo(w)).unwrap();
        prop_assert_eq!(
            solve_vo(&cw, Method::PreorderEnum, &opts()).unwrap().value,
            solve_vo(&dw, Method::PreorderEnum, &opts()).unwrap().value
        );
    }

    #[test]
    fn more_operations_never_cost_more(
        rule_idx in 0..RULES.len(),
        picks in prop::collection::vec(0usize..6, 1..9),
        keep in prop::collection::vec(any::<bool>(), 6),
        target in 0usize..3,
    ) {
        let rule = rule_by_name(RULES[rule_idx], 3).unwrap();
        let p = profile(3, &picks);
        let full = ops_uco(&rule);
        let cols: Vec<(Vec<i64>, String)> = (0..full.len())
            .filter(|&t| keep[t % keep.len()])
            .map(|t| (full.column(t).to_vec(), full.labels()[t].clone()))
            .collect();
        prop_assume!(!cols.is_empty());
        let sub = OperationSet::new(rule.k(), "subset", cols).unwrap();
        let goal = BehaviorGoal::Cvo(Alternative(target));
        let small = VoInstance::new(&rule, &p, &sub, goal).unwrap();
        let big = VoInstance::new(&rule, &p, &full, goal).unwrap();
        let vs = solve_vo(&small, Method::PreorderEnum, &opts()).unwrap().value;
        let vb = solve_vo(&big, Method::PreorderEnum, &opts()).unwrap().value;
        match (vs, vb) {
            (VoValue::Finite(a), VoValue::Finite(b)) => prop_assert!(b <= a),
            (VoValue::Finite(_), other) => prop_assert!(false, "superset gave {}", other),
            _ => {}
        }
    }
}

#[test]
fn auto_refuses_nothing_and_enum_refuses_large_orders() {
    let rule = rule_by_name("stv", 3).unwrap();
    let p = profile(3, &[0, 1, 2, 3, 4]);
    let ops = ops_uco(&rule);
    let inst = VoInstance::new(&rule, &p, &ops, BehaviorGoal::Cvo(Alternative(2))).unwrap();
    assert!(solve_vo(&inst, Method::PreorderEnum, &opts()).is_err());
    let auto = solve_vo(&inst, Method::Auto, &opts()).unwrap();
    let bfs = solve_vo(&inst, Method::BruteForceBfs, &opts()).unwrap();
    assert_eq!(auto, bfs);
    if let Some(w) = &auto.witness {
        assert!(inst.verify(w));
    }
}
