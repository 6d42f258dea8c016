//! Exact CVO / DVO / CWVO values: one integer program per target preorder
//! of the components, cross-checked by a breadth-first search over reachable
//! score vectors. Also hosts the asymptotic category predictor.

mod bfs;
mod predict;

use num_traits::ToPrimitive;
use thiserror::Error;

use crate::gsr::{enumerate_preorders, ord, Alternative, GsRule, GsrError, Preorder, Profile};
use crate::ilp::{
    self, proximity_cap, reduce_rows, subdeterminant_upper_bound, IlpOutcome, IlpProblem,
};
use crate::vote_ops::{BehaviorGoal, OperationSet};

pub use predict::{predict_category, Category, CategoryPrediction, ClassPrediction};

/// Largest `K` for which preorder enumeration is attempted.
pub const PREORDER_ENUM_MAX: usize = 6;

/// Default bound on `Σv` for the breadth-first oracle.
pub const DEFAULT_BFS_CAP: u64 = 25;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VoError {
    #[error("K = {k} exceeds the preorder enumeration limit {max}; use the BFS method")]
    TooLarge { k: usize, max: usize },
    #[error("the BFS method needs a search cap")]
    NoCap,
    #[error("operation set has K = {ops}, rule has K = {rule}")]
    Dimension { ops: usize, rule: usize },
    #[error("refinement {refinement} does not refine {base}")]
    NotRefinement { base: String, refinement: String },
    #[error("score component does not fit in 64 bits")]
    Overflow,
    #[error(transparent)]
    Gsr(#[from] GsrError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    PreorderEnum,
    BruteForceBfs,
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    pub preorder_enum_max: usize,
    pub bfs_cap: Option<u64>,
    pub node_limit: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            preorder_enum_max: PREORDER_ENUM_MAX,
            bfs_cap: Some(DEFAULT_BFS_CAP),
            node_limit: ilp::DEFAULT_NODE_LIMIT,
        }
    }
}

/// One vote-operation problem. The profile enters only through its total
/// score `f(P)`, which is computed once here.
#[derive(Debug, Clone)]
pub struct VoInstance<'a> {
    pub rule: &'a GsRule,
    pub score: Vec<i64>,
    pub ops: &'a OperationSet,
    pub goal: BehaviorGoal,
}

impl<'a> VoInstance<'a> {
    pub fn new(
        rule: &'a GsRule,
        profile: &Profile,
        ops: &'a OperationSet,
        goal: BehaviorGoal,
    ) -> Result<Self, VoError> {
        rule.check_profile(profile)?;
        Self::from_counts(rule, &profile.order_counts(), ops, goal)
    }

    /// From per-order vote counts, indexed like [`crate::LinearOrder::index`].
    pub fn from_counts(
        rule: &'a GsRule,
        counts: &[u64],
        ops: &'a OperationSet,
        goal: BehaviorGoal,
    ) -> Result<Self, VoError> {
        let score = rule
            .total_from_counts(counts)
            .0
            .iter()
            .map(|x| x.to_i64().ok_or(VoError::Overflow))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_score(rule, score, ops, goal)
    }

    pub fn from_score(
        rule: &'a GsRule,
        score: Vec<i64>,
        ops: &'a OperationSet,
        goal: BehaviorGoal,
    ) -> Result<Self, VoError> {
        if ops.k() != rule.k() || score.len() != rule.k() {
            return Err(VoError::Dimension {
                ops: ops.k(),
                rule: rule.k(),
            });
        }
        Ok(Self {
            rule,
            score,
            ops,
            goal,
        })
    }

    pub fn k(&self) -> usize {
        self.rule.k()
    }

    /// The winner before any operation.
    pub fn original_winner(&self) -> Alternative {
        self.rule.select(&ord(&self.score))
    }

    /// Whether the winner on `pre` meets the goal.
    pub fn goal_met_on(&self, pre: &Preorder) -> bool {
        self.goal.is_met(self.rule.select(pre), self.original_winner())
    }

    /// `f(P) + Δv`.
    pub fn apply(&self, v: &[u64]) -> Vec<i64> {
        let mut s = self.score.clone();
        for (col, &times) in self.ops.columns().iter().zip(v) {
            for (x, &d) in s.iter_mut().zip(col) {
                *x += d * times as i64;
            }
        }
        s
    }

    /// Whether `v` respects the usage limits and meets the goal.
    pub fn verify(&self, v: &[u64]) -> bool {
        v.len() == self.ops.len()
            && self.ops.within_limits(v)
            && self.goal_met_on(&ord(&self.apply(v)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VoValue {
    Finite(u64),
    Infinite,
    UnknownAtCap(u64),
}

impl std::fmt::Display for VoValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VoValue::Finite(k) => write!(f, "{k}"),
            VoValue::Infinite => write!(f, "inf"),
            VoValue::UnknownAtCap(c) => write!(f, "unknown(cap={c})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VoSolution {
    pub value: VoValue,
    pub witness: Option<Vec<u64>>,
    pub achieved_preorder: Option<Preorder>,
}

impl VoSolution {
    fn finite(inst: &VoInstance, witness: Vec<u64>) -> Self {
        assert!(inst.verify(&witness), "witness does not meet the goal");
        let k = witness.iter().sum();
        let pre = ord(&inst.apply(&witness));
        Self {
            value: VoValue::Finite(k),
            witness: Some(witness),
            achieved_preorder: Some(pre),
        }
    }

    fn without_witness(value: VoValue) -> Self {
        Self {
            value,
            witness: None,
            achieved_preorder: None,
        }
    }
}

pub fn solve_vo(
    inst: &VoInstance,
    method: Method,
    opts: &SolveOptions,
) -> Result<VoSolution, VoError> {
    let method = match method {
        Method::Auto if inst.k() <= opts.preorder_enum_max => Method::PreorderEnum,
        Method::Auto => Method::BruteForceBfs,
        m => m,
    };
    match method {
        Method::PreorderEnum => {
            if inst.k() > opts.preorder_enum_max {
                return Err(VoError::TooLarge {
                    k: inst.k(),
                    max: opts.preorder_enum_max,
                });
            }
            Ok(solve_by_preorders(inst, opts))
        }
        Method::BruteForceBfs => {
            let cap = opts.bfs_cap.ok_or(VoError::NoCap)?;
            Ok(bfs::solve_bfs(inst, cap))
        }
        Method::Auto => unreachable!(),
    }
}

/// A sound cap on `Σv` for every `LP_⊵` of this instance: all of their rows
/// are pair differences of rows of `Δ`, and their right-hand sides are at
/// most `max |f_i - f_j| + 1`.
fn preorder_lp_cap(inst: &VoInstance) -> Option<u64> {
    let k = inst.k();
    let mut diffs = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            diffs.push(pair_row(inst.ops, i, j));
        }
    }
    let rows = reduce_rows(diffs.iter().map(Vec::as_slice));
    let max_gap = inst
        .score
        .iter()
        .flat_map(|a| inst.score.iter().map(move |b| (a - b).unsigned_abs()))
        .max()
        .unwrap_or(0);
    proximity_cap(inst.ops.len(), &subdeterminant_upper_bound(&rows), max_gap + 1)
}

fn pair_row(ops: &OperationSet, i: usize, j: usize) -> Vec<i64> {
    ops.columns().iter().map(|c| c[i] - c[j]).collect()
}

fn add_limits(inst: &VoInstance, prob: &mut IlpProblem) {
    let limits = inst.ops.limits();
    if limits.is_empty() {
        return;
    }
    let t = inst.ops.len();
    let mut covered = vec![false; t];
    let mut total = 0u64;
    for l in limits {
        let mut row = vec![0i64; t];
        for &c in &l.columns {
            row[c] = -1;
            covered[c] = true;
        }
        prob.add_ge(row, -(l.max as i64));
        total = total.saturating_add(l.max);
    }
    if covered.iter().all(|&c| c) {
        prob.budget_cap = Some(total);
    }
}

/// `LP_⊵`: one row per unordered pair of components, an equality for tied
/// pairs and a `≥ … + 1` row for strictly ordered ones.
pub fn build_lp_preorder(inst: &VoInstance, target: &Preorder) -> IlpProblem {
    assert_eq!(target.len(), inst.k(), "target preorder must have K components");
    let f = &inst.score;
    let mut prob = IlpProblem::new(inst.ops.len());
    for i in 0..inst.k() {
        for j in i + 1..inst.k() {
            push_pair_row(inst, &mut prob, target, i, j, f);
        }
    }
    add_limits(inst, &mut prob);
    prob
}

fn push_pair_row(
    inst: &VoInstance,
    prob: &mut IlpProblem,
    target: &Preorder,
    i: usize,
    j: usize,
    f: &[i64],
) {
    if target.tied(i, j) {
        prob.add_eq(pair_row(inst.ops, i, j), f[j] - f[i]);
    } else if target.strictly_above(i, j) {
        prob.add_ge(pair_row(inst.ops, i, j), f[j] - f[i] + 1);
    } else {
        prob.add_ge(pair_row(inst.ops, j, i), f[i] - f[j] + 1);
    }
}

/// `LP_{⊵'⊖⊵}`: rows only for the pairs tied in `base`.
pub fn build_lp_refinement(
    inst: &VoInstance,
    base: &Preorder,
    refinement: &Preorder,
) -> Result<IlpProblem, VoError> {
    if !refinement.refines(base) {
        return Err(VoError::NotRefinement {
            base: base.to_string(),
            refinement: refinement.to_string(),
        });
    }
    let f = &inst.score;
    let mut prob = IlpProblem::new(inst.ops.len());
    for i in 0..inst.k() {
        for j in i + 1..inst.k() {
            if base.tied(i, j) {
                push_pair_row(inst, &mut prob, refinement, i, j, f);
            }
        }
    }
    add_limits(inst, &mut prob);
    Ok(prob)
}

fn solve_by_preorders(inst: &VoInstance, opts: &SolveOptions) -> VoSolution {
    let t = inst.ops.len();
    let current = ord(&inst.score);
    if inst.goal_met_on(&current) {
        return VoSolution::finite(inst, vec![0; t]);
    }
    // every column shifts all components equally: the preorder never moves
    let k = inst.k();
    if inst.ops.columns().iter().all(|c| c.iter().all(|&x| x == c[0])) {
        return VoSolution::without_witness(VoValue::Infinite);
    }
    let cap = if inst.ops.limits().is_empty() {
        preorder_lp_cap(inst)
    } else {
        None
    };
    let mut best: Option<Vec<u64>> = None;
    let mut unknown: Vec<IlpProblem> = Vec::new();
    let mut unknown_cap = 0;
    for pre in enumerate_preorders(k) {
        if !inst.goal_met_on(&pre) {
            continue;
        }
        let mut prob = build_lp_preorder(inst, &pre);
        prob.implied_cap = cap;
        prob.node_limit = opts.node_limit;
        let outcome = match &best {
            Some(b) => ilp::solve_with_cutoff(&prob, b.iter().sum()),
            None => Some(ilp::solve(&prob)),
        };
        match outcome {
            Some(IlpOutcome::Optimal { witness, .. }) => best = Some(witness),
            Some(IlpOutcome::UnknownAtCap(c)) => {
                unknown_cap = unknown_cap.max(c);
                unknown.push(prob);
            }
            Some(IlpOutcome::Infeasible) | None => {}
        }
    }
    // an undecided program might still beat the final incumbent
    if let Some(mut b) = best {
        let mut still_unknown = false;
        for prob in &unknown {
            match ilp::solve_with_cutoff(prob, b.iter().sum()) {
                Some(IlpOutcome::Optimal { witness, .. }) => b = witness,
                Some(IlpOutcome::UnknownAtCap(_)) => still_unknown = true,
                _ => {}
            }
        }
        let mut sol = VoSolution::finite(inst, b);
        if still_unknown {
            sol.value = VoValue::UnknownAtCap(unknown_cap);
        }
        return sol;
    }
    if unknown.is_empty() {
        VoSolution::without_witness(VoValue::Infinite)
    } else {
        VoSolution::without_witness(VoValue::UnknownAtCap(unknown_cap))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gsr::rule_by_name;
    use crate::vote_ops::{ops_cdv, ops_uco, VoteDistribution};
    use crate::Alternatives;

    fn pre(levels: &[usize]) -> Preorder {
        Preorder::from_levels(levels.to_vec()).unwrap()
    }

    #[test]
    fn uco_majority_needs_four_votes() {
        let rule = rule_by_name("plurality", 2).unwrap();
        let ops = ops_uco(&rule);
        let p = Profile::parse(2, &["a>b"; 3]).unwrap();
        let inst = VoInstance::new(&rule, &p, &ops, BehaviorGoal::Cvo(Alternative(1))).unwrap();
        for m in [Method::PreorderEnum, Method::BruteForceBfs] {
            let sol = solve_vo(&inst, m, &SolveOptions::default()).unwrap();
            assert_eq!(sol.value, VoValue::Finite(4), "{m:?}");
        }
    }

    #[test]
    fn goal_already_met_costs_nothing() {
        let rule = rule_by_name("plurality", 2).unwrap();
        let ops = ops_uco(&rule);
        let p = Profile::parse(2, &["a>b"]).unwrap();
        let inst = VoInstance::new(&rule, &p, &ops, BehaviorGoal::Cvo(Alternative(0))).unwrap();
        let sol = solve_vo(&inst, Method::Auto, &SolveOptions::default()).unwrap();
        assert_eq!(sol.value, VoValue::Finite(0));
        assert_eq!(sol.witness, Some(vec![0, 0]));
    }

    #[test]
    fn cdv_destructive_example() {
        let rule = rule_by_name("plurality", 3).unwrap();
        let ops = ops_cdv(&rule, &VoteDistribution::uniform(Alternatives::new(3).unwrap())).unwrap();
        let p = Profile::parse(3, &["a>b>c", "a>b>c", "b>a>c"]).unwrap();
        let inst = VoInstance::new(&rule, &p, &ops, BehaviorGoal::Dvo(Alternative(0))).unwrap();
        let e = solve_vo(&inst, Method::PreorderEnum, &SolveOptions::default()).unwrap();
        let b = solve_vo(&inst, Method::BruteForceBfs, &SolveOptions::default()).unwrap();
        assert_eq!(e.value, b.value);
        // deleting one a-vote leaves a 1-1 tie that a still wins
        assert_eq!(e.value, VoValue::Finite(2));
    }

    #[test]
    fn constant_columns_are_infinite() {
        let rule = rule_by_name("plurality", 2).unwrap();
        let ops = OperationSet::new(2, "const", vec![(vec![1, 1], "both".into())]).unwrap();
        let p = Profile::parse(2, &["a>b"]).unwrap();
        let inst = VoInstance::new(&rule, &p, &ops, BehaviorGoal::Cvo(Alternative(1))).unwrap();
        let sol = solve_vo(&inst, Method::PreorderEnum, &SolveOptions::default()).unwrap();
        assert_eq!(sol.value, VoValue::Infinite);
        let sol = solve_vo(&inst, Method::BruteForceBfs, &SolveOptions::default()).unwrap();
        assert_eq!(sol.value, VoValue::UnknownAtCap(DEFAULT_BFS_CAP));
    }

    #[test]
    fn lp_rows_for_two_components() {
        let rule = rule_by_name("plurality", 2).unwrap();
        let ops = ops_uco(&rule);
        let inst = VoInstance::from_score(&rule, vec![5, 3], &ops, BehaviorGoal::Cwvo).unwrap();
        let lp = build_lp_preorder(&inst, &pre(&[1, 0]));
        // columns are sorted: e_b, then e_a
        assert_eq!(lp.ge_rows, vec![(vec![1, -1], 3)]);
        assert!(lp.eq_rows.is_empty());
        let lp = build_lp_preorder(&inst, &pre(&[0, 0]));
        assert_eq!(lp.eq_rows, vec![(vec![-1, 1], -2)]);

        let inst = VoInstance::from_score(&rule, vec![3, 4], &ops, BehaviorGoal::Cwvo).unwrap();
        let lp = build_lp_refinement(&inst, &pre(&[0, 0]), &pre(&[0, 1])).unwrap();
        assert_eq!(lp.ge_rows, vec![(vec![-1, 1], 2)]);
        assert!(build_lp_refinement(&inst, &pre(&[0, 1]), &pre(&[1, 0])).is_err());
    }

    #[test]
    fn refinement_rows_only_for_base_ties() {
        let rule = rule_by_name("plurality", 3).unwrap();
        let ops = ops_uco(&rule);
        let inst = VoInstance::from_score(&rule, vec![4, 4, 1], &ops, BehaviorGoal::Cwvo).unwrap();
        let base = pre(&[0, 0, 1]);
        let lp = build_lp_refinement(&inst, &base, &base).unwrap();
        assert_eq!(lp.num_rows(), 1);
        assert_eq!(lp.eq_rows.len(), 1);
        let lp = build_lp_refinement(&inst, &base, &pre(&[1, 0, 2])).unwrap();
        assert_eq!(lp.ge_rows, vec![(vec![0, 1, -1], 1)]);
    }

    #[test]
    fn refuses_large_k_without_bfs() {
        let rule = rule_by_name("stv", 3).unwrap();
        let ops = ops_uco(&rule);
        let p = Profile::parse(3, &["a>b>c"]).unwrap();
        let inst = VoInstance::new(&rule, &p, &ops, BehaviorGoal::Cwvo).unwrap();
        assert!(matches!(
            solve_vo(&inst, Method::PreorderEnum, &SolveOptions::default()),
            Err(VoError::TooLarge { k: 12, .. })
        ));
        let opts = SolveOptions { bfs_cap: None, ..Default::default() };
        assert_eq!(solve_vo(&inst, Method::Auto, &opts), Err(VoError::NoCap));
        let sol = solve_vo(&inst, Method::Auto, &SolveOptions::default()).unwrap();
        assert!(matches!(sol.value, VoValue::Finite(k) if k >= 1));
    }
}
