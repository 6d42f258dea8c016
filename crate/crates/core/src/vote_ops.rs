//! Vote distributions and the operation matrices `Δ` for each family of
//! strategic behavior.
//!
//! Every family is a set of integer `K`-vectors that the strategic individual
//! may add to the total scoring vector any number of times:
//!
//! | family  | columns                                              |
//! |---------|------------------------------------------------------|
//! | UCO     | `f(V)` for every order `V`                           |
//! | bribery | `f(V) - f(W)` for `W` in the support of `π`          |
//! | MMCS    | as bribery, restricted to `W` ranking `d` above `c`  |
//! | CAV     | `f(V)` for `V` in the support of `π'`                |
//! | CDV     | `-f(V)` for `V` in the support of `π`                |

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gsr::{factorial, Alternative, Alternatives, GsRule, GsrError, LinearOrder, Profile};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VoteOpsError {
    #[error("distribution has empty support")]
    EmptySupport,
    #[error("invalid probability for `{order}`: {msg}")]
    Probability { order: String, msg: String },
    #[error("probabilities sum to {0}, expected 1")]
    NotNormalized(String),
    #[error("order `{0}` listed twice")]
    DuplicateOrder(String),
    #[error("distribution is over {dist} alternatives, rule has {rule}")]
    Dimension { dist: usize, rule: usize },
    #[error("the resulting operation set is empty")]
    EmptyOperationSet,
    #[error("challenger and current winner must differ")]
    SameAlternative,
    #[error("malformed distribution file: {0}")]
    Format(String),
    #[error(transparent)]
    Gsr(#[from] GsrError),
}

/// A distribution over linear orders with exact rational probabilities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VoteDistribution {
    name: String,
    alternatives: Alternatives,
    support: Vec<(LinearOrder, BigRational)>,
}

#[derive(Serialize, Deserialize)]
struct DistributionFile {
    orders: BTreeMap<String, String>,
}

impl VoteDistribution {
    pub fn new(
        name: impl Into<String>,
        alternatives: Alternatives,
        support: Vec<(LinearOrder, BigRational)>,
    ) -> Result<Self, VoteOpsError> {
        if support.is_empty() {
            return Err(VoteOpsError::EmptySupport);
        }
        let mut seen = HashSet::new();
        let mut total = BigRational::zero();
        for (o, p) in &support {
            let label = alternatives.format_order(o);
            if o.m() != alternatives.len() {
                return Err(VoteOpsError::Dimension {
                    dist: alternatives.len(),
                    rule: o.m(),
                });
            }
            if !p.is_positive() {
                return Err(VoteOpsError::Probability {
                    order: label,
                    msg: "must be positive".into(),
                });
            }
            if !seen.insert(o.clone()) {
                return Err(VoteOpsError::DuplicateOrder(label));
            }
            total += p;
        }
        if !total.is_one() {
            return Err(VoteOpsError::NotNormalized(total.to_string()));
        }
        let mut support = support;
        support.sort_by_key(|(o, _)| o.index());
        Ok(Self {
            name: name.into(),
            alternatives,
            support,
        })
    }

    /// Impartial culture: uniform over all `m!` orders.
    pub fn uniform(alternatives: Alternatives) -> Self {
        let m = alternatives.len();
        let p = BigRational::new(BigInt::one(), BigInt::from(factorial(m)));
        let support = LinearOrder::all(m).into_iter().map(|o| (o, p.clone())).collect();
        Self {
            name: "uniform".into(),
            alternatives,
            support,
        }
    }

    pub fn point_mass(alternatives: Alternatives, order: LinearOrder) -> Self {
        Self {
            name: format!("point:{}", alternatives.format_order(&order)),
            alternatives,
            support: vec![(order, BigRational::one())],
        }
    }

    /// Builds a distribution from `(order, "p/q")` pairs.
    pub fn from_pairs(
        name: impl Into<String>,
        alternatives: Alternatives,
        pairs: &[(&str, &str)],
    ) -> Result<Self, VoteOpsError> {
        let mut support = Vec::with_capacity(pairs.len());
        for (order, prob) in pairs {
            let o = alternatives.parse_order(order)?;
            let p = parse_probability(order, prob)?;
            support.push((o, p));
        }
        Self::new(name, alternatives, support)
    }

    /// Parses `{"orders": {"a>b>c": "1/6", ...}}`.
    pub fn from_json(text: &str, alternatives: Alternatives) -> Result<Self, VoteOpsError> {
        let file: DistributionFile =
            serde_json::from_str(text).map_err(|e| VoteOpsError::Format(e.to_string()))?;
        let pairs: Vec<(&str, &str)> = file
            .orders
            .iter()
            .map(|(k, v)| (k.as_str(), v.as_str()))
            .collect();
        Self::from_pairs("file", alternatives, &pairs)
    }

    pub fn to_json(&self) -> String {
        let orders = self
            .support
            .iter()
            .map(|(o, p)| (self.alternatives.format_order(o), p.to_string()))
            .collect();
        serde_json::to_string_pretty(&DistributionFile { orders }).expect("serializable")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn alternatives(&self) -> &Alternatives {
        &self.alternatives
    }

    pub fn m(&self) -> usize {
        self.alternatives.len()
    }

    pub fn support(&self) -> &[(LinearOrder, BigRational)] {
        &self.support
    }

    pub fn probability(&self, order: &LinearOrder) -> BigRational {
        self.support
            .iter()
            .find(|(o, _)| o == order)
            .map(|(_, p)| p.clone())
            .unwrap_or_else(BigRational::zero)
    }

    /// Probabilities as integer weights over a common denominator, for exact
    /// sampling: `(order index, weight)` pairs and the denominator.
    pub fn integer_weights(&self) -> (Vec<(usize, u64)>, u64) {
        let denom = self
            .support
            .iter()
            .fold(BigInt::one(), |acc, (_, p)| acc.lcm(p.denom()));
        let weights = self
            .support
            .iter()
            .map(|(o, p)| {
                let w = (p * BigRational::from_integer(denom.clone())).to_integer();
                (o.index(), w.to_u64().expect("weight fits in u64"))
            })
            .collect();
        (weights, denom.to_u64().expect("denominator fits in u64"))
    }

    /// `f(P_π) = Σ π(V) f(V)`.
    pub fn expected_score(&self, rule: &GsRule) -> Result<Vec<BigRational>, VoteOpsError> {
        self.check_rule(rule)?;
        let mut out = vec![BigRational::zero(); rule.k()];
        for (o, p) in &self.support {
            for (acc, &x) in out.iter_mut().zip(rule.score_of(o)) {
                if x != 0 {
                    *acc += p * BigRational::from_integer(BigInt::from(x));
                }
            }
        }
        Ok(out)
    }

    fn check_rule(&self, rule: &GsRule) -> Result<(), VoteOpsError> {
        if rule.m() != self.m() {
            return Err(VoteOpsError::Dimension {
                dist: self.m(),
                rule: rule.m(),
            });
        }
        Ok(())
    }
}

fn parse_probability(order: &str, text: &str) -> Result<BigRational, VoteOpsError> {
    let bad = |msg: String| VoteOpsError::Probability {
        order: order.to_string(),
        msg,
    };
    let text = text.trim();
    let (n, d) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let n = BigInt::from_str(n).map_err(|e| bad(e.to_string()))?;
    let d = BigInt::from_str(d).map_err(|e| bad(e.to_string()))?;
    if d.is_zero() {
        return Err(bad("zero denominator".into()));
    }
    Ok(BigRational::new(n, d))
}

/// The goal of the strategic individual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BehaviorGoal {
    /// Make the target win.
    Cvo(Alternative),
    /// Make the target lose.
    Dvo(Alternative),
    /// Change the current winner.
    Cwvo,
}

impl BehaviorGoal {
    pub fn target(&self) -> Option<Alternative> {
        match self {
            BehaviorGoal::Cvo(c) | BehaviorGoal::Dvo(c) => Some(*c),
            BehaviorGoal::Cwvo => None,
        }
    }

    /// Whether `winner` meets the goal, given the winner before any operation.
    pub fn is_met(&self, winner: Alternative, original_winner: Alternative) -> bool {
        match self {
            BehaviorGoal::Cvo(c) => winner == *c,
            BehaviorGoal::Dvo(c) => winner != *c,
            BehaviorGoal::Cwvo => winner != original_winner,
        }
    }
}

/// The strategic-behavior families, in their command-line spelling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Behavior {
    #[serde(rename = "uco-c")]
    UcoConstructive,
    #[serde(rename = "uco-d")]
    UcoDestructive,
    #[serde(rename = "bribery-c")]
    BriberyConstructive,
    #[serde(rename = "bribery-d")]
    BriberyDestructive,
    #[serde(rename = "mov")]
    MarginOfVictory,
    #[serde(rename = "mmcs")]
    Mmcs,
    #[serde(rename = "cav-c")]
    CavConstructive,
    #[serde(rename = "cav-d")]
    CavDestructive,
    #[serde(rename = "cdv-c")]
    CdvConstructive,
    #[serde(rename = "cdv-d")]
    CdvDestructive,
}

impl Behavior {
    pub const ALL: [Behavior; 10] = [
        Behavior::UcoConstructive,
        Behavior::UcoDestructive,
        Behavior::BriberyConstructive,
        Behavior::BriberyDestructive,
        Behavior::MarginOfVictory,
        Behavior::Mmcs,
        Behavior::CavConstructive,
        Behavior::CavDestructive,
        Behavior::CdvConstructive,
        Behavior::CdvDestructive,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Behavior::UcoConstructive => "uco-c",
            Behavior::UcoDestructive => "uco-d",
            Behavior::BriberyConstructive => "bribery-c",
            Behavior::BriberyDestructive => "bribery-d",
            Behavior::MarginOfVictory => "mov",
            Behavior::Mmcs => "mmcs",
            Behavior::CavConstructive => "cav-c",
            Behavior::CavDestructive => "cav-d",
            Behavior::CdvConstructive => "cdv-c",
            Behavior::CdvDestructive => "cdv-d",
        }
    }

    /// Whether the behavior needs a target alternative.
    pub fn needs_target(&self) -> bool {
        !matches!(self, Behavior::MarginOfVictory | Behavior::Mmcs)
    }

    /// The goal for a given target (ignored for MoV and MMCS).
    pub fn goal(&self, target: Option<Alternative>) -> Option<BehaviorGoal> {
        use Behavior::*;
        match self {
            UcoConstructive | BriberyConstructive | CavConstructive | CdvConstructive => {
                target.map(BehaviorGoal::Cvo)
            }
            UcoDestructive | BriberyDestructive | CavDestructive | CdvDestructive => {
                target.map(BehaviorGoal::Dvo)
            }
            MarginOfVictory | Mmcs => Some(BehaviorGoal::Cwvo),
        }
    }
}

impl fmt::Display for Behavior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Behavior {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        let key = s
            .replace("-constructive", "-c")
            .replace("-destructive", "-d");
        Behavior::ALL
            .iter()
            .copied()
            .find(|b| b.as_str() == key)
            .ok_or_else(|| {
                format!(
                    "unknown behavior `{s}` (expected one of {})",
                    Behavior::ALL.map(|b| b.as_str()).join(", ")
                )
            })
    }
}

/// A cap on the total use of a group of columns.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UsageLimit {
    pub columns: Vec<usize>,
    pub max: u64,
}

/// The `K × T` operation matrix, stored column by column.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OperationSet {
    k: usize,
    columns: Vec<Vec<i64>>,
    labels: Vec<String>,
    behavior: String,
    limits: Vec<UsageLimit>,
}

impl OperationSet {
    /// Sorts, drops zero columns, and collapses duplicates (first label wins).
    pub fn new(
        k: usize,
        behavior: impl Into<String>,
        raw: Vec<(Vec<i64>, String)>,
    ) -> Result<Self, VoteOpsError> {
        let mut raw: Vec<(Vec<i64>, String)> = raw
            .into_iter()
            .filter(|(c, _)| c.iter().any(|&x| x != 0))
            .collect();
        for (c, _) in &raw {
            assert_eq!(c.len(), k, "operation column length must equal K");
        }
        raw.sort_by(|a, b| a.0.cmp(&b.0));
        raw.dedup_by(|later, earlier| later.0 == earlier.0);
        if raw.is_empty() {
            return Err(VoteOpsError::EmptyOperationSet);
        }
        let (columns, labels) = raw.into_iter().unzip();
        Ok(Self {
            k,
            columns,
            labels,
            behavior: behavior.into(),
            limits: Vec::new(),
        })
    }

    /// Keeps columns exactly as given (no sorting or merging) and attaches
    /// usage limits; zero columns are still dropped.
    pub fn with_limits(
        k: usize,
        behavior: impl Into<String>,
        raw: Vec<(Vec<i64>, String)>,
        limits: Vec<UsageLimit>,
    ) -> Result<Self, VoteOpsError> {
        let keep: Vec<bool> = raw.iter().map(|(c, _)| c.iter().any(|&x| x != 0)).collect();
        let mut remap = vec![usize::MAX; raw.len()];
        let mut columns = Vec::new();
        let mut labels = Vec::new();
        for (i, (c, l)) in raw.into_iter().enumerate() {
            assert_eq!(c.len(), k, "operation column length must equal K");
            if keep[i] {
                remap[i] = columns.len();
                columns.push(c);
                labels.push(l);
            }
        }
        if columns.is_empty() {
            return Err(VoteOpsError::EmptyOperationSet);
        }
        let limits = limits
            .into_iter()
            .map(|l| UsageLimit {
                columns: l
                    .columns
                    .into_iter()
                    .filter_map(|c| (remap[c] != usize::MAX).then_some(remap[c]))
                    .collect(),
                max: l.max,
            })
            .filter(|l| !l.columns.is_empty())
            .collect();
        Ok(Self {
            k,
            columns,
            labels,
            behavior: behavior.into(),
            limits,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of operations `T`.
    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn columns(&self) -> &[Vec<i64>] {
        &self.columns
    }

    pub fn column(&self, t: usize) -> &[i64] {
        &self.columns[t]
    }

    /// Row `l` of `Δ`.
    pub fn row(&self, l: usize) -> Vec<i64> {
        self.columns.iter().map(|c| c[l]).collect()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn behavior(&self) -> &str {
        &self.behavior
    }

    pub fn limits(&self) -> &[UsageLimit] {
        &self.limits
    }

    /// `Δ · v`.
    pub fn apply(&self, v: &[u64]) -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); self.k];
        for (col, &times) in self.columns.iter().zip(v) {
            if times == 0 {
                continue;
            }
            for (acc, &x) in out.iter_mut().zip(col) {
                *acc += BigInt::from(x) * times;
            }
        }
        out
    }

    /// Whether `v` respects every usage limit.
    pub fn within_limits(&self, v: &[u64]) -> bool {
        self.limits
            .iter()
            .all(|l| l.columns.iter().map(|&c| v[c]).sum::<u64>() <= l.max)
    }

    /// The union of two operation sets over the same `K`.
    pub fn union(&self, other: &OperationSet) -> Result<OperationSet, VoteOpsError> {
        assert_eq!(self.k, other.k);
        let raw = self
            .columns
            .iter()
            .cloned()
            .zip(self.labels.iter().cloned())
            .chain(other.columns.iter().cloned().zip(other.labels.iter().cloned()))
            .collect();
        OperationSet::new(self.k, format!("{}+{}", self.behavior, other.behavior), raw)
    }
}

fn check_dist(rule: &GsRule, pi: &VoteDistribution) -> Result<(), VoteOpsError> {
    if rule.m() != pi.m() {
        return Err(VoteOpsError::Dimension {
            dist: pi.m(),
            rule: rule.m(),
        });
    }
    Ok(())
}

fn difference(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Unweighted coalitional optimization: one column per distinct `f(V)`.
pub fn ops_uco(rule: &GsRule) -> OperationSet {
    let alts = rule.alternatives();
    let raw = LinearOrder::all(rule.m())
        .into_iter()
        .map(|o| (rule.score_of(&o).to_vec(), format!("+{}", alts.format_order(&o))))
        .collect();
    OperationSet::new(rule.k(), "uco", raw).expect("a rule with K >= 1 has a nonzero score vector")
}

/// Bribery: change a vote `W` from the support of `π` into any vote `V`.
pub fn ops_bribery(rule: &GsRule, pi: &VoteDistribution) -> Result<OperationSet, VoteOpsError> {
    check_dist(rule, pi)?;
    bribery_like(rule, pi, "bribery", |_| true)
}

/// Minimum manipulation coalition size toward `challenger`: only voters who
/// rank `challenger` above `current_winner` may change their votes.
pub fn ops_mmcs(
    rule: &GsRule,
    pi: &VoteDistribution,
    current_winner: Alternative,
    challenger: Alternative,
) -> Result<OperationSet, VoteOpsError> {
    check_dist(rule, pi)?;
    if current_winner == challenger {
        return Err(VoteOpsError::SameAlternative);
    }
    bribery_like(rule, pi, "mmcs", |w| {
        w.prefers(challenger.0, current_winner.0)
    })
}

fn bribery_like(
    rule: &GsRule,
    pi: &VoteDistribution,
    behavior: &str,
    source_ok: impl Fn(&LinearOrder) -> bool,
) -> Result<OperationSet, VoteOpsError> {
    let alts = rule.alternatives();
    let all = LinearOrder::all(rule.m());
    let mut raw = Vec::new();
    for (w, _) in pi.support().iter().filter(|(w, _)| source_ok(w)) {
        for v in &all {
            raw.push((
                difference(rule.score_of(v), rule.score_of(w)),
                format!("{}->{}", alts.format_order(w), alts.format_order(v)),
            ));
        }
    }
    OperationSet::new(rule.k(), behavior, raw)
}

/// Control by adding votes drawn from `π'`.
pub fn ops_cav(rule: &GsRule, pi_prime: &VoteDistribution) -> Result<OperationSet, VoteOpsError> {
    check_dist(rule, pi_prime)?;
    let alts = rule.alternatives();
    let raw = pi_prime
        .support()
        .iter()
        .map(|(o, _)| (rule.score_of(o).to_vec(), format!("+{}", alts.format_order(o))))
        .collect();
    OperationSet::new(rule.k(), "cav", raw)
}

/// Control by deleting votes of the types in the support of `pi`.
pub fn ops_cdv(rule: &GsRule, pi: &VoteDistribution) -> Result<OperationSet, VoteOpsError> {
    check_dist(rule, pi)?;
    let alts = rule.alternatives();
    let raw = pi
        .support()
        .iter()
        .map(|(o, _)| {
            (
                rule.score_of(o).iter().map(|x| -x).collect(),
                format!("-{}", alts.format_order(o)),
            )
        })
        .collect();
    OperationSet::new(rule.k(), "cdv", raw)
}

/// Deletion where each vote type can be deleted at most as often as it occurs
/// in `profile`.
pub fn ops_cdv_bounded(rule: &GsRule, profile: &Profile) -> Result<OperationSet, VoteOpsError> {
    rule.check_profile(profile)?;
    let alts = rule.alternatives();
    // group present orders by score vector; deleting any of them is equivalent
    let mut groups: BTreeMap<Vec<i64>, (u64, String)> = BTreeMap::new();
    for (idx, &c) in profile.order_counts().iter().enumerate() {
        if c == 0 {
            continue;
        }
        let o = LinearOrder::from_index(idx, rule.m());
        let entry = groups
            .entry(rule.score_of(&o).to_vec())
            .or_insert((0, format!("-{}", alts.format_order(&o))));
        entry.0 += c;
    }
    let mut raw = Vec::new();
    let mut limits = Vec::new();
    for (i, (vec, (count, label))) in groups.into_iter().enumerate() {
        raw.push((vec.iter().map(|x| -x).collect(), label));
        limits.push(UsageLimit {
            columns: vec![i],
            max: count,
        });
    }
    OperationSet::with_limits(rule.k(), "cdv-bounded", raw, limits)
}

/// Bribery where the number of changed votes of each source type is bounded
/// by its multiplicity in `profile`.
pub fn ops_bribery_bounded(rule: &GsRule, profile: &Profile) -> Result<OperationSet, VoteOpsError> {
    bounded_bribery_like(rule, profile, "bribery-bounded", |_| true)
}

/// [`ops_mmcs`] with the number of changed votes of each source type bounded
/// by its multiplicity in `profile`.
pub fn ops_mmcs_bounded(
    rule: &GsRule,
    profile: &Profile,
    current_winner: Alternative,
    challenger: Alternative,
) -> Result<OperationSet, VoteOpsError> {
    if current_winner == challenger {
        return Err(VoteOpsError::SameAlternative);
    }
    bounded_bribery_like(rule, profile, "mmcs-bounded", |w| {
        w.prefers(challenger.0, current_winner.0)
    })
}

fn bounded_bribery_like(
    rule: &GsRule,
    profile: &Profile,
    behavior: &str,
    source_ok: impl Fn(&LinearOrder) -> bool,
) -> Result<OperationSet, VoteOpsError> {
    rule.check_profile(profile)?;
    let alts = rule.alternatives();
    let all = LinearOrder::all(rule.m());
    let mut sources: BTreeMap<Vec<i64>, (u64, LinearOrder)> = BTreeMap::new();
    for (idx, &c) in profile.order_counts().iter().enumerate() {
        if c == 0 {
            continue;
        }
        let o = LinearOrder::from_index(idx, rule.m());
        if !source_ok(&o) {
            continue;
        }
        let entry = sources
            .entry(rule.score_of(&o).to_vec())
            .or_insert((0, o));
        entry.0 += c;
    }
    let mut raw = Vec::new();
    let mut limits = Vec::new();
    for (src, (count, w)) in sources {
        let mut seen = HashSet::new();
        let mut cols = Vec::new();
        for v in &all {
            let d = difference(rule.score_of(v), &src);
            if d.iter().all(|&x| x == 0) || !seen.insert(d.clone()) {
                continue;
            }
            cols.push(raw.len());
            raw.push((d, format!("{}->{}", alts.format_order(&w), alts.format_order(v))));
        }
        limits.push(UsageLimit {
            columns: cols,
            max: count,
        });
    }
    OperationSet::with_limits(rule.k(), behavior, raw, limits)
}
