//! Alternatives, votes, profiles and integer generalized scoring rules.
//!
//! A generalized scoring rule is a pair `(f, g)`: `f` maps every linear order to
//! an integer vector of length `K`, and `g` maps a total preorder over the `K`
//! components to a winning alternative. The winner of a profile is
//! `g(ord(sum of f(V)))`.

mod direct;
mod gamma;
mod preorder;
mod rules;
mod text;

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

pub use direct::direct_winner;
pub use gamma::{GammaGoal, GammaMajorityRule, GammaOps};
pub use preorder::{enumerate_preorders, ord, ordered_bell, refinements, Preorder};
pub use rules::{
    make_bucklin, make_copeland, make_maximin, make_plurality_runoff, make_positional, make_stv,
    rule_by_name, stv_order, RULE_NAMES,
};
pub use text::{parse_profile, write_profile};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GsrError {
    #[error("invalid alternative set: {0}")]
    Alternatives(String),
    #[error("invalid linear order: {0}")]
    Order(String),
    #[error("profile must contain at least one vote")]
    EmptyProfile,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid weight vector: {0}")]
    Weights(String),
    #[error("unsupported number of alternatives {m} for {rule} (allowed {min}..={max})")]
    AlternativeCount {
        rule: String,
        m: usize,
        min: usize,
        max: usize,
    },
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
    #[error("invalid preorder: {0}")]
    Preorder(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// An alternative, identified by its 0-based index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Alternative(pub usize);

impl Alternative {
    pub fn index(self) -> usize {
        self.0
    }
}

/// The labelled set of alternatives. Labels sort in index order, so breaking
/// ties alphabetically is the same as breaking them by index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Alternatives {
    labels: Vec<String>,
}

impl Alternatives {
    /// `a, b, c, …` for `m ≤ 26`.
    pub fn new(m: usize) -> Result<Self, GsrError> {
        if !(1..=26).contains(&m) {
            return Err(GsrError::Alternatives(format!(
                "default labels need 1 <= m <= 26, got {m}"
            )));
        }
        let labels = (0..m).map(|i| ((b'a' + i as u8) as char).to_string()).collect();
        Ok(Self { labels })
    }

    pub fn from_labels<S: AsRef<str>>(labels: &[S]) -> Result<Self, GsrError> {
        if labels.is_empty() {
            return Err(GsrError::Alternatives("no alternatives".into()));
        }
        let labels: Vec<String> = labels.iter().map(|s| s.as_ref().trim().to_string()).collect();
        for l in &labels {
            if l.is_empty() || l.contains('>') || l.contains(',') || l.contains(char::is_whitespace) {
                return Err(GsrError::Alternatives(format!("bad label `{l}`")));
            }
        }
        let distinct: HashSet<&String> = labels.iter().collect();
        if distinct.len() != labels.len() {
            return Err(GsrError::Alternatives("labels are not distinct".into()));
        }
        if labels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(GsrError::Alternatives(
                "labels must be listed in increasing lexicographic order".into(),
            ));
        }
        Ok(Self { labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, a: Alternative) -> &str {
        &self.labels[a.0]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn find(&self, label: &str) -> Option<Alternative> {
        self.labels.iter().position(|l| l == label.trim()).map(Alternative)
    }

    pub fn iter(&self) -> impl Iterator<Item = Alternative> {
        (0..self.labels.len()).map(Alternative)
    }

    /// Parses `a>b>c` into a linear order over this set.
    pub fn parse_order(&self, text: &str) -> Result<LinearOrder, GsrError> {
        let ranking = text
            .split('>')
            .map(|tok| {
                self.find(tok)
                    .map(|a| a.0)
                    .ok_or_else(|| GsrError::Order(format!("unknown alternative `{}`", tok.trim())))
            })
            .collect::<Result<Vec<_>, _>>()?;
        LinearOrder::new(ranking, self.len())
    }

    pub fn format_order(&self, order: &LinearOrder) -> String {
        order
            .ranking()
            .iter()
            .map(|&i| self.labels[i].as_str())
            .collect::<Vec<_>>()
            .join(">")
    }
}

/// A strict ranking of all alternatives, most preferred first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinearOrder {
    ranking: Vec<usize>,
}

impl LinearOrder {
    pub fn new(ranking: Vec<usize>, m: usize) -> Result<Self, GsrError> {
        if ranking.len() != m {
            return Err(GsrError::Order(format!(
                "expected {m} alternatives, got {}",
                ranking.len()
            )));
        }
        let mut seen = vec![false; m];
        for &a in &ranking {
            if a >= m || seen[a] {
                return Err(GsrError::Order(format!("not a permutation: {ranking:?}")));
            }
            seen[a] = true;
        }
        Ok(Self { ranking })
    }

    pub fn ranking(&self) -> &[usize] {
        &self.ranking
    }

    pub fn m(&self) -> usize {
        self.ranking.len()
    }

    pub fn top(&self) -> Alternative {
        Alternative(self.ranking[0])
    }

    /// 0-based position of `a` in the ranking.
    pub fn position(&self, a: usize) -> usize {
        self.ranking.iter().position(|&x| x == a).expect("alternative in order")
    }

    pub fn prefers(&self, a: usize, b: usize) -> bool {
        self.position(a) < self.position(b)
    }

    /// Rank of this order among all `m!` orders in lexicographic order
    /// (Lehmer code).
    pub fn index(&self) -> usize {
        let m = self.ranking.len();
        let mut idx = 0;
        for i in 0..m {
            let smaller = self.ranking[i + 1..]
                .iter()
                .filter(|&&x| x < self.ranking[i])
                .count();
            idx = idx * (m - i) + smaller;
        }
        idx
    }

    pub fn from_index(mut idx: usize, m: usize) -> Self {
        let mut digits = vec![0; m];
        for i in (0..m).rev() {
            let base = m - i;
            digits[i] = idx % base;
            idx /= base;
        }
        let mut pool: Vec<usize> = (0..m).collect();
        let ranking = digits.into_iter().map(|d| pool.remove(d)).collect();
        Self { ranking }
    }

    /// All `m!` orders in lexicographic order, so `all(m)[i].index() == i`.
    pub fn all(m: usize) -> Vec<LinearOrder> {
        (0..factorial(m)).map(|i| Self::from_index(i, m)).collect()
    }
}

pub fn factorial(m: usize) -> usize {
    (1..=m).product()
}

/// A preference profile: `n ≥ 1` linear orders over the same alternatives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Profile {
    alternatives: Alternatives,
    votes: Vec<LinearOrder>,
}

impl Profile {
    pub fn new(alternatives: Alternatives, votes: Vec<LinearOrder>) -> Result<Self, GsrError> {
        if votes.is_empty() {
            return Err(GsrError::EmptyProfile);
        }
        if let Some(v) = votes.iter().find(|v| v.m() != alternatives.len()) {
            return Err(GsrError::Dimension {
                expected: alternatives.len(),
                got: v.m(),
            });
        }
        Ok(Self { alternatives, votes })
    }

    /// Convenience constructor over default labels: `Profile::parse(3, &["a>b>c", "b>a>c"])`.
    pub fn parse(m: usize, votes: &[&str]) -> Result<Self, GsrError> {
        let alts = Alternatives::new(m)?;
        let votes = votes
            .iter()
            .map(|v| alts.parse_order(v))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(alts, votes)
    }

    /// Builds a profile from per-order multiplicities (indexed by `LinearOrder::index`).
    pub fn from_counts(alternatives: Alternatives, counts: &[u64]) -> Result<Self, GsrError> {
        let m = alternatives.len();
        if counts.len() != factorial(m) {
            return Err(GsrError::Dimension {
                expected: factorial(m),
                got: counts.len(),
            });
        }
        let mut votes = Vec::new();
        for (i, &c) in counts.iter().enumerate() {
            let o = LinearOrder::from_index(i, m);
            votes.extend(std::iter::repeat_n(o, c as usize));
        }
        Self::new(alternatives, votes)
    }

    pub fn alternatives(&self) -> &Alternatives {
        &self.alternatives
    }

    pub fn m(&self) -> usize {
        self.alternatives.len()
    }

    pub fn n(&self) -> usize {
        self.votes.len()
    }

    pub fn votes(&self) -> &[LinearOrder] {
        &self.votes
    }

    /// Number of votes of each order, indexed by `LinearOrder::index`.
    pub fn order_counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; factorial(self.m())];
        for v in &self.votes {
            counts[v.index()] += 1;
        }
        counts
    }

    pub fn repeated(&self, times: usize) -> Profile {
        let votes = (0..times).flat_map(|_| self.votes.iter().cloned()).collect();
        Profile {
            alternatives: self.alternatives.clone(),
            votes,
        }
    }

    pub fn with_votes(&self, votes: Vec<LinearOrder>) -> Result<Profile, GsrError> {
        Profile::new(self.alternatives.clone(), votes)
    }
}

/// A total generalized scoring vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ScoreVector(pub Vec<BigInt>);

impl ScoreVector {
    pub fn zeros(k: usize) -> Self {
        Self(vec![BigInt::zero(); k])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn components(&self) -> &[BigInt] {
        &self.0
    }

    pub fn add_scaled(&mut self, v: &[i64], times: i64) {
        debug_assert_eq!(v.len(), self.0.len());
        for (acc, &x) in self.0.iter_mut().zip(v) {
            if x != 0 {
                *acc += BigInt::from(x) * times;
            }
        }
    }

    pub fn ord(&self) -> Preorder {
        ord(&self.0)
    }
}

impl From<Vec<i64>> for ScoreVector {
    fn from(v: Vec<i64>) -> Self {
        Self(v.into_iter().map(BigInt::from).collect())
    }
}

/// The `g` function of a rule: picks the winner from a preorder over the
/// components.
#[derive(Clone)]
pub enum Selector {
    /// Largest component wins; lowest index among ties. Components are alternatives.
    MaxComponent,
    Stv(rules::StvLayout),
    PluralityRunoff(rules::StvLayout),
    Maximin,
    Copeland,
    Bucklin,
    Custom(Arc<dyn Fn(&Preorder) -> Alternative + Send + Sync>),
}

impl fmt::Debug for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Selector::MaxComponent => write!(f, "MaxComponent"),
            Selector::Stv(_) => write!(f, "Stv"),
            Selector::PluralityRunoff(_) => write!(f, "PluralityRunoff"),
            Selector::Maximin => write!(f, "Maximin"),
            Selector::Copeland => write!(f, "Copeland"),
            Selector::Bucklin => write!(f, "Bucklin"),
            Selector::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// An integer generalized scoring rule of order `K`, with `f` materialized as a
/// table over all `m!` linear orders.
#[derive(Debug, Clone)]
pub struct GsRule {
    name: String,
    alternatives: Alternatives,
    table: Vec<Vec<i64>>,
    selector: Selector,
    component_labels: Vec<String>,
}

impl GsRule {
    /// Builds a rule from a score function and a selector. `score_of` is
    /// evaluated once per linear order.
    pub fn new(
        name: impl Into<String>,
        alternatives: Alternatives,
        component_labels: Vec<String>,
        score_of: impl Fn(&LinearOrder) -> Vec<i64>,
        selector: Selector,
    ) -> Result<Self, GsrError> {
        let k = component_labels.len();
        if k == 0 {
            return Err(GsrError::Dimension { expected: 1, got: 0 });
        }
        let m = alternatives.len();
        let mut table = Vec::with_capacity(factorial(m));
        for order in LinearOrder::all(m) {
            let v = score_of(&order);
            if v.len() != k {
                return Err(GsrError::Dimension {
                    expected: k,
                    got: v.len(),
                });
            }
            table.push(v);
        }
        Ok(Self {
            name: name.into(),
            alternatives,
            table,
            selector,
            component_labels,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn k(&self) -> usize {
        self.component_labels.len()
    }

    pub fn m(&self) -> usize {
        self.alternatives.len()
    }

    pub fn alternatives(&self) -> &Alternatives {
        &self.alternatives
    }

    pub fn component_labels(&self) -> &[String] {
        &self.component_labels
    }

    pub fn selector(&self) -> &Selector {
        &self.selector
    }

    /// `f(V)`.
    pub fn score_of(&self, order: &LinearOrder) -> &[i64] {
        &self.table[order.index()]
    }

    /// `f(V)` for the order with the given lexicographic index.
    pub fn score_by_index(&self, idx: usize) -> &[i64] {
        &self.table[idx]
    }

    /// The `g` function.
    pub fn select(&self, pre: &Preorder) -> Alternative {
        assert_eq!(pre.len(), self.k(), "preorder order must equal rule order");
        rules::select(&self.selector, self.m(), pre)
    }

    /// `f(P)`, the componentwise sum of the per-vote vectors.
    pub fn total_score(&self, profile: &Profile) -> Result<ScoreVector, GsrError> {
        self.check_profile(profile)?;
        Ok(self.total_from_counts(&profile.order_counts()))
    }

    pub fn total_from_counts(&self, counts: &[u64]) -> ScoreVector {
        let mut total = ScoreVector::zeros(self.k());
        for (idx, &c) in counts.iter().enumerate() {
            if c > 0 {
                total.add_scaled(&self.table[idx], c as i64);
            }
        }
        total
    }

    pub fn winner(&self, profile: &Profile) -> Result<Alternative, GsrError> {
        let total = self.total_score(profile)?;
        Ok(self.select(&total.ord()))
    }

    pub fn check_profile(&self, profile: &Profile) -> Result<(), GsrError> {
        if profile.m() != self.m() {
            return Err(GsrError::Dimension {
                expected: self.m(),
                got: profile.m(),
            });
        }
        Ok(())
    }
}
