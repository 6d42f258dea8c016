//! Integer GSR encodings of the common rules.
//!
//! Every `g` below reads only the preorder, and is total on all preorders of
//! the right order, including ones no profile can produce.

use super::{Alternative, Alternatives, GsRule, GsrError, LinearOrder, Preorder, Selector};

pub const RULE_NAMES: &[&str] = &[
    "plurality",
    "borda",
    "veto",
    "stv",
    "maximin",
    "copeland",
    "bucklin",
    "plurality-runoff",
];

/// Component index of `(S, j)` pairs: `S` a bitmask of removed alternatives.
#[derive(Debug, Clone)]
pub struct StvLayout {
    index: Vec<Vec<Option<usize>>>,
}

impl StvLayout {
    pub fn component(&self, removed: usize, j: usize) -> usize {
        self.index[removed][j].expect("component present in layout")
    }
}

/// `K` of the STV encoding: `sum_{i<m} C(m,i)(m-i)`.
pub fn stv_order(m: usize) -> usize {
    let mut k = 0;
    let mut binom = 1usize;
    for i in 0..m {
        k += binom * (m - i);
        binom = binom * (m - i) / (i + 1);
    }
    k
}

fn letter_set(alts: &Alternatives, mask: usize) -> String {
    let names: Vec<&str> = (0..alts.len())
        .filter(|i| mask & (1 << i) != 0)
        .map(|i| alts.labels()[i].as_str())
        .collect();
    format!("{{{}}}", names.join(","))
}

/// Top alternative of `order` once `removed` is deleted.
fn top_after_removing(order: &LinearOrder, removed: usize) -> usize {
    *order
        .ranking()
        .iter()
        .find(|&&a| removed & (1 << a) == 0)
        .expect("proper subset removed")
}

pub fn make_positional(weights: &[i64]) -> Result<GsRule, GsrError> {
    make_positional_named(weights, None)
}

fn make_positional_named(weights: &[i64], name: Option<&str>) -> Result<GsRule, GsrError> {
    let m = weights.len();
    if m < 2 {
        return Err(GsrError::Weights("need at least two positions".into()));
    }
    if weights.windows(2).any(|w| w[0] < w[1]) {
        return Err(GsrError::Weights(format!("{weights:?} is not non-increasing")));
    }
    if weights.iter().all(|&w| w == weights[0]) {
        return Err(GsrError::Weights(format!("{weights:?} is constant")));
    }
    let alts = Alternatives::new(m)?;
    let labels = alts.labels().to_vec();
    let name = match name {
        Some(n) => n.to_string(),
        None => format!(
            "positional[{}]",
            weights.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(",")
        ),
    };
    let w = weights.to_vec();
    GsRule::new(
        name,
        alts,
        labels,
        move |order| {
            let mut v = vec![0; m];
            for (pos, &a) in order.ranking().iter().enumerate() {
                v[a] = w[pos];
            }
            v
        },
        Selector::MaxComponent,
    )
}

fn stv_layout(m: usize, keep: impl Fn(usize) -> bool) -> (StvLayout, Vec<(usize, usize)>) {
    let full = (1usize << m) - 1;
    let mut masks: Vec<usize> = (0..full).filter(|&s| keep(s)).collect();
    masks.sort_by_key(|&s| (s.count_ones(), s));
    let mut index = vec![vec![None; m]; 1 << m];
    let mut comps = Vec::new();
    for s in masks {
        for (j, slot) in index[s].iter_mut().enumerate() {
            if s & (1 << j) == 0 {
                *slot = Some(comps.len());
                comps.push((s, j));
            }
        }
    }
    (StvLayout { index }, comps)
}

fn removal_rule(
    name: &str,
    alts: Alternatives,
    comps: Vec<(usize, usize)>,
    selector: Selector,
) -> Result<GsRule, GsrError> {
    let labels = comps
        .iter()
        .map(|&(s, j)| format!("({},{})", letter_set(&alts, s), alts.labels()[j]))
        .collect();
    GsRule::new(
        name,
        alts,
        labels,
        move |order| {
            comps
                .iter()
                .map(|&(s, j)| i64::from(top_after_removing(order, s) == j))
                .collect()
        },
        selector,
    )
}

/// STV with components `(S, j)` for every proper subset `S` and `c_j ∉ S`.
pub fn make_stv(m: usize) -> Result<GsRule, GsrError> {
    if !(2..=5).contains(&m) {
        return Err(GsrError::AlternativeCount {
            rule: "stv".into(),
            m,
            min: 2,
            max: 5,
        });
    }
    let alts = Alternatives::new(m)?;
    let (layout, comps) = stv_layout(m, |_| true);
    removal_rule("stv", alts, comps, Selector::Stv(layout))
}

/// Plurality with runoff: the first-round components `(∅, j)` plus the
/// pairwise components `(C∖{x,y}, x)` for the runoff.
pub fn make_plurality_runoff(m: usize) -> Result<GsRule, GsrError> {
    if !(2..=6).contains(&m) {
        return Err(GsrError::AlternativeCount {
            rule: "plurality-runoff".into(),
            m,
            min: 2,
            max: 6,
        });
    }
    let alts = Alternatives::new(m)?;
    let (layout, comps) = stv_layout(m, |s| s == 0 || s.count_ones() as usize == m - 2);
    removal_rule(
        "plurality-runoff",
        alts,
        comps,
        Selector::PluralityRunoff(layout),
    )
}

fn pair_index(m: usize, i: usize, j: usize) -> usize {
    i * (m - 1) + if j < i { j } else { j - 1 }
}

fn pairwise_rule(name: &str, m: usize, selector: Selector) -> Result<GsRule, GsrError> {
    if !(2..=8).contains(&m) {
        return Err(GsrError::AlternativeCount {
            rule: name.into(),
            m,
            min: 2,
            max: 8,
        });
    }
    let alts = Alternatives::new(m)?;
    let mut labels = vec![String::new(); m * (m - 1)];
    for i in 0..m {
        for j in 0..m {
            if i != j {
                labels[pair_index(m, i, j)] =
                    format!("{}>{}", alts.labels()[i], alts.labels()[j]);
            }
        }
    }
    GsRule::new(
        name,
        alts,
        labels,
        move |order| {
            let mut v = vec![0; m * (m - 1)];
            for i in 0..m {
                for j in 0..m {
                    if i != j && order.prefers(i, j) {
                        v[pair_index(m, i, j)] = 1;
                    }
                }
            }
            v
        },
        selector,
    )
}

pub fn make_maximin(m: usize) -> Result<GsRule, GsrError> {
    pairwise_rule("maximin", m, Selector::Maximin)
}

/// Copeland with a pairwise win worth 2 points and a pairwise tie worth 1.
pub fn make_copeland(m: usize) -> Result<GsRule, GsrError> {
    pairwise_rule("copeland", m, Selector::Copeland)
}

/// Bucklin. Component `(j, r)` for `r < m-1` is twice the number of votes
/// ranking `c_j` within the top `r+1`; the `r = m-1` components are one per
/// vote, so a majority at depth `r` is the strict comparison
/// `(j, r) ⊳ (0, m-1)`.
pub fn make_bucklin(m: usize) -> Result<GsRule, GsrError> {
    if !(2..=6).contains(&m) {
        return Err(GsrError::AlternativeCount {
            rule: "bucklin".into(),
            m,
            min: 2,
            max: 6,
        });
    }
    let alts = Alternatives::new(m)?;
    let mut labels = Vec::with_capacity(m * m);
    for r in 0..m {
        for j in 0..m {
            labels.push(format!("{}@{}", alts.labels()[j], r + 1));
        }
    }
    GsRule::new(
        "bucklin",
        alts,
        labels,
        move |order| {
            let mut v = vec![0; m * m];
            for r in 0..m {
                for j in 0..m {
                    v[r * m + j] = if r == m - 1 {
                        1
                    } else if order.position(j) <= r {
                        2
                    } else {
                        0
                    };
                }
            }
            v
        },
        Selector::Bucklin,
    )
}

/// Looks a rule up by name. `majority` is plurality over two alternatives;
/// `positional:w1,w2,…` builds an arbitrary positional rule.
pub fn rule_by_name(name: &str, m: usize) -> Result<GsRule, GsrError> {
    let name = name.trim();
    if let Some(ws) = name.strip_prefix("positional:") {
        let weights = ws
            .split(',')
            .map(|w| w.trim().parse::<i64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| GsrError::Weights(e.to_string()))?;
        if weights.len() != m {
            return Err(GsrError::Dimension {
                expected: m,
                got: weights.len(),
            });
        }
        return make_positional(&weights);
    }
    match name {
        "plurality" => {
            let mut w = vec![0; m];
            if m > 0 {
                w[0] = 1;
            }
            make_positional_named(&w, Some("plurality"))
        }
        "majority" => {
            if m != 2 {
                return Err(GsrError::AlternativeCount {
                    rule: "majority".into(),
                    m,
                    min: 2,
                    max: 2,
                });
            }
            make_positional_named(&[1, 0], Some("majority"))
        }
        "borda" => {
            let w: Vec<i64> = (0..m as i64).rev().collect();
            make_positional_named(&w, Some("borda"))
        }
        "veto" => {
            let mut w = vec![1; m];
            if m > 0 {
                w[m - 1] = 0;
            }
            make_positional_named(&w, Some("veto"))
        }
        "stv" => make_stv(m),
        "maximin" => make_maximin(m),
        "copeland" => make_copeland(m),
        "bucklin" => make_bucklin(m),
        "plurality-runoff" | "runoff" => make_plurality_runoff(m),
        other => Err(GsrError::UnknownRule(other.to_string())),
    }
}

pub(super) fn select(selector: &Selector, m: usize, pre: &Preorder) -> Alternative {
    let all: Vec<usize> = (0..m).collect();
    match selector {
        Selector::MaxComponent => Alternative(pre.best_of(&all)),
        Selector::Stv(layout) => {
            let mut removed = 0usize;
            for _ in 0..m - 1 {
                let remaining: Vec<usize> = all
                    .iter()
                    .copied()
                    .filter(|&j| removed & (1 << j) == 0)
                    .collect();
                let comps: Vec<usize> = remaining
                    .iter()
                    .map(|&j| layout.component(removed, j))
                    .collect();
                // worst_of resolves ties toward the last (highest-index) alternative
                let loser_comp = pre.worst_of(&comps);
                let loser = remaining[comps.iter().position(|&c| c == loser_comp).unwrap()];
                removed |= 1 << loser;
            }
            Alternative((0..m).find(|&j| removed & (1 << j) == 0).unwrap())
        }
        Selector::PluralityRunoff(layout) => {
            let first: Vec<usize> = all.iter().map(|&j| layout.component(0, j)).collect();
            let top = pre.best_of(&first);
            let x = first.iter().position(|&c| c == top).unwrap();
            if m == 2 {
                return Alternative(x);
            }
            let rest: Vec<usize> = first.iter().copied().filter(|&c| c != top).collect();
            let second = pre.best_of(&rest);
            let y = first.iter().position(|&c| c == second).unwrap();
            let (lo, hi) = (x.min(y), x.max(y));
            let removed = ((1usize << m) - 1) & !(1 << lo) & !(1 << hi);
            let c_lo = layout.component(removed, lo);
            let c_hi = layout.component(removed, hi);
            if pre.strictly_above(c_hi, c_lo) {
                Alternative(hi)
            } else {
                Alternative(lo)
            }
        }
        Selector::Maximin => {
            // level of each alternative's weakest pairwise component
            let worst_level: Vec<usize> = (0..m)
                .map(|i| {
                    (0..m)
                        .filter(|&j| j != i)
                        .map(|j| pre.level(pair_index(m, i, j)))
                        .max()
                        .unwrap_or(0)
                })
                .collect();
            let mut best = 0;
            for i in 1..m {
                if worst_level[i] < worst_level[best] {
                    best = i;
                }
            }
            Alternative(best)
        }
        Selector::Copeland => {
            let score: Vec<u32> = (0..m)
                .map(|i| {
                    (0..m)
                        .filter(|&j| j != i)
                        .map(|j| {
                            let (ij, ji) = (pair_index(m, i, j), pair_index(m, j, i));
                            if pre.strictly_above(ij, ji) {
                                2
                            } else if pre.tied(ij, ji) {
                                1
                            } else {
                                0
                            }
                        })
                        .sum()
                })
                .collect();
            let mut best = 0;
            for i in 1..m {
                if score[i] > score[best] {
                    best = i;
                }
            }
            Alternative(best)
        }
        Selector::Bucklin => {
            let reference = (m - 1) * m;
            for r in 0..m - 1 {
                let majority: Vec<usize> = (0..m)
                    .map(|j| r * m + j)
                    .filter(|&c| pre.strictly_above(c, reference))
                    .collect();
                if !majority.is_empty() {
                    return Alternative(pre.best_of(&majority) - r * m);
                }
            }
            Alternative(0)
        }
        Selector::Custom(g) => g(pre),
    }
}
