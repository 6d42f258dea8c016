use std::fmt;

use super::GsrError;

/// A total preorder over `K` components, stored as dense levels: level 0 is the
/// top, equal levels are tied.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Preorder {
    levels: Vec<usize>,
}

impl Preorder {
    pub fn from_levels(levels: Vec<usize>) -> Result<Self, GsrError> {
        if levels.is_empty() {
            return Err(GsrError::Preorder("empty".into()));
        }
        let max = *levels.iter().max().unwrap();
        let mut used = vec![false; max + 1];
        for &l in &levels {
            used[l] = true;
        }
        if used.iter().any(|u| !u) {
            return Err(GsrError::Preorder(format!("levels are not dense: {levels:?}")));
        }
        Ok(Self { levels })
    }

    pub fn all_tied(k: usize) -> Self {
        Self { levels: vec![0; k] }
    }

    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    /// Order `K` of the preorder.
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn num_levels(&self) -> usize {
        self.levels.iter().max().map_or(0, |m| m + 1)
    }

    pub fn level(&self, i: usize) -> usize {
        self.levels[i]
    }

    /// `o_i ⊵ o_j`.
    pub fn weakly_above(&self, i: usize, j: usize) -> bool {
        self.levels[i] <= self.levels[j]
    }

    /// `o_i ⊳ o_j`.
    pub fn strictly_above(&self, i: usize, j: usize) -> bool {
        self.levels[i] < self.levels[j]
    }

    pub fn tied(&self, i: usize, j: usize) -> bool {
        self.levels[i] == self.levels[j]
    }

    /// True when every strict comparison of `base` also holds here.
    pub fn refines(&self, base: &Preorder) -> bool {
        if self.len() != base.len() {
            return false;
        }
        let k = self.len();
        (0..k).all(|i| (0..k).all(|j| !base.strictly_above(i, j) || self.strictly_above(i, j)))
    }

    /// Among `candidates`, the one ranked highest; ties go to the earliest
    /// candidate in the slice.
    pub fn best_of(&self, candidates: &[usize]) -> usize {
        let mut best = candidates[0];
        for &c in &candidates[1..] {
            if self.levels[c] < self.levels[best] {
                best = c;
            }
        }
        best
    }

    /// Among `candidates`, the one ranked lowest; ties go to the latest
    /// candidate in the slice.
    pub fn worst_of(&self, candidates: &[usize]) -> usize {
        let mut worst = candidates[0];
        for &c in &candidates[1..] {
            if self.levels[c] >= self.levels[worst] {
                worst = c;
            }
        }
        worst
    }

    /// Components grouped by level, top level first.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_levels()];
        for (i, &l) in self.levels.iter().enumerate() {
            out[l].push(i);
        }
        out
    }
}

impl fmt::Display for Preorder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let classes = self.classes();
        let parts: Vec<String> = classes
            .iter()
            .map(|c| {
                c.iter()
                    .map(|i| format!("o{}", i + 1))
                    .collect::<Vec<_>>()
                    .join("=")
            })
            .collect();
        write!(f, "{}", parts.join(" > "))
    }
}

/// `Ord(x)`: component `i` is weakly above `j` iff `x_i ≥ x_j`.
pub fn ord<T: Ord>(x: &[T]) -> Preorder {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[b].cmp(&x[a]));
    let mut levels = vec![0; x.len()];
    let mut level = 0;
    for w in 0..idx.len() {
        if w > 0 && x[idx[w]] != x[idx[w - 1]] {
            level += 1;
        }
        levels[idx[w]] = level;
    }
    Preorder { levels }
}

/// Ordered Bell (Fubini) number: the number of total preorders over `k` items.
pub fn ordered_bell(k: usize) -> u128 {
    // a(k) = sum_{i=1..k} C(k,i) a(k-i), a(0) = 1
    let mut a = vec![1u128; k + 1];
    for n in 1..=k {
        let mut binom = 1u128;
        let mut s = 0u128;
        for i in 1..=n {
            binom = binom * (n - i + 1) as u128 / i as u128;
            s += binom * a[n - i];
        }
        a[n] = s;
    }
    a[k]
}

/// Every total preorder over `k` components, ordered by number of levels
/// descending (strict orders first).
pub fn enumerate_preorders(k: usize) -> Vec<Preorder> {
    let mut out = Vec::new();
    for num_levels in (1..=k).rev() {
        let mut levels = vec![0; k];
        let mut used = vec![0usize; num_levels];
        surjections(0, num_levels, &mut levels, &mut used, &mut out);
    }
    out
}

fn surjections(
    pos: usize,
    num_levels: usize,
    levels: &mut Vec<usize>,
    used: &mut Vec<usize>,
    out: &mut Vec<Preorder>,
) {
    let k = levels.len();
    let missing = used.iter().filter(|&&c| c == 0).count();
    if missing > k - pos {
        return;
    }
    if pos == k {
        out.push(Preorder {
            levels: levels.clone(),
        });
        return;
    }
    for l in 0..num_levels {
        levels[pos] = l;
        used[l] += 1;
        surjections(pos + 1, num_levels, levels, used, out);
        used[l] -= 1;
    }
}

/// Every refinement of `base`: strict comparisons are kept, each tied class
/// is replaced by some preorder over its members.
pub fn refinements(base: &Preorder) -> Vec<Preorder> {
    let classes = base.classes();
    let per_class: Vec<Vec<Preorder>> = classes
        .iter()
        .map(|c| enumerate_preorders(c.len()))
        .collect();
    let mut out = Vec::new();
    let mut choice = vec![0usize; classes.len()];
    loop {
        let mut levels = vec![0; base.len()];
        let mut offset = 0;
        for (ci, class) in classes.iter().enumerate() {
            let sub = &per_class[ci][choice[ci]];
            for (pos, &item) in class.iter().enumerate() {
                levels[item] = offset + sub.level(pos);
            }
            offset += sub.num_levels();
        }
        out.push(Preorder { levels });
        // odometer
        let mut i = 0;
        loop {
            if i == classes.len() {
                return out;
            }
            choice[i] += 1;
            if choice[i] < per_class[i].len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}
