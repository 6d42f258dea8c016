//! Textbook implementations of each rule, computed straight from the ballots.
//! These never touch the generalized scoring tables and serve as oracles for
//! the encodings in `rules`.

use super::{Alternative, GsrError, Profile};

/// Winner of `profile` under `rule_name` by the rule's usual procedure.
/// Ties go to the lowest-index alternative; STV eliminates the highest-index
/// alternative among those tied for the fewest first places.
pub fn direct_winner(rule_name: &str, profile: &Profile) -> Result<Alternative, GsrError> {
    let m = profile.m();
    let name = rule_name.trim();
    if let Some(ws) = name.strip_prefix("positional:") {
        let weights = ws
            .split(',')
            .map(|w| w.trim().parse::<i64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| GsrError::Weights(e.to_string()))?;
        return Ok(positional(profile, &weights));
    }
    let winner = match name {
        "plurality" | "majority" => {
            let mut w = vec![0; m];
            w[0] = 1;
            positional(profile, &w)
        }
        "borda" => positional(profile, &(0..m as i64).rev().collect::<Vec<_>>()),
        "veto" => {
            let mut w = vec![1; m];
            w[m - 1] = 0;
            positional(profile, &w)
        }
        "stv" => stv(profile),
        "maximin" => maximin(profile),
        "copeland" => copeland(profile),
        "bucklin" => bucklin(profile),
        "plurality-runoff" | "runoff" => runoff(profile),
        other => return Err(GsrError::UnknownRule(other.to_string())),
    };
    Ok(winner)
}

fn argmax_lowest(scores: &[i64]) -> Alternative {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    Alternative(best)
}

fn positional(profile: &Profile, weights: &[i64]) -> Alternative {
    let mut scores = vec![0i64; profile.m()];
    for v in profile.votes() {
        for (pos, &a) in v.ranking().iter().enumerate() {
            scores[a] += weights[pos];
        }
    }
    argmax_lowest(&scores)
}

fn stv(profile: &Profile) -> Alternative {
    let m = profile.m();
    let mut alive = vec![true; m];
    for _round in 0..m - 1 {
        let mut firsts = vec![0i64; m];
        for v in profile.votes() {
            let top = v.ranking().iter().find(|&&a| alive[a]).unwrap();
            firsts[*top] += 1;
        }
        let mut loser = None;
        for a in 0..m {
            if !alive[a] {
                continue;
            }
            loser = match loser {
                None => Some(a),
                // `<=` so that the later alternative wins a tie for elimination
                Some(l) if firsts[a] <= firsts[l] => Some(a),
                keep => keep,
            };
        }
        alive[loser.unwrap()] = false;
    }
    Alternative(alive.iter().position(|&x| x).unwrap())
}

fn pairwise_counts(profile: &Profile) -> Vec<Vec<i64>> {
    let m = profile.m();
    let mut n = vec![vec![0i64; m]; m];
    for v in profile.votes() {
        let r = v.ranking();
        for i in 0..m {
            for j in i + 1..m {
                n[r[i]][r[j]] += 1;
            }
        }
    }
    n
}

fn maximin(profile: &Profile) -> Alternative {
    let m = profile.m();
    let n = pairwise_counts(profile);
    let scores: Vec<i64> = (0..m)
        .map(|i| (0..m).filter(|&j| j != i).map(|j| n[i][j]).min().unwrap())
        .collect();
    argmax_lowest(&scores)
}

fn copeland(profile: &Profile) -> Alternative {
    let m = profile.m();
    let n = pairwise_counts(profile);
    let scores: Vec<i64> = (0..m)
        .map(|i| {
            (0..m)
                .filter(|&j| j != i)
                .map(|j| match n[i][j].cmp(&n[j][i]) {
                    std::cmp::Ordering::Greater => 2,
                    std::cmp::Ordering::Equal => 1,
                    std::cmp::Ordering::Less => 0,
                })
                .sum()
        })
        .collect();
    argmax_lowest(&scores)
}

fn bucklin(profile: &Profile) -> Alternative {
    let m = profile.m();
    let n = profile.n() as i64;
    for depth in 1..m {
        let mut counts = vec![0i64; m];
        for v in profile.votes() {
            for &a in &v.ranking()[..depth] {
                counts[a] += 1;
            }
        }
        if counts.iter().any(|&c| 2 * c > n) {
            let masked: Vec<i64> = counts
                .iter()
                .map(|&c| if 2 * c > n { c } else { i64::MIN })
                .collect();
            return argmax_lowest(&masked);
        }
    }
    Alternative(0)
}

fn runoff(profile: &Profile) -> Alternative {
    let m = profile.m();
    let mut firsts = vec![0i64; m];
    for v in profile.votes() {
        firsts[v.top().0] += 1;
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| firsts[b].cmp(&firsts[a]).then(a.cmp(&b)));
    if m == 2 {
        return Alternative(order[0]);
    }
    let (x, y) = (order[0].min(order[1]), order[0].max(order[1]));
    let prefer_y = profile.votes().iter().filter(|v| v.prefers(y, x)).count();
    let prefer_x = profile.n() - prefer_y;
    if prefer_y > prefer_x {
        Alternative(y)
    } else {
        Alternative(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(rule: &str, votes: &[&str]) -> usize {
        let m = votes[0].split('>').count();
        direct_winner(rule, &Profile::parse(m, votes).unwrap()).unwrap().0
    }

    #[test]
    fn hand_checked_winners() {
        assert_eq!(w("plurality", &["a>b>c", "a>c>b", "b>a>c"]), 0);
        assert_eq!(w("plurality", &["a>b", "b>a"]), 0);
        // first places a:2 b:1 c:1, c eliminated (tie with b goes to the later label),
        // then a:2 b:2, b eliminated
        assert_eq!(w("stv", &["a>b>c", "a>b>c", "b>c>a", "c>b>a"]), 0);
        assert_eq!(w("copeland", &["a>b>c", "b>c>a", "c>a>b"]), 0);
        // N(a,b)=2 N(a,c)=2 N(b,c)=3: maximin a=2, b=1, c=1
        assert_eq!(w("maximin", &["a>b>c", "a>b>c", "b>c>a"]), 0);
        // depth 1: a1 b1 c1 no majority; depth 2: a3 b2 c1
        assert_eq!(w("bucklin", &["a>b>c", "b>a>c", "c>a>b"]), 0);
        // firsts c:2 a:1 b:1; runoff c vs a: a preferred by 2 of 4, tie to a
        assert_eq!(w("plurality-runoff", &["c>a>b", "c>b>a", "a>b>c", "b>a>c"]), 0);
    }

    #[test]
    fn unknown_rule_is_rejected() {
        let p = Profile::parse(2, &["a>b"]).unwrap();
        assert!(matches!(direct_winner("dodgson", &p), Err(GsrError::UnknownRule(_))));
    }
}
