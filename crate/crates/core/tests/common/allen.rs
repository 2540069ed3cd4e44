//! Interval endpoints as ground truth for the Allen algebra.

use rand::Rng;

pub const RELATIONS: [&str; 13] = [
    "before",
    "after",
    "meets",
    "met-by",
    "overlaps",
    "overlapped-by",
    "starts",
    "started-by",
    "during",
    "contains",
    "finishes",
    "finished-by",
    "equals",
];

/// The relation between `[s1, e1]` and `[s2, e2]`, read off the endpoints.
pub fn relation_of((s1, e1): (i64, i64), (s2, e2): (i64, i64)) -> &'static str {
    assert!(s1 < e1 && s2 < e2);
    if e1 < s2 {
        "before"
    } else if e2 < s1 {
        "after"
    } else if e1 == s2 {
        "meets"
    } else if e2 == s1 {
        "met-by"
    } else if s1 == s2 && e1 == e2 {
        "equals"
    } else if s1 == s2 {
        if e1 < e2 { "starts" } else { "started-by" }
    } else if e1 == e2 {
        if s1 > s2 { "finishes" } else { "finished-by" }
    } else if s2 < s1 && e1 < e2 {
        "during"
    } else if s1 < s2 && e2 < e1 {
        "contains"
    } else if s1 < s2 {
        "overlaps"
    } else {
        "overlapped-by"
    }
}

/// Whether intervals can be placed so that every `(u, rel, v)` holds.
///
/// Any realizable configuration of `n` intervals has an order-isomorphic
/// copy with endpoints in `0..2n`, so that range is searched exhaustively.
pub fn realizable(n: usize, constraints: &[(usize, &str, usize)]) -> bool {
    fn place(k: usize, n: usize, cs: &[(usize, &str, usize)], iv: &mut Vec<(i64, i64)>) -> bool {
        if k == n {
            return true;
        }
        let top = 2 * n as i64;
        for s in 0..top {
            for e in s + 1..top {
                iv.push((s, e));
                let ok = cs.iter().all(|&(u, r, v)| {
                    if u.max(v) != k {
                        return true;
                    }
                    relation_of(iv[u], iv[v]) == r
                });
                if ok && place(k + 1, n, cs, iv) {
                    return true;
                }
                iv.pop();
            }
        }
        false
    }
    place(0, n, constraints, &mut Vec::with_capacity(n))
}

/// Random intervals with small integer endpoints, so coincidences are common.
pub fn random_intervals(rng: &mut impl Rng, n: usize) -> Vec<(i64, i64)> {
    (0..n)
        .map(|_| {
            let s = rng.gen_range(0..5);
            (s, s + rng.gen_range(1..4))
        })
        .collect()
}
