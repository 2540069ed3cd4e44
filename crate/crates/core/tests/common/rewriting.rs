//! Role words that rewrite to a role under a set of inclusion axioms.

use std::collections::{BTreeSet, VecDeque};

use sroiqc::kb_model::RoleExpr;

fn inverse_word(w: &[RoleExpr]) -> Vec<RoleExpr> {
    w.iter().rev().map(RoleExpr::inv).collect()
}

/// `w ⇒* target`, replacing occurrences of a left-hand side (or of its
/// inverse) by the right-hand side (or its inverse).
pub fn derives(word: &[RoleExpr], target: &RoleExpr, rias: &[(Vec<RoleExpr>, RoleExpr)]) -> bool {
    let mut rules: Vec<(Vec<RoleExpr>, RoleExpr)> = Vec::new();
    for (lhs, rhs) in rias {
        rules.push((lhs.clone(), rhs.clone()));
        rules.push((inverse_word(lhs), rhs.inv()));
    }
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::from([word.to_vec()]);
    while let Some(w) = queue.pop_front() {
        if w.len() == 1 && &w[0] == target {
            return true;
        }
        if !seen.insert(w.clone()) {
            continue;
        }
        for (lhs, rhs) in &rules {
            if lhs.len() > w.len() {
                continue;
            }
            for at in 0..=w.len() - lhs.len() {
                if w[at..at + lhs.len()] == lhs[..] {
                    let mut next = w[..at].to_vec();
                    next.push(rhs.clone());
                    next.extend_from_slice(&w[at + lhs.len()..]);
                    queue.push_back(next);
                }
            }
        }
    }
    false
}

/// All words over `alphabet` up to length `max`, the empty word included.
pub fn words(alphabet: &[RoleExpr], max: usize) -> Vec<Vec<RoleExpr>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..max {
        let mut next = Vec::new();
        for w in &layer {
            for a in alphabet {
                let mut v: Vec<RoleExpr> = w.clone();
                v.push(a.clone());
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}
