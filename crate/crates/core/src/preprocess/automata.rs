use std::collections::{BTreeMap, BTreeSet};

use crate::kb_model::RoleExpr;

use super::roles::RoleAnalysis;

/// A nondeterministic automaton over role expressions with ε-moves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoleAutomaton {
    states: u32,
    initial: u32,
    final_state: u32,
    transitions: Vec<(u32, Option<RoleExpr>, u32)>,
    eps: Vec<Vec<u32>>,
}

impl RoleAutomaton {
    fn empty() -> Self {
        RoleAutomaton { states: 0, initial: 0, final_state: 0, transitions: Vec::new(), eps: Vec::new() }
    }

    fn fresh(&mut self) -> u32 {
        self.states += 1;
        self.states - 1
    }

    fn add(&mut self, p: u32, label: Option<RoleExpr>, q: u32) {
        let t = (p, label, q);
        if !self.transitions.contains(&t) {
            self.transitions.push(t);
        }
    }

    /// Copies `other` into `self`, returning the offset of its states.
    fn embed(&mut self, other: &RoleAutomaton) -> u32 {
        let off = self.states;
        self.states += other.states;
        for (p, l, q) in &other.transitions {
            self.add(p + off, l.clone(), q + off);
        }
        off
    }

    /// The two-state automaton accepting exactly `r`.
    pub fn single(r: &RoleExpr) -> Self {
        let mut a = Self::empty();
        a.initial = a.fresh();
        a.final_state = a.fresh();
        a.add(0, Some(r.clone()), 1);
        a.finish()
    }

    fn finish(mut self) -> Self {
        self.eps = (0..self.states)
            .map(|p| {
                let mut seen = BTreeSet::from([p]);
                let mut stack = vec![p];
                while let Some(x) = stack.pop() {
                    for (a, l, b) in &self.transitions {
                        if *a == x && l.is_none() && seen.insert(*b) {
                            stack.push(*b);
                        }
                    }
                }
                seen.into_iter().collect()
            })
            .collect();
        self
    }

    /// Initial and final swapped, every transition reversed and inverted.
    pub fn mirror(&self) -> Self {
        RoleAutomaton {
            states: self.states,
            initial: self.final_state,
            final_state: self.initial,
            transitions: self.transitions.iter().map(|(p, l, q)| (*q, l.as_ref().map(RoleExpr::inv), *p)).collect(),
            eps: Vec::new(),
        }
        .finish()
    }

    pub fn state_count(&self) -> u32 {
        self.states
    }

    pub fn initial(&self) -> u32 {
        self.initial
    }

    pub fn final_state(&self) -> u32 {
        self.final_state
    }

    pub fn transitions(&self) -> &[(u32, Option<RoleExpr>, u32)] {
        &self.transitions
    }

    pub fn epsilon_closure(&self, p: u32) -> &[u32] {
        &self.eps[p as usize]
    }

    /// Whether the empty word is accepted when starting from `p`.
    pub fn accepts_empty_from(&self, p: u32) -> bool {
        self.eps[p as usize].contains(&self.final_state)
    }

    /// Labelled moves available from `p` after any number of ε-moves.
    pub fn moves_from(&self, p: u32) -> impl Iterator<Item = (&RoleExpr, u32)> + '_ {
        let closure = &self.eps[p as usize];
        self.transitions
            .iter()
            .filter(move |(a, l, _)| l.is_some() && closure.contains(a))
            .map(|(_, l, b)| (l.as_ref().unwrap(), *b))
    }

    /// Membership of a role word (exact symbol match, no hierarchy).
    pub fn accepts(&self, word: &[RoleExpr]) -> bool {
        let mut cur: BTreeSet<u32> = self.eps[self.initial as usize].iter().copied().collect();
        for sym in word {
            let mut next = BTreeSet::new();
            for (a, l, b) in &self.transitions {
                if cur.contains(a) && l.as_ref() == Some(sym) {
                    next.extend(self.eps[*b as usize].iter().copied());
                }
            }
            if next.is_empty() {
                return false;
            }
            cur = next;
        }
        cur.contains(&self.final_state)
    }
}

/// `A_R`: the automaton built from the inclusions of `r` alone.
fn base_automaton(r: &str, analysis: &RoleAnalysis) -> RoleAutomaton {
    let me = RoleExpr::named(r);
    let mut a = RoleAutomaton::empty();
    let i = a.fresh();
    let f = a.fresh();
    a.initial = i;
    a.final_state = f;
    a.add(i, Some(me.clone()), f);
    for w in analysis.rias_of(r) {
        let n = w.len();
        if n == 1 && w[0] == me.inv() {
            continue;
        }
        if n == 2 && w[0] == me && w[1] == me {
            a.add(f, None, i);
            continue;
        }
        let (from, body, to): (u32, &[RoleExpr], u32) = if n >= 2 && w[0] == me {
            (f, &w[1..], f)
        } else if n >= 2 && w[n - 1] == me {
            (i, &w[..n - 1], i)
        } else {
            (i, &w[..], f)
        };
        let start = a.fresh();
        a.add(from, None, start);
        let mut cur = start;
        for s in body {
            let nx = a.fresh();
            a.add(cur, Some(s.clone()), nx);
            cur = nx;
        }
        a.add(cur, None, to);
    }
    a
}

/// `Â_R`: adds a mirrored copy when `r` is declared symmetric.
fn symmetric_closure(r: &str, base: RoleAutomaton, analysis: &RoleAnalysis) -> RoleAutomaton {
    let me = RoleExpr::named(r);
    let symmetric = analysis.rias_of(r).iter().any(|w| w.len() == 1 && w[0] == me.inv());
    if !symmetric {
        return base;
    }
    let mirrored = base.clone().finish().mirror();
    let mut out = base;
    let off = out.embed(&mirrored);
    let (i, f) = (out.initial, out.final_state);
    // Enter the mirror at its initial state (f'), leave from its final one (i').
    out.add(i, None, mirrored.initial + off);
    out.add(mirrored.final_state + off, None, f);
    out
}

/// Builds `B_R` for every role name and both orientations. A simple role gets
/// one transition per sub-role.
pub fn compile_automata(analysis: &RoleAnalysis) -> BTreeMap<RoleExpr, RoleAutomaton> {
    let mut built: BTreeMap<String, RoleAutomaton> = BTreeMap::new();
    for name in analysis.role_names() {
        build(name, analysis, &mut built);
    }
    let mut out = BTreeMap::new();
    for (name, a) in built {
        out.insert(RoleExpr::inverse_of(name.as_str()), a.mirror());
        out.insert(RoleExpr::named(name), a);
    }
    out
}

fn build(name: &str, analysis: &RoleAnalysis, built: &mut BTreeMap<String, RoleAutomaton>) -> RoleAutomaton {
    if let Some(a) = built.get(name) {
        return a.clone();
    }
    let me = RoleExpr::named(name);
    if analysis.is_simple(&me) {
        // One transition per sub-role, so the language is exactly the hierarchy.
        let mut a = RoleAutomaton::single(&me);
        for other in analysis.role_names() {
            for s in [RoleExpr::named(other.as_str()), RoleExpr::inverse_of(other.as_str())] {
                if s != me && analysis.is_subrole(&s, &me) {
                    a.add(0, Some(s), 1);
                }
            }
        }
        let a = a.finish();
        built.insert(name.to_string(), a.clone());
        return a;
    }
    let hat = symmetric_closure(name, base_automaton(name, analysis), analysis);
    let mut out = hat.clone();
    for (p, label, q) in hat.transitions.iter() {
        let Some(s) = label else { continue };
        if *s == me || *s == me.inv() {
            continue;
        }
        let Some(sname) = s.name() else { continue };
        // Regularity guarantees sname precedes name, so this recursion terminates.
        let sub = build(sname, analysis, built);
        let sub = if s.is_inverse() { sub.mirror() } else { sub };
        let off = out.embed(&sub);
        out.add(*p, None, sub.initial + off);
        out.add(sub.final_state + off, None, *q);
    }
    let out = out.finish();
    built.insert(name.to_string(), out.clone());
    out
}
