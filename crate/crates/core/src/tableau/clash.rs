use crate::constraint::is_satisfiable;

use super::interner::Shape;
use super::rules::{has_clique, Engine};
use super::state::{CompletionSystem, Deps, NodeId};

impl Engine<'_> {
    /// Re-checks the constraint network after it changed.
    pub fn refresh_network(&self, s: &mut CompletionSystem) {
        if s.net_dirty {
            s.net_dirty = false;
            if s.clash.is_none() && !is_satisfiable(self.sys(), &s.network) {
                s.clash = Some("constraint network is unsatisfiable".into());
                s.clash_deps = Some(s.net_deps);
            }
        }
    }

    /// A description of the first clash in `s`, if any, with the levels it
    /// depends on.
    pub fn find_clash(&self, s: &CompletionSystem) -> Option<(String, Deps)> {
        if let Some(c) = &s.clash {
            return Some((c.clone(), s.clash_deps.unwrap_or_else(|| s.global_deps() | s.ctx)));
        }
        let it = &self.it;
        let d = |y: NodeId| s.node(y).deps;
        let ld = |y: NodeId, c| s.label_dep(y, c);
        for x in s.alive_nodes() {
            for &c in &s.node(x).label {
                match *it.shape(c) {
                    Shape::Bottom => return Some((format!("bottom at node {x}"), ld(x, c))),
                    Shape::Not(d) => {
                        if s.node(x).label.contains(&d) {
                            return Some((format!("{} and its negation at node {x}", it.concept(d)), ld(x, c) | ld(x, d)));
                        }
                        if let Shape::SelfR(r) = *it.shape(d) {
                            if s.is_neighbour(x, x, r, it) {
                                return Some((format!("{} with a self loop at node {x}", it.concept(c)), ld(x, c) | s.node(x).deps));
                            }
                        }
                    }
                    Shape::AtMost(n, r, body) => {
                        let cands: Vec<NodeId> =
                            s.r_neighbours(x, r, it).into_iter().filter(|&y| s.has(y, body, it)).collect();
                        if cands.len() > n as usize && has_clique(&cands, n as usize + 1, &|a, b| s.distinct(a, b)) {
                            let deps = cands.iter().fold(ld(x, c) | d(x), |acc, &y| acc | d(y) | ld(y, body));
                            return Some((format!("{} violated at node {x}", it.concept(c)), deps));
                        }
                    }
                    Shape::CAtMost(n, g) => {
                        let succ = s.g_successors(x, g, it);
                        if succ.len() > n as usize && has_clique(&succ, n as usize + 1, &|a, b| s.cdistinct(a, b)) {
                            return Some((format!("{} violated at node {x}", it.concept(c)), ld(x, c) | d(x) | s.net_deps));
                        }
                    }
                    _ => {}
                }
            }
            for &r in &self.irreflexive {
                if s.is_neighbour(x, x, r, it) {
                    return Some((format!("irreflexive {} loops at node {x}", it.role_expr(r)), d(x)));
                }
            }
            for &(r, t) in &self.disjoint {
                for y in s.neighbours(x) {
                    if s.is_neighbour(x, y, r, it) && s.is_neighbour(x, y, t, it) {
                        let why = format!("disjoint {} and {} share the edge {x} -> {y}", it.role_expr(r), it.role_expr(t));
                        return Some((why, d(x) | d(y)));
                    }
                }
            }
        }
        for (o, xs) in s.nominal_index(it) {
            for (i, &a) in xs.iter().enumerate() {
                for &b in &xs[i + 1..] {
                    if s.distinct(a, b) {
                        let why = format!("nominal {} on distinct nodes {a} and {b}", it.individuals[o as usize]);
                        let nom = |y: NodeId| {
                            let n = s.node(y);
                            n.label.iter().filter(|&&c| *it.shape(c) == Shape::Nominal(o)).fold(n.deps, |acc, &c| acc | ld(y, c))
                        };
                        return Some((why, nom(a) | nom(b)));
                    }
                }
            }
        }
        None
    }
}
