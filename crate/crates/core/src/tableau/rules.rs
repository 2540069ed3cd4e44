use crate::constraint::ConstraintSystemDef;
use crate::kb_model::{Assertion, Concept, RoleAssertion, Side};
use crate::preprocess::ReducedKb;

use super::blocking::BlockInfo;
use super::interner::{CIndId, CPath, CRoleId, ConceptId, Interner, RoleId, Shape};
use super::state::{CNodeId, CompletionSystem, Deps, NodeId};

/// Completion rules, grouped into priority classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleKind {
    Connect,
    Complete,
    Nominal,
    NominalGuess,
    NominalAtMost,
    Gci,
    And,
    Forall1,
    Forall2,
    Forall3,
    SelfRef,
    CForall,
    CForallInd,
    NegCExists,
    NegCExistsInd,
    Or,
    Choose,
    AtMost,
    CAtMost,
    Exists,
    AtLeast,
    CExists,
    CExistsInd,
    CAtLeast,
}

impl RuleKind {
    /// 0 connect, 1 complete, 2 o-rule, 3 nominal guessing and merging,
    /// 4 deterministic, 5 branching, 6 generating.
    pub fn class(self) -> u8 {
        use RuleKind::*;
        match self {
            Connect => 0,
            Complete => 1,
            Nominal => 2,
            NominalGuess | NominalAtMost => 3,
            Gci | And | Forall1 | Forall2 | Forall3 | SelfRef | CForall | CForallInd | NegCExists | NegCExistsInd => 4,
            Or | Choose | AtMost | CAtMost => 5,
            Exists | AtLeast | CExists | CExistsInd | CAtLeast => 6,
        }
    }

    pub fn name(self) -> &'static str {
        use RuleKind::*;
        match self {
            Connect => "connect",
            Complete => "complete",
            Nominal => "o",
            NominalGuess => "nn",
            NominalAtMost => "atmost-nominal",
            Gci => "gci",
            And => "and",
            Forall1 => "all1",
            Forall2 => "all2",
            Forall3 => "all3",
            SelfRef => "self",
            CForall => "call",
            CForallInd => "call-ind",
            NegCExists => "not-csome",
            NegCExistsInd => "not-csome-ind",
            Or => "or",
            Choose => "choose",
            AtMost => "atmost",
            CAtMost => "catmost",
            Exists => "some",
            AtLeast => "atleast",
            CExists => "csome",
            CExistsInd => "csome-ind",
            CAtLeast => "catleast",
        }
    }
}

#[derive(Clone, Debug)]
pub enum Action {
    Connect,
    /// Branch over the base relations of a concrete pair.
    Complete(CNodeId, CNodeId),
    /// Alternatives, each merging `.0` into `.1`.
    Merge(Vec<(NodeId, NodeId)>),
    NominalGuess { role: RoleId, body: ConceptId, max: u32 },
    Add(Vec<(NodeId, ConceptId)>),
    SelfLoop(RoleId),
    Templates(Vec<(CNodeId, usize, bool, CNodeId)>),
    /// Alternatives, each adding one concept to one node.
    Choose(Vec<(NodeId, ConceptId)>),
    CMerge(Vec<(CNodeId, CNodeId)>),
    Exists { role: RoleId, body: ConceptId },
    AtLeast { n: u32, role: RoleId, body: ConceptId },
    CExists { p1: CPath, p2: CPath, rel: usize },
    CExistsInd { p: CPath, ind: CIndId, side: Side, rel: usize },
    CAtLeast { n: u32, g: CRoleId },
}

#[derive(Clone, Debug)]
pub struct RuleInstance {
    pub kind: RuleKind,
    pub node: Option<NodeId>,
    pub concept: Option<ConceptId>,
    pub action: Action,
}

/// Whether some `k` of `cands` are pairwise related by `adj`.
pub fn has_clique(cands: &[u32], k: usize, adj: &dyn Fn(u32, u32) -> bool) -> bool {
    fn rec(cands: &[u32], k: usize, chosen: &mut Vec<u32>, start: usize, adj: &dyn Fn(u32, u32) -> bool) -> bool {
        if chosen.len() == k {
            return true;
        }
        for i in start..cands.len() {
            if cands.len() - i < k - chosen.len() {
                return false;
            }
            let c = cands[i];
            if chosen.iter().all(|&d| adj(c, d)) {
                chosen.push(c);
                if rec(cands, k, chosen, i + 1, adj) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    if k == 0 {
        return true;
    }
    cands.len() >= k && rec(cands, k, &mut Vec::new(), 0, adj)
}

/// Tableau engine for one reduced knowledge base.
pub struct Engine<'a> {
    pub rkb: &'a ReducedKb,
    pub it: Interner,
    pub internalized: Vec<ConceptId>,
    pub irreflexive: Vec<RoleId>,
    pub disjoint: Vec<(RoleId, RoleId)>,
}

impl<'a> Engine<'a> {
    pub fn new(rkb: &'a ReducedKb) -> Self {
        let mut it = Interner::new(rkb);
        let mut internalized: Vec<ConceptId> = rkb.internalized.iter().map(|c| it.intern(c)).collect();
        internalized.sort();
        internalized.dedup();
        let mut irreflexive = Vec::new();
        let mut disjoint = Vec::new();
        for a in &rkb.residual_role_assertions {
            match a {
                RoleAssertion::Irr(r) => irreflexive.push(it.role_id(r)),
                RoleAssertion::Dis(r, s) => disjoint.push((it.role_id(r), it.role_id(s))),
                _ => {}
            }
        }
        Engine { rkb, it, internalized, irreflexive, disjoint }
    }

    pub fn sys(&self) -> &'a ConstraintSystemDef {
        &self.rkb.system
    }

    /// The initial completion system: one node per named individual (or a
    /// single root), one concrete node per constraint individual.
    pub fn initialize(&mut self) -> CompletionSystem {
        let mut s = CompletionSystem::default();
        let mut node_of = std::collections::BTreeMap::new();
        for a in &self.rkb.individuals {
            let x = s.new_node(None, 0);
            let c = self.it.intern(&Concept::nominal(a.as_str()));
            s.add_concept(x, c, &self.it);
            node_of.insert(a.clone(), x);
        }
        if self.rkb.individuals.is_empty() {
            s.new_node(None, 0);
        }
        for k in 0..self.it.cindividuals.len() {
            let c = s.new_cnode(Some(k as CIndId));
            s.cind_node.push(c);
        }
        let cn = s.cind_node.clone();
        for (i, &c) in cn.iter().enumerate() {
            for &d in &cn[i + 1..] {
                s.set_cdistinct(c, d);
            }
        }
        let sys = self.sys();
        for a in &self.rkb.residual_abox {
            match a {
                Assertion::ConcreteValue(x, g, i) => {
                    let ci = s.cind_node[self.it.cindividual(i) as usize];
                    s.add_cedge(node_of[x], ci, self.it.crole_id(g.as_str()));
                }
                Assertion::Constraint(i, r, j) => {
                    let ci = s.cind_node[self.it.cindividual(i) as usize];
                    let cj = s.cind_node[self.it.cindividual(j) as usize];
                    let rel = 1 << self.it.relation_index(r);
                    if let Err(e) = s.network.constrain(sys, ci, rel, cj) {
                        s.clash.get_or_insert(format!("constraint assertion: {e}"));
                    }
                    s.net_dirty = true;
                }
                Assertion::Distinct(x, y) => s.set_distinct(node_of[x], node_of[y]),
                _ => {}
            }
        }
        s
    }

    fn safe(&self, s: &CompletionSystem, b: &BlockInfo, x: NodeId, y: NodeId) -> bool {
        s.is_blockable(x) || !b.get(y).blocked()
    }

    /// `S`-neighbours of `x` carrying `c`.
    fn neighbours_with(&self, s: &CompletionSystem, x: NodeId, r: RoleId, c: ConceptId) -> Vec<NodeId> {
        s.r_neighbours(x, r, &self.it).into_iter().filter(|&y| s.has(y, c, &self.it)).collect()
    }

    fn merge_pairs(&self, s: &CompletionSystem, cands: &[NodeId]) -> Vec<(NodeId, NodeId)> {
        let key = |x: NodeId| (s.node(x).level, x);
        let mut out = Vec::new();
        for (i, &p0) in cands.iter().enumerate() {
            for &q0 in &cands[i + 1..] {
                if s.distinct(p0, q0) {
                    continue;
                }
                let (p, q) = if key(p0) <= key(q0) { (p0, q0) } else { (q0, p0) };
                let pair = if !s.is_blockable(p) {
                    (q, p)
                } else if !s.is_blockable(q) || s.is_ancestor(q, p) {
                    (p, q)
                } else {
                    (q, p)
                };
                out.push(pair);
            }
        }
        out
    }

    fn nominal_guess(&mut self, s: &CompletionSystem, x: NodeId, c: ConceptId) -> Option<Action> {
        let Shape::AtMost(n, r, body) = *self.it.shape(c) else { return None };
        if n == 0 {
            return None;
        }
        let trigger = s.r_neighbours(x, r, &self.it).into_iter().any(|y| {
            s.is_blockable(y) && s.has(y, body, &self.it) && s.node(y).out.contains_key(&x)
        });
        if !trigger {
            return None;
        }
        for m in 1..=n {
            let bound = self.it.at_most(m, r, body);
            if !s.node(x).label.contains(&bound) {
                continue;
            }
            let noms: Vec<NodeId> =
                self.neighbours_with(s, x, r, body).into_iter().filter(|&y| !s.is_blockable(y)).collect();
            if has_clique(&noms, m as usize, &|a, b| s.distinct(a, b)) {
                return None;
            }
        }
        Some(Action::NominalGuess { role: r, body, max: n })
    }

    fn at_most_merge(&self, s: &CompletionSystem, x: NodeId, c: ConceptId) -> Option<Action> {
        let Shape::AtMost(n, r, body) = *self.it.shape(c) else { return None };
        let cands = self.neighbours_with(s, x, r, body);
        if cands.len() <= n as usize {
            return None;
        }
        let pairs = self.merge_pairs(s, &cands);
        (!pairs.is_empty()).then_some(Action::Merge(pairs))
    }

    fn concrete_pairs(
        &self,
        s: &CompletionSystem,
        x: NodeId,
        p1: CPath,
        p2: CPath,
        rel: usize,
        positive: bool,
    ) -> Vec<(CNodeId, CNodeId, usize, bool)> {
        let mut out = Vec::new();
        let u2 = s.u_neighbours(x, p2, &self.it);
        for c1 in s.u_neighbours(x, p1, &self.it) {
            for &c2 in &u2 {
                if !s.has_template(c1, rel, positive, c2) {
                    out.push((c1, c2, rel, positive));
                }
            }
        }
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn concrete_ind_pairs(
        &self,
        s: &CompletionSystem,
        x: NodeId,
        p: CPath,
        ind: CIndId,
        side: Side,
        rel: usize,
        positive: bool,
    ) -> Vec<(CNodeId, CNodeId, usize, bool)> {
        let ci = s.cind_node[ind as usize];
        let mut out = Vec::new();
        for c in s.u_neighbours(x, p, &self.it) {
            let (a, b) = match side {
                Side::Right => (c, ci),
                Side::Left => (ci, c),
            };
            if !s.has_template(a, rel, positive, b) {
                out.push((a, b, rel, positive));
            }
        }
        out
    }

    fn deterministic(&mut self, s: &CompletionSystem, b: &BlockInfo, x: NodeId) -> Option<RuleInstance> {
        let inst = |kind, concept, action| Some(RuleInstance { kind, node: Some(x), concept, action });
        let missing: Vec<(NodeId, ConceptId)> =
            self.internalized.iter().filter(|&&c| !s.has(x, c, &self.it)).map(|&c| (x, c)).collect();
        if !missing.is_empty() {
            return inst(RuleKind::Gci, None, Action::Add(missing));
        }
        let label: Vec<ConceptId> = s.node(x).label.iter().copied().collect();
        for &c in &label {
            if let Shape::And(p, q) = *self.it.shape(c) {
                if !s.has(x, p, &self.it) || !s.has(x, q, &self.it) {
                    return inst(RuleKind::And, Some(c), Action::Add(vec![(x, p), (x, q)]));
                }
            }
        }
        for &c in &label {
            if let Shape::Forall(r, body) = *self.it.shape(c) {
                let init = self.it.automaton(r).initial;
                let target = self.it.aut_forall(r, init, body);
                if !s.has(x, target, &self.it) {
                    return inst(RuleKind::Forall1, Some(c), Action::Add(vec![(x, target)]));
                }
            }
        }
        for &c in &label {
            if let Shape::AutForall(r, p, body) = *self.it.shape(c) {
                let moves = self.it.automaton(r).moves[p as usize].clone();
                let mut adds = Vec::new();
                let nbrs = s.neighbours(x);
                for (t, q) in moves {
                    let target = self.it.aut_forall(r, q, body);
                    for &y in &nbrs {
                        if s.is_neighbour(x, y, t, &self.it) && !s.has(y, target, &self.it) && !adds.contains(&(y, target)) {
                            adds.push((y, target));
                        }
                    }
                }
                if !adds.is_empty() {
                    return inst(RuleKind::Forall2, Some(c), Action::Add(adds));
                }
            }
        }
        for &c in &label {
            if let Shape::AutForall(r, p, body) = *self.it.shape(c) {
                if self.it.automaton(r).accepts_empty[p as usize] && !s.has(x, body, &self.it) {
                    return inst(RuleKind::Forall3, Some(c), Action::Add(vec![(x, body)]));
                }
            }
        }
        if !b.get(x).blocked() {
            for &c in &label {
                if let Shape::SelfR(r) = *self.it.shape(c) {
                    if !s.is_neighbour(x, x, r, &self.it) {
                        return inst(RuleKind::SelfRef, Some(c), Action::SelfLoop(r));
                    }
                }
            }
        }
        type Tpl = (CNodeId, CNodeId, usize, bool);
        let to_action = |v: Vec<Tpl>| Action::Templates(v.into_iter().map(|(a, b, r, p)| (a, r, p, b)).collect());
        for &c in &label {
            if let Shape::CForall(p1, p2, rel) = *self.it.shape(c) {
                let v = self.concrete_pairs(s, x, p1, p2, rel, true);
                if !v.is_empty() {
                    return inst(RuleKind::CForall, Some(c), to_action(v));
                }
            }
        }
        for &c in &label {
            if let Shape::CForallInd(p, i, side, rel) = *self.it.shape(c) {
                let v = self.concrete_ind_pairs(s, x, p, i, side, rel, true);
                if !v.is_empty() {
                    return inst(RuleKind::CForallInd, Some(c), to_action(v));
                }
            }
        }
        for &c in &label {
            if let Shape::Not(d) = *self.it.shape(c) {
                if let Shape::CExists(p1, p2, rel) = *self.it.shape(d) {
                    let v = self.concrete_pairs(s, x, p1, p2, rel, false);
                    if !v.is_empty() {
                        return inst(RuleKind::NegCExists, Some(c), to_action(v));
                    }
                }
            }
        }
        for &c in &label {
            if let Shape::Not(d) = *self.it.shape(c) {
                if let Shape::CExistsInd(p, i, side, rel) = *self.it.shape(d) {
                    let v = self.concrete_ind_pairs(s, x, p, i, side, rel, false);
                    if !v.is_empty() {
                        return inst(RuleKind::NegCExistsInd, Some(c), to_action(v));
                    }
                }
            }
        }
        None
    }

    fn branching(&mut self, s: &CompletionSystem, x: NodeId) -> Option<RuleInstance> {
        let inst = |kind, c, action| Some(RuleInstance { kind, node: Some(x), concept: Some(c), action });
        let label: Vec<ConceptId> = s.node(x).label.iter().copied().collect();
        for &c in &label {
            if let Shape::Or(p, q) = *self.it.shape(c) {
                if s.has(x, p, &self.it) || s.has(x, q, &self.it) {
                    continue;
                }
                let mut alts = Vec::new();
                // Disjuncts that create successors go last.
                let (p, q) = if self.weight(q) < self.weight(p) { (q, p) } else { (p, q) };
                for d in [p, q] {
                    let nd = self.it.complement(d);
                    if !s.has(x, nd, &self.it) && d != self.it.bottom {
                        alts.push((x, d));
                    }
                }
                if alts.is_empty() {
                    alts.push((x, p));
                }
                return inst(RuleKind::Or, c, Action::Choose(alts));
            }
        }
        for &c in &label {
            if let Shape::AtMost(_, r, body) = *self.it.shape(c) {
                let neg = self.it.complement(body);
                for y in s.r_neighbours(x, r, &self.it) {
                    if !s.has(y, body, &self.it) && !s.has(y, neg, &self.it) {
                        return inst(RuleKind::Choose, c, Action::Choose(vec![(y, body), (y, neg)]));
                    }
                }
            }
        }
        if s.is_blockable(x) {
            for &c in &label {
                if let Some(a) = self.at_most_merge(s, x, c) {
                    return inst(RuleKind::AtMost, c, a);
                }
            }
        }
        for &c in &label {
            if let Shape::CAtMost(n, g) = *self.it.shape(c) {
                let succ = s.g_successors(x, g, &self.it);
                if succ.len() <= n as usize {
                    continue;
                }
                let mut alts = Vec::new();
                for (i, &a) in succ.iter().enumerate() {
                    for &d in &succ[i + 1..] {
                        if s.cdistinct(a, d) {
                            continue;
                        }
                        let ia = s.cnode(a).individual.is_some();
                        let id = s.cnode(d).individual.is_some();
                        alts.push(match (ia, id) {
                            (true, false) => (d, a),
                            (false, true) => (a, d),
                            _ => (a.max(d), a.min(d)),
                        });
                    }
                }
                if !alts.is_empty() {
                    return inst(RuleKind::CAtMost, c, Action::CMerge(alts));
                }
            }
        }
        None
    }

    fn generating(&mut self, s: &CompletionSystem, b: &BlockInfo, x: NodeId) -> Option<RuleInstance> {
        let inst = |kind, c, action| Some(RuleInstance { kind, node: Some(x), concept: Some(c), action });
        let label: Vec<ConceptId> = s.node(x).label.iter().copied().collect();
        for &c in &label {
            if let Shape::Exists(r, body) = *self.it.shape(c) {
                let ok = self.neighbours_with(s, x, r, body).into_iter().any(|y| self.safe(s, b, x, y));
                if !ok {
                    return inst(RuleKind::Exists, c, Action::Exists { role: r, body });
                }
            }
        }
        for &c in &label {
            if let Shape::AtLeast(n, r, body) = *self.it.shape(c) {
                let cands: Vec<NodeId> =
                    self.neighbours_with(s, x, r, body).into_iter().filter(|&y| self.safe(s, b, x, y)).collect();
                if !has_clique(&cands, n as usize, &|a, d| s.distinct(a, d)) {
                    return inst(RuleKind::AtLeast, c, Action::AtLeast { n, role: r, body });
                }
            }
        }
        for &c in &label {
            if let Shape::CExists(p1, p2, rel) = *self.it.shape(c) {
                let u2 = s.u_neighbours(x, p2, &self.it);
                let found = s
                    .u_neighbours(x, p1, &self.it)
                    .into_iter()
                    .any(|c1| u2.iter().any(|&c2| s.has_template(c1, rel, true, c2)));
                if !found {
                    return inst(RuleKind::CExists, c, Action::CExists { p1, p2, rel });
                }
            }
        }
        for &c in &label {
            if let Shape::CExistsInd(p, ind, side, rel) = *self.it.shape(c) {
                let ci = s.cind_node[ind as usize];
                let found = s.u_neighbours(x, p, &self.it).into_iter().any(|d| match side {
                    Side::Right => s.has_template(d, rel, true, ci),
                    Side::Left => s.has_template(ci, rel, true, d),
                });
                if !found {
                    return inst(RuleKind::CExistsInd, c, Action::CExistsInd { p, ind, side, rel });
                }
            }
        }
        for &c in &label {
            if let Shape::CAtLeast(n, g) = *self.it.shape(c) {
                let succ = s.g_successors(x, g, &self.it);
                if !has_clique(&succ, n as usize, &|a, d| s.cdistinct(a, d)) {
                    return inst(RuleKind::CAtLeast, c, Action::CAtLeast { n, g });
                }
            }
        }
        None
    }

    /// The highest-priority applicable rule instance, if any.
    fn weight(&self, c: ConceptId) -> u8 {
        match *self.it.shape(c) {
            Shape::Exists(..) | Shape::AtLeast(..) | Shape::CExists(..) | Shape::CExistsInd(..) | Shape::CAtLeast(..) => 2,
            Shape::And(..) | Shape::Or(..) => 1,
            _ => 0,
        }
    }

    pub fn applicable_rule(&mut self, s: &CompletionSystem, b: &BlockInfo) -> Option<RuleInstance> {
        if !s.pending.is_empty() {
            return Some(RuleInstance { kind: RuleKind::Connect, node: None, concept: None, action: Action::Connect });
        }
        if let Some((u, v)) = b.completion {
            return Some(RuleInstance { kind: RuleKind::Complete, node: None, concept: None, action: Action::Complete(u, v) });
        }
        for xs in s.nominal_index(&self.it).values() {
            if xs.len() < 2 {
                continue;
            }
            let mut xs = xs.clone();
            xs.sort_by_key(|&x| (s.node(x).level, x));
            for &y in &xs[1..] {
                if !s.distinct(xs[0], y) {
                    return Some(RuleInstance {
                        kind: RuleKind::Nominal,
                        node: Some(xs[0]),
                        concept: None,
                        action: Action::Merge(vec![(y, xs[0])]),
                    });
                }
            }
        }
        let mut nominals: Vec<NodeId> = s.alive_nodes().filter(|&x| !s.is_blockable(x)).collect();
        nominals.sort_by_key(|&x| (s.node(x).level, x));
        for &x in &nominals {
            let label: Vec<ConceptId> = s.node(x).label.iter().copied().collect();
            for &c in &label {
                if let Some(a) = self.nominal_guess(s, x, c) {
                    return Some(RuleInstance { kind: RuleKind::NominalGuess, node: Some(x), concept: Some(c), action: a });
                }
            }
            for &c in &label {
                if let Some(a) = self.at_most_merge(s, x, c) {
                    return Some(RuleInstance { kind: RuleKind::NominalAtMost, node: Some(x), concept: Some(c), action: a });
                }
            }
        }
        let alive: Vec<NodeId> = s.alive_nodes().collect();
        for &x in &alive {
            if b.get(x).indirectly() {
                continue;
            }
            if let Some(r) = self.deterministic(s, b, x) {
                return Some(r);
            }
        }
        // Older nodes first, so a choice on a young node is not retried
        // while an old one still has work.
        for &x in &alive {
            if b.get(x).indirectly() {
                continue;
            }
            if let Some(r) = self.branching(s, x) {
                return Some(r);
            }
            if b.get(x).blocked() {
                continue;
            }
            if let Some(r) = self.generating(s, b, x) {
                return Some(r);
            }
        }
        None
    }

    fn u_successor(&self, s: &mut CompletionSystem, x: NodeId, p: CPath) -> CNodeId {
        let owner = match p.role {
            Some(r) => {
                let y = s.new_node(Some(x), 0);
                s.add_edge(x, y, [r]);
                y
            }
            None => x,
        };
        let c = s.new_cnode(None);
        s.add_cedge(owner, c, p.g);
        c
    }

    /// Levels behind the facts `inst` reads.
    pub fn premises(&mut self, s: &CompletionSystem, inst: &RuleInstance) -> Deps {
        use RuleKind::*;
        let st = |y: NodeId| s.node(y).deps;
        let Some(x) = inst.node else { return s.global_deps() };
        let trig = inst.concept.map_or(0, |c| s.label_dep(x, c));
        match (inst.kind, &inst.action) {
            (Connect | Complete, _) => s.global_deps(),
            (Gci, _) => s.node(x).born,
            (And | Forall1 | Forall3 | Exists | AtLeast | SelfRef, _) => trig,
            (Or, _) => {
                // Disjuncts dropped for clashing depend on the complement.
                let Some(Shape::Or(p, q)) = inst.concept.map(|c| self.it.shape(c).clone()) else { return s.node_deps(x) };
                let (np, nq) = (self.it.complement(p), self.it.complement(q));
                trig | s.label_dep(x, np) | s.label_dep(x, nq)
            }
            (Forall2 | Choose, Action::Add(ys) | Action::Choose(ys)) => {
                ys.iter().fold(trig | st(x), |d, &(y, _)| d | st(y))
            }
            (AtMost, _) => {
                let Some(Shape::AtMost(_, _, body)) = inst.concept.map(|c| self.it.shape(c).clone()) else {
                    return s.node_deps(x);
                };
                s.neighbours(x).into_iter().fold(trig | st(x), |d, y| d | st(y) | s.label_dep(y, body))
            }
            _ => {
                let mut out = s.node_deps(x) | s.net_deps;
                for y in s.neighbours(x) {
                    out |= s.node_deps(y);
                }
                match &inst.action {
                    Action::Merge(pairs) => {
                        for &(a, b) in pairs {
                            out |= s.node_deps(a) | s.node_deps(b);
                        }
                    }
                    Action::Add(ys) | Action::Choose(ys) => {
                        for &(y, _) in ys {
                            out |= s.node_deps(y);
                        }
                    }
                    _ => {}
                }
                out
            }
        }
    }

    /// Applies `inst` to `s` in place as its first alternative and returns
    /// the others; `None` when there is no alternative at all. Facts of an
    /// alternative carry `bit` on top of the premises of the rule.
    pub fn apply_rule(
        &mut self,
        s: &mut CompletionSystem,
        inst: &RuleInstance,
        bit: Deps,
    ) -> Option<Vec<CompletionSystem>> {
        let sys = self.sys();
        let x = inst.node.unwrap_or(0);
        s.ctx = self.premises(s, inst);
        fn branch<T>(
            s: &mut CompletionSystem,
            bit: Deps,
            items: &[T],
            f: impl Fn(&mut CompletionSystem, &T),
        ) -> Option<Vec<CompletionSystem>> {
            let (first, rest) = items.split_first()?;
            if !rest.is_empty() {
                s.ctx |= bit;
            }
            let others = rest
                .iter()
                .map(|item| {
                    let mut t = s.clone();
                    f(&mut t, item);
                    t
                })
                .collect();
            f(s, first);
            Some(others)
        }
        fn one(s: &mut CompletionSystem, f: impl FnOnce(&mut CompletionSystem)) -> Option<Vec<CompletionSystem>> {
            f(s);
            Some(Vec::new())
        }
        match &inst.action {
            Action::Connect => one(s, |t| t.connect_pending(sys)),
            Action::Complete(u, v) => {
                let label = s.network.label(sys, *u, *v);
                let ks: Vec<usize> = crate::constraint::bits(label).collect();
                branch(s, bit, &ks, |t, &k| {
                    t.net_deps |= t.ctx;
                    if let Err(e) = t.network.constrain(sys, *u, 1 << k, *v) {
                        t.clash.get_or_insert(format!("completion: {e}"));
                    }
                    t.net_dirty = true;
                })
            }
            Action::Merge(pairs) => branch(s, bit, pairs, |t, &(from, into)| t.merge(from, into, &self.it)),
            Action::NominalGuess { role, body, max } => {
                // One bound and m fresh nominals per guess m.
                let guesses: Vec<(ConceptId, Vec<ConceptId>)> = (1..=*max)
                    .map(|m| {
                        let bound = self.it.at_most(m, *role, *body);
                        (bound, (0..m).map(|_| self.it.fresh_nominal()).collect())
                    })
                    .collect();
                let it = &self.it;
                branch(s, bit, &guesses, |t, (bound, noms)| {
                    t.add_concept(x, *bound, it);
                    let level = t.node(x).level + 1;
                    let mut fresh = Vec::new();
                    for &o in noms {
                        let y = t.new_node(None, level);
                        t.add_concept(y, o, it);
                        t.add_concept(y, *body, it);
                        t.add_edge(x, y, [*role]);
                        fresh.push(y);
                    }
                    for (i, &a) in fresh.iter().enumerate() {
                        for &b in &fresh[i + 1..] {
                            t.set_distinct(a, b);
                        }
                    }
                })
            }
            Action::Add(adds) => one(s, |t| {
                for &(y, c) in adds {
                    t.add_concept(y, c, &self.it);
                }
            }),
            Action::SelfLoop(r) => one(s, |t| t.add_edge(x, x, [*r])),
            Action::Templates(ts) => one(s, |t| {
                for &(a, rel, pos, b) in ts {
                    t.add_template(a, rel, pos, b);
                }
            }),
            Action::Choose(alts) => branch(s, bit, alts, |t, &(y, c)| {
                t.add_concept(y, c, &self.it);
            }),
            Action::CMerge(pairs) => branch(s, bit, pairs, |t, &(from, into)| t.merge_concrete(from, into, sys)),
            Action::Exists { role, body } => one(s, |t| {
                let y = t.new_node(Some(x), 0);
                t.add_edge(x, y, [*role]);
                t.add_concept(y, *body, &self.it);
            }),
            Action::AtLeast { n, role, body } => one(s, |t| {
                let ys: Vec<NodeId> = (0..*n)
                    .map(|_| {
                        let y = t.new_node(Some(x), 0);
                        t.add_edge(x, y, [*role]);
                        t.add_concept(y, *body, &self.it);
                        y
                    })
                    .collect();
                for (i, &a) in ys.iter().enumerate() {
                    for &b in &ys[i + 1..] {
                        t.set_distinct(a, b);
                    }
                }
            }),
            Action::CExists { p1, p2, rel } => one(s, |t| {
                let c1 = self.u_successor(t, x, *p1);
                let c2 = self.u_successor(t, x, *p2);
                t.add_template(c1, *rel, true, c2);
            }),
            Action::CExistsInd { p, ind, side, rel } => one(s, |t| {
                let c = self.u_successor(t, x, *p);
                let ci = t.cind_node[*ind as usize];
                match side {
                    Side::Right => t.add_template(c, *rel, true, ci),
                    Side::Left => t.add_template(ci, *rel, true, c),
                }
            }),
            Action::CAtLeast { n, g } => one(s, |t| {
                let cs: Vec<CNodeId> = (0..*n)
                    .map(|_| {
                        let c = t.new_cnode(None);
                        t.add_cedge(x, c, *g);
                        c
                    })
                    .collect();
                for (i, &a) in cs.iter().enumerate() {
                    for &b in &cs[i + 1..] {
                        t.set_cdistinct(a, b);
                    }
                }
            }),
        }
    }
}
