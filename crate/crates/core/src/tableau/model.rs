use std::collections::{BTreeMap, BTreeSet};

use crate::constraint::{bits, find_scenario};
use crate::kb_model::{Concept, Path, RoleExpr, Side};
use crate::preprocess::{ReducedKb, RoleAnalysis};

use super::blocking::{BlockInfo, BlockState};
use super::interner::Interner;
use super::state::CompletionSystem;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelNode {
    pub id: u32,
    pub label: Vec<Concept>,
    /// Nominals held by the node; generated ones start with `%`.
    pub nominals: Vec<String>,
    pub blocked_by: Option<u32>,
    pub parent: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelEdge {
    pub from: u32,
    pub to: u32,
    pub roles: Vec<RoleExpr>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelCNode {
    pub id: u32,
    pub individual: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelCEdge {
    pub from: u32,
    pub to: u32,
    pub roles: Vec<String>,
}

/// A complete, clash-free completion system read back as a finite structure.
/// Directly blocked nodes are kept as leaves; indirectly blocked ones are dropped.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExtractedModel {
    pub system: String,
    pub nodes: Vec<ModelNode>,
    pub edges: Vec<ModelEdge>,
    pub cnodes: Vec<ModelCNode>,
    pub cedges: Vec<ModelCEdge>,
    /// Base relation between every ordered pair `c < d` of concrete nodes.
    pub scenario: Vec<(u32, String, u32)>,
    /// Pairs `c < d` carrying an explicit constraint in the network.
    pub constrained: Vec<(u32, u32)>,
}

pub(crate) fn extract(s: &CompletionSystem, b: &BlockInfo, it: &Interner, rkb: &ReducedKb) -> ExtractedModel {
    let keep = |x: u32| s.node(x).alive && !b.get(x).indirectly();
    let mut m = ExtractedModel { system: rkb.system.name().to_string(), ..Default::default() };
    for x in s.alive_nodes().filter(|&x| keep(x)) {
        let n = s.node(x);
        let label: Vec<Concept> = n.label.iter().map(|&c| it.concept(c).clone()).collect();
        let nominals = label
            .iter()
            .filter_map(|c| match c {
                Concept::Nominal(a) => Some(a.clone()),
                _ => None,
            })
            .collect();
        let blocked_by = match b.get(x) {
            BlockState::Direct(a) => Some(a),
            _ => None,
        };
        m.nodes.push(ModelNode { id: x, label, nominals, blocked_by, parent: n.parent });
        for (&y, roles) in &n.out {
            if keep(y) {
                m.edges.push(ModelEdge { from: x, to: y, roles: roles.iter().map(|&r| it.role_expr(r)).collect() });
            }
        }
        for (&c, gs) in &n.cout {
            m.cedges.push(ModelCEdge { from: x, to: c, roles: gs.iter().map(|&g| it.crole_names[g as usize].clone()).collect() });
        }
    }
    let used: BTreeSet<u32> = m.cedges.iter().map(|e| e.to).chain(s.cind_node.iter().copied()).collect();
    for &c in &used {
        let individual = s.cnode(c).individual.map(|i| it.cindividuals[i as usize].clone());
        m.cnodes.push(ModelCNode { id: c, individual });
    }
    let mut constrained: BTreeSet<(u32, u32)> = BTreeSet::new();
    for (u, rel, v) in s.network.constraints() {
        if rel != rkb.system.all() && used.contains(&u) && used.contains(&v) && u != v {
            constrained.insert((u.min(v), u.max(v)));
        }
    }
    m.constrained = constrained.into_iter().collect();
    if let Some(net) = find_scenario(&rkb.system, &s.network) {
        let vars: Vec<u32> = used.iter().copied().collect();
        for (i, &c) in vars.iter().enumerate() {
            for &d in &vars[i + 1..] {
                let label = net.label(&rkb.system, c, d);
                if let Some(k) = bits(label).next() {
                    m.scenario.push((c, rkb.system.relation_name(k).to_string(), d));
                }
            }
        }
    }
    m
}

fn swap(set: &BTreeSet<(u32, u32)>) -> BTreeSet<(u32, u32)> {
    set.iter().map(|&(a, b)| (b, a)).collect()
}

fn compose(a: &BTreeSet<(u32, u32)>, b: &BTreeSet<(u32, u32)>) -> BTreeSet<(u32, u32)> {
    let mut by_first: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for &(x, y) in b {
        by_first.entry(x).or_default().push(y);
    }
    let mut out = BTreeSet::new();
    for &(x, y) in a {
        if let Some(zs) = by_first.get(&y) {
            out.extend(zs.iter().map(|&z| (x, z)));
        }
    }
    out
}

impl ExtractedModel {
    pub fn node(&self, id: u32) -> Option<&ModelNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    /// The node carrying the nominal of a named individual.
    pub fn node_of(&self, individual: &str) -> Option<u32> {
        self.nodes.iter().find(|n| n.nominals.iter().any(|o| o == individual)).map(|n| n.id)
    }

    /// A named (non-generated) individual of the node.
    pub fn name_of(&self, id: u32) -> Option<&str> {
        self.node(id)?.nominals.iter().find(|o| !o.starts_with('%')).map(String::as_str)
    }

    pub fn has_concept(&self, id: u32, c: &Concept) -> bool {
        *c == Concept::Top || self.node(id).is_some_and(|n| n.label.contains(c))
    }

    /// Interpretation of every role name: edge labels closed under the role inclusions.
    pub fn role_pairs(&self, roles: &RoleAnalysis) -> BTreeMap<String, BTreeSet<(u32, u32)>> {
        let mut pairs: BTreeMap<String, BTreeSet<(u32, u32)>> =
            roles.role_names().iter().map(|n| (n.clone(), BTreeSet::new())).collect();
        for e in &self.edges {
            for r in &e.roles {
                match r {
                    RoleExpr::Named(n) => pairs.entry(n.clone()).or_default().insert((e.from, e.to)),
                    RoleExpr::Inverse(n) => pairs.entry(n.clone()).or_default().insert((e.to, e.from)),
                    RoleExpr::Universal => false,
                };
            }
        }
        let of = |pairs: &BTreeMap<String, BTreeSet<(u32, u32)>>, r: &RoleExpr| -> BTreeSet<(u32, u32)> {
            let base = r.name().and_then(|n| pairs.get(n)).cloned().unwrap_or_default();
            if r.is_inverse() {
                swap(&base)
            } else {
                base
            }
        };
        loop {
            let mut changed = false;
            for name in roles.role_names() {
                for chain in roles.rias_of(name) {
                    let mut rel = of(&pairs, &chain[0]);
                    for r in &chain[1..] {
                        if rel.is_empty() {
                            break;
                        }
                        rel = compose(&rel, &of(&pairs, r));
                    }
                    let target = pairs.entry(name.clone()).or_default();
                    for p in rel {
                        changed |= target.insert(p);
                    }
                }
            }
            if !changed {
                return pairs;
            }
        }
    }

    fn relation_between(&self, sys_identity: &str, c: u32, d: u32) -> Option<String> {
        if c == d {
            return Some(sys_identity.to_string());
        }
        let (a, b, flip) = if c < d { (c, d, false) } else { (d, c, true) };
        self.scenario.iter().find(|(x, _, y)| *x == a && *y == b).map(|(_, r, _)| {
            if flip {
                format!("~{r}")
            } else {
                r.clone()
            }
        })
    }
}

/// Checks a model against the reduced knowledge base it came from and
/// returns every violated requirement. Existential requirements of blocked
/// leaves are not checked.
pub fn validate_model(m: &ExtractedModel, rkb: &ReducedKb) -> Vec<String> {
    let sys = &rkb.system;
    let pairs = m.role_pairs(&rkb.roles);
    let succ = |x: u32, r: &RoleExpr| -> Vec<u32> {
        let Some(set) = r.name().and_then(|n| pairs.get(n)) else { return Vec::new() };
        if r.is_inverse() {
            set.iter().filter(|p| p.1 == x).map(|p| p.0).collect()
        } else {
            set.iter().filter(|p| p.0 == x).map(|p| p.1).collect()
        }
    };
    let csucc = |x: u32, g: &str| -> Vec<u32> {
        m.cedges
            .iter()
            .filter(|e| e.from == x && e.roles.iter().any(|h| rkb.roles.is_concrete_subrole(h, g)))
            .map(|e| e.to)
            .collect()
    };
    let upath = |x: u32, p: &Path| -> Vec<u32> {
        let owners = match p.step() {
            Some(r) => succ(x, r),
            None => vec![x],
        };
        let mut out: BTreeSet<u32> = BTreeSet::new();
        for y in owners {
            out.extend(csucc(y, p.concrete.as_str()));
        }
        out.into_iter().collect()
    };
    let cind = |i: &str| m.cnodes.iter().find(|c| c.individual.as_deref() == Some(i)).map(|c| c.id);
    let identity = sys.relation_name(sys.identity()).to_string();
    // Whether the scenario puts `c r d`.
    let holds = |c: u32, r: &str, d: u32| -> bool {
        match m.relation_between(&identity, c, d) {
            Some(rel) => match rel.strip_prefix('~') {
                Some(base) => sys.index_of(base).map(|k| sys.relation_name(sys.converse(k))) == Some(r),
                None => rel == r,
            },
            None => false,
        }
    };
    let mut errors = Vec::new();
    let mut seen_nominal: BTreeMap<&str, u32> = BTreeMap::new();
    for n in &m.nodes {
        let x = n.id;
        let open = n.blocked_by.is_none();
        for o in &n.nominals {
            if let Some(prev) = seen_nominal.insert(o, x) {
                errors.push(format!("nominal {o} on nodes {prev} and {x}"));
            }
        }
        for c in &rkb.internalized {
            if !m.has_concept(x, c) {
                errors.push(format!("node {x} misses axiom concept {c}"));
            }
        }
        for c in &n.label {
            let fail = |what: &str| format!("node {x}: {c} {what}");
            match c {
                Concept::Bottom => errors.push(fail("is unsatisfiable")),
                Concept::Not(d) => match d.as_ref() {
                    Concept::SelfRestriction(r) => {
                        if succ(x, r).contains(&x) {
                            errors.push(fail("but the node loops"));
                        }
                    }
                    Concept::Nominal(o) => {
                        if n.nominals.contains(o) {
                            errors.push(fail("but the node is that individual"));
                        }
                    }
                    d => {
                        if m.has_concept(x, d) {
                            errors.push(fail("together with its negation"));
                        }
                    }
                },
                Concept::And(a, b) => {
                    if !m.has_concept(x, a) || !m.has_concept(x, b) {
                        errors.push(fail("without both conjuncts"));
                    }
                }
                Concept::Or(a, b) => {
                    if !m.has_concept(x, a) && !m.has_concept(x, b) {
                        errors.push(fail("without either disjunct"));
                    }
                }
                Concept::Exists(r, d) if open => {
                    if !succ(x, r).iter().any(|&y| m.has_concept(y, d)) {
                        errors.push(fail("has no witness"));
                    }
                }
                Concept::Forall(r, d) => {
                    if let Some(y) = succ(x, r).into_iter().find(|&y| !m.has_concept(y, d)) {
                        errors.push(fail(&format!("fails at neighbour {y}")));
                    }
                }
                Concept::AtLeast(k, r, d) if open => {
                    if succ(x, r).iter().filter(|&&y| m.has_concept(y, d)).count() < *k as usize {
                        errors.push(fail("has too few witnesses"));
                    }
                }
                Concept::AtMost(k, r, d) if open => {
                    if succ(x, r).iter().filter(|&&y| m.has_concept(y, d)).count() > *k as usize {
                        errors.push(fail("has too many neighbours"));
                    }
                }
                Concept::SelfRestriction(r) => {
                    if !succ(x, r).contains(&x) {
                        errors.push(fail("but the node has no loop"));
                    }
                }
                Concept::CAtLeast(k, g) if open => {
                    if csucc(x, g.as_str()).len() < *k as usize {
                        errors.push(fail("has too few concrete successors"));
                    }
                }
                Concept::CAtMost(k, g) => {
                    if csucc(x, g.as_str()).len() > *k as usize {
                        errors.push(fail("has too many concrete successors"));
                    }
                }
                Concept::CExists(p, q, r) if open => {
                    let vs = upath(x, q);
                    if !upath(x, p).iter().any(|&c| vs.iter().any(|&d| holds(c, r, d))) {
                        errors.push(fail("has no concrete witness"));
                    }
                }
                Concept::CForall(p, q, r) => {
                    let vs = upath(x, q);
                    if !upath(x, p).iter().all(|&c| vs.iter().all(|&d| holds(c, r, d))) {
                        errors.push(fail("is violated by the scenario"));
                    }
                }
                Concept::CExistsInd(p, i, side, r) if open => {
                    let ok = cind(i).is_some_and(|ci| {
                        upath(x, p).iter().any(|&c| match side {
                            Side::Right => holds(c, r, ci),
                            Side::Left => holds(ci, r, c),
                        })
                    });
                    if !ok {
                        errors.push(fail("has no concrete witness"));
                    }
                }
                Concept::CForallInd(p, i, side, r) => {
                    let ok = cind(i).is_some_and(|ci| {
                        upath(x, p).iter().all(|&c| match side {
                            Side::Right => holds(c, r, ci),
                            Side::Left => holds(ci, r, c),
                        })
                    });
                    if !ok {
                        errors.push(fail("is violated by the scenario"));
                    }
                }
                _ => {}
            }
        }
    }
    errors
}
