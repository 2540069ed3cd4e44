use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::constraint::{merge_variable, ConstraintSystemDef, RelNetwork};

use super::interner::{inv, CIndId, CPath, CRoleId, ConceptId, IndId, Interner, RoleId, Shape};

pub type NodeId = u32;
pub type CNodeId = u32;

/// Branch levels a fact depends on, one bit per level modulo 128. Aliasing
/// only adds levels, which keeps backjumping sound.
pub type Deps = u128;

pub fn dep_bit(level: usize) -> Deps {
    1 << (level % 128)
}

#[derive(Clone, Debug, Default)]
pub struct ANode {
    pub alive: bool,
    pub label: BTreeSet<ConceptId>,
    pub nominal: bool,
    pub level: u32,
    /// Creator of a blockable node; `None` for roots and nominal nodes.
    pub parent: Option<NodeId>,
    pub out: BTreeMap<NodeId, BTreeSet<RoleId>>,
    pub inc: BTreeSet<NodeId>,
    pub cout: BTreeMap<CNodeId, BTreeSet<CRoleId>>,
    pub neq: BTreeSet<NodeId>,
    /// Levels behind the edges, distinctness and concrete edges stored here.
    pub deps: Deps,
    /// Levels behind the creation of the node.
    pub born: Deps,
    /// Levels behind each label entry.
    pub label_deps: BTreeMap<ConceptId, Deps>,
}

#[derive(Clone, Debug, Default)]
pub struct CNode {
    pub individual: Option<CIndId>,
    pub markers: BTreeSet<u32>,
    pub neq: BTreeSet<CNodeId>,
    pub owners: BTreeSet<NodeId>,
}

/// `(q1 r q2)` or its negation over constraint markers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Template {
    pub q1: u32,
    pub rel: usize,
    pub q2: u32,
    pub positive: bool,
}

/// The completion system `(G, N)`: completion graph plus constraint network.
#[derive(Clone, Debug, Default)]
pub struct CompletionSystem {
    pub nodes: Vec<Arc<ANode>>,
    pub cnodes: Vec<Arc<CNode>>,
    pub network: RelNetwork,
    pub templates: Vec<Template>,
    /// Templates not yet turned into network constraints.
    pub pending: Vec<usize>,
    pub marker_home: Vec<Option<CNodeId>>,
    /// `(c1, relation, positive, c2)` for every template, by current marker homes.
    pub tpl_index: BTreeSet<(CNodeId, usize, bool, CNodeId)>,
    /// Node of each constraint individual.
    pub cind_node: Vec<CNodeId>,
    pub clash: Option<String>,
    /// Levels behind `clash`, when narrower than the whole system.
    pub clash_deps: Option<Deps>,
    pub net_dirty: bool,
    pub created: u64,
    /// Levels behind the rule being applied; stamped on every write.
    pub ctx: Deps,
    /// Levels behind the concrete part: network, templates, concrete nodes.
    pub net_deps: Deps,
}

impl CompletionSystem {
    pub fn alive_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.iter().enumerate().filter(|(_, n)| n.alive).map(|(i, _)| i as NodeId)
    }

    pub fn live_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.alive).count()
    }

    pub fn node(&self, x: NodeId) -> &ANode {
        &self.nodes[x as usize]
    }

    fn node_mut(&mut self, x: NodeId) -> &mut ANode {
        let ctx = self.ctx;
        let n = Arc::make_mut(&mut self.nodes[x as usize]);
        n.deps |= ctx;
        n
    }

    fn cnode_mut(&mut self, c: CNodeId) -> &mut CNode {
        self.net_deps |= self.ctx;
        Arc::make_mut(&mut self.cnodes[c as usize])
    }

    /// Levels behind `c ∈ L(x)`.
    pub fn label_dep(&self, x: NodeId, c: ConceptId) -> Deps {
        self.node(x).label_deps.get(&c).copied().unwrap_or(0)
    }

    /// Levels behind everything stored on `x`.
    pub fn node_deps(&self, x: NodeId) -> Deps {
        let n = self.node(x);
        n.label_deps.values().fold(n.deps | n.born, |d, &l| d | l)
    }

    /// Levels behind every fact of the system.
    pub fn global_deps(&self) -> Deps {
        self.alive_nodes().fold(self.net_deps, |d, x| d | self.node_deps(x))
    }

    pub fn has(&self, x: NodeId, c: ConceptId, it: &Interner) -> bool {
        c == it.top || self.nodes[x as usize].label.contains(&c)
    }

    pub fn new_node(&mut self, parent: Option<NodeId>, level: u32) -> NodeId {
        let id = self.nodes.len() as NodeId;
        self.nodes.push(ANode { alive: true, parent, level, deps: self.ctx, born: self.ctx, ..Default::default() }.into());
        self.created += 1;
        id
    }

    /// Adds `c` to `L(x)`; returns whether the label changed.
    pub fn add_concept(&mut self, x: NodeId, c: ConceptId, it: &Interner) -> bool {
        self.add_concept_with(x, c, 0, it)
    }

    /// Like `add_concept`, with `extra` levels on top of the rule context.
    fn add_concept_with(&mut self, x: NodeId, c: ConceptId, extra: Deps, it: &Interner) -> bool {
        let ctx = self.ctx;
        let n = Arc::make_mut(&mut self.nodes[x as usize]);
        if !n.label.insert(c) {
            return false;
        }
        n.label_deps.insert(c, ctx | extra);
        if matches!(it.shape(c), Shape::Nominal(_)) && !n.nominal {
            n.nominal = true;
            n.parent = None;
            n.deps |= ctx;
        }
        true
    }

    pub fn add_edge(&mut self, x: NodeId, y: NodeId, roles: impl IntoIterator<Item = RoleId>) {
        self.node_mut(x).out.entry(y).or_default().extend(roles);
        self.node_mut(y).inc.insert(x);
    }

    fn remove_edge(&mut self, x: NodeId, y: NodeId) {
        self.node_mut(x).out.remove(&y);
        self.node_mut(y).inc.remove(&x);
    }

    /// Roles `S` such that `y` is a direct `S`-neighbour of `x`.
    pub fn link(&self, x: NodeId, y: NodeId) -> BTreeSet<RoleId> {
        let mut out: BTreeSet<RoleId> = self.node(x).out.get(&y).cloned().unwrap_or_default();
        if let Some(back) = self.node(y).out.get(&x) {
            out.extend(back.iter().map(|&r| inv(r)));
        }
        out
    }

    pub fn neighbours(&self, x: NodeId) -> BTreeSet<NodeId> {
        let n = self.node(x);
        let mut out: BTreeSet<NodeId> = n.out.keys().copied().collect();
        out.extend(n.inc.iter().copied());
        out
    }

    pub fn is_neighbour(&self, x: NodeId, y: NodeId, r: RoleId, it: &Interner) -> bool {
        self.link(x, y).iter().any(|&s| it.is_sub(s, r))
    }

    pub fn r_neighbours(&self, x: NodeId, r: RoleId, it: &Interner) -> Vec<NodeId> {
        self.neighbours(x).into_iter().filter(|&y| self.is_neighbour(x, y, r, it)).collect()
    }

    pub fn is_blockable(&self, x: NodeId) -> bool {
        !self.node(x).nominal
    }

    pub fn distinct(&self, x: NodeId, y: NodeId) -> bool {
        self.node(x).neq.contains(&y)
    }

    pub fn set_distinct(&mut self, x: NodeId, y: NodeId) {
        if x != y {
            self.node_mut(x).neq.insert(y);
            self.node_mut(y).neq.insert(x);
        }
    }

    /// Parent chain of `x`, nearest first.
    pub fn ancestors(&self, x: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut cur = self.node(x).parent;
        while let Some(p) = cur {
            out.push(p);
            cur = self.node(p).parent;
        }
        out
    }

    pub fn is_ancestor(&self, a: NodeId, x: NodeId) -> bool {
        self.ancestors(x).contains(&a)
    }

    // ---- concrete part ----

    pub fn new_cnode(&mut self, individual: Option<CIndId>) -> CNodeId {
        let id = self.cnodes.len() as CNodeId;
        self.net_deps |= self.ctx;
        self.cnodes.push(CNode { individual, ..Default::default() }.into());
        self.network.add_var(id);
        id
    }

    pub fn cnode(&self, c: CNodeId) -> &CNode {
        &self.cnodes[c as usize]
    }

    pub fn add_cedge(&mut self, x: NodeId, c: CNodeId, g: CRoleId) {
        self.node_mut(x).cout.entry(c).or_default().insert(g);
        self.cnode_mut(c).owners.insert(x);
    }

    pub fn set_cdistinct(&mut self, c: CNodeId, d: CNodeId) {
        if c != d {
            self.cnode_mut(c).neq.insert(d);
            self.cnode_mut(d).neq.insert(c);
        }
    }

    pub fn cdistinct(&self, c: CNodeId, d: CNodeId) -> bool {
        self.cnode(c).neq.contains(&d)
    }

    /// Concrete `g`-successors of `x`, via the concrete role hierarchy.
    pub fn g_successors(&self, x: NodeId, g: CRoleId, it: &Interner) -> Vec<CNodeId> {
        self.node(x)
            .cout
            .iter()
            .filter(|(_, ls)| ls.iter().any(|&h| it.is_csub(h, g)))
            .map(|(&c, _)| c)
            .collect()
    }

    /// `U`-neighbours of `x` for a path `U`.
    pub fn u_neighbours(&self, x: NodeId, p: CPath, it: &Interner) -> Vec<CNodeId> {
        match p.role {
            None => self.g_successors(x, p.g, it),
            Some(r) => {
                let mut out = BTreeSet::new();
                for y in self.r_neighbours(x, r, it) {
                    out.extend(self.g_successors(y, p.g, it));
                }
                out.into_iter().collect()
            }
        }
    }

    fn fresh_marker(&mut self, home: CNodeId) -> u32 {
        let q = self.marker_home.len() as u32;
        self.marker_home.push(Some(home));
        self.cnode_mut(home).markers.insert(q);
        q
    }

    pub fn has_template(&self, c1: CNodeId, rel: usize, positive: bool, c2: CNodeId) -> bool {
        self.tpl_index.contains(&(c1, rel, positive, c2))
    }

    /// Fresh markers on `c1` and `c2` tied by a (possibly negated) template.
    pub fn add_template(&mut self, c1: CNodeId, rel: usize, positive: bool, c2: CNodeId) {
        let q1 = self.fresh_marker(c1);
        let q2 = self.fresh_marker(c2);
        self.templates.push(Template { q1, rel, q2, positive });
        self.pending.push(self.templates.len() - 1);
        self.tpl_index.insert((c1, rel, positive, c2));
    }

    /// Turns pending templates into network constraints. A negated template
    /// contributes every other base relation.
    pub fn connect_pending(&mut self, sys: &ConstraintSystemDef) {
        self.net_deps |= self.ctx;
        for t in std::mem::take(&mut self.pending) {
            let t = self.templates[t];
            let (Some(c1), Some(c2)) = (self.marker_home[t.q1 as usize], self.marker_home[t.q2 as usize]) else {
                continue;
            };
            let rels = if t.positive { 1 << t.rel } else { sys.all() & !(1 << t.rel) };
            if let Err(e) = self.network.constrain(sys, c1, rels, c2) {
                self.clash.get_or_insert(format!("constraint network: {e}"));
            }
            self.net_dirty = true;
        }
    }

    fn remove_cnode(&mut self, c: CNodeId) {
        self.net_deps |= self.ctx;
        let node = std::mem::take(&mut self.cnodes[c as usize]);
        for q in &node.markers {
            self.marker_home[*q as usize] = None;
        }
        for d in &node.neq {
            self.cnode_mut(*d).neq.remove(&c);
        }
        for o in &node.owners {
            self.node_mut(*o).cout.remove(&c);
        }
        self.tpl_index.retain(|&(a, _, _, b)| a != c && b != c);
        self.network.remove_var(c);
    }

    /// Merges concrete node `from` into `into`.
    pub fn merge_concrete(&mut self, from: CNodeId, into: CNodeId, sys: &ConstraintSystemDef) {
        self.net_deps |= self.ctx;
        match merge_variable(sys, &self.network, from, into) {
            Ok(n) => self.network = n,
            Err(e) => {
                self.clash.get_or_insert(format!("merging concrete nodes: {e}"));
            }
        }
        self.net_dirty = true;
        let node = Arc::unwrap_or_clone(std::mem::take(&mut self.cnodes[from as usize]));
        for q in &node.markers {
            self.marker_home[*q as usize] = Some(into);
        }
        self.cnode_mut(into).markers.extend(node.markers.iter().copied());
        for d in node.neq {
            self.cnode_mut(d).neq.remove(&from);
            self.set_cdistinct(into, d);
        }
        for o in node.owners {
            let labels = self.node_mut(o).cout.remove(&from).unwrap_or_default();
            for g in labels {
                self.add_cedge(o, into, g);
            }
        }
        let renamed: Vec<_> = self
            .tpl_index
            .iter()
            .filter(|(a, _, _, b)| *a == from || *b == from)
            .copied()
            .collect();
        for t in renamed {
            self.tpl_index.remove(&t);
            let r = |c| if c == from { into } else { c };
            self.tpl_index.insert((r(t.0), t.1, t.2, r(t.3)));
        }
    }

    // ---- merging and pruning abstract nodes ----

    /// `Merge(y, x)`: moves the edges and label of `y` to `x`, then prunes `y`.
    pub fn merge(&mut self, y: NodeId, x: NodeId, it: &Interner) {
        debug_assert_ne!(x, y);
        // Moved edges keep the levels of wherever they were stored.
        let ctx0 = self.ctx;
        let yn = self.node(y);
        let around = yn.inc.iter().chain(yn.out.keys()).chain(yn.neq.iter()).copied().collect::<Vec<_>>();
        self.ctx = around.into_iter().fold(ctx0 | yn.deps | yn.born, |d, z| d | self.node(z).deps);
        let incoming: Vec<NodeId> = self.node(y).inc.iter().copied().collect();
        for z in incoming {
            if z == y || self.node(z).parent == Some(y) && self.is_blockable(z) {
                continue;
            }
            let roles = self.node(z).out.get(&y).cloned().unwrap_or_default();
            self.remove_edge(z, y);
            self.attach(z, x, roles);
        }
        let outgoing: Vec<(NodeId, BTreeSet<RoleId>)> =
            self.node(y).out.iter().map(|(&z, r)| (z, r.clone())).collect();
        for (z, roles) in outgoing {
            if z == y {
                self.remove_edge(y, y);
                self.add_edge(x, x, roles);
                continue;
            }
            if self.is_blockable(z) && self.node(z).parent == Some(y) {
                continue;
            }
            self.remove_edge(y, z);
            let inverted: BTreeSet<RoleId> = roles.iter().map(|&r| inv(r)).collect();
            self.attach(z, x, inverted);
        }
        let label: Vec<(ConceptId, Deps)> = self.node(y).label_deps.iter().map(|(&c, &d)| (c, d)).collect();
        let wide = std::mem::replace(&mut self.ctx, ctx0);
        for (c, d) in label {
            self.add_concept_with(x, c, d, it);
        }
        self.ctx = wide;
        let neq: Vec<NodeId> = self.node(y).neq.iter().copied().collect();
        for z in neq {
            if self.node(z).alive {
                self.set_distinct(x, z);
            }
        }
        let cout: Vec<(CNodeId, BTreeSet<CRoleId>)> = self.node(y).cout.iter().map(|(&c, g)| (c, g.clone())).collect();
        for (c, gs) in cout {
            self.node_mut(y).cout.remove(&c);
            self.cnode_mut(c).owners.remove(&y);
            for g in gs {
                self.add_cedge(x, c, g);
            }
        }
        self.prune(y);
        self.ctx = ctx0;
    }

    /// Adds an edge `z -> x` with `roles`, reusing an existing edge in either
    /// direction.
    fn attach(&mut self, z: NodeId, x: NodeId, roles: BTreeSet<RoleId>) {
        if z == x {
            self.add_edge(x, x, roles);
        } else if self.node(x).out.contains_key(&z) {
            self.add_edge(x, z, roles.into_iter().map(inv));
        } else {
            self.add_edge(z, x, roles);
        }
    }

    /// Removes `y` together with its blockable subtree.
    pub fn prune(&mut self, y: NodeId) {
        let succ: Vec<NodeId> = self.node(y).out.keys().copied().collect();
        for z in succ {
            if z != y && self.node(z).alive && self.is_blockable(z) && self.node(z).parent == Some(y) {
                self.prune(z);
            }
        }
        let out: Vec<NodeId> = self.node(y).out.keys().copied().collect();
        for z in out {
            self.remove_edge(y, z);
        }
        let inc: Vec<NodeId> = self.node(y).inc.iter().copied().collect();
        for z in inc {
            self.remove_edge(z, y);
        }
        let cs: Vec<CNodeId> = self.node(y).cout.keys().copied().collect();
        for c in cs {
            self.node_mut(y).cout.remove(&c);
            let cn = self.cnode_mut(c);
            cn.owners.remove(&y);
            if cn.owners.is_empty() && cn.individual.is_none() {
                self.remove_cnode(c);
                self.net_dirty = true;
            }
        }
        let neq: Vec<NodeId> = self.node(y).neq.iter().copied().collect();
        for z in neq {
            self.node_mut(z).neq.remove(&y);
        }
        let n = self.node_mut(y);
        n.alive = false;
        n.label.clear();
        n.label_deps.clear();
        n.neq.clear();
    }

    /// Nodes holding each nominal.
    pub fn nominal_index(&self, it: &Interner) -> BTreeMap<IndId, Vec<NodeId>> {
        let mut out: BTreeMap<IndId, Vec<NodeId>> = BTreeMap::new();
        for x in self.alive_nodes() {
            let n = self.node(x);
            if !n.nominal {
                continue;
            }
            for &c in &n.label {
                if let Shape::Nominal(o) = it.shape(c) {
                    out.entry(*o).or_default().push(x);
                }
            }
        }
        out
    }
}
