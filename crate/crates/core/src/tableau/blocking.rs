use std::collections::{BTreeMap, BTreeSet};
use std::rc::Rc;

use crate::constraint::ConstraintSystemDef;

use super::interner::{inv, CRoleId, RoleId};
use super::state::{CNodeId, CompletionSystem, NodeId};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockState {
    Free,
    Direct(NodeId),
    Indirect,
}

impl BlockState {
    pub fn blocked(self) -> bool {
        self != BlockState::Free
    }

    pub fn indirectly(self) -> bool {
        self == BlockState::Indirect
    }
}

#[derive(Clone, Debug, Default)]
pub struct BlockInfo {
    pub state: Vec<BlockState>,
    /// A pair of concrete nodes whose label must be guessed before some
    /// candidate blocker can be confirmed.
    pub completion: Option<(CNodeId, CNodeId)>,
}

impl BlockInfo {
    pub fn get(&self, x: NodeId) -> BlockState {
        self.state.get(x as usize).copied().unwrap_or(BlockState::Free)
    }
}

/// Label of the tree edge `p -> x`, whichever direction it is stored in.
fn tree_edge(s: &CompletionSystem, p: NodeId, x: NodeId) -> BTreeSet<RoleId> {
    let mut out = s.node(p).out.get(&x).cloned().unwrap_or_default();
    if let Some(back) = s.node(x).out.get(&p) {
        out.extend(back.iter().map(|&r| inv(r)));
    }
    out
}

type CSig = (Option<BTreeSet<CRoleId>>, Option<BTreeSet<CRoleId>>);

fn relevant(s: &CompletionSystem, x: NodeId, xp: NodeId) -> BTreeMap<CNodeId, CSig> {
    let mut out: BTreeMap<CNodeId, CSig> = BTreeMap::new();
    for (&c, g) in &s.node(xp).cout {
        out.entry(c).or_default().0 = Some(g.clone());
    }
    for (&c, g) in &s.node(x).cout {
        out.entry(c).or_default().1 = Some(g.clone());
    }
    out
}

/// A bijection between the relevant concrete nodes of `a` and `b` that keeps
/// edge labels and network labels (BC-2).
fn find_phi(
    s: &CompletionSystem,
    sys: &ConstraintSystemDef,
    ra: &BTreeMap<CNodeId, CSig>,
    rb: &BTreeMap<CNodeId, CSig>,
) -> Option<BTreeMap<CNodeId, CNodeId>> {
    if ra.len() != rb.len() {
        return None;
    }
    let from: Vec<CNodeId> = ra.keys().copied().collect();
    let to: Vec<CNodeId> = rb.keys().copied().collect();
    let mut used = vec![false; to.len()];
    let mut phi: Vec<CNodeId> = Vec::new();
    #[allow(clippy::too_many_arguments)]
    fn rec(
        k: usize,
        s: &CompletionSystem,
        sys: &ConstraintSystemDef,
        from: &[CNodeId],
        to: &[CNodeId],
        ra: &BTreeMap<CNodeId, CSig>,
        rb: &BTreeMap<CNodeId, CSig>,
        used: &mut [bool],
        phi: &mut Vec<CNodeId>,
    ) -> bool {
        if k == from.len() {
            return true;
        }
        let c = from[k];
        for (j, &d) in to.iter().enumerate() {
            if used[j] || ra[&c] != rb[&d] {
                continue;
            }
            let consistent = (0..k).all(|i| s.network.label(sys, from[i], c) == s.network.label(sys, phi[i], d));
            if !consistent {
                continue;
            }
            used[j] = true;
            phi.push(d);
            if rec(k + 1, s, sys, from, to, ra, rb, used, phi) {
                return true;
            }
            phi.pop();
            used[j] = false;
        }
        false
    }
    if rec(0, s, sys, &from, &to, ra, rb, &mut used, &mut phi) {
        Some(from.into_iter().zip(phi).collect())
    } else {
        None
    }
}

/// Per-call caches for BC-3.
struct Bc3Cache {
    children: BTreeMap<NodeId, Vec<NodeId>>,
    /// Concrete nodes owned anywhere in the blockable subtree of a node.
    owned: BTreeMap<NodeId, Rc<BTreeSet<CNodeId>>>,
    /// Constraint neighbours of each concrete node.
    adjacent: Option<BTreeMap<CNodeId, Vec<CNodeId>>>,
}

impl Bc3Cache {
    fn owned(&mut self, s: &CompletionSystem, root: NodeId) -> Rc<BTreeSet<CNodeId>> {
        if let Some(o) = self.owned.get(&root) {
            return o.clone();
        }
        let mut out: BTreeSet<CNodeId> = s.node(root).cout.keys().copied().collect();
        let kids = self.children.get(&root).cloned().unwrap_or_default();
        for k in kids {
            out.extend(self.owned(s, k).iter().copied());
        }
        let out = Rc::new(out);
        self.owned.insert(root, out.clone());
        out
    }

    fn adjacent(&mut self, s: &CompletionSystem) -> &BTreeMap<CNodeId, Vec<CNodeId>> {
        self.adjacent.get_or_insert_with(|| {
            let mut adj: BTreeMap<CNodeId, Vec<CNodeId>> = BTreeMap::new();
            for (u, _, v) in s.network.constraints() {
                adj.entry(u).or_default().push(v);
                adj.entry(v).or_default().push(u);
            }
            adj
        })
    }
}

enum Bc3 {
    Holds,
    Fails,
    Incomplete(CNodeId, CNodeId),
}

#[allow(clippy::too_many_arguments)]
fn check_bc3(
    s: &CompletionSystem,
    sys: &ConstraintSystemDef,
    cache: &mut Bc3Cache,
    a: NodeId,
    ap: NodeId,
    b: NodeId,
    bp: NodeId,
    phi: &BTreeMap<CNodeId, CNodeId>,
) -> Bc3 {
    let desc_b = cache.owned(s, b);
    let internal: BTreeSet<CNodeId> = cache.owned(s, a).difference(&desc_b).copied().collect();
    let mut external = BTreeSet::new();
    let adj = cache.adjacent(s);
    for x in &internal {
        for y in adj.get(x).into_iter().flatten() {
            if !internal.contains(y) && !desc_b.contains(y) {
                external.insert(*y);
            }
        }
    }
    let assoc_a: BTreeSet<CNodeId> = s.node(ap).cout.keys().copied().collect();
    let assoc_b: BTreeSet<CNodeId> = s.node(bp).cout.keys().copied().collect();
    let fixed: BTreeSet<CNodeId> = external.difference(&assoc_a).copied().collect();
    let net_a: Vec<CNodeId> = assoc_a.union(&fixed).copied().collect();
    let net_b: Vec<CNodeId> = assoc_b.union(&fixed).copied().collect();
    for vars in [&net_a, &net_b] {
        for (i, &u) in vars.iter().enumerate() {
            for &v in &vars[i + 1..] {
                if s.network.label(sys, u, v).count_ones() != 1 {
                    return Bc3::Incomplete(u, v);
                }
            }
        }
    }
    let theta = |c: CNodeId| if assoc_a.contains(&c) { phi.get(&c).copied().unwrap_or(c) } else { c };
    for (i, &u) in net_a.iter().enumerate() {
        for &v in &net_a[i + 1..] {
            if s.network.label(sys, u, v) != s.network.label(sys, theta(u), theta(v)) {
                return Bc3::Fails;
            }
        }
    }
    Bc3::Holds
}

/// Recomputes the blocking status of every node.
pub fn blocking_status(s: &CompletionSystem, sys: &ConstraintSystemDef) -> BlockInfo {
    let n = s.nodes.len();
    let mut info = BlockInfo { state: vec![BlockState::Free; n], completion: None };
    let mut cache = Bc3Cache { children: BTreeMap::new(), owned: BTreeMap::new(), adjacent: None };
    let children = &mut cache.children;
    for x in s.alive_nodes() {
        if let Some(p) = s.node(x).parent {
            if s.is_blockable(x) {
                children.entry(p).or_default().push(x);
            }
        }
    }
    // Parents are created before their children, so id order visits ancestors first.
    for b in s.alive_nodes() {
        if !s.is_blockable(b) {
            continue;
        }
        let Some(bp) = s.node(b).parent else { continue };
        if s.is_blockable(bp) && info.state[bp as usize].blocked() {
            info.state[b as usize] = BlockState::Indirect;
            continue;
        }
        if !s.is_blockable(bp) {
            continue;
        }
        let lb = &s.node(b).label;
        let lbp = &s.node(bp).label;
        let eb = tree_edge(s, bp, b);
        let mut a_opt = s.node(bp).parent;
        while let Some(a) = a_opt {
            if !s.is_blockable(a) {
                break;
            }
            let Some(ap) = s.node(a).parent else { break };
            a_opt = Some(ap);
            if &s.node(a).label != lb || &s.node(ap).label != lbp || tree_edge(s, ap, a) != eb {
                continue;
            }
            let ra = relevant(s, a, ap);
            let rb = relevant(s, b, bp);
            let Some(phi) = find_phi(s, sys, &ra, &rb) else { continue };
            match check_bc3(s, sys, &mut cache, a, ap, b, bp, &phi) {
                Bc3::Holds => {
                    info.state[b as usize] = BlockState::Direct(a);
                    break;
                }
                Bc3::Fails => {}
                Bc3::Incomplete(u, v) => {
                    if info.completion.is_none() {
                        info.completion = Some((u, v));
                    }
                }
            }
        }
    }
    info
}
