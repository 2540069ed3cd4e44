use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::{bits, ConstraintError, ConstraintSystemDef, RelNetwork, RelSet, VarId};

/// Dense label matrix over variables `0..n`.
#[derive(Clone)]
struct Matrix {
    n: usize,
    m: Vec<RelSet>,
}

impl Matrix {
    fn from_network(sys: &ConstraintSystemDef, net: &RelNetwork, order: &[VarId]) -> Matrix {
        let n = order.len();
        let mut m = vec![sys.all(); n * n];
        for i in 0..n {
            m[i * n + i] = sys.identity_set();
        }
        let pos = |v: VarId| order.binary_search(&v).ok();
        for (u, r, v) in net.constraints() {
            if let (Some(i), Some(j)) = (pos(u), pos(v)) {
                m[i * n + j] &= r;
                m[j * n + i] &= sys.converse_set(r);
            }
        }
        Matrix { n, m }
    }

    fn get(&self, i: usize, j: usize) -> RelSet {
        self.m[i * self.n + j]
    }

    fn set(&mut self, sys: &ConstraintSystemDef, i: usize, j: usize, r: RelSet) {
        self.m[i * self.n + j] = r;
        self.m[j * self.n + i] = sys.converse_set(r);
    }

    /// Path-consistency closure seeded with `seed` (all pairs when `None`).
    /// Returns false when some label becomes empty.
    fn propagate(&mut self, sys: &ConstraintSystemDef, seed: Option<(usize, usize)>) -> bool {
        let n = self.n;
        if self.m.contains(&0) {
            return false;
        }
        let mut queued = vec![false; n * n];
        let mut queue = VecDeque::new();
        match seed {
            Some((i, j)) => {
                queue.push_back((i, j));
                queued[i * n + j] = true;
            }
            None => {
                for i in 0..n {
                    for j in i + 1..n {
                        if self.get(i, j) != sys.all() {
                            queue.push_back((i, j));
                            queued[i * n + j] = true;
                        }
                    }
                }
            }
        }
        while let Some((i, j)) = queue.pop_front() {
            queued[i * n + j] = false;
            let rij = self.get(i, j);
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                let rik = self.get(i, k);
                let tik = rik & sys.compose(rij, self.get(j, k));
                if tik != rik {
                    if tik == 0 {
                        return false;
                    }
                    self.set(sys, i, k, tik);
                    if !queued[i * n + k] {
                        queued[i * n + k] = true;
                        queue.push_back((i, k));
                    }
                }
                let rkj = self.get(k, j);
                let tkj = rkj & sys.compose(self.get(k, i), rij);
                if tkj != rkj {
                    if tkj == 0 {
                        return false;
                    }
                    self.set(sys, k, j, tkj);
                    if !queued[k * n + j] {
                        queued[k * n + j] = true;
                        queue.push_back((k, j));
                    }
                }
            }
        }
        true
    }

    /// Pair with the fewest (but more than one) remaining relations.
    fn branch_pair(&self, only: Option<&[(usize, usize)]>) -> Option<(usize, usize)> {
        let mut best: Option<(u32, usize, usize)> = None;
        let all: Vec<(usize, usize)>;
        let pairs = match only {
            Some(p) => p,
            None => {
                all = (0..self.n).flat_map(|i| (i + 1..self.n).map(move |j| (i, j))).collect();
                &all
            }
        };
        for &(i, j) in pairs {
            let c = self.get(i, j).count_ones();
            if c > 1 && best.is_none_or(|(bc, _, _)| c < bc) {
                best = Some((c, i, j));
            }
        }
        best.map(|(_, i, j)| (i, j))
    }

    /// Backtracking over base relations with path-consistency at each node.
    /// For Allen, RCC8 and the point algebra, path-consistent atomic networks
    /// are consistent, so this decides satisfiability.
    /// With `only`, branching is limited to those pairs; the rest may stay
    /// disjunctive when the system is decided on atomic-or-universal labels.
    fn solve(mut self, sys: &ConstraintSystemDef, seed: Option<(usize, usize)>, only: Option<&[(usize, usize)]>) -> bool {
        if !self.propagate(sys, seed) {
            return false;
        }
        let Some((i, j)) = self.branch_pair(only) else {
            return true;
        };
        for r in bits(self.get(i, j)) {
            let mut next = self.clone();
            next.set(sys, i, j, 1 << r);
            if next.solve(sys, Some((i, j)), only) {
                return true;
            }
        }
        false
    }

    /// Like [`Matrix::solve`], returning the atomic refinement found.
    fn solve_model(mut self, sys: &ConstraintSystemDef, seed: Option<(usize, usize)>) -> Option<Matrix> {
        if !self.propagate(sys, seed) {
            return None;
        }
        let Some((i, j)) = self.branch_pair(None) else {
            return Some(self);
        };
        for r in bits(self.get(i, j)) {
            let mut next = self.clone();
            next.set(sys, i, j, 1 << r);
            if let Some(m) = next.solve_model(sys, Some((i, j))) {
                return Some(m);
            }
        }
        None
    }
}

/// A consistent atomic refinement of `net` over all its variables (a
/// scenario), or `None` when the network is unsatisfiable.
pub fn find_scenario(sys: &ConstraintSystemDef, net: &RelNetwork) -> Option<RelNetwork> {
    let order: Vec<VarId> = net.vars().iter().copied().collect();
    let m = Matrix::from_network(sys, net, &order).solve_model(sys, None)?;
    let mut out = RelNetwork::new();
    for &v in &order {
        out.add_var(v);
    }
    for i in 0..order.len() {
        for j in i + 1..order.len() {
            out.constrain(sys, order[i], m.get(i, j), order[j]).expect("scenario labels are non-empty");
        }
    }
    Some(out)
}

/// Decides whether `net` has a consistent atomic refinement.
pub fn is_satisfiable(sys: &ConstraintSystemDef, net: &RelNetwork) -> bool {
    if net.constraint_count() == 0 {
        return true;
    }
    // Variables without constraints cannot affect consistency.
    let mut used = BTreeSet::new();
    for (u, _, v) in net.constraints() {
        used.insert(u);
        used.insert(v);
    }
    let order: Vec<VarId> = used.into_iter().collect();
    let m = Matrix::from_network(sys, net, &order);
    if !sys.partial_atomic_tractable() {
        return m.solve(sys, None, None);
    }
    // Only pairs constrained in the input need a base relation.
    let pos: BTreeMap<VarId, usize> = order.iter().enumerate().map(|(k, &v)| (v, k)).collect();
    let mut pairs: Vec<(usize, usize)> = net
        .constraints()
        .map(|(u, _, v)| {
            let (a, b) = (pos[&u], pos[&v]);
            (a.min(b), a.max(b))
        })
        .collect();
    pairs.sort_unstable();
    pairs.dedup();
    m.solve(sys, None, Some(&pairs))
}

/// Complete satisfiable refinements of `net` restricted to `vars`.
pub struct Completions {
    inner: std::vec::IntoIter<RelNetwork>,
}

impl Iterator for Completions {
    type Item = RelNetwork;

    fn next(&mut self) -> Option<RelNetwork> {
        self.inner.next()
    }
}

/// Every complete labelling of the pairs of `vars` that is consistent with
/// `net`, in lexicographic order of (variable pair, relation index).
pub fn enumerate_completions(sys: &ConstraintSystemDef, net: &RelNetwork, vars: &BTreeSet<VarId>) -> Completions {
    let mut all: BTreeSet<VarId> = net.vars().clone();
    all.extend(vars.iter().copied());
    let order: Vec<VarId> = all.into_iter().collect();
    let idx = |v: VarId| order.binary_search(&v).expect("variable is in the order");
    let chosen: Vec<VarId> = vars.iter().copied().collect();
    let mut pairs = Vec::new();
    for (a, &u) in chosen.iter().enumerate() {
        for &v in &chosen[a + 1..] {
            pairs.push((u, v, idx(u), idx(v)));
        }
    }
    let mut out = Vec::new();
    let mut start = Matrix::from_network(sys, net, &order);
    if start.propagate(sys, None) {
        let mut picked: Vec<RelSet> = Vec::with_capacity(pairs.len());
        enumerate_rec(sys, start, &pairs, &mut picked, &chosen, &mut out);
    }
    Completions { inner: out.into_iter() }
}

fn enumerate_rec(
    sys: &ConstraintSystemDef,
    mat: Matrix,
    pairs: &[(VarId, VarId, usize, usize)],
    picked: &mut Vec<RelSet>,
    chosen: &[VarId],
    out: &mut Vec<RelNetwork>,
) {
    let depth = picked.len();
    if depth == pairs.len() {
        if mat.solve(sys, None, None) {
            let mut n = RelNetwork::new();
            for &v in chosen {
                n.add_var(v);
            }
            for (k, &(u, v, _, _)) in pairs.iter().enumerate() {
                n.constrain(sys, u, picked[k], v).expect("fresh network accepts singleton labels");
            }
            out.push(n);
        }
        return;
    }
    let (_, _, i, j) = pairs[depth];
    for r in bits(mat.get(i, j)) {
        let mut next = mat.clone();
        next.set(sys, i, j, 1 << r);
        if next.propagate(sys, Some((i, j))) {
            picked.push(1 << r);
            enumerate_rec(sys, next, pairs, picked, chosen, out);
            picked.pop();
        }
    }
}

/// Renames `from` to `into` in every constraint, intersecting labels that
/// collide.
pub fn merge_variable(
    sys: &ConstraintSystemDef,
    net: &RelNetwork,
    from: VarId,
    into: VarId,
) -> Result<RelNetwork, ConstraintError> {
    if from == into {
        return Err(ConstraintError::PreconditionViolated("cannot merge a variable into itself".into()));
    }
    if net.label(sys, from, into) & sys.identity_set() == 0 {
        return Err(ConstraintError::EmptyLabel(from, into));
    }
    let mut out = net.clone();
    out.remove_var(from);
    out.add_var(into);
    for &w in net.vars() {
        if w == from || w == into {
            continue;
        }
        let l = net.label(sys, from, w);
        if l != sys.all() {
            out.constrain(sys, into, l, w)?;
        }
    }
    Ok(out)
}

/// Satisfiability of `m ∪ n` for two satisfiable networks that agree on a
/// complete shared part.
pub fn check_patchwork_instance(
    sys: &ConstraintSystemDef,
    m: &RelNetwork,
    n: &RelNetwork,
) -> Result<bool, ConstraintError> {
    let shared: Vec<VarId> = m.vars().intersection(n.vars()).copied().collect();
    if !m.is_complete_over(sys, &shared) || !n.is_complete_over(sys, &shared) {
        return Err(ConstraintError::PreconditionViolated("shared part is not complete".into()));
    }
    for (a, &u) in shared.iter().enumerate() {
        for &v in &shared[a + 1..] {
            if m.label(sys, u, v) != n.label(sys, u, v) {
                return Err(ConstraintError::PreconditionViolated(format!(
                    "networks disagree on the pair ({u}, {v})"
                )));
            }
        }
    }
    if !is_satisfiable(sys, m) || !is_satisfiable(sys, n) {
        return Err(ConstraintError::PreconditionViolated("an input network is unsatisfiable".into()));
    }
    match m.union(sys, n) {
        Ok(u) => Ok(is_satisfiable(sys, &u)),
        Err(_) => Ok(false),
    }
}
