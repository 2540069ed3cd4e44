use std::collections::{BTreeMap, BTreeSet};

use crate::kb_model::{AbstractRia, KnowledgeBase, RoleExpr};

use super::PreprocessError;

/// Role hierarchy facts derived from the (rewritten) role box.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoleAnalysis {
    names: Vec<String>,
    /// Inclusions keyed by the name of their right-hand side, with the
    /// left-hand side inverted whenever the right-hand side was an inverse.
    rias: BTreeMap<String, Vec<Vec<RoleExpr>>>,
    simple: BTreeSet<String>,
    /// Reflexive-transitive `⊑*` over role expressions.
    sub: BTreeSet<(RoleExpr, RoleExpr)>,
    /// Transitive closure of the precedence constraints; a witness regular order.
    order: BTreeSet<(String, String)>,
    concrete_names: Vec<String>,
    concrete_sub: BTreeSet<(String, String)>,
}

fn invert_chain(chain: &[RoleExpr]) -> Vec<RoleExpr> {
    chain.iter().rev().map(RoleExpr::inv).collect()
}

fn ria_text(chain: &[RoleExpr], sup: &str) -> String {
    let parts: Vec<String> = chain.iter().map(|r| r.to_string()).collect();
    format!("{} -> {sup}", parts.join(" "))
}

/// Normalizes each inclusion to a named right-hand side.
fn normalize(rias: &[AbstractRia]) -> Result<BTreeMap<String, Vec<Vec<RoleExpr>>>, PreprocessError> {
    let mut out: BTreeMap<String, Vec<Vec<RoleExpr>>> = BTreeMap::new();
    for ria in rias {
        if ria.sup.is_universal() || ria.chain.iter().any(RoleExpr::is_universal) {
            return Err(PreprocessError::UniversalRoleMisuse("a role inclusion".into()));
        }
        let (chain, name) = match &ria.sup {
            RoleExpr::Named(n) => (ria.chain.clone(), n.clone()),
            RoleExpr::Inverse(n) => (invert_chain(&ria.chain), n.clone()),
            RoleExpr::Universal => unreachable!(),
        };
        // A bare `R -> R` says nothing.
        if chain.len() == 1 && chain[0] == RoleExpr::Named(name.clone()) {
            continue;
        }
        let list = out.entry(name).or_default();
        if !list.contains(&chain) {
            list.push(chain);
        }
    }
    Ok(out)
}

/// Precedence constraints `S < R` demanded by the shape of `w -> R`.
fn shape_constraints(chain: &[RoleExpr], r: &str) -> Vec<String> {
    let me = RoleExpr::Named(r.to_string());
    let n = chain.len();
    if n == 2 && chain[0] == me && chain[1] == me {
        return Vec::new();
    }
    if n == 1 && chain[0] == me.inv() {
        return Vec::new();
    }
    let inner: &[RoleExpr] = if n >= 2 && chain[0] == me {
        &chain[1..]
    } else if n >= 2 && chain[n - 1] == me {
        &chain[..n - 1]
    } else {
        chain
    };
    inner.iter().filter_map(|s| s.name().map(str::to_string)).collect()
}

fn find_cycle(edges: &BTreeMap<String, BTreeSet<String>>) -> Option<Vec<String>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Open,
        Done,
    }
    let mut marks: BTreeMap<&str, Mark> = BTreeMap::new();
    for start in edges.keys() {
        if marks.contains_key(start.as_str()) {
            continue;
        }
        // Iterative DFS keeping the current path for cycle reporting.
        let mut path: Vec<&str> = vec![start];
        let mut iters: Vec<std::collections::btree_set::Iter<String>> = vec![edges[start].iter()];
        marks.insert(start, Mark::Open);
        while let Some(it) = iters.last_mut() {
            match it.next() {
                Some(next) => match marks.get(next.as_str()) {
                    Some(Mark::Open) => {
                        let pos = path.iter().position(|p| *p == next).unwrap();
                        let mut cycle: Vec<String> = path[pos..].iter().map(|s| s.to_string()).collect();
                        cycle.push(next.clone());
                        return Some(cycle);
                    }
                    Some(Mark::Done) => {}
                    None => {
                        marks.insert(next, Mark::Open);
                        path.push(next);
                        iters.push(edges.get(next).map(|s| s.iter()).unwrap_or_else(|| EMPTY.iter()));
                    }
                },
                None => {
                    let done = path.pop().unwrap();
                    marks.insert(done, Mark::Done);
                    iters.pop();
                }
            }
        }
    }
    None
}

static EMPTY: BTreeSet<String> = BTreeSet::new();

fn transitive_closure<T: Ord + Clone>(nodes: &[T], edges: &BTreeSet<(T, T)>, reflexive: bool) -> BTreeSet<(T, T)> {
    let mut out = BTreeSet::new();
    let mut succ: BTreeMap<&T, Vec<&T>> = BTreeMap::new();
    for (a, b) in edges {
        succ.entry(a).or_default().push(b);
    }
    for n in nodes {
        let mut seen: BTreeSet<&T> = BTreeSet::new();
        let mut stack: Vec<&T> = succ.get(n).cloned().unwrap_or_default();
        while let Some(m) = stack.pop() {
            if seen.insert(m) {
                stack.extend(succ.get(m).cloned().unwrap_or_default());
            }
        }
        if reflexive {
            seen.insert(n);
        }
        for m in seen {
            out.insert((n.clone(), m.clone()));
        }
    }
    out
}

/// Computes simplicity, `⊑*` and a witness regular order, failing with the
/// offending cycle when no strict order fits the inclusions.
pub fn analyze_roles(kb: &KnowledgeBase) -> Result<RoleAnalysis, PreprocessError> {
    let vocab = crate::kb_model::free_vocabulary(kb)?;
    let rias = normalize(&kb.rbox.abstract_rias)?;
    let mut names: BTreeSet<String> = vocab.abstract_roles.clone();
    for m in &kb.minimized {
        if let crate::kb_model::Minimized::Role(r) = m {
            names.insert(r.clone());
        }
    }
    let names: Vec<String> = names.into_iter().collect();

    let mut prec: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut prec_edges = BTreeSet::new();
    for (r, chains) in &rias {
        for chain in chains {
            for s in shape_constraints(chain, r) {
                prec.entry(s.clone()).or_default().insert(r.clone());
                prec_edges.insert((s, r.clone()));
            }
        }
    }
    if let Some(cycle) = find_cycle(&prec) {
        return Err(PreprocessError::NotRegular { cycle });
    }
    let order: BTreeSet<(String, String)> = transitive_closure(&names, &prec_edges, false);

    let mut sub_edges = BTreeSet::new();
    let mut complex: BTreeSet<String> = BTreeSet::new();
    for (r, chains) in &rias {
        let me = RoleExpr::Named(r.clone());
        for chain in chains {
            if chain.len() == 1 {
                sub_edges.insert((chain[0].clone(), me.clone()));
                sub_edges.insert((chain[0].inv(), me.inv()));
            } else {
                complex.insert(r.clone());
            }
        }
    }
    let exprs: Vec<RoleExpr> = names.iter().flat_map(|n| [RoleExpr::named(n.as_str()), RoleExpr::inverse_of(n.as_str())]).collect();
    let sub = transitive_closure(&exprs, &sub_edges, true);
    // A role is non-simple when some role below it (or itself) has a complex inclusion.
    let simple = names
        .iter()
        .filter(|n| {
            let me = RoleExpr::named(n.as_str());
            !sub.iter().any(|(s, r)| *r == me && s.name().is_some_and(|x| complex.contains(x)))
        })
        .cloned()
        .collect();

    let mut concrete_names: BTreeSet<String> = vocab.concrete_roles.clone();
    let mut cedges = BTreeSet::new();
    for c in &kb.rbox.concrete_rias {
        concrete_names.insert(c.sub.0.clone());
        concrete_names.insert(c.sup.0.clone());
        cedges.insert((c.sub.0.clone(), c.sup.0.clone()));
    }
    let concrete_names: Vec<String> = concrete_names.into_iter().collect();
    let concrete_sub = transitive_closure(&concrete_names, &cedges, true);

    Ok(RoleAnalysis { names, rias, simple, sub, order, concrete_names, concrete_sub })
}

impl RoleAnalysis {
    pub fn role_names(&self) -> &[String] {
        &self.names
    }

    pub fn concrete_role_names(&self) -> &[String] {
        &self.concrete_names
    }

    /// Inclusions `w -> name` after normalization.
    pub fn rias_of(&self, name: &str) -> &[Vec<RoleExpr>] {
        self.rias.get(name).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn is_simple(&self, r: &RoleExpr) -> bool {
        match r.name() {
            Some(n) => self.simple.contains(n) || !self.names.iter().any(|x| x == n),
            None => false,
        }
    }

    /// `s ⊑* r`.
    pub fn is_subrole(&self, s: &RoleExpr, r: &RoleExpr) -> bool {
        s == r || self.sub.contains(&(s.clone(), r.clone()))
    }

    /// Every `r` with `s ⊑* r`, including `s` itself.
    pub fn super_roles(&self, s: &RoleExpr) -> Vec<RoleExpr> {
        let mut out: Vec<RoleExpr> = self.sub.iter().filter(|(a, _)| a == s).map(|(_, b)| b.clone()).collect();
        if !out.contains(s) {
            out.push(s.clone());
        }
        out
    }

    /// `a < b` in the witness regular order.
    pub fn precedes(&self, a: &str, b: &str) -> bool {
        self.order.contains(&(a.to_string(), b.to_string()))
    }

    pub fn is_concrete_subrole(&self, g: &str, h: &str) -> bool {
        g == h || self.concrete_sub.contains(&(g.to_string(), h.to_string()))
    }

    /// Describes the inclusions of `name` for diagnostics.
    pub fn describe_rias(&self, name: &str) -> Vec<String> {
        self.rias_of(name).iter().map(|c| ria_text(c, name)).collect()
    }
}
