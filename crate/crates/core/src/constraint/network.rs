use std::collections::{BTreeMap, BTreeSet};

use super::{bits, ConstraintError, ConstraintSystemDef, RelSet};

pub type VarId = u32;

/// A finite set of variables with disjunctive labels on ordered pairs.
///
/// Labels are stored once per unordered pair, oriented from the smaller to
/// the larger id; a missing pair carries the universal label. Self-pairs are
/// never stored: a variable is implicitly related to itself by the identity.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct RelNetwork {
    vars: BTreeSet<VarId>,
    labels: BTreeMap<(VarId, VarId), RelSet>,
}

impl RelNetwork {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, v: VarId) {
        self.vars.insert(v);
    }

    pub fn contains_var(&self, v: VarId) -> bool {
        self.vars.contains(&v)
    }

    pub fn vars(&self) -> &BTreeSet<VarId> {
        &self.vars
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    /// Stored (non-universal) labels, oriented `u < v`.
    pub fn constraints(&self) -> impl Iterator<Item = (VarId, RelSet, VarId)> + '_ {
        self.labels.iter().map(|(&(u, v), &r)| (u, r, v))
    }

    pub fn constraint_count(&self) -> usize {
        self.labels.len()
    }

    /// Label of `(u, v)`; the universal label when nothing is stored.
    pub fn label(&self, sys: &ConstraintSystemDef, u: VarId, v: VarId) -> RelSet {
        if u == v {
            return sys.identity_set();
        }
        if u < v {
            self.labels.get(&(u, v)).copied().unwrap_or(sys.all())
        } else {
            self.labels.get(&(v, u)).map(|&r| sys.converse_set(r)).unwrap_or(sys.all())
        }
    }

    /// Intersects the label of `(u, v)` with `rels`, adding the variables if
    /// needed. Fails when the intersection is empty; the network is left
    /// unchanged in that case.
    pub fn constrain(&mut self, sys: &ConstraintSystemDef, u: VarId, rels: RelSet, v: VarId) -> Result<(), ConstraintError> {
        self.vars.insert(u);
        self.vars.insert(v);
        if u == v {
            return if rels & sys.identity_set() != 0 { Ok(()) } else { Err(ConstraintError::EmptyLabel(u, v)) };
        }
        let (key, oriented) = if u < v { ((u, v), rels) } else { ((v, u), sys.converse_set(rels)) };
        let cur = self.labels.get(&key).copied().unwrap_or(sys.all());
        let new = cur & oriented;
        if new == 0 {
            return Err(ConstraintError::EmptyLabel(u, v));
        }
        if new == sys.all() {
            self.labels.remove(&key);
        } else {
            self.labels.insert(key, new);
        }
        Ok(())
    }

    /// Drops a variable and every constraint on it.
    pub fn remove_var(&mut self, v: VarId) {
        self.vars.remove(&v);
        self.labels.retain(|&(a, b), _| a != v && b != v);
    }

    /// Every pair of distinct variables in `over` carries a single relation.
    pub fn is_complete_over(&self, sys: &ConstraintSystemDef, over: &[VarId]) -> bool {
        for (i, &u) in over.iter().enumerate() {
            for &v in &over[i + 1..] {
                if u != v && self.label(sys, u, v).count_ones() != 1 {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_complete(&self, sys: &ConstraintSystemDef) -> bool {
        let vs: Vec<VarId> = self.vars.iter().copied().collect();
        self.is_complete_over(sys, &vs)
    }

    /// The sub-network induced by `keep`.
    pub fn restrict(&self, keep: &BTreeSet<VarId>) -> RelNetwork {
        RelNetwork {
            vars: self.vars.intersection(keep).copied().collect(),
            labels: self
                .labels
                .iter()
                .filter(|(&(a, b), _)| keep.contains(&a) && keep.contains(&b))
                .map(|(&k, &r)| (k, r))
                .collect(),
        }
    }

    /// Conjunction of two networks.
    pub fn union(&self, sys: &ConstraintSystemDef, other: &RelNetwork) -> Result<RelNetwork, ConstraintError> {
        let mut out = self.clone();
        for &v in &other.vars {
            out.vars.insert(v);
        }
        for (u, r, v) in other.constraints() {
            out.constrain(sys, u, r, v)?;
        }
        Ok(out)
    }

    /// Renders the network as `(u {r,...} v)` lines.
    pub fn describe(&self, sys: &ConstraintSystemDef) -> String {
        let mut s = String::new();
        for (u, r, v) in self.constraints() {
            let names: Vec<&str> = bits(r).map(|k| sys.relation_name(k)).collect();
            s.push_str(&format!("({u} {{{}}} {v})\n", names.join(",")));
        }
        s
    }
}
