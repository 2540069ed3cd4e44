//! Qualitative constraint systems (Allen, RCC8, point algebra, or custom
//! tables) and Rel-networks over them.

mod network;
mod solver;
mod tables;

use std::fmt;

use thiserror::Error;

pub use network::{RelNetwork, VarId};
pub use solver::{
    check_patchwork_instance, enumerate_completions, find_scenario, is_satisfiable, merge_variable, Completions,
};

/// A set of base relations, one bit per relation index.
pub type RelSet = u32;

/// Most base relations a system may have.
pub const MAX_RELATIONS: usize = 32;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ConstraintError {
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("empty label between variables {0} and {1}")]
    EmptyLabel(VarId, VarId),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("inconsistent constraint system table: {0}")]
    BadTable(String),
    #[error("line {line}: {message}")]
    Tsv { line: usize, message: String },
    #[error("unknown constraint system `{0}`")]
    UnknownSystem(String),
}

/// A finite JEPD relation vocabulary with converse and composition tables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintSystemDef {
    name: String,
    relations: Vec<String>,
    converse: Vec<usize>,
    /// Row-major `n * n` composition table.
    composition: Vec<RelSet>,
    identity: usize,
    /// Path consistency decides networks whose labels are all base relations
    /// or the universal relation. Holds for the built-in tables.
    partial_atomic_tractable: bool,
}

impl ConstraintSystemDef {
    /// Builds a system and runs the table self-check.
    pub fn new(
        name: impl Into<String>,
        relations: Vec<String>,
        converse: Vec<usize>,
        composition: Vec<RelSet>,
        identity: usize,
    ) -> Result<Self, ConstraintError> {
        let n = relations.len();
        if n == 0 || n > MAX_RELATIONS {
            return Err(ConstraintError::BadTable(format!("{n} base relations (need 1..={MAX_RELATIONS})")));
        }
        if converse.len() != n || composition.len() != n * n || identity >= n {
            return Err(ConstraintError::BadTable("table dimensions do not match the relation count".into()));
        }
        let sys = ConstraintSystemDef { name: name.into(), relations, converse, composition, identity, partial_atomic_tractable: false };
        sys.self_check()?;
        Ok(sys)
    }

    pub fn allen() -> Self {
        let comp = tables::ALLEN_COMPOSITION.iter().flat_map(|row| row.iter().copied()).collect();
        Self::new(
            "allen",
            tables::ALLEN_RELATIONS.iter().map(|s| s.to_string()).collect(),
            tables::ALLEN_CONVERSE.to_vec(),
            comp,
            12,
        )
        .expect("built-in Allen table is coherent")
        .tractable()
    }

    pub fn rcc8() -> Self {
        Self::from_named_rows("rcc8", &tables::RCC8_RELATIONS, &tables::RCC8_CONVERSE, &tables::RCC8_COMPOSITION, 7)
            .expect("built-in RCC8 table is coherent")
            .tractable()
    }

    pub fn point() -> Self {
        Self::from_named_rows("point", &tables::POINT_RELATIONS, &tables::POINT_CONVERSE, &tables::POINT_COMPOSITION, 1)
            .expect("built-in point algebra table is coherent")
            .tractable()
    }

    fn tractable(mut self) -> Self {
        self.partial_atomic_tractable = true;
        self
    }

    pub(crate) fn partial_atomic_tractable(&self) -> bool {
        self.partial_atomic_tractable
    }

    /// One of the built-in systems by name: `allen`, `rcc8` or `point`.
    pub fn by_name(name: &str) -> Result<Self, ConstraintError> {
        match name {
            "allen" => Ok(Self::allen()),
            "rcc8" => Ok(Self::rcc8()),
            "point" => Ok(Self::point()),
            other => Err(ConstraintError::UnknownSystem(other.to_string())),
        }
    }

    fn from_named_rows<const N: usize>(
        name: &str,
        rels: &[&str; N],
        conv: &[usize; N],
        rows: &[[&str; N]; N],
        identity: usize,
    ) -> Result<Self, ConstraintError> {
        let all: RelSet = if N == 32 { u32::MAX } else { (1u32 << N) - 1 };
        let mut comp = Vec::with_capacity(N * N);
        for row in rows {
            for cell in row {
                if *cell == "*" {
                    comp.push(all);
                    continue;
                }
                let mut m = 0;
                for sym in cell.split_whitespace() {
                    let k = rels
                        .iter()
                        .position(|r| r == &sym)
                        .ok_or_else(|| ConstraintError::UnknownRelation(sym.to_string()))?;
                    m |= 1 << k;
                }
                comp.push(m);
            }
        }
        Self::new(name, rels.iter().map(|s| s.to_string()).collect(), conv.to_vec(), comp, identity)
    }

    /// Loads a custom system from `relation TAB relation TAB comma-separated-result`
    /// lines. Blank lines and lines starting with `#` are ignored. Converses
    /// and the identity relation are inferred from the table.
    pub fn from_tsv(name: &str, text: &str) -> Result<Self, ConstraintError> {
        let mut relations: Vec<String> = Vec::new();
        let mut entries: Vec<(usize, String, String, Vec<String>)> = Vec::new();
        let intern = |s: &str, relations: &mut Vec<String>| {
            if !relations.iter().any(|r| r == s) {
                relations.push(s.to_string());
            }
        };
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(ConstraintError::Tsv { line: i + 1, message: format!("expected 3 tab-separated columns, found {}", cols.len()) });
            }
            let (r, s) = (cols[0].trim(), cols[1].trim());
            let res: Vec<String> = cols[2].split(',').map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect();
            intern(r, &mut relations);
            intern(s, &mut relations);
            entries.push((i + 1, r.to_string(), s.to_string(), res));
        }
        let n = relations.len();
        if n == 0 || n > MAX_RELATIONS {
            return Err(ConstraintError::BadTable(format!("{n} base relations (need 1..={MAX_RELATIONS})")));
        }
        let idx = |s: &str, line: usize| {
            relations
                .iter()
                .position(|r| r == s)
                .ok_or_else(|| ConstraintError::Tsv { line, message: format!("relation `{s}` never appears as an operand") })
        };
        let mut comp: Vec<Option<RelSet>> = vec![None; n * n];
        for (line, r, s, res) in &entries {
            let (a, b) = (idx(r, *line)?, idx(s, *line)?);
            let mut m = 0;
            for t in res {
                m |= 1 << idx(t, *line)?;
            }
            if comp[a * n + b].replace(m).is_some() {
                return Err(ConstraintError::Tsv { line: *line, message: format!("duplicate entry for ({r}, {s})") });
            }
        }
        let composition: Vec<RelSet> = comp
            .iter()
            .enumerate()
            .map(|(k, c)| {
                c.ok_or_else(|| {
                    ConstraintError::BadTable(format!("missing entry for ({}, {})", relations[k / n], relations[k % n]))
                })
            })
            .collect::<Result<_, _>>()?;
        let identity = (0..n)
            .find(|&e| (0..n).all(|s| composition[e * n + s] == 1 << s && composition[s * n + e] == 1 << s))
            .ok_or_else(|| ConstraintError::BadTable("no identity relation".into()))?;
        let mut converse = Vec::with_capacity(n);
        for r in 0..n {
            let cands: Vec<usize> = (0..n).filter(|&s| composition[r * n + s] & (1 << identity) != 0).collect();
            match cands.as_slice() {
                [s] => converse.push(*s),
                _ => {
                    return Err(ConstraintError::BadTable(format!(
                        "cannot infer a unique converse for `{}`",
                        relations[r]
                    )))
                }
            }
        }
        Self::new(name, relations, converse, composition, identity)
    }

    /// Coherence of the tables: converse is an involution fixing the
    /// identity, the identity is neutral, `id ∈ r ∘ r˘`, and
    /// `r ∘ s = (s˘ ∘ r˘)˘`.
    pub fn self_check(&self) -> Result<(), ConstraintError> {
        let n = self.len();
        let bad = |m: String| Err(ConstraintError::BadTable(format!("{}: {m}", self.name)));
        for r in 0..n {
            let c = self.converse[r];
            if c >= n || self.converse[c] != r {
                return bad(format!("converse of `{}` is not an involution", self.relations[r]));
            }
            if self.comp1(self.identity, r) != 1 << r || self.comp1(r, self.identity) != 1 << r {
                return bad(format!("identity is not neutral for `{}`", self.relations[r]));
            }
            if self.comp1(r, c) & (1 << self.identity) == 0 {
                return bad(format!("identity missing from `{}` composed with its converse", self.relations[r]));
            }
        }
        if self.converse[self.identity] != self.identity {
            return bad("identity is not self-converse".into());
        }
        for r in 0..n {
            for s in 0..n {
                let lhs = self.comp1(r, s);
                if lhs == 0 || lhs & !self.all() != 0 {
                    return bad(format!("composition ({}, {}) is empty or out of range", self.relations[r], self.relations[s]));
                }
                let rhs = self.converse_set(self.comp1(self.converse[s], self.converse[r]));
                if lhs != rhs {
                    return bad(format!(
                        "composition ({}, {}) disagrees with its converse image",
                        self.relations[r], self.relations[s]
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    pub fn relations(&self) -> &[String] {
        &self.relations
    }

    pub fn relation_name(&self, k: usize) -> &str {
        &self.relations[k]
    }

    pub fn index_of(&self, sym: &str) -> Option<usize> {
        self.relations.iter().position(|r| r == sym)
    }

    /// Singleton set of the named relation.
    pub fn rel(&self, sym: &str) -> Result<RelSet, ConstraintError> {
        self.index_of(sym).map(|k| 1 << k).ok_or_else(|| ConstraintError::UnknownRelation(sym.to_string()))
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn identity_set(&self) -> RelSet {
        1 << self.identity
    }

    /// The universal (unconstrained) label.
    pub fn all(&self) -> RelSet {
        if self.len() == 32 {
            u32::MAX
        } else {
            (1u32 << self.len()) - 1
        }
    }

    pub fn converse(&self, k: usize) -> usize {
        self.converse[k]
    }

    pub fn converse_set(&self, set: RelSet) -> RelSet {
        bits(set).fold(0, |acc, k| acc | 1 << self.converse[k])
    }

    fn comp1(&self, r: usize, s: usize) -> RelSet {
        self.composition[r * self.len() + s]
    }

    /// Composition lifted to sets of relations.
    pub fn compose(&self, a: RelSet, b: RelSet) -> RelSet {
        let all = self.all();
        let mut out = 0;
        for r in bits(a) {
            for s in bits(b) {
                out |= self.comp1(r, s);
                if out == all {
                    return out;
                }
            }
        }
        out
    }

    /// Human-readable form of a label, e.g. `{before,meets}`.
    pub fn format_set(&self, set: RelSet) -> String {
        let names: Vec<&str> = bits(set).map(|k| self.relations[k].as_str()).collect();
        format!("{{{}}}", names.join(","))
    }
}

impl fmt::Display for ConstraintSystemDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Indices of the set bits of `set`, ascending.
pub fn bits(set: RelSet) -> impl Iterator<Item = usize> {
    let mut rest = set;
    std::iter::from_fn(move || {
        if rest == 0 {
            return None;
        }
        let k = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        Some(k)
    })
}
