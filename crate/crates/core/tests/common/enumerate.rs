//! Bounded-domain model search over a three-valued partial interpretation.
//!
//! Concrete roles are assumed functional and the concrete domain is the
//! point algebra over integers; `m` slots always suffice to realize any
//! order type among `m` points.

use std::collections::BTreeMap;

use sroiqc::kb_model::{
    Assertion, Concept, FxnlTarget, KnowledgeBase, Path, RoleAssertion, RoleExpr, Side,
};

type T = Option<bool>;

fn and(a: T, b: T) -> T {
    match (a, b) {
        (Some(false), _) | (_, Some(false)) => Some(false),
        (Some(true), Some(true)) => Some(true),
        _ => None,
    }
}

fn or(a: T, b: T) -> T {
    match (a, b) {
        (Some(true), _) | (_, Some(true)) => Some(true),
        (Some(false), Some(false)) => Some(false),
        _ => None,
    }
}

fn not(a: T) -> T {
    a.map(|b| !b)
}

fn all(items: impl IntoIterator<Item = T>) -> T {
    items.into_iter().fold(Some(true), and)
}

fn any(items: impl IntoIterator<Item = T>) -> T {
    items.into_iter().fold(Some(false), or)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Var {
    Ind(usize),
    Atom(usize, usize),
    Role(usize, usize, usize),
    Val(usize, usize),
    CInd(usize),
}

/// Vocabulary of a knowledge base, indexed.
#[derive(Clone, Debug, Default)]
pub struct Signature {
    pub atoms: Vec<String>,
    pub roles: Vec<String>,
    pub inds: Vec<String>,
    pub croles: Vec<String>,
    pub cinds: Vec<String>,
}

impl Signature {
    pub fn of(kb: &KnowledgeBase) -> Self {
        let v = sroiqc::kb_model::free_vocabulary(kb).expect("vocabulary");
        Signature {
            atoms: v.concepts.into_iter().collect(),
            roles: v.abstract_roles.into_iter().collect(),
            inds: v.abstract_individuals.into_iter().collect(),
            croles: v.concrete_roles.into_iter().collect(),
            cinds: v.constraint_individuals.into_iter().collect(),
        }
    }

    fn pos(list: &[String], name: &str) -> usize {
        list.iter().position(|x| x == name).unwrap_or_else(|| panic!("unknown symbol {name}"))
    }
}

/// A (possibly partial) interpretation over `{0, .., n-1}`.
#[derive(Clone, Debug)]
pub struct Interp {
    pub n: usize,
    /// Number of concrete value slots.
    pub m: usize,
    pub sig: Signature,
    ind: Vec<Option<usize>>,
    atom: Vec<Option<bool>>,
    role: Vec<Option<bool>>,
    /// `Some(0)` means no value, `Some(k + 1)` means value `k`.
    val: Vec<Option<usize>>,
    cind: Vec<Option<usize>>,
}

impl Interp {
    fn new(sig: Signature, n: usize) -> Self {
        let m = (n * sig.croles.len() + sig.cinds.len()).max(1);
        Interp {
            n,
            m,
            ind: vec![None; sig.inds.len()],
            atom: vec![None; sig.atoms.len() * n],
            role: vec![None; sig.roles.len() * n * n],
            val: vec![None; sig.croles.len() * n],
            cind: vec![None; sig.cinds.len()],
            sig,
        }
    }

    /// Every way of interpreting the atoms of `c` that this interpretation
    /// leaves out of its signature.
    pub fn with_atoms_of(&self, c: &Concept) -> Vec<Interp> {
        let probe = KnowledgeBase { abox: vec![Assertion::Concept("probe".into(), c.clone())], ..Default::default() };
        let extra: Vec<String> = sroiqc::kb_model::free_vocabulary(&probe)
            .expect("vocabulary")
            .concepts
            .into_iter()
            .filter(|a| !self.sig.atoms.contains(a))
            .collect();
        let slots = extra.len() * self.n;
        (0..1u64 << slots)
            .map(|bits| {
                let mut m = self.clone();
                m.sig.atoms.extend(extra.iter().cloned());
                m.atom.extend((0..slots).map(|k| Some(bits >> k & 1 == 1)));
                m
            })
            .collect()
    }

    pub fn individual(&self, a: &str) -> usize {
        self.ind[Signature::pos(&self.sig.inds, a)].expect("complete interpretation")
    }

    fn ind_of(&self, a: &str) -> Option<usize> {
        self.ind[Signature::pos(&self.sig.inds, a)]
    }

    fn atom_at(&self, a: &str, x: usize) -> T {
        match self.sig.atoms.iter().position(|s| s == a) {
            Some(k) => self.atom[k * self.n + x],
            None => Some(false),
        }
    }

    fn role_name(&self, r: &str, x: usize, y: usize) -> T {
        match self.sig.roles.iter().position(|s| s == r) {
            Some(k) => self.role[(k * self.n + x) * self.n + y],
            None => Some(false),
        }
    }

    pub fn role_at(&self, r: &RoleExpr, x: usize, y: usize) -> T {
        match r {
            RoleExpr::Named(n) => self.role_name(n, x, y),
            RoleExpr::Inverse(n) => self.role_name(n, y, x),
            RoleExpr::Universal => Some(true),
        }
    }

    /// `None` while unassigned, `Some(None)` for no value.
    fn value(&self, g: &str, x: usize) -> Option<Option<usize>> {
        let k = self.sig.croles.iter().position(|s| s == g)?;
        self.val[k * self.n + x].map(|v| v.checked_sub(1))
    }

    fn cvalue(&self, i: &str) -> Option<usize> {
        self.cind[Signature::pos(&self.sig.cinds, i)]
    }

    /// Elements reachable by the abstract prefix of `p`, with their guards.
    fn path_targets(&self, p: &Path, x: usize) -> Vec<(T, usize)> {
        match p.step() {
            None => vec![(Some(true), x)],
            Some(r) => (0..self.n).map(|y| (self.role_at(r, x, y), y)).collect(),
        }
    }

    /// Whether the pair of points exists and stands in `rel`.
    fn holds(a: Option<Option<usize>>, b: Option<Option<usize>>, rel: &str) -> T {
        match (a, b) {
            (Some(None), _) | (_, Some(None)) => Some(false),
            (Some(Some(u)), Some(Some(v))) => Some(point_rel(u, v) == rel),
            _ => None,
        }
    }

    fn present(a: Option<Option<usize>>) -> T {
        a.map(|v| v.is_some())
    }

    pub fn eval(&self, c: &Concept, x: usize) -> T {
        match c {
            Concept::Atomic(a) => self.atom_at(a, x),
            Concept::Nominal(a) => self.ind_of(a).map(|e| e == x),
            Concept::Top => Some(true),
            Concept::Bottom => Some(false),
            Concept::And(a, b) => and(self.eval(a, x), self.eval(b, x)),
            Concept::Or(a, b) => or(self.eval(a, x), self.eval(b, x)),
            Concept::Not(a) => not(self.eval(a, x)),
            Concept::Exists(r, d) => any((0..self.n).map(|y| and(self.role_at(r, x, y), self.eval(d, y)))),
            Concept::Forall(r, d) => all((0..self.n).map(|y| or(not(self.role_at(r, x, y)), self.eval(d, y)))),
            Concept::AtLeast(k, r, d) | Concept::AtMost(k, r, d) => {
                let (mut yes, mut maybe) = (0u32, 0u32);
                for y in 0..self.n {
                    match and(self.role_at(r, x, y), self.eval(d, y)) {
                        Some(true) => yes += 1,
                        None => maybe += 1,
                        Some(false) => {}
                    }
                }
                let at_least = if yes >= *k {
                    Some(true)
                } else if yes + maybe < *k {
                    Some(false)
                } else {
                    None
                };
                if matches!(c, Concept::AtLeast(..)) {
                    at_least
                } else {
                    // at most k = not at least k + 1
                    let more = if yes > *k {
                        Some(true)
                    } else if yes + maybe <= *k {
                        Some(false)
                    } else {
                        None
                    };
                    not(more)
                }
            }
            Concept::SelfRestriction(r) => self.role_at(r, x, x),
            Concept::CAtLeast(k, g) => match k {
                0 => Some(true),
                1 => Self::present(self.value(&g.0, x)),
                _ => Some(false),
            },
            Concept::CAtMost(k, g) => match k {
                0 => not(Self::present(self.value(&g.0, x))),
                _ => Some(true),
            },
            Concept::CExists(p, q, rel) | Concept::CForall(p, q, rel) => {
                let mut terms = Vec::new();
                for (g1, y1) in self.path_targets(p, x) {
                    for (g2, y2) in self.path_targets(q, x) {
                        let a = self.value(&p.concrete.0, y1);
                        let b = self.value(&q.concrete.0, y2);
                        let guard = and(g1, g2);
                        terms.push(if matches!(c, Concept::CExists(..)) {
                            and(guard, Self::holds(a, b, rel))
                        } else {
                            let exists = and(Self::present(a), Self::present(b));
                            or(not(and(guard, exists)), Self::holds(a, b, rel))
                        });
                    }
                }
                if matches!(c, Concept::CExists(..)) {
                    any(terms)
                } else {
                    all(terms)
                }
            }
            Concept::CExistsInd(p, i, side, rel) | Concept::CForallInd(p, i, side, rel) => {
                let iv = self.cvalue(i).map(Some);
                let mut terms = Vec::new();
                for (guard, y) in self.path_targets(p, x) {
                    let a = self.value(&p.concrete.0, y);
                    let h = match side {
                        Side::Right => Self::holds(a, iv, rel),
                        Side::Left => Self::holds(iv, a, rel),
                    };
                    terms.push(if matches!(c, Concept::CExistsInd(..)) {
                        and(guard, h)
                    } else {
                        or(not(and(guard, Self::present(a))), h)
                    });
                }
                if matches!(c, Concept::CExistsInd(..)) {
                    any(terms)
                } else {
                    all(terms)
                }
            }
            Concept::AutomatonForall(..) => panic!("internal concept in oracle input"),
        }
    }

    fn at(&self, a: &str, f: impl Fn(usize) -> T) -> T {
        self.ind_of(a).and_then(f)
    }

    fn role_axiom(&self, ax: &RoleAssertion) -> T {
        let n = self.n;
        let pairs = || (0..n).flat_map(move |x| (0..n).map(move |y| (x, y)));
        match ax {
            RoleAssertion::Ref(r) => all((0..n).map(|x| self.role_at(r, x, x))),
            RoleAssertion::Irr(r) => all((0..n).map(|x| not(self.role_at(r, x, x)))),
            RoleAssertion::Dis(r, s) => {
                all(pairs().map(|(x, y)| not(and(self.role_at(r, x, y), self.role_at(s, x, y)))))
            }
            RoleAssertion::Sym(r) => all(pairs().map(|(x, y)| or(not(self.role_at(r, x, y)), self.role_at(r, y, x)))),
            RoleAssertion::Trans(r) => all(pairs().flat_map(|(x, y)| {
                (0..n).map(move |z| {
                    or(not(and(self.role_at(r, x, y), self.role_at(r, y, z))), self.role_at(r, x, z))
                })
            })),
            RoleAssertion::Fxnl(FxnlTarget::Abstract(r)) => all((0..n).map(|x| {
                self.eval(&Concept::at_most(1, r.clone(), Concept::Top), x)
            })),
            // Values are single slots already.
            RoleAssertion::Fxnl(FxnlTarget::Concrete(_)) => Some(true),
        }
    }

    fn chain(&self, chain: &[RoleExpr], x: usize, z: usize) -> T {
        match chain {
            [] => Some(x == z),
            [r] => self.role_at(r, x, z),
            [r, rest @ ..] => any((0..self.n).map(|y| and(self.role_at(r, x, y), self.chain(rest, y, z)))),
        }
    }

    fn assertion(&self, a: &Assertion) -> T {
        match a {
            Assertion::Concept(i, c) => self.at(i, |x| self.eval(c, x)),
            Assertion::Role(i, j, r) => self.at(i, |x| self.at(j, |y| self.role_at(r, x, y))),
            Assertion::NegRole(i, j, r) => self.at(i, |x| self.at(j, |y| not(self.role_at(r, x, y)))),
            Assertion::Distinct(i, j) => self.at(i, |x| self.at(j, |y| Some(x != y))),
            Assertion::ConcreteValue(i, g, c) => self.at(i, |x| {
                let v = self.value(&g.0, x)?;
                let w = self.cvalue(c)?;
                Some(v == Some(w))
            }),
            Assertion::Constraint(i, rel, j) => Self::holds(self.cvalue(i).map(Some), self.cvalue(j).map(Some), rel),
        }
    }

    /// Truth of the whole knowledge base.
    pub fn satisfies(&self, kb: &KnowledgeBase) -> T {
        let mut acc = Some(true);
        for a in &kb.abox {
            acc = and(acc, self.assertion(a));
            if acc == Some(false) {
                return acc;
            }
        }
        // Constraint individuals name distinct concrete objects, so a
        // functional role cannot reach two of them from one element.
        let values: Vec<_> = kb
            .abox
            .iter()
            .filter_map(|a| match a {
                Assertion::ConcreteValue(i, g, c) => Some((i, g, c)),
                _ => None,
            })
            .collect();
        for (k, &(i, g, c)) in values.iter().enumerate() {
            for &(j, h, d) in &values[k + 1..] {
                if g == h && c != d {
                    acc = and(acc, self.at(i, |x| self.at(j, |y| Some(x != y))));
                }
            }
        }
        for g in &kb.tbox {
            acc = and(acc, all((0..self.n).map(|x| or(not(self.eval(&g.sub, x)), self.eval(&g.sup, x)))));
            if acc == Some(false) {
                return acc;
            }
        }
        for ria in &kb.rbox.abstract_rias {
            let n = self.n;
            acc = and(
                acc,
                all((0..n).flat_map(|x| (0..n).map(move |z| (x, z))).map(|(x, z)| {
                    or(not(self.chain(&ria.chain, x, z)), self.role_at(&ria.sup, x, z))
                })),
            );
            if acc == Some(false) {
                return acc;
            }
        }
        for ax in &kb.rbox.assertions {
            acc = and(acc, self.role_axiom(ax));
        }
        acc
    }

    /// Elements in the extension of `c`.
    pub fn extension(&self, c: &Concept) -> Vec<usize> {
        (0..self.n).filter(|&x| self.eval(c, x) == Some(true)).collect()
    }

    pub fn role_pairs(&self, r: &str) -> Vec<(usize, usize)> {
        let n = self.n;
        (0..n)
            .flat_map(|x| (0..n).map(move |y| (x, y)))
            .filter(|&(x, y)| self.role_name(r, x, y) == Some(true))
            .collect()
    }

    fn vars(&self) -> Vec<(Var, usize)> {
        let n = self.n;
        let mut out = Vec::new();
        for k in 0..self.sig.inds.len() {
            out.push((Var::Ind(k), n));
        }
        for k in 0..self.sig.cinds.len() {
            out.push((Var::CInd(k), self.m));
        }
        for x in 0..n {
            for k in 0..self.sig.atoms.len() {
                out.push((Var::Atom(k, x), 2));
            }
            for y in 0..n {
                for k in 0..self.sig.roles.len() {
                    out.push((Var::Role(k, x, y), 2));
                }
            }
            for k in 0..self.sig.croles.len() {
                out.push((Var::Val(k, x), self.m + 1));
            }
        }
        out
    }

    fn set(&mut self, v: Var, value: Option<usize>) {
        let n = self.n;
        match v {
            Var::Ind(k) => self.ind[k] = value,
            Var::CInd(k) => self.cind[k] = value,
            Var::Atom(k, x) => self.atom[k * n + x] = value.map(|b| b == 1),
            Var::Role(k, x, y) => self.role[(k * n + x) * n + y] = value.map(|b| b == 1),
            Var::Val(k, x) => self.val[k * n + x] = value,
        }
    }
}

fn point_rel(u: usize, v: usize) -> &'static str {
    match u.cmp(&v) {
        std::cmp::Ordering::Less => "lt",
        std::cmp::Ordering::Equal => "eq",
        std::cmp::Ordering::Greater => "gt",
    }
}

struct Search<'a> {
    kb: &'a KnowledgeBase,
    vars: Vec<(Var, usize)>,
    /// Individuals pinned to distinct elements in signature order.
    una: bool,
    all: bool,
    found: Vec<Interp>,
    budget: u64,
}

impl Search<'_> {
    fn go(&mut self, it: &mut Interp, k: usize) -> bool {
        if self.budget == 0 {
            return true;
        }
        self.budget -= 1;
        match it.satisfies(self.kb) {
            Some(false) => return false,
            Some(true) if k == self.vars.len() => {
                self.found.push(it.clone());
                return !self.all;
            }
            _ => {}
        }
        if k == self.vars.len() {
            return false;
        }
        let (v, dom) = self.vars[k];
        let choices: Vec<usize> = match v {
            Var::Ind(j) if self.una => vec![j],
            // Unnamed elements are interchangeable: the next individual
            // either reuses an element or takes the least fresh one.
            Var::Ind(j) => {
                let used = it.ind[..j].iter().flatten().max().map_or(0, |m| m + 1);
                (0..dom.min(used + 1)).collect()
            }
            _ => (0..dom).collect(),
        };
        for c in choices {
            it.set(v, Some(c));
            if self.go(it, k + 1) {
                return true;
            }
        }
        it.set(v, None);
        false
    }
}

/// Outcome of the bounded search.
#[derive(Debug)]
pub enum Bounded {
    Model(Box<Interp>),
    NoModel,
    /// The search budget ran out before a decision.
    Unknown,
}

const BUDGET: u64 = 5_000_000;

/// Searches for a model with at most `max_n` elements.
pub fn find_model(kb: &KnowledgeBase, max_n: usize) -> Bounded {
    let sig = Signature::of(kb);
    let mut exhausted = false;
    for n in 1..=max_n {
        let mut it = Interp::new(sig.clone(), n);
        let vars = it.vars();
        let mut s = Search { kb, vars, una: false, all: false, found: Vec::new(), budget: BUDGET };
        s.go(&mut it, 0);
        if let Some(m) = s.found.pop() {
            return Bounded::Model(Box::new(m));
        }
        exhausted |= s.budget == 0;
    }
    if exhausted {
        Bounded::Unknown
    } else {
        Bounded::NoModel
    }
}

/// Every model whose domain is exactly the named individuals, pairwise distinct.
pub fn named_models(kb: &KnowledgeBase) -> Vec<Interp> {
    let sig = Signature::of(kb);
    let n = sig.inds.len().max(1);
    let mut it = Interp::new(sig, n);
    let vars = it.vars();
    let mut s = Search { kb, vars, una: true, all: true, found: Vec::new(), budget: u64::MAX };
    s.go(&mut it, 0);
    s.found
}

/// Minimized-predicate extensions of a named model, keyed by predicate.
pub fn named_extension(m: &Interp, minimized: &[sroiqc::kb_model::Minimized]) -> BTreeMap<String, Vec<Vec<String>>> {
    use sroiqc::kb_model::Minimized;
    let name = |x: usize| m.sig.inds[x].clone();
    let mut out = BTreeMap::new();
    for p in minimized {
        match p {
            Minimized::Concept(c) => {
                let key = sroiqc::kb_text::concept_to_string(c);
                let mut ext: Vec<Vec<String>> = m.extension(c).into_iter().map(|x| vec![name(x)]).collect();
                ext.sort();
                out.insert(key, ext);
            }
            Minimized::Role(r) => {
                let mut ext: Vec<Vec<String>> =
                    m.role_pairs(r).into_iter().map(|(x, y)| vec![name(x), name(y)]).collect();
                ext.sort();
                out.insert(r.clone(), ext);
            }
        }
    }
    out
}
