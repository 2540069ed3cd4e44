//! Vocabulary and AST types for SROIQ(C) knowledge bases.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// Default upper bound on the `n` of number restrictions.
pub const DEFAULT_MAX_CARDINALITY: u32 = 1 << 16;

/// An abstract role: a role name, the inverse of a role name, or the universal role.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RoleExpr {
    Named(String),
    Inverse(String),
    Universal,
}

impl RoleExpr {
    pub fn named(name: impl Into<String>) -> Self {
        RoleExpr::Named(name.into())
    }

    pub fn inverse_of(name: impl Into<String>) -> Self {
        RoleExpr::Inverse(name.into())
    }

    /// `Inv(R)`. The inverse of an inverse collapses back to the name; the
    /// universal role is its own inverse.
    pub fn inv(&self) -> Self {
        match self {
            RoleExpr::Named(n) => RoleExpr::Inverse(n.clone()),
            RoleExpr::Inverse(n) => RoleExpr::Named(n.clone()),
            RoleExpr::Universal => RoleExpr::Universal,
        }
    }

    /// Underlying role name; `None` for the universal role.
    pub fn name(&self) -> Option<&str> {
        match self {
            RoleExpr::Named(n) | RoleExpr::Inverse(n) => Some(n),
            RoleExpr::Universal => None,
        }
    }

    pub fn is_inverse(&self) -> bool {
        matches!(self, RoleExpr::Inverse(_))
    }

    pub fn is_universal(&self) -> bool {
        matches!(self, RoleExpr::Universal)
    }
}

/// A concrete (feature-like) role linking abstract individuals to constraint variables.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConcreteRole(pub String);

impl ConcreteRole {
    pub fn new(name: impl Into<String>) -> Self {
        ConcreteRole(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

/// A path `R1 ... Rk g`. After validation the prefix has length 0 or 1.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Path {
    pub prefix: Vec<RoleExpr>,
    pub concrete: ConcreteRole,
}

impl Path {
    pub fn direct(g: impl Into<String>) -> Self {
        Path { prefix: Vec::new(), concrete: ConcreteRole::new(g) }
    }

    pub fn via(role: RoleExpr, g: impl Into<String>) -> Self {
        Path { prefix: vec![role], concrete: ConcreteRole::new(g) }
    }

    pub fn len(&self) -> usize {
        self.prefix.len() + 1
    }

    /// Paths always contain the concrete role, so they are never empty.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// The single abstract step of a PNF path, if any.
    pub fn step(&self) -> Option<&RoleExpr> {
        self.prefix.first()
    }
}

/// Which side of the relation the constraint individual sits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    /// `(i r x)`: the individual is the left operand.
    Left,
    /// `(x r i)`: the individual is the right operand.
    Right,
}

/// Reference to a state of the compiled automaton of a role.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AutomatonState {
    pub role: RoleExpr,
    pub state: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Concept {
    Atomic(String),
    Nominal(String),
    Top,
    Bottom,
    And(Box<Concept>, Box<Concept>),
    Or(Box<Concept>, Box<Concept>),
    Not(Box<Concept>),
    Exists(RoleExpr, Box<Concept>),
    Forall(RoleExpr, Box<Concept>),
    AtLeast(u32, RoleExpr, Box<Concept>),
    AtMost(u32, RoleExpr, Box<Concept>),
    SelfRestriction(RoleExpr),
    CAtLeast(u32, ConcreteRole),
    CAtMost(u32, ConcreteRole),
    CExists(Path, Path, String),
    CForall(Path, Path, String),
    CExistsInd(Path, String, Side, String),
    CForallInd(Path, String, Side, String),
    /// `∀B(q).C`, only produced by preprocessing and the tableau.
    AutomatonForall(AutomatonState, Box<Concept>),
}

impl Concept {
    pub fn atomic(name: impl Into<String>) -> Self {
        Concept::Atomic(name.into())
    }

    pub fn nominal(ind: impl Into<String>) -> Self {
        Concept::Nominal(ind.into())
    }

    pub fn and(a: Concept, b: Concept) -> Self {
        Concept::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Concept, b: Concept) -> Self {
        Concept::Or(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(c: Concept) -> Self {
        Concept::Not(Box::new(c))
    }

    pub fn exists(r: RoleExpr, c: Concept) -> Self {
        Concept::Exists(r, Box::new(c))
    }

    pub fn forall(r: RoleExpr, c: Concept) -> Self {
        Concept::Forall(r, Box::new(c))
    }

    pub fn at_least(n: u32, r: RoleExpr, c: Concept) -> Self {
        Concept::AtLeast(n, r, Box::new(c))
    }

    pub fn at_most(n: u32, r: RoleExpr, c: Concept) -> Self {
        Concept::AtMost(n, r, Box::new(c))
    }

    /// Left-nested conjunction; `⊤` when empty.
    pub fn and_all(items: impl IntoIterator<Item = Concept>) -> Self {
        let mut it = items.into_iter();
        match it.next() {
            None => Concept::Top,
            Some(first) => it.fold(first, Concept::and),
        }
    }

    /// Left-nested disjunction; `⊥` when empty.
    pub fn or_all(items: impl IntoIterator<Item = Concept>) -> Self {
        let mut it = items.into_iter();
        match it.next() {
            None => Concept::Bottom,
            Some(first) => it.fold(first, Concept::or),
        }
    }

    /// Direct children, left to right.
    pub fn children(&self) -> Vec<&Concept> {
        match self {
            Concept::And(a, b) | Concept::Or(a, b) => vec![a, b],
            Concept::Not(c)
            | Concept::Exists(_, c)
            | Concept::Forall(_, c)
            | Concept::AtLeast(_, _, c)
            | Concept::AtMost(_, _, c)
            | Concept::AutomatonForall(_, c) => vec![c],
            _ => Vec::new(),
        }
    }

    /// Nesting depth; atoms have depth 0.
    pub fn depth(&self) -> usize {
        self.children().iter().map(|c| c.depth() + 1).max().unwrap_or(0)
    }

    /// Every node of the expression tree, pre-order.
    pub fn walk(&self, f: &mut dyn FnMut(&Concept)) {
        let mut stack = vec![self];
        while let Some(c) = stack.pop() {
            f(c);
            for ch in c.children().into_iter().rev() {
                stack.push(ch);
            }
        }
    }

    pub fn is_concrete(&self) -> bool {
        matches!(
            self,
            Concept::CAtLeast(..)
                | Concept::CAtMost(..)
                | Concept::CExists(..)
                | Concept::CForall(..)
                | Concept::CExistsInd(..)
                | Concept::CForallInd(..)
        )
    }
}

impl fmt::Display for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::kb_text::concept_to_string(self))
    }
}

impl fmt::Display for RoleExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::kb_text::role_to_string(self))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Gci {
    pub sub: Concept,
    pub sup: Concept,
}

impl Gci {
    pub fn new(sub: Concept, sup: Concept) -> Self {
        Gci { sub, sup }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AbstractRia {
    pub chain: Vec<RoleExpr>,
    pub sup: RoleExpr,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConcreteRia {
    pub sub: ConcreteRole,
    pub sup: ConcreteRole,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FxnlTarget {
    Abstract(RoleExpr),
    Concrete(ConcreteRole),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RoleAssertion {
    Ref(RoleExpr),
    Irr(RoleExpr),
    Dis(RoleExpr, RoleExpr),
    Sym(RoleExpr),
    Trans(RoleExpr),
    Fxnl(FxnlTarget),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axiom {
    Gci(Gci),
    AbstractRia(AbstractRia),
    ConcreteRia(ConcreteRia),
    RoleAssertion(RoleAssertion),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Assertion {
    Concept(String, Concept),
    Role(String, String, RoleExpr),
    NegRole(String, String, RoleExpr),
    Distinct(String, String),
    ConcreteValue(String, ConcreteRole, String),
    Constraint(String, String, String),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct RBox {
    pub abstract_rias: Vec<AbstractRia>,
    pub concrete_rias: Vec<ConcreteRia>,
    pub assertions: Vec<RoleAssertion>,
}

impl RBox {
    pub fn is_empty(&self) -> bool {
        self.abstract_rias.is_empty() && self.concrete_rias.is_empty() && self.assertions.is_empty()
    }
}

/// A minimized predicate of a circumscription pattern.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Minimized {
    Concept(Concept),
    Role(String),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct KnowledgeBase {
    pub abox: Vec<Assertion>,
    pub tbox: Vec<Gci>,
    pub rbox: RBox,
    pub minimized: Vec<Minimized>,
    /// Name of the constraint system selected by the document, if any.
    pub constraint_system: Option<String>,
}

impl KnowledgeBase {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_axiom(&mut self, ax: Axiom) {
        match ax {
            Axiom::Gci(g) => self.tbox.push(g),
            Axiom::AbstractRia(r) => self.rbox.abstract_rias.push(r),
            Axiom::ConcreteRia(r) => self.rbox.concrete_rias.push(r),
            Axiom::RoleAssertion(r) => self.rbox.assertions.push(r),
        }
    }

    pub fn axioms(&self) -> Vec<Axiom> {
        let mut out: Vec<Axiom> = self.tbox.iter().cloned().map(Axiom::Gci).collect();
        out.extend(self.rbox.abstract_rias.iter().cloned().map(Axiom::AbstractRia));
        out.extend(self.rbox.concrete_rias.iter().cloned().map(Axiom::ConcreteRia));
        out.extend(self.rbox.assertions.iter().cloned().map(Axiom::RoleAssertion));
        out
    }

    /// Every concept occurring in the A-Box, T-Box and circumscription pattern.
    pub fn concepts(&self) -> Vec<&Concept> {
        let mut out = Vec::new();
        for a in &self.abox {
            if let Assertion::Concept(_, c) = a {
                out.push(c);
            }
        }
        for g in &self.tbox {
            out.push(&g.sub);
            out.push(&g.sup);
        }
        for m in &self.minimized {
            if let Minimized::Concept(c) = m {
                out.push(c);
            }
        }
        out
    }
}

/// Inference problems that can be posed against a knowledge base.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Query {
    KbSat,
    ConceptSat(Concept),
    Subsumes(Concept, Concept),
    Instance(String, Concept),
    GcSat,
    GcInstance(String, Concept),
    GcConceptSat(Concept),
    GcSubsumes(Concept, Concept),
}

impl Query {
    pub fn is_gc(&self) -> bool {
        matches!(
            self,
            Query::GcSat | Query::GcInstance(..) | Query::GcConceptSat(_) | Query::GcSubsumes(..)
        )
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Query::KbSat => "sat",
            Query::ConceptSat(_) => "concept-sat",
            Query::Subsumes(..) => "subsumes",
            Query::Instance(..) => "instance",
            Query::GcSat => "gc-sat",
            Query::GcInstance(..) => "gc-instance",
            Query::GcConceptSat(_) => "gc-concept-sat",
            Query::GcSubsumes(..) => "gc-subsumes",
        }
    }
}

/// A parsed `.kbx` file: the knowledge base and the queries it poses.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Document {
    pub kb: KnowledgeBase,
    pub queries: Vec<Query>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SymbolKind {
    Concept,
    AbstractRole,
    ConcreteRole,
    AbstractIndividual,
    ConstraintIndividual,
}

impl fmt::Display for SymbolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SymbolKind::Concept => "concept name",
            SymbolKind::AbstractRole => "abstract role",
            SymbolKind::ConcreteRole => "concrete role",
            SymbolKind::AbstractIndividual => "abstract individual",
            SymbolKind::ConstraintIndividual => "constraint individual",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("symbol `{symbol}` is used both as {first} and as {second}")]
    VocabularyClash { symbol: String, first: SymbolKind, second: SymbolKind },
}

/// The five symbol sets of a knowledge base plus its nominals.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VocabularyReport {
    pub concepts: BTreeSet<String>,
    pub abstract_roles: BTreeSet<String>,
    pub concrete_roles: BTreeSet<String>,
    pub abstract_individuals: BTreeSet<String>,
    pub constraint_individuals: BTreeSet<String>,
    /// One nominal per named abstract individual.
    pub nominals: BTreeSet<Concept>,
}

#[derive(Default)]
struct VocabBuilder {
    seen: std::collections::BTreeMap<String, SymbolKind>,
    report: VocabularyReport,
}

impl VocabBuilder {
    fn add(&mut self, name: &str, kind: SymbolKind) -> Result<(), ModelError> {
        if let Some(&prev) = self.seen.get(name) {
            if prev != kind {
                return Err(ModelError::VocabularyClash {
                    symbol: name.to_string(),
                    first: prev,
                    second: kind,
                });
            }
            return Ok(());
        }
        self.seen.insert(name.to_string(), kind);
        let set = match kind {
            SymbolKind::Concept => &mut self.report.concepts,
            SymbolKind::AbstractRole => &mut self.report.abstract_roles,
            SymbolKind::ConcreteRole => &mut self.report.concrete_roles,
            SymbolKind::AbstractIndividual => &mut self.report.abstract_individuals,
            SymbolKind::ConstraintIndividual => &mut self.report.constraint_individuals,
        };
        set.insert(name.to_string());
        Ok(())
    }

    fn role(&mut self, r: &RoleExpr) -> Result<(), ModelError> {
        match r.name() {
            Some(n) => self.add(n, SymbolKind::AbstractRole),
            None => Ok(()),
        }
    }

    fn path(&mut self, p: &Path) -> Result<(), ModelError> {
        for r in &p.prefix {
            self.role(r)?;
        }
        self.add(&p.concrete.0, SymbolKind::ConcreteRole)
    }

    fn concept(&mut self, c: &Concept) -> Result<(), ModelError> {
        let mut result = Ok(());
        c.walk(&mut |node| {
            if result.is_err() {
                return;
            }
            result = self.concept_node(node);
        });
        result
    }

    fn concept_node(&mut self, c: &Concept) -> Result<(), ModelError> {
        match c {
            Concept::Atomic(n) => self.add(n, SymbolKind::Concept),
            Concept::Nominal(a) => self.add(a, SymbolKind::AbstractIndividual),
            Concept::Exists(r, _)
            | Concept::Forall(r, _)
            | Concept::AtLeast(_, r, _)
            | Concept::AtMost(_, r, _)
            | Concept::SelfRestriction(r) => self.role(r),
            Concept::AutomatonForall(q, _) => self.role(&q.role),
            Concept::CAtLeast(_, g) | Concept::CAtMost(_, g) => self.add(&g.0, SymbolKind::ConcreteRole),
            Concept::CExists(p, q, _) | Concept::CForall(p, q, _) => {
                self.path(p)?;
                self.path(q)
            }
            Concept::CExistsInd(p, i, _, _) | Concept::CForallInd(p, i, _, _) => {
                self.path(p)?;
                self.add(i, SymbolKind::ConstraintIndividual)
            }
            _ => Ok(()),
        }
    }
}

/// Collects the vocabulary of `kb`, checking that the five symbol categories are disjoint.
pub fn free_vocabulary(kb: &KnowledgeBase) -> Result<VocabularyReport, ModelError> {
    let mut b = VocabBuilder::default();
    for a in &kb.abox {
        match a {
            Assertion::Concept(i, c) => {
                b.add(i, SymbolKind::AbstractIndividual)?;
                b.concept(c)?;
            }
            Assertion::Role(x, y, r) | Assertion::NegRole(x, y, r) => {
                b.add(x, SymbolKind::AbstractIndividual)?;
                b.add(y, SymbolKind::AbstractIndividual)?;
                b.role(r)?;
            }
            Assertion::Distinct(x, y) => {
                b.add(x, SymbolKind::AbstractIndividual)?;
                b.add(y, SymbolKind::AbstractIndividual)?;
            }
            Assertion::ConcreteValue(x, g, i) => {
                b.add(x, SymbolKind::AbstractIndividual)?;
                b.add(&g.0, SymbolKind::ConcreteRole)?;
                b.add(i, SymbolKind::ConstraintIndividual)?;
            }
            Assertion::Constraint(i, _, j) => {
                b.add(i, SymbolKind::ConstraintIndividual)?;
                b.add(j, SymbolKind::ConstraintIndividual)?;
            }
        }
    }
    for g in &kb.tbox {
        b.concept(&g.sub)?;
        b.concept(&g.sup)?;
    }
    for r in &kb.rbox.abstract_rias {
        for s in &r.chain {
            b.role(s)?;
        }
        b.role(&r.sup)?;
    }
    for r in &kb.rbox.concrete_rias {
        b.add(&r.sub.0, SymbolKind::ConcreteRole)?;
        b.add(&r.sup.0, SymbolKind::ConcreteRole)?;
    }
    for a in &kb.rbox.assertions {
        match a {
            RoleAssertion::Ref(r) | RoleAssertion::Irr(r) | RoleAssertion::Sym(r) | RoleAssertion::Trans(r) => {
                b.role(r)?
            }
            RoleAssertion::Dis(r, s) => {
                b.role(r)?;
                b.role(s)?;
            }
            RoleAssertion::Fxnl(FxnlTarget::Abstract(r)) => b.role(r)?,
            RoleAssertion::Fxnl(FxnlTarget::Concrete(g)) => b.add(&g.0, SymbolKind::ConcreteRole)?,
        }
    }
    for m in &kb.minimized {
        match m {
            Minimized::Concept(c) => b.concept(c)?,
            Minimized::Role(r) => b.add(r, SymbolKind::AbstractRole)?,
        }
    }
    let mut report = b.report;
    report.nominals = report.abstract_individuals.iter().map(|a| Concept::Nominal(a.clone())).collect();
    Ok(report)
}

/// `sub(D)` closed under its three clauses.
pub fn subexpressions(d: &Concept) -> BTreeSet<Concept> {
    let mut out = BTreeSet::new();
    let mut stack = vec![d];
    while let Some(c) = stack.pop() {
        if out.insert(c.clone()) {
            stack.extend(c.children());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_is_involutive() {
        let r = RoleExpr::named("R");
        assert_eq!(r.inv().inv(), r);
        assert_eq!(RoleExpr::Universal.inv(), RoleExpr::Universal);
    }

    #[test]
    fn empty_kb_has_empty_vocabulary() {
        let v = free_vocabulary(&KnowledgeBase::new()).unwrap();
        assert_eq!(v, VocabularyReport::default());
    }

    #[test]
    fn vocabulary_read_off() {
        let mut kb = KnowledgeBase::new();
        kb.abox.push(Assertion::Concept("a".into(), Concept::atomic("A")));
        kb.abox.push(Assertion::ConcreteValue("a".into(), ConcreteRole::new("g"), "i".into()));
        let v = free_vocabulary(&kb).unwrap();
        assert_eq!(v.concepts, BTreeSet::from(["A".to_string()]));
        assert_eq!(v.abstract_individuals, BTreeSet::from(["a".to_string()]));
        assert_eq!(v.concrete_roles, BTreeSet::from(["g".to_string()]));
        assert_eq!(v.constraint_individuals, BTreeSet::from(["i".to_string()]));
        assert_eq!(v.nominals, BTreeSet::from([Concept::nominal("a")]));
    }

    #[test]
    fn concept_and_role_clash() {
        let mut kb = KnowledgeBase::new();
        kb.tbox.push(Gci::new(Concept::atomic("R"), Concept::exists(RoleExpr::named("R"), Concept::Top)));
        assert!(matches!(free_vocabulary(&kb), Err(ModelError::VocabularyClash { .. })));
    }

    #[test]
    fn subexpressions_clauses() {
        let a = Concept::atomic("A");
        let b = Concept::atomic("B");
        assert_eq!(subexpressions(&a), BTreeSet::from([a.clone()]));
        let ab = Concept::and(a.clone(), b.clone());
        assert_eq!(subexpressions(&ab), BTreeSet::from([ab.clone(), a.clone(), b.clone()]));
        let or = Concept::or(a.clone(), b.clone());
        let ex = Concept::exists(RoleExpr::named("R"), or.clone());
        assert_eq!(subexpressions(&ex), BTreeSet::from([ex.clone(), or, a, b]));
    }
}
