//! Reductions that turn a knowledge base into the form the tableau consumes:
//! universal-role elimination, A-Box and role-assertion rewriting, regularity
//! analysis, negation normal form, automata and the closure.

mod automata;
mod closure;
mod nnf;
mod roles;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use thiserror::Error;

use crate::constraint::ConstraintSystemDef;
use crate::kb_model::*;
use crate::kb_text::{concept_to_string, path_to_string, print_kb, role_to_string};

pub use automata::{compile_automata, RoleAutomaton};
pub use closure::compute_clos;
pub use nnf::{is_nnf, negate, nnf};
pub use roles::{analyze_roles, RoleAnalysis};

/// Name of the transitive, symmetric, reflexive stand-in for the universal role.
pub const UNIVERSAL_STAND_IN: &str = "%universal";

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PreprocessError {
    #[error(transparent)]
    Vocabulary(#[from] ModelError),
    #[error("role hierarchy is not regular: {}", cycle.join(" < "))]
    NotRegular { cycle: Vec<String> },
    #[error("invalid path {path}: {reason}")]
    PathViolation { path: String, reason: String },
    #[error("role {role} must be simple in {context}")]
    NonSimpleRole { role: String, context: String },
    #[error("relation `{relation}` is not a base relation of constraint system `{system}`")]
    UnknownRelation { relation: String, system: String },
    #[error("the universal role cannot occur in {0}")]
    UniversalRoleMisuse(String),
    #[error("cardinality {value} exceeds the limit {limit}")]
    CardinalityTooLarge { value: u32, limit: u32 },
}

#[derive(Clone, Debug)]
pub struct PreprocessOptions {
    pub max_cardinality: u32,
}

impl Default for PreprocessOptions {
    fn default() -> Self {
        PreprocessOptions { max_cardinality: DEFAULT_MAX_CARDINALITY }
    }
}

/// The knowledge base after every reduction, ready for the tableau.
#[derive(Clone, Debug)]
pub struct ReducedKb {
    /// GCIs after A-Box and role-assertion rewriting, before NNF.
    pub gcis: Vec<Gci>,
    /// `nnf(¬C ⊔ D)` for every GCI, in the same order.
    pub internalized: Vec<Concept>,
    /// Concrete-value, constraint and distinctness assertions.
    pub residual_abox: Vec<Assertion>,
    /// Disjointness and irreflexivity assertions.
    pub residual_role_assertions: Vec<RoleAssertion>,
    pub rbox: RBox,
    pub roles: RoleAnalysis,
    /// `B_R` for every role expression.
    pub automata: BTreeMap<RoleExpr, RoleAutomaton>,
    pub clos: BTreeSet<Concept>,
    pub system: ConstraintSystemDef,
    pub individuals: BTreeSet<String>,
    pub constraint_individuals: BTreeSet<String>,
    pub concrete_roles: BTreeSet<String>,
}

impl ReducedKb {
    pub fn automaton(&self, r: &RoleExpr) -> RoleAutomaton {
        self.automata.get(r).cloned().unwrap_or_else(|| RoleAutomaton::single(r))
    }
}

fn map_role(r: &RoleExpr, f: &dyn Fn(&RoleExpr) -> RoleExpr) -> RoleExpr {
    f(r)
}

fn map_path(p: &Path, f: &dyn Fn(&RoleExpr) -> RoleExpr) -> Path {
    Path { prefix: p.prefix.iter().map(f).collect(), concrete: p.concrete.clone() }
}

/// Applies `f` to every role expression inside `c`.
pub fn map_concept_roles(c: &Concept, f: &dyn Fn(&RoleExpr) -> RoleExpr) -> Concept {
    let m = |x: &Concept| map_concept_roles(x, f);
    match c {
        Concept::And(a, b) => Concept::and(m(a), m(b)),
        Concept::Or(a, b) => Concept::or(m(a), m(b)),
        Concept::Not(a) => Concept::not(m(a)),
        Concept::Exists(r, a) => Concept::exists(map_role(r, f), m(a)),
        Concept::Forall(r, a) => Concept::forall(map_role(r, f), m(a)),
        Concept::AtLeast(n, r, a) => Concept::at_least(*n, map_role(r, f), m(a)),
        Concept::AtMost(n, r, a) => Concept::at_most(*n, map_role(r, f), m(a)),
        Concept::SelfRestriction(r) => Concept::SelfRestriction(map_role(r, f)),
        Concept::CExists(p, q, r) => Concept::CExists(map_path(p, f), map_path(q, f), r.clone()),
        Concept::CForall(p, q, r) => Concept::CForall(map_path(p, f), map_path(q, f), r.clone()),
        Concept::CExistsInd(p, i, s, r) => Concept::CExistsInd(map_path(p, f), i.clone(), *s, r.clone()),
        Concept::CForallInd(p, i, s, r) => Concept::CForallInd(map_path(p, f), i.clone(), *s, r.clone()),
        Concept::AutomatonForall(q, a) => Concept::AutomatonForall(q.clone(), Box::new(m(a))),
        other => other.clone(),
    }
}

fn uses_universal(kb: &KnowledgeBase) -> bool {
    let mut found = false;
    let mut check = |c: &Concept| {
        c.walk(&mut |x| {
            let hit = match x {
                Concept::Exists(r, _) | Concept::Forall(r, _) | Concept::AtLeast(_, r, _) | Concept::AtMost(_, r, _) => {
                    r.is_universal()
                }
                Concept::SelfRestriction(r) => r.is_universal(),
                Concept::CExists(p, q, _) | Concept::CForall(p, q, _) => {
                    p.prefix.iter().chain(&q.prefix).any(RoleExpr::is_universal)
                }
                Concept::CExistsInd(p, ..) | Concept::CForallInd(p, ..) => p.prefix.iter().any(RoleExpr::is_universal),
                _ => false,
            };
            found |= hit;
        })
    };
    for c in kb.concepts() {
        check(c);
    }
    found
}

/// Replaces the universal role by a reflexive, symmetric, transitive super-role
/// of every role and links all named individuals through it, so that its
/// extension coincides with the universal relation on the relevant component.
pub fn eliminate_universal_role(kb: &KnowledgeBase) -> Result<KnowledgeBase, PreprocessError> {
    for a in &kb.abox {
        if let Assertion::Role(_, _, r) | Assertion::NegRole(_, _, r) = a {
            if r.is_universal() {
                return Err(PreprocessError::UniversalRoleMisuse("a role assertion".into()));
            }
        }
    }
    for a in &kb.rbox.assertions {
        let hit = match a {
            RoleAssertion::Ref(r) | RoleAssertion::Irr(r) | RoleAssertion::Sym(r) | RoleAssertion::Trans(r) => {
                r.is_universal()
            }
            RoleAssertion::Dis(r, s) => r.is_universal() || s.is_universal(),
            RoleAssertion::Fxnl(FxnlTarget::Abstract(r)) => r.is_universal(),
            RoleAssertion::Fxnl(FxnlTarget::Concrete(_)) => false,
        };
        if hit {
            return Err(PreprocessError::UniversalRoleMisuse("a role assertion".into()));
        }
    }
    if !uses_universal(kb) {
        return Ok(kb.clone());
    }
    let u = RoleExpr::named(UNIVERSAL_STAND_IN);
    let swap = |r: &RoleExpr| if r.is_universal() { u.clone() } else { r.clone() };
    let mut out = kb.clone();
    for a in &mut out.abox {
        if let Assertion::Concept(_, c) = a {
            *c = map_concept_roles(c, &swap);
        }
    }
    for g in &mut out.tbox {
        g.sub = map_concept_roles(&g.sub, &swap);
        g.sup = map_concept_roles(&g.sup, &swap);
    }
    for m in &mut out.minimized {
        if let Minimized::Concept(c) = m {
            *c = map_concept_roles(c, &swap);
        }
    }
    let vocab = free_vocabulary(&out)?;
    for r in &vocab.abstract_roles {
        if r != UNIVERSAL_STAND_IN {
            out.rbox.abstract_rias.push(AbstractRia { chain: vec![RoleExpr::named(r.as_str())], sup: u.clone() });
        }
    }
    out.rbox.assertions.push(RoleAssertion::Trans(u.clone()));
    out.rbox.assertions.push(RoleAssertion::Sym(u.clone()));
    out.rbox.assertions.push(RoleAssertion::Ref(u.clone()));
    let inds: Vec<&String> = vocab.abstract_individuals.iter().collect();
    if let Some((first, rest)) = inds.split_first() {
        for b in rest {
            out.abox.push(Assertion::Role((*first).clone(), (*b).clone(), u.clone()));
        }
    }
    Ok(out)
}

/// Turns concept, role, negated-role and distinctness assertions into
/// nominal GCIs. Concrete values and constraints stay in the A-Box, and
/// distinctness facts are kept alongside their GCI.
pub fn reduce_abox(kb: &KnowledgeBase) -> KnowledgeBase {
    let mut out = kb.clone();
    out.abox.clear();
    for a in &kb.abox {
        match a {
            Assertion::Concept(x, c) => out.tbox.push(Gci::new(Concept::nominal(x.as_str()), c.clone())),
            Assertion::Role(x, y, r) => {
                out.tbox.push(Gci::new(Concept::nominal(x.as_str()), Concept::exists(r.clone(), Concept::nominal(y.as_str()))))
            }
            Assertion::NegRole(x, y, r) => out.tbox.push(Gci::new(
                Concept::nominal(x.as_str()),
                Concept::forall(r.clone(), Concept::not(Concept::nominal(y.as_str()))),
            )),
            Assertion::Distinct(x, y) => {
                out.tbox.push(Gci::new(Concept::nominal(x.as_str()), Concept::not(Concept::nominal(y.as_str()))));
                out.abox.push(a.clone());
            }
            Assertion::ConcreteValue(..) | Assertion::Constraint(..) => out.abox.push(a.clone()),
        }
    }
    out
}

/// Rewrites reflexivity and functionality into GCIs and symmetry and
/// transitivity into role inclusions. Disjointness and irreflexivity remain.
pub fn rewrite_role_assertions(kb: &KnowledgeBase) -> KnowledgeBase {
    let mut out = kb.clone();
    out.rbox.assertions.clear();
    for a in &kb.rbox.assertions {
        match a {
            RoleAssertion::Ref(r) => out.tbox.push(Gci::new(Concept::Top, Concept::SelfRestriction(r.clone()))),
            RoleAssertion::Fxnl(FxnlTarget::Abstract(r)) => {
                out.tbox.push(Gci::new(Concept::Top, Concept::at_most(1, r.clone(), Concept::Top)))
            }
            RoleAssertion::Fxnl(FxnlTarget::Concrete(g)) => out.tbox.push(Gci::new(Concept::Top, Concept::CAtMost(1, g.clone()))),
            RoleAssertion::Sym(r) => out.rbox.abstract_rias.push(AbstractRia { chain: vec![r.inv()], sup: r.clone() }),
            RoleAssertion::Trans(r) => {
                out.rbox.abstract_rias.push(AbstractRia { chain: vec![r.clone(), r.clone()], sup: r.clone() })
            }
            RoleAssertion::Dis(..) | RoleAssertion::Irr(_) => out.rbox.assertions.push(a.clone()),
        }
    }
    out
}

struct UsageCheck<'a> {
    roles: &'a RoleAnalysis,
    sys: &'a ConstraintSystemDef,
    max_cardinality: u32,
}

impl UsageCheck<'_> {
    fn simple(&self, r: &RoleExpr, context: &str) -> Result<(), PreprocessError> {
        if r.name() == Some(UNIVERSAL_STAND_IN) || r.is_universal() {
            return Err(PreprocessError::UniversalRoleMisuse(context.to_string()));
        }
        if self.roles.is_simple(r) {
            Ok(())
        } else {
            Err(PreprocessError::NonSimpleRole { role: role_to_string(r), context: context.to_string() })
        }
    }

    fn relation(&self, r: &str) -> Result<(), PreprocessError> {
        match self.sys.index_of(r) {
            Some(_) => Ok(()),
            None => Err(PreprocessError::UnknownRelation { relation: r.to_string(), system: self.sys.name().to_string() }),
        }
    }

    fn cardinality(&self, n: u32) -> Result<(), PreprocessError> {
        if n > self.max_cardinality {
            Err(PreprocessError::CardinalityTooLarge { value: n, limit: self.max_cardinality })
        } else {
            Ok(())
        }
    }

    fn path(&self, p: &Path) -> Result<(), PreprocessError> {
        if p.prefix.len() > 1 {
            return Err(PreprocessError::PathViolation {
                path: path_to_string(p),
                reason: "paths have at most one abstract role".into(),
            });
        }
        for r in &p.prefix {
            self.simple(r, &format!("path {}", path_to_string(p)))?;
        }
        Ok(())
    }

    fn concept(&self, c: &Concept) -> Result<(), PreprocessError> {
        let mut result = Ok(());
        c.walk(&mut |x| {
            if result.is_err() {
                return;
            }
            let context = || concept_to_string(x);
            result = match x {
                Concept::AtLeast(n, r, _) | Concept::AtMost(n, r, _) => {
                    self.cardinality(*n).and_then(|_| self.simple(r, &context()))
                }
                Concept::CAtLeast(n, _) | Concept::CAtMost(n, _) => self.cardinality(*n),
                Concept::SelfRestriction(r) => self.simple(r, &context()),
                Concept::CExists(p, q, r) | Concept::CForall(p, q, r) => {
                    if p.len() > 1 && q.len() > 1 {
                        Err(PreprocessError::PathViolation {
                            path: format!("{} {}", path_to_string(p), path_to_string(q)),
                            reason: "at most one of the two paths may go through an abstract role".into(),
                        })
                    } else {
                        self.path(p).and_then(|_| self.path(q)).and_then(|_| self.relation(r))
                    }
                }
                Concept::CExistsInd(p, _, _, r) | Concept::CForallInd(p, _, _, r) => {
                    self.path(p).and_then(|_| self.relation(r))
                }
                Concept::AutomatonForall(..) => Err(PreprocessError::PathViolation {
                    path: context(),
                    reason: "automaton universals are internal".into(),
                }),
                _ => Ok(()),
            };
        });
        result
    }
}

/// Runs the whole reduction pipeline.
pub fn preprocess(kb: &KnowledgeBase, sys: &ConstraintSystemDef) -> Result<ReducedKb, PreprocessError> {
    preprocess_with(kb, sys, &PreprocessOptions::default())
}

pub fn preprocess_with(
    kb: &KnowledgeBase,
    sys: &ConstraintSystemDef,
    opts: &PreprocessOptions,
) -> Result<ReducedKb, PreprocessError> {
    free_vocabulary(kb)?;
    let step1 = eliminate_universal_role(kb)?;
    let step2 = reduce_abox(&step1);
    let step3 = rewrite_role_assertions(&step2);
    let roles = analyze_roles(&step3)?;

    let check = UsageCheck { roles: &roles, sys, max_cardinality: opts.max_cardinality };
    // Usage is checked before role assertions become GCIs: reflexivity is
    // allowed on non-simple roles even though `∃R.Self` is not.
    for g in &step2.tbox {
        check.concept(&g.sub)?;
        check.concept(&g.sup)?;
    }
    for m in &step2.minimized {
        if let Minimized::Concept(c) = m {
            check.concept(c)?;
        }
    }
    for a in &step2.abox {
        if let Assertion::Constraint(_, r, _) = a {
            check.relation(r)?;
        }
    }
    for a in &step2.rbox.assertions {
        match a {
            RoleAssertion::Irr(r) => check.simple(r, "an irreflexivity assertion")?,
            RoleAssertion::Dis(r, s) => {
                check.simple(r, "a disjointness assertion")?;
                check.simple(s, "a disjointness assertion")?;
            }
            RoleAssertion::Fxnl(FxnlTarget::Abstract(r)) => check.simple(r, "a functionality assertion")?,
            _ => {}
        }
    }

    let relations = sys.relations();
    let internalized: Vec<Concept> =
        step3.tbox.iter().map(|g| nnf(&Concept::or(Concept::not(g.sub.clone()), g.sup.clone()), relations)).collect();
    let automata = compile_automata(&roles);
    let clos = compute_clos(&internalized, &automata, relations);
    let vocab = free_vocabulary(&step3)?;

    let residual_abox = step3.abox.clone();
    let residual_role_assertions = step3.rbox.assertions.clone();
    let mut rbox = step3.rbox.clone();
    rbox.assertions.clear();
    Ok(ReducedKb {
        gcis: step3.tbox.clone(),
        internalized,
        residual_abox,
        residual_role_assertions,
        rbox,
        roles,
        automata,
        clos,
        system: sys.clone(),
        individuals: vocab.abstract_individuals,
        constraint_individuals: vocab.constraint_individuals,
        concrete_roles: vocab.concrete_roles,
    })
}

/// Human-readable dump of a reduced knowledge base: the rewritten axioms in
/// canonical syntax followed by the internalized concepts and the automata of
/// non-simple roles as comments.
pub fn print_reduced(r: &ReducedKb) -> String {
    let mut kb = KnowledgeBase::new();
    kb.constraint_system = Some(r.system.name().to_string());
    kb.abox = r.residual_abox.clone();
    kb.tbox = r.gcis.clone();
    kb.rbox = r.rbox.clone();
    kb.rbox.assertions = r.residual_role_assertions.clone();
    let mut out = print_kb(&kb);
    out.push_str("; internalized\n");
    let mut lines: Vec<String> = r.internalized.iter().map(concept_to_string).collect();
    lines.sort();
    lines.dedup();
    for l in lines {
        let _ = writeln!(out, ";   {l}");
    }
    for name in r.roles.role_names() {
        let role = RoleExpr::named(name.as_str());
        if r.roles.is_simple(&role) {
            continue;
        }
        let a = r.automaton(&role);
        let _ = writeln!(
            out,
            "; automaton {name}: {} states, initial {}, final {}",
            a.state_count(),
            a.initial(),
            a.final_state()
        );
        for (p, l, q) in a.transitions() {
            let label = l.as_ref().map(role_to_string).unwrap_or_else(|| "eps".into());
            let _ = writeln!(out, ";   {p} {label} {q}");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb_text::parse_kb;

    fn pre(text: &str) -> Result<ReducedKb, PreprocessError> {
        preprocess(&parse_kb(text).unwrap(), &ConstraintSystemDef::allen())
    }

    #[test]
    fn abox_becomes_nominal_gcis() {
        let r = pre("(abox (instance a A) (related a b R) (not-related a c R) (distinct a b) (cvalue a g i))").unwrap();
        assert_eq!(r.gcis.len(), 4);
        assert!(r.gcis.iter().all(|g| matches!(g.sub, Concept::Nominal(_))));
        assert_eq!(r.residual_abox.len(), 2);
        assert!(r.internalized.iter().all(is_nnf));
    }

    #[test]
    fn role_assertions_rewritten() {
        let r = pre("(rbox (ref R) (fxnl S) (sym T) (trans T) (irr S) (dis S Q))").unwrap();
        assert_eq!(r.residual_role_assertions.len(), 2);
        assert_eq!(r.rbox.abstract_rias.len(), 2);
        assert!(!r.roles.is_simple(&RoleExpr::named("T")));
    }

    #[test]
    fn number_restriction_needs_simple_role() {
        let e = pre("(rbox (trans R)) (tbox (implies A (atmost 1 R B)))").unwrap_err();
        assert!(matches!(e, PreprocessError::NonSimpleRole { .. }));
    }

    #[test]
    fn unknown_relation() {
        let e = pre("(tbox (implies A (csome (path g) (path h) sideways)))").unwrap_err();
        assert!(matches!(e, PreprocessError::UnknownRelation { .. }));
    }

    #[test]
    fn universal_role_stand_in() {
        let r = pre("(abox (instance a A) (instance b B)) (tbox (implies A (all universal (not B))))").unwrap();
        let u = RoleExpr::named(UNIVERSAL_STAND_IN);
        assert!(!r.roles.is_simple(&u));
        assert!(r.gcis.iter().any(|g| g.sup == Concept::exists(u.clone(), Concept::nominal("b"))));
        assert!(pre("(tbox (implies A (atleast 2 universal B)))").is_err());
    }

    #[test]
    fn dump_mentions_automata() {
        let r = pre("(rbox (trans R)) (tbox (implies A (all R B)))").unwrap();
        let text = print_reduced(&r);
        assert!(text.contains("; automaton R"));
        assert!(text.contains("; internalized"));
    }
}
