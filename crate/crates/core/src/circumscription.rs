//! Grounded circumscription: minimized predicates may only hold for named
//! individuals, and a model is kept only if no grounded model has strictly
//! smaller extensions.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::constraint::ConstraintSystemDef;
use crate::kb_model::{free_vocabulary, Assertion, Concept, Gci, KnowledgeBase, Minimized, RoleExpr};
use crate::kb_text::concept_to_string;
use crate::preprocess::{preprocess, PreprocessError, ReducedKb};
use crate::tableau::{run_with, ExtractedModel, ResourceLimits, RunOptions, Stats, Verdict};

/// Individual standing for "some element" in concept queries. It is not part
/// of the grounding set and carries no distinctness assertions.
pub const PROBE_INDIVIDUAL: &str = "%probe";

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CircumscriptionError {
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
    #[error("minimized predicate {0} holds at an unnamed element")]
    NotGrounded(String),
    #[error("resource limit exceeded: {0}")]
    ResourceLimitExceeded(String),
}

/// Extensions of the minimized predicates over named individuals.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroundedExtension {
    /// Keyed by the printed minimized concept.
    pub concepts: BTreeMap<String, BTreeSet<String>>,
    pub roles: BTreeMap<String, BTreeSet<(String, String)>>,
}

impl GroundedExtension {
    pub fn domain(&self, role: &str) -> BTreeSet<String> {
        self.roles.get(role).map(|p| p.iter().map(|(a, _)| a.clone()).collect()).unwrap_or_default()
    }

    pub fn range(&self, role: &str) -> BTreeSet<String> {
        self.roles.get(role).map(|p| p.iter().map(|(_, b)| b.clone()).collect()).unwrap_or_default()
    }

    /// `R^{ext,range,p}`: the successors of `p`.
    pub fn range_from(&self, role: &str, p: &str) -> BTreeSet<String> {
        self.roles
            .get(role)
            .map(|ps| ps.iter().filter(|(a, _)| a == p).map(|(_, b)| b.clone()).collect())
            .unwrap_or_default()
    }

    /// Componentwise inclusion.
    pub fn is_subset(&self, other: &GroundedExtension) -> bool {
        self.concepts.iter().all(|(k, v)| other.concepts.get(k).is_some_and(|w| v.is_subset(w)))
            && self.roles.iter().all(|(k, v)| other.roles.get(k).is_some_and(|w| v.is_subset(w)))
    }

    pub fn is_strict_subset(&self, other: &GroundedExtension) -> bool {
        self != other && self.is_subset(other)
    }

    pub fn size(&self) -> usize {
        self.concepts.values().map(BTreeSet::len).sum::<usize>() + self.roles.values().map(BTreeSet::len).sum::<usize>()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum GcVerdict {
    Satisfiable { extension: GroundedExtension, model: Box<ExtractedModel>, iterations: usize },
    Unsatisfiable,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GcOutcome<T> {
    pub value: T,
    pub stats: Stats,
}

/// A knowledge base prepared for grounded circumscription.
#[derive(Clone, Debug)]
pub struct GroundedKb {
    /// Input axioms, distinctness of named individuals and definitions of
    /// fresh atoms for non-atomic minimized concepts.
    pub base: KnowledgeBase,
    pub individuals: Vec<String>,
    /// Printed minimized concept and the atom standing for it.
    pub concepts: Vec<(String, String)>,
    pub roles: Vec<String>,
    pub system: ConstraintSystemDef,
}

fn nominal_disjunction<'a>(names: impl IntoIterator<Item = &'a String>) -> Concept {
    Concept::or_all(names.into_iter().map(|a| Concept::nominal(a.as_str())))
}

fn top_exists(r: RoleExpr) -> Concept {
    Concept::exists(r, Concept::Top)
}

impl GroundedKb {
    pub fn new(kb: &KnowledgeBase, system: &ConstraintSystemDef) -> Result<Self, CircumscriptionError> {
        let vocab = free_vocabulary(kb).map_err(PreprocessError::from)?;
        let individuals: Vec<String> = vocab.abstract_individuals.iter().cloned().collect();
        let mut base = kb.clone();
        base.minimized.clear();
        for (i, a) in individuals.iter().enumerate() {
            for b in &individuals[i + 1..] {
                base.abox.push(Assertion::Distinct(a.clone(), b.clone()));
            }
        }
        let mut concepts = Vec::new();
        let mut roles = Vec::new();
        for m in &kb.minimized {
            match m {
                Minimized::Concept(Concept::Atomic(a)) => concepts.push((a.clone(), a.clone())),
                Minimized::Concept(c) => {
                    let atom = format!("%min{}", concepts.len());
                    let a = Concept::atomic(atom.as_str());
                    base.tbox.push(Gci::new(a.clone(), c.clone()));
                    base.tbox.push(Gci::new(c.clone(), a));
                    concepts.push((concept_to_string(c), atom));
                }
                Minimized::Role(r) => roles.push(r.clone()),
            }
        }
        Ok(GroundedKb { base, individuals, concepts, roles, system: system.clone() })
    }

    /// Base axioms plus the grounding axioms.
    pub fn grounded(&self) -> KnowledgeBase {
        let mut kb = self.base.clone();
        let nom = nominal_disjunction(&self.individuals);
        for (_, atom) in &self.concepts {
            kb.tbox.push(Gci::new(Concept::atomic(atom.as_str()), nom.clone()));
        }
        for r in &self.roles {
            kb.tbox.push(Gci::new(top_exists(RoleExpr::named(r.as_str())), nom.clone()));
            kb.tbox.push(Gci::new(top_exists(RoleExpr::inverse_of(r.as_str())), nom.clone()));
        }
        kb
    }

    /// Grounded KB bounded from above by `ext`.
    pub fn bounded(&self, ext: &GroundedExtension) -> KnowledgeBase {
        let mut kb = self.grounded();
        for (key, atom) in &self.concepts {
            let allowed = ext.concepts.get(key).cloned().unwrap_or_default();
            kb.tbox.push(Gci::new(Concept::atomic(atom.as_str()), nominal_disjunction(&allowed)));
        }
        for r in &self.roles {
            let range = ext.range(r);
            let domain = ext.domain(r);
            kb.tbox.push(Gci::new(top_exists(RoleExpr::inverse_of(r.as_str())), nominal_disjunction(&range)));
            kb.tbox.push(Gci::new(top_exists(RoleExpr::named(r.as_str())), nominal_disjunction(&domain)));
            for p in &domain {
                kb.tbox.push(Gci::new(
                    Concept::exists(RoleExpr::inverse_of(r.as_str()), Concept::nominal(p.as_str())),
                    nominal_disjunction(&ext.range_from(r, p)),
                ));
            }
        }
        kb
    }

    fn reduce(&self, kb: &KnowledgeBase) -> Result<ReducedKb, CircumscriptionError> {
        Ok(preprocess(kb, &self.system)?)
    }

    /// Reads the minimized extensions off a model of the grounded KB.
    pub fn extract_extension(&self, m: &ExtractedModel, rkb: &ReducedKb) -> Result<GroundedExtension, CircumscriptionError> {
        let named = |id: u32| -> Vec<String> {
            m.node(id)
                .map(|n| n.nominals.iter().filter(|o| self.individuals.contains(o)).cloned().collect())
                .unwrap_or_default()
        };
        let mut ext = GroundedExtension::default();
        for (key, atom) in &self.concepts {
            let a = Concept::atomic(atom.as_str());
            let mut set = BTreeSet::new();
            for n in m.nodes.iter().filter(|n| n.label.contains(&a)) {
                let names = named(n.id);
                if names.is_empty() {
                    return Err(CircumscriptionError::NotGrounded(key.clone()));
                }
                set.extend(names);
            }
            ext.concepts.insert(key.clone(), set);
        }
        if !self.roles.is_empty() {
            let pairs = m.role_pairs(&rkb.roles);
            for r in &self.roles {
                let mut set = BTreeSet::new();
                for &(x, y) in pairs.get(r).into_iter().flatten() {
                    let (xs, ys) = (named(x), named(y));
                    if xs.is_empty() || ys.is_empty() {
                        return Err(CircumscriptionError::NotGrounded(r.clone()));
                    }
                    for a in &xs {
                        for b in &ys {
                            set.insert((a.clone(), b.clone()));
                        }
                    }
                }
                ext.roles.insert(r.clone(), set);
            }
        }
        Ok(ext)
    }

    /// Runs the tableau on `kb`, accepting only complete systems whose
    /// extension passes `keep`.
    fn search(
        &self,
        kb: &KnowledgeBase,
        limits: ResourceLimits,
        stats: &mut Stats,
        keep: &dyn Fn(&GroundedExtension) -> bool,
    ) -> Result<Option<(GroundedExtension, ExtractedModel)>, CircumscriptionError> {
        let rkb = self.reduce(kb)?;
        let failure: RefCell<Option<CircumscriptionError>> = RefCell::new(None);
        let found: RefCell<Option<GroundedExtension>> = RefCell::new(None);
        let accept = |m: &ExtractedModel| match self.extract_extension(m, &rkb) {
            Ok(e) if keep(&e) => {
                *found.borrow_mut() = Some(e);
                true
            }
            Ok(_) => false,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                false
            }
        };
        let out = run_with(&rkb, RunOptions { limits, trace: false, accept: Some(&accept) });
        stats.nodes = stats.nodes.max(out.stats.nodes);
        stats.rule_applications += out.stats.rule_applications;
        stats.branches += out.stats.branches;
        stats.millis += out.stats.millis;
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        match out.verdict {
            Verdict::Satisfiable(m) => Ok(Some((found.into_inner().expect("accepted model has an extension"), *m))),
            Verdict::Unsatisfiable => Ok(None),
            Verdict::ResourceLimitExceeded(why) => Err(CircumscriptionError::ResourceLimitExceeded(why)),
        }
    }

    /// A grounded model of the KB, if any.
    pub fn init_tab(
        &self,
        limits: ResourceLimits,
        stats: &mut Stats,
    ) -> Result<Option<(GroundedExtension, ExtractedModel)>, CircumscriptionError> {
        self.search(&self.grounded(), limits, stats, &|_| true)
    }

    /// A grounded model whose extension is strictly below `ext`, if any.
    pub fn min_tab(
        &self,
        ext: &GroundedExtension,
        limits: ResourceLimits,
        stats: &mut Stats,
    ) -> Result<Option<(GroundedExtension, ExtractedModel)>, CircumscriptionError> {
        self.search(&self.bounded(ext), limits, stats, &|e| e != ext)
    }

    /// Finds a GC-model by repeated minimization.
    pub fn model_finder(&self, limits: ResourceLimits) -> Result<GcOutcome<GcVerdict>, CircumscriptionError> {
        let mut stats = Stats::default();
        let Some((mut extension, mut model)) = self.init_tab(limits, &mut stats)? else {
            return Ok(GcOutcome { value: GcVerdict::Unsatisfiable, stats });
        };
        let mut iterations = 0;
        while let Some((e, m)) = self.min_tab(&extension, limits, &mut stats)? {
            debug_assert!(e.is_strict_subset(&extension));
            extension = e;
            model = m;
            iterations += 1;
        }
        Ok(GcOutcome { value: GcVerdict::Satisfiable { extension, model: Box::new(model), iterations }, stats })
    }

    /// Whether some GC-model of the KB also satisfies `extra`.
    fn gc_model_with(
        &self,
        extra: &[Assertion],
        limits: ResourceLimits,
    ) -> Result<GcOutcome<Option<GroundedExtension>>, CircumscriptionError> {
        let mut stats = Stats::default();
        let mut kb = self.grounded();
        kb.abox.extend(extra.iter().cloned());
        // Extensions known to be non-minimal: every strict superset of these.
        let mut below: Vec<GroundedExtension> = Vec::new();
        loop {
            let snapshot = below.clone();
            let keep = move |e: &GroundedExtension| !snapshot.iter().any(|g| g.is_strict_subset(e));
            let Some((candidate, _)) = self.search(&kb, limits, &mut stats, &keep)? else {
                return Ok(GcOutcome { value: None, stats });
            };
            match self.min_tab(&candidate, limits, &mut stats)? {
                None => return Ok(GcOutcome { value: Some(candidate), stats }),
                Some((smaller, _)) => below.push(smaller),
            }
        }
    }

    /// `C(a)` holds in every GC-model.
    pub fn entails_instance(
        &self,
        a: &str,
        c: &Concept,
        limits: ResourceLimits,
    ) -> Result<GcOutcome<bool>, CircumscriptionError> {
        let out = self.gc_model_with(&[Assertion::Concept(a.to_string(), Concept::not(c.clone()))], limits)?;
        Ok(GcOutcome { value: out.value.is_none(), stats: out.stats })
    }

    /// Some GC-model gives `c` a nonempty extension.
    pub fn concept_satisfiable(&self, c: &Concept, limits: ResourceLimits) -> Result<GcOutcome<bool>, CircumscriptionError> {
        let out = self.gc_model_with(&[Assertion::Concept(PROBE_INDIVIDUAL.to_string(), c.clone())], limits)?;
        Ok(GcOutcome { value: out.value.is_some(), stats: out.stats })
    }

    /// `c ⊑ d` in every GC-model.
    pub fn subsumes(&self, c: &Concept, d: &Concept, limits: ResourceLimits) -> Result<GcOutcome<bool>, CircumscriptionError> {
        let probe = Concept::and(c.clone(), Concept::not(d.clone()));
        let out = self.concept_satisfiable(&probe, limits)?;
        Ok(GcOutcome { value: !out.value, stats: out.stats })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb_text::{parse_concept, parse_kb};

    fn gkb(text: &str) -> GroundedKb {
        GroundedKb::new(&parse_kb(text).unwrap(), &ConstraintSystemDef::point()).unwrap()
    }

    fn final_extension(text: &str) -> Option<GroundedExtension> {
        match gkb(text).model_finder(ResourceLimits::default()).unwrap().value {
            GcVerdict::Satisfiable { extension, .. } => Some(extension),
            GcVerdict::Unsatisfiable => None,
        }
    }

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn unconstrained_predicate_is_empty() {
        let e = final_extension("(abox (instance a A)) (minimize B)").unwrap();
        assert_eq!(e.concepts["B"], set(&[]));
    }

    #[test]
    fn disjunction_is_minimized_away() {
        let e = final_extension("(abox (instance a (or A B))) (minimize A)").unwrap();
        assert_eq!(e.concepts["A"], set(&[]));
    }

    #[test]
    fn inconsistent_kb_has_no_gc_model() {
        assert!(final_extension("(abox (instance a A)) (tbox (implies A bottom)) (minimize A)").is_none());
    }

    #[test]
    fn minimized_role_is_grounded() {
        let e = final_extension("(abox (instance a A)) (tbox (implies A (some R A))) (minimize-role R)").unwrap();
        assert_eq!(e.roles["R"], [("a".to_string(), "a".to_string())].into_iter().collect());
    }

    #[test]
    fn entailment_follows_the_minimal_branch() {
        let g = gkb("(abox (instance a (or A B))) (tbox (implies B C)) (minimize A)");
        let c = parse_concept("C").unwrap();
        assert!(g.entails_instance("a", &c, ResourceLimits::default()).unwrap().value);
        let g = gkb("(abox (instance a (or A B))) (tbox (implies B C))");
        assert!(!g.entails_instance("a", &c, ResourceLimits::default()).unwrap().value);
    }

    #[test]
    fn minimized_concept_is_not_satisfiable_when_unforced() {
        let g = gkb("(abox (instance a A)) (minimize B)");
        let b = parse_concept("B").unwrap();
        assert!(!g.concept_satisfiable(&b, ResourceLimits::default()).unwrap().value);
        let a = parse_concept("A").unwrap();
        assert!(g.concept_satisfiable(&a, ResourceLimits::default()).unwrap().value);
    }

    #[test]
    fn extension_derived_sets() {
        let mut e = GroundedExtension::default();
        e.roles.insert("R".into(), [("a".into(), "b".into())].into_iter().collect());
        assert_eq!(e.domain("R"), set(&["a"]));
        assert_eq!(e.range("R"), set(&["b"]));
        assert_eq!(e.range_from("R", "a"), set(&["b"]));
        assert!(e.range_from("R", "b").is_empty());
    }
}
