use std::collections::{BTreeMap, BTreeSet};

use crate::kb_model::{subexpressions, AutomatonState, Concept, RoleExpr};

use super::automata::RoleAutomaton;
use super::nnf::negate;

/// `clos(K)`: sub-expressions of the internalized axioms and their NNF
/// complements, plus the automaton-annotated universals for every `∀S.D`.
pub fn compute_clos(
    internalized: &[Concept],
    automata: &BTreeMap<RoleExpr, RoleAutomaton>,
    relations: &[String],
) -> BTreeSet<Concept> {
    let mut out = BTreeSet::new();
    for c in internalized {
        out.extend(subexpressions(c));
    }
    let complements: Vec<Concept> = out.iter().map(|c| negate(c, relations)).collect();
    for c in complements {
        out.extend(subexpressions(&c));
    }
    let foralls: Vec<(RoleExpr, Concept)> = out
        .iter()
        .filter_map(|c| match c {
            Concept::Forall(r, d) => Some((r.clone(), (**d).clone())),
            _ => None,
        })
        .collect();
    for (r, d) in foralls {
        let states = automata.get(&r).map(|a| a.state_count()).unwrap_or(2);
        for q in 0..states {
            out.insert(Concept::AutomatonForall(AutomatonState { role: r.clone(), state: q }, Box::new(d.clone())));
        }
    }
    out
}
