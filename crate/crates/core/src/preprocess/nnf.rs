use crate::kb_model::Concept;

/// Negation normal form. `relations` is the base-relation vocabulary used to
/// expand negated concrete universals; it may be empty when the concept has
/// no concrete parts.
pub fn nnf(c: &Concept, relations: &[String]) -> Concept {
    match c {
        Concept::Not(inner) => negate(inner, relations),
        Concept::And(a, b) => Concept::and(nnf(a, relations), nnf(b, relations)),
        Concept::Or(a, b) => Concept::or(nnf(a, relations), nnf(b, relations)),
        Concept::Exists(r, a) => Concept::exists(r.clone(), nnf(a, relations)),
        Concept::Forall(r, a) => Concept::forall(r.clone(), nnf(a, relations)),
        Concept::AtLeast(n, r, a) => Concept::at_least(*n, r.clone(), nnf(a, relations)),
        Concept::AtMost(n, r, a) => Concept::at_most(*n, r.clone(), nnf(a, relations)),
        Concept::AutomatonForall(q, a) => Concept::AutomatonForall(q.clone(), Box::new(nnf(a, relations))),
        other => other.clone(),
    }
}

/// `nnf(¬c)`.
pub fn negate(c: &Concept, relations: &[String]) -> Concept {
    match c {
        Concept::Top => Concept::Bottom,
        Concept::Bottom => Concept::Top,
        Concept::Not(inner) => nnf(inner, relations),
        Concept::And(a, b) => Concept::or(negate(a, relations), negate(b, relations)),
        Concept::Or(a, b) => Concept::and(negate(a, relations), negate(b, relations)),
        Concept::Exists(r, a) => Concept::forall(r.clone(), negate(a, relations)),
        Concept::Forall(r, a) => Concept::exists(r.clone(), negate(a, relations)),
        Concept::AtMost(n, r, a) => Concept::at_least(n + 1, r.clone(), nnf(a, relations)),
        Concept::AtLeast(0, _, _) => Concept::Bottom,
        Concept::AtLeast(n, r, a) => Concept::at_most(n - 1, r.clone(), nnf(a, relations)),
        Concept::CAtMost(n, g) => Concept::CAtLeast(n + 1, g.clone()),
        Concept::CAtLeast(0, _) => Concept::Bottom,
        Concept::CAtLeast(n, g) => Concept::CAtMost(n - 1, g.clone()),
        Concept::CForall(p, q, r) => Concept::or_all(
            relations.iter().filter(|x| *x != r).map(|x| Concept::CExists(p.clone(), q.clone(), x.clone())),
        ),
        Concept::CForallInd(p, i, side, r) => Concept::or_all(
            relations.iter().filter(|x| *x != r).map(|x| Concept::CExistsInd(p.clone(), i.clone(), *side, x.clone())),
        ),
        // Primary concepts keep their negation; the tableau handles them directly.
        primary => Concept::not(primary.clone()),
    }
}

/// True when negation occurs only directly in front of primary concepts.
pub fn is_nnf(c: &Concept) -> bool {
    let mut ok = true;
    c.walk(&mut |x| {
        if let Concept::Not(inner) = x {
            if !matches!(
                **inner,
                Concept::Atomic(_)
                    | Concept::Nominal(_)
                    | Concept::SelfRestriction(_)
                    | Concept::CExists(..)
                    | Concept::CExistsInd(..)
            ) {
                ok = false;
            }
        }
    });
    ok
}
