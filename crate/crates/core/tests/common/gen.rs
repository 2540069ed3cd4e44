//! Seeded random knowledge bases.

use rand::seq::SliceRandom;
use rand::Rng;

use sroiqc::kb_model::{
    AbstractRia, Assertion, Concept, ConcreteRia, ConcreteRole, FxnlTarget, Gci, KnowledgeBase, Minimized, Path,
    RoleAssertion, RoleExpr, Side,
};

fn pick<'a, R: Rng>(rng: &mut R, items: &[&'a str]) -> &'a str {
    items.choose(rng).unwrap()
}

fn role<R: Rng>(rng: &mut R, names: &[&str]) -> RoleExpr {
    let n = pick(rng, names);
    if rng.gen_bool(0.3) {
        RoleExpr::inverse_of(n)
    } else {
        RoleExpr::named(n)
    }
}

/// Settings for [`classical_kb`].
pub struct Shape {
    pub atoms: &'static [&'static str],
    pub roles: &'static [&'static str],
    pub individuals: &'static [&'static str],
    pub depth: usize,
    pub concrete: bool,
}

pub const SMALL: Shape = Shape {
    atoms: &["A", "B"],
    roles: &["R", "S"],
    individuals: &["a", "b", "c"],
    depth: 3,
    concrete: true,
};

const POINT: [&str; 3] = ["lt", "eq", "gt"];
const CROLES: [&str; 2] = ["g", "h"];
const CINDS: [&str; 2] = ["i", "j"];

fn path<R: Rng>(rng: &mut R, shape: &Shape, with_step: bool) -> Path {
    let g = pick(rng, &CROLES);
    if with_step {
        Path::via(role(rng, shape.roles), g)
    } else {
        Path::direct(g)
    }
}

/// A concept of nesting depth at most `depth` over `shape`'s vocabulary.
pub fn concept<R: Rng>(rng: &mut R, shape: &Shape, depth: usize) -> Concept {
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..10) {
            0 => Concept::Top,
            1 => Concept::Bottom,
            2 | 3 => Concept::nominal(pick(rng, shape.individuals)),
            4 => Concept::not(Concept::atomic(pick(rng, shape.atoms))),
            _ => Concept::atomic(pick(rng, shape.atoms)),
        };
    }
    let sub = |rng: &mut R| concept(rng, shape, depth - 1);
    let top = if shape.concrete { 14 } else { 9 };
    match rng.gen_range(0..top) {
        0 | 1 => Concept::and(sub(rng), sub(rng)),
        2 => Concept::or(sub(rng), sub(rng)),
        3 => Concept::not(sub(rng)),
        4 => Concept::exists(role(rng, shape.roles), sub(rng)),
        5 => Concept::forall(role(rng, shape.roles), sub(rng)),
        6 => Concept::at_least(rng.gen_range(1..3), role(rng, shape.roles), sub(rng)),
        7 => Concept::at_most(rng.gen_range(0..2), role(rng, shape.roles), sub(rng)),
        8 => Concept::SelfRestriction(role(rng, shape.roles)),
        9 | 10 => {
            let step = rng.gen_bool(0.3);
            let (p, q) = if rng.gen_bool(0.5) {
                (path(rng, shape, step), path(rng, shape, false))
            } else {
                (path(rng, shape, false), path(rng, shape, step))
            };
            let r = pick(rng, &POINT).to_string();
            if rng.gen_bool(0.6) {
                Concept::CExists(p, q, r)
            } else {
                Concept::CForall(p, q, r)
            }
        }
        11 => {
            let step = rng.gen_bool(0.3);
            let p = path(rng, shape, step);
            let i = pick(rng, &CINDS).to_string();
            let side = if rng.gen_bool(0.5) { Side::Left } else { Side::Right };
            let r = pick(rng, &POINT).to_string();
            if rng.gen_bool(0.6) {
                Concept::CExistsInd(p, i, side, r)
            } else {
                Concept::CForallInd(p, i, side, r)
            }
        }
        12 => Concept::CAtLeast(1, ConcreteRole::new(pick(rng, &CROLES))),
        _ => Concept::CAtMost(0, ConcreteRole::new(pick(rng, &CROLES))),
    }
}

/// A small knowledge base for the bounded-domain comparison. Concrete roles
/// are always functional and relations come from the point algebra.
pub fn classical_kb<R: Rng>(rng: &mut R, shape: &Shape) -> KnowledgeBase {
    let mut kb = KnowledgeBase::new();
    kb.constraint_system = shape.concrete.then(|| "point".to_string());
    for _ in 0..rng.gen_range(1..4) {
        let a = pick(rng, shape.individuals).to_string();
        kb.abox.push(Assertion::Concept(a, concept(rng, shape, shape.depth)));
    }
    for _ in 0..rng.gen_range(0..3) {
        let a = pick(rng, shape.individuals).to_string();
        let b = pick(rng, shape.individuals).to_string();
        let r = role(rng, shape.roles);
        kb.abox.push(match rng.gen_range(0..5) {
            0 => Assertion::NegRole(a, b, r),
            1 => Assertion::Distinct(a, b),
            _ => Assertion::Role(a, b, r),
        });
    }
    for _ in 0..rng.gen_range(0..3) {
        let d = shape.depth.saturating_sub(1);
        kb.tbox.push(Gci::new(concept(rng, shape, d), concept(rng, shape, d)));
    }
    match rng.gen_range(0..8) {
        0 => kb.rbox.assertions.push(RoleAssertion::Trans(RoleExpr::named(shape.roles[0]))),
        1 => kb.rbox.abstract_rias.push(AbstractRia {
            chain: vec![role(rng, &shape.roles[1..])],
            sup: RoleExpr::named(shape.roles[0]),
        }),
        2 => kb.rbox.assertions.push(RoleAssertion::Sym(RoleExpr::named(pick(rng, shape.roles)))),
        3 => kb.rbox.assertions.push(RoleAssertion::Irr(RoleExpr::named(pick(rng, shape.roles)))),
        4 => kb.rbox.assertions.push(RoleAssertion::Fxnl(FxnlTarget::Abstract(role(rng, shape.roles)))),
        5 => kb.rbox.abstract_rias.push(AbstractRia {
            chain: vec![RoleExpr::named(shape.roles[0]), RoleExpr::named(shape.roles[1])],
            sup: RoleExpr::named(shape.roles[0]),
        }),
        _ => {}
    }
    if shape.concrete {
        if rng.gen_bool(0.3) {
            let a = pick(rng, shape.individuals).to_string();
            let g = ConcreteRole::new(pick(rng, &CROLES));
            kb.abox.push(Assertion::ConcreteValue(a, g, pick(rng, &CINDS).to_string()));
        }
        if rng.gen_bool(0.2) {
            kb.abox.push(Assertion::Constraint(
                CINDS[0].to_string(),
                pick(rng, &POINT).to_string(),
                CINDS[1].to_string(),
            ));
        }
        give_values(rng, &mut kb, shape);
        let used = sroiqc::kb_model::free_vocabulary(&kb).map(|v| v.concrete_roles).unwrap_or_default();
        for g in used {
            kb.rbox.assertions.push(RoleAssertion::Fxnl(FxnlTarget::Concrete(ConcreteRole::new(g))));
        }
    }
    kb
}

/// Every constraint individual needs a value assertion to parse.
fn give_values<R: Rng>(rng: &mut R, kb: &mut KnowledgeBase, shape: &Shape) {
    let vocab = sroiqc::kb_model::free_vocabulary(kb).unwrap_or_default();
    for i in &vocab.constraint_individuals {
        let valued = kb.abox.iter().any(|a| matches!(a, Assertion::ConcreteValue(_, _, j) if j == i));
        if !valued {
            let a = pick(rng, shape.individuals).to_string();
            kb.abox.push(Assertion::ConcreteValue(a, ConcreteRole::new(pick(rng, &CROLES)), i.clone()));
        }
    }
}

const U_ATOMS: [&str; 3] = ["A", "B", "C"];

/// Quantifier-free over atoms and nominals.
pub fn qf_concept<R: Rng>(rng: &mut R, inds: &[&str], depth: usize) -> Concept {
    if depth == 0 || rng.gen_bool(0.3) {
        return match rng.gen_range(0..6) {
            0 => Concept::nominal(pick(rng, inds)),
            1 => Concept::not(Concept::atomic(pick(rng, &U_ATOMS))),
            _ => Concept::atomic(pick(rng, &U_ATOMS)),
        };
    }
    match rng.gen_range(0..3) {
        0 => Concept::and(qf_concept(rng, inds, depth - 1), qf_concept(rng, inds, depth - 1)),
        1 => Concept::or(qf_concept(rng, inds, depth - 1), qf_concept(rng, inds, depth - 1)),
        _ => Concept::not(qf_concept(rng, inds, depth - 1)),
    }
}

/// Concepts preserved under substructures: no existential reading anywhere.
pub fn universal_concept<R: Rng>(rng: &mut R, inds: &[&str], depth: usize) -> Concept {
    if depth == 0 || rng.gen_bool(0.3) {
        return qf_concept(rng, inds, 0);
    }
    let r = if rng.gen_bool(0.3) { RoleExpr::inverse_of("R") } else { RoleExpr::named("R") };
    match rng.gen_range(0..5) {
        0 => Concept::and(universal_concept(rng, inds, depth - 1), universal_concept(rng, inds, depth - 1)),
        1 => Concept::or(universal_concept(rng, inds, depth - 1), universal_concept(rng, inds, depth - 1)),
        2 | 3 => Concept::forall(r, universal_concept(rng, inds, depth - 1)),
        _ => Concept::at_most(1, r, qf_concept(rng, inds, depth - 1)),
    }
}

/// A knowledge base whose grounded models all restrict to the named
/// individuals, with one or two minimized predicates.
pub fn universal_kb<R: Rng>(rng: &mut R) -> KnowledgeBase {
    let all_inds = ["a", "b", "c"];
    let inds = &all_inds[..rng.gen_range(2..4)];
    let mut kb = KnowledgeBase::new();
    for &a in inds {
        if rng.gen_bool(0.7) {
            kb.abox.push(Assertion::Concept(a.into(), universal_concept(rng, inds, 2)));
        }
    }
    // Mention every individual so the named domain is fixed.
    kb.abox.push(Assertion::Concept(inds[0].into(), Concept::or(Concept::Top, Concept::or_all(
        inds.iter().map(|a| Concept::nominal(*a)),
    ))));
    for _ in 0..rng.gen_range(0..3) {
        let a = pick(rng, inds).to_string();
        let b = pick(rng, inds).to_string();
        kb.abox.push(if rng.gen_bool(0.8) {
            Assertion::Role(a, b, RoleExpr::named("R"))
        } else {
            Assertion::NegRole(a, b, RoleExpr::named("R"))
        });
    }
    for _ in 0..rng.gen_range(0..3) {
        kb.tbox.push(Gci::new(qf_concept(rng, inds, 1), universal_concept(rng, inds, 2)));
    }
    let mut pool = vec![
        Minimized::Concept(Concept::atomic("A")),
        Minimized::Concept(Concept::atomic("B")),
        Minimized::Role("R".into()),
        Minimized::Concept(Concept::or(Concept::atomic("A"), Concept::atomic("C"))),
    ];
    pool.shuffle(rng);
    kb.minimized = pool.into_iter().take(rng.gen_range(1..3)).collect();
    kb
}

const ALLEN: [&str; 13] = super::allen::RELATIONS;

/// Any knowledge base the text format can express, for printing and parsing.
pub fn any_kb<R: Rng>(rng: &mut R) -> KnowledgeBase {
    let shape = Shape { atoms: &["A", "B", "C"], roles: &["R", "S", "T"], individuals: &["a", "b", "c"], depth: 3, concrete: true };
    let mut kb = classical_kb(rng, &shape);
    kb.constraint_system = [None, Some("allen"), Some("point"), Some("rcc8")].choose(rng).unwrap().map(String::from);
    for _ in 0..rng.gen_range(0..3) {
        let chain: Vec<RoleExpr> = (0..rng.gen_range(1..4)).map(|_| role(rng, shape.roles)).collect();
        kb.rbox.abstract_rias.push(AbstractRia { chain, sup: RoleExpr::named(pick(rng, shape.roles)) });
    }
    if rng.gen_bool(0.3) {
        kb.rbox.concrete_rias.push(ConcreteRia { sub: ConcreteRole::new("g"), sup: ConcreteRole::new("h") });
    }
    if rng.gen_bool(0.3) {
        kb.rbox.assertions.push(RoleAssertion::Ref(role(rng, shape.roles)));
    }
    if rng.gen_bool(0.3) {
        kb.rbox.assertions.push(RoleAssertion::Dis(role(rng, shape.roles), role(rng, shape.roles)));
    }
    if rng.gen_bool(0.2) {
        kb.rbox.assertions.push(RoleAssertion::Fxnl(FxnlTarget::Concrete(ConcreteRole::new("k"))));
    }
    if rng.gen_bool(0.3) {
        kb.tbox.push(Gci::new(
            Concept::CExists(Path::direct("g"), Path::via(RoleExpr::Universal, "h"), pick(rng, &ALLEN).into()),
            Concept::exists(RoleExpr::Universal, Concept::atomic("A")),
        ));
    }
    for _ in 0..rng.gen_range(0..3) {
        kb.minimized.push(if rng.gen_bool(0.7) {
            Minimized::Concept(concept(rng, &shape, 1))
        } else {
            Minimized::Role(pick(rng, shape.roles).into())
        });
    }
    give_values(rng, &mut kb, &shape);
    kb
}
