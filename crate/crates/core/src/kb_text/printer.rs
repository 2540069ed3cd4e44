use std::collections::BTreeSet;
use std::fmt::Write;

use crate::kb_model::*;

pub fn role_to_string(r: &RoleExpr) -> String {
    match r {
        RoleExpr::Named(n) => n.clone(),
        RoleExpr::Inverse(n) => format!("(inv {n})"),
        RoleExpr::Universal => "universal".to_string(),
    }
}

pub fn path_to_string(p: &Path) -> String {
    let mut s = String::from("(path");
    for r in &p.prefix {
        s.push(' ');
        s.push_str(&role_to_string(r));
    }
    s.push(' ');
    s.push_str(&p.concrete.0);
    s.push(')');
    s
}

fn write_concept(out: &mut String, c: &Concept) {
    match c {
        Concept::Atomic(n) => out.push_str(n),
        Concept::Nominal(a) => {
            let _ = write!(out, "(one {a})");
        }
        Concept::Top => out.push_str("top"),
        Concept::Bottom => out.push_str("bottom"),
        Concept::And(a, b) | Concept::Or(a, b) => {
            out.push_str(if matches!(c, Concept::And(..)) { "(and " } else { "(or " });
            write_concept(out, a);
            out.push(' ');
            write_concept(out, b);
            out.push(')');
        }
        Concept::Not(a) => {
            out.push_str("(not ");
            write_concept(out, a);
            out.push(')');
        }
        Concept::Exists(r, a) | Concept::Forall(r, a) => {
            let kw = if matches!(c, Concept::Exists(..)) { "some" } else { "all" };
            let _ = write!(out, "({kw} {} ", role_to_string(r));
            write_concept(out, a);
            out.push(')');
        }
        Concept::AtLeast(n, r, a) | Concept::AtMost(n, r, a) => {
            let kw = if matches!(c, Concept::AtLeast(..)) { "atleast" } else { "atmost" };
            let _ = write!(out, "({kw} {n} {} ", role_to_string(r));
            write_concept(out, a);
            out.push(')');
        }
        Concept::SelfRestriction(r) => {
            let _ = write!(out, "(self {})", role_to_string(r));
        }
        Concept::CAtLeast(n, g) => {
            let _ = write!(out, "(catleast {n} {})", g.0);
        }
        Concept::CAtMost(n, g) => {
            let _ = write!(out, "(catmost {n} {})", g.0);
        }
        Concept::CExists(p, q, r) => {
            let _ = write!(out, "(csome {} {} {r})", path_to_string(p), path_to_string(q));
        }
        Concept::CForall(p, q, r) => {
            let _ = write!(out, "(call {} {} {r})", path_to_string(p), path_to_string(q));
        }
        Concept::CExistsInd(p, i, Side::Right, r) => {
            let _ = write!(out, "(csome-ind {} {i} {r})", path_to_string(p));
        }
        Concept::CExistsInd(p, i, Side::Left, r) => {
            let _ = write!(out, "(cind-some {i} {} {r})", path_to_string(p));
        }
        Concept::CForallInd(p, i, Side::Right, r) => {
            let _ = write!(out, "(call-ind {} {i} {r})", path_to_string(p));
        }
        Concept::CForallInd(p, i, Side::Left, r) => {
            let _ = write!(out, "(cind-all {i} {} {r})", path_to_string(p));
        }
        Concept::AutomatonForall(q, a) => {
            let _ = write!(out, "(automaton-all {} {} ", role_to_string(&q.role), q.state);
            write_concept(out, a);
            out.push(')');
        }
    }
}

pub fn concept_to_string(c: &Concept) -> String {
    let mut s = String::new();
    write_concept(&mut s, c);
    s
}

fn assertion_to_string(a: &Assertion) -> String {
    match a {
        Assertion::Concept(i, c) => format!("(instance {i} {})", concept_to_string(c)),
        Assertion::Role(x, y, r) => format!("(related {x} {y} {})", role_to_string(r)),
        Assertion::NegRole(x, y, r) => format!("(not-related {x} {y} {})", role_to_string(r)),
        Assertion::Distinct(x, y) => format!("(distinct {x} {y})"),
        Assertion::ConcreteValue(x, g, i) => format!("(cvalue {x} {} {i})", g.0),
        Assertion::Constraint(i, r, j) => format!("(cconstraint {i} {r} {j})"),
    }
}

fn gci_to_string(g: &Gci) -> String {
    format!("(implies {} {})", concept_to_string(&g.sub), concept_to_string(&g.sup))
}

fn ria_to_string(r: &AbstractRia) -> String {
    let chain: Vec<String> = r.chain.iter().map(role_to_string).collect();
    format!("(ria (chain {}) {})", chain.join(" "), role_to_string(&r.sup))
}

fn cria_to_string(r: &ConcreteRia) -> String {
    format!("(cria {} {})", r.sub.0, r.sup.0)
}

/// Concrete roles a reader would see in `kb` apart from functionality assertions.
fn concrete_roles_in_use(kb: &KnowledgeBase) -> BTreeSet<String> {
    let mut probe = kb.clone();
    probe.rbox.assertions.retain(|a| !matches!(a, RoleAssertion::Fxnl(_)));
    free_vocabulary(&probe).map(|v| v.concrete_roles).unwrap_or_default()
}

fn role_assertion_to_string(a: &RoleAssertion, concrete_in_use: &BTreeSet<String>) -> String {
    match a {
        RoleAssertion::Ref(r) => format!("(ref {})", role_to_string(r)),
        RoleAssertion::Irr(r) => format!("(irr {})", role_to_string(r)),
        RoleAssertion::Dis(r, s) => format!("(dis {} {})", role_to_string(r), role_to_string(s)),
        RoleAssertion::Sym(r) => format!("(sym {})", role_to_string(r)),
        RoleAssertion::Trans(r) => format!("(trans {})", role_to_string(r)),
        RoleAssertion::Fxnl(FxnlTarget::Abstract(r)) => format!("(fxnl {})", role_to_string(r)),
        RoleAssertion::Fxnl(FxnlTarget::Concrete(g)) => {
            // The bare form is only unambiguous when g is visibly concrete elsewhere.
            if concrete_in_use.contains(&g.0) {
                format!("(fxnl {})", g.0)
            } else {
                format!("(fxnl (path {}))", g.0)
            }
        }
    }
}

fn minimized_to_string(m: &Minimized) -> String {
    match m {
        Minimized::Concept(c) => format!("(minimize {})", concept_to_string(c)),
        Minimized::Role(r) => format!("(minimize-role {r})"),
    }
}

pub fn query_to_string(q: &Query) -> String {
    let c = concept_to_string;
    match q {
        Query::KbSat => "(query sat)".into(),
        Query::GcSat => "(query gc-sat)".into(),
        Query::ConceptSat(x) => format!("(query concept-sat {})", c(x)),
        Query::GcConceptSat(x) => format!("(query gc-concept-sat {})", c(x)),
        Query::Subsumes(x, y) => format!("(query subsumes {} {})", c(x), c(y)),
        Query::GcSubsumes(x, y) => format!("(query gc-subsumes {} {})", c(x), c(y)),
        Query::Instance(a, x) => format!("(query instance {a} {})", c(x)),
        Query::GcInstance(a, x) => format!("(query gc-instance {a} {})", c(x)),
    }
}

fn sorted(mut lines: Vec<String>) -> Vec<String> {
    lines.sort();
    lines
}

fn section(out: &mut String, name: &str, lines: &[String]) {
    let _ = writeln!(out, "; {name}");
    if lines.is_empty() {
        return;
    }
    let _ = writeln!(out, "({name}");
    for (i, l) in lines.iter().enumerate() {
        out.push_str("  ");
        out.push_str(l);
        if i + 1 == lines.len() {
            out.push(')');
        }
        out.push('\n');
    }
}

/// Canonical text of a knowledge base: one axiom per line, each section sorted
/// by printed form.
pub fn print_kb(kb: &KnowledgeBase) -> String {
    let mut out = String::new();
    if let Some(sys) = &kb.constraint_system {
        let _ = writeln!(out, "(constraint-system {sys})");
    }
    section(&mut out, "abox", &sorted(kb.abox.iter().map(assertion_to_string).collect()));
    section(&mut out, "tbox", &sorted(kb.tbox.iter().map(gci_to_string).collect()));
    let concrete = concrete_roles_in_use(kb);
    let mut rbox: Vec<String> = kb.rbox.abstract_rias.iter().map(ria_to_string).collect();
    rbox.extend(kb.rbox.concrete_rias.iter().map(cria_to_string));
    rbox.extend(kb.rbox.assertions.iter().map(|a| role_assertion_to_string(a, &concrete)));
    section(&mut out, "rbox", &sorted(rbox));
    for m in sorted(kb.minimized.iter().map(minimized_to_string).collect()) {
        out.push_str(&m);
        out.push('\n');
    }
    out
}

/// The knowledge base followed by its queries in their original order.
pub fn print_document(doc: &Document) -> String {
    let mut out = print_kb(&doc.kb);
    for q in &doc.queries {
        out.push_str(&query_to_string(q));
        out.push('\n');
    }
    out
}

/// Reorders every list of `kb` the way [`print_kb`] does, so that
/// `parse_kb(&print_kb(kb)) == canonicalize(kb)`.
pub fn canonicalize(kb: &KnowledgeBase) -> KnowledgeBase {
    fn by_key<T: Clone>(items: &[T], key: impl Fn(&T) -> String) -> Vec<T> {
        let mut v: Vec<(String, T)> = items.iter().map(|x| (key(x), x.clone())).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v.into_iter().map(|(_, x)| x).collect()
    }
    let concrete = concrete_roles_in_use(kb);
    KnowledgeBase {
        abox: by_key(&kb.abox, assertion_to_string),
        tbox: by_key(&kb.tbox, gci_to_string),
        rbox: RBox {
            abstract_rias: by_key(&kb.rbox.abstract_rias, ria_to_string),
            concrete_rias: by_key(&kb.rbox.concrete_rias, cria_to_string),
            assertions: by_key(&kb.rbox.assertions, |a| role_assertion_to_string(a, &concrete)),
        },
        minimized: by_key(&kb.minimized, minimized_to_string),
        constraint_system: kb.constraint_system.clone(),
    }
}
