//! Acceptance criteria, one pass/fail line each. Runs without the libtest
//! harness so the lines always reach the terminal.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use common::allen::{self, relation_of, RELATIONS};
use common::enumerate::{find_model, named_extension, named_models, Bounded};
use common::gen;
use common::rewriting::{derives, words};
use sroiqc::circumscription::{GcVerdict, GroundedExtension, GroundedKb};
use sroiqc::constraint::{check_patchwork_instance, is_satisfiable, ConstraintSystemDef, RelNetwork};
use sroiqc::kb_model::{Concept, ConcreteRole, KnowledgeBase, Minimized, Path, RoleExpr, Side};
use sroiqc::kb_text::{canonicalize, concept_to_string, parse_concept, parse_document_bytes, parse_kb, print_kb};
use sroiqc::preprocess::{nnf, preprocess};
use sroiqc::tableau::{run, validate_model, ResourceLimits, Verdict};

type Outcome = Result<String, String>;

type Criterion = (&'static str, fn() -> Outcome);
type Ria = (Vec<RoleExpr>, RoleExpr);

fn singleton_net(sys: &ConstraintSystemDef, cs: &[(usize, &str, usize)]) -> RelNetwork {
    let mut net = RelNetwork::new();
    for &(u, r, v) in cs {
        net.constrain(sys, u as u32, sys.rel(r).unwrap(), v as u32).unwrap();
    }
    net
}

fn allen_oracle() -> Outcome {
    let sys = ConstraintSystemDef::allen();
    let start = Instant::now();
    let mut mismatches = Vec::new();
    let mut sat = 0;
    let mut check = |cs: &[(usize, &str, usize)], n: usize| {
        let expected = allen::realizable(n, cs);
        sat += expected as usize;
        if is_satisfiable(&sys, &singleton_net(&sys, cs)) != expected {
            mismatches.push(format!("{cs:?}"));
        }
    };
    let mut exhaustive = 0;
    for r01 in RELATIONS {
        for r02 in RELATIONS {
            for r12 in RELATIONS {
                check(&[(0, r01, 1), (0, r02, 2), (1, r12, 2)], 3);
                exhaustive += 1;
            }
        }
    }
    let mut rng = StdRng::seed_from_u64(1);
    let pairs: Vec<(usize, usize)> = (0..4).flat_map(|u| (u + 1..4).map(move |v| (u, v))).collect();
    for k in 0..500 {
        let cs: Vec<(usize, &str, usize)> = if k % 2 == 0 {
            // From an actual placement, then possibly perturbed.
            let iv = allen::random_intervals(&mut rng, 4);
            let mut cs: Vec<_> = pairs.iter().map(|&(u, v)| (u, relation_of(iv[u], iv[v]), v)).collect();
            if rng.gen_bool(0.5) {
                let at = rng.gen_range(0..cs.len());
                cs[at].1 = RELATIONS[rng.gen_range(0..13)];
            }
            cs
        } else {
            pairs.iter().map(|&(u, v)| (u, RELATIONS[rng.gen_range(0..13)], v)).collect()
        };
        check(&cs, 4);
    }
    let elapsed = start.elapsed();
    let detail = format!(
        "{exhaustive} exhaustive 3-variable + 500 random 4-variable networks, {sat} satisfiable, {} mismatches, {:.2?}",
        mismatches.len(),
        elapsed
    );
    if mismatches.is_empty() && elapsed < Duration::from_secs(60) {
        Ok(detail)
    } else {
        Err(format!("{detail}; first: {:?}", mismatches.first()))
    }
}

fn patchwork() -> Outcome {
    let sys = ConstraintSystemDef::allen();
    let mut rng = StdRng::seed_from_u64(2);
    let mut failures = Vec::new();
    let mut with_disjunction = 0;
    for k in 0..200 {
        let shared = rng.gen_range(1..4);
        let only_m = rng.gen_range(1..3);
        let only_n = rng.gen_range(1..3);
        let m_iv = allen::random_intervals(&mut rng, shared + only_m);
        // Same order type on the shared part, different coordinates.
        let mut n_iv: Vec<(i64, i64)> = m_iv[..shared].iter().map(|&(s, e)| (3 * s + 1, 3 * e + 1)).collect();
        n_iv.extend((0..only_n).map(|_| {
            let s = rng.gen_range(0..20);
            (s, s + rng.gen_range(1..8))
        }));
        let m_ids: Vec<u32> = (0..shared + only_m).map(|i| i as u32).collect();
        let n_ids: Vec<u32> = (0..shared).chain(shared + only_m..shared + only_m + only_n).map(|i| i as u32).collect();
        let mut build = |iv: &[(i64, i64)], ids: &[u32]| {
            let mut net = RelNetwork::new();
            for a in 0..ids.len() {
                for b in a + 1..ids.len() {
                    let mut label = sys.rel(relation_of(iv[a], iv[b])).unwrap();
                    if b >= shared && rng.gen_bool(0.4) {
                        label |= rng.gen_range(0..=sys.all()) & sys.all();
                        with_disjunction += 1;
                    }
                    net.constrain(&sys, ids[a], label, ids[b]).unwrap();
                }
            }
            net
        };
        let m = build(&m_iv, &m_ids);
        let n = build(&n_iv, &n_ids);
        match check_patchwork_instance(&sys, &m, &n) {
            Ok(true) => {}
            other => failures.push(format!("pair {k}: {other:?}")),
        }
    }
    let detail = format!("200 pairs ({with_disjunction} disjunctive labels), {} failures", failures.len());
    dump(&failures);
    if failures.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; first: {}", failures[0]))
    }
}

fn tableau_vs_enumeration() -> Outcome {
    let point = ConstraintSystemDef::point();
    let limits = ResourceLimits { max_nodes: 5_000, timeout: Duration::from_secs(20) };
    let mut rng = StdRng::seed_from_u64(3);
    let (mut used, mut rejected, mut agree_sat, mut agree_unsat, mut inconclusive, mut unknown) = (0, 0, 0, 0, 0, 0);
    let mut failures: Vec<String> = Vec::new();
    while used < 300 {
        let kb = gen::classical_kb(&mut rng, &gen::SMALL);
        let Ok(rkb) = preprocess(&kb, &point) else {
            rejected += 1;
            continue;
        };
        used += 1;
        let out = run(&rkb, limits);
        let oracle = find_model(&kb, 3);
        let text = print_kb(&kb);
        if let Verdict::Satisfiable(m) = &out.verdict {
            let v = validate_model(m, &rkb);
            if !v.is_empty() {
                failures.push(format!("invalid model ({}) for\n{text}", v.join("; ")));
            }
        }
        match (&out.verdict, oracle) {
            (Verdict::ResourceLimitExceeded(why), _) => failures.push(format!("limit ({why}) on\n{text}")),
            (Verdict::Satisfiable(_), Bounded::Model(_)) => agree_sat += 1,
            (Verdict::Unsatisfiable, Bounded::NoModel) => agree_unsat += 1,
            (Verdict::Unsatisfiable, Bounded::Model(m)) => {
                failures.push(format!("tableau unsat but a {}-element model exists for\n{text}", m.n))
            }
            (Verdict::Satisfiable(_), Bounded::NoModel) => inconclusive += 1,
            (_, Bounded::Unknown) => unknown += 1,
        }
    }
    let detail = format!(
        "{used} KBs ({rejected} rejected by preprocessing): {agree_sat} sat agree, {agree_unsat} unsat agree, \
         {inconclusive} sat beyond size 3, {unknown} oracle budget exhausted, {} disagreements",
        failures.len()
    );
    dump(&failures);
    if failures.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; first: {}", failures[0]))
    }
}

fn blocking_regression() -> Outcome {
    let sys = ConstraintSystemDef::allen();
    let mut lines = Vec::new();
    for text in ["(tbox (implies top (some R A)))", "(abox (instance a A)) (tbox (implies A (some R A)))"] {
        let kb = parse_kb(text).map_err(|e| e.to_string())?;
        let start = Instant::now();
        let rkb = preprocess(&kb, &sys).map_err(|e| e.to_string())?;
        let out = run(&rkb, ResourceLimits::default());
        let elapsed = start.elapsed();
        let Verdict::Satisfiable(m) = &out.verdict else {
            return Err(format!("{text}: {:?}", out.verdict));
        };
        let violations = validate_model(m, &rkb);
        let line = format!("{text}: {} nodes, {:.2?}, {} violations", out.stats.nodes, elapsed, violations.len());
        if elapsed > Duration::from_secs(1) || out.stats.nodes > 100 || !violations.is_empty() {
            return Err(line);
        }
        lines.push(line);
    }
    Ok(lines.join("; "))
}

fn concrete_clash() -> Outcome {
    let sys = ConstraintSystemDef::allen();
    let kb_with = |second: &str| {
        format!(
            "(constraint-system allen)
             (abox (instance a (csome (path g) (path g2) before))
                   (instance a (call (path g) (path g2) {second})))
             (rbox (fxnl g) (fxnl g2))"
        )
    };
    let mut lines = Vec::new();
    for (second, want_sat) in [("after", false), ("before", true)] {
        let kb = parse_kb(&kb_with(second)).map_err(|e| e.to_string())?;
        let start = Instant::now();
        let rkb = preprocess(&kb, &sys).map_err(|e| e.to_string())?;
        let out = run(&rkb, ResourceLimits::default());
        let elapsed = start.elapsed();
        let line = format!("{second}: {:?} in {:.2?}", if out.verdict.is_sat() { "sat" } else { "unsat" }, elapsed);
        let ok = if want_sat { out.verdict.is_sat() } else { out.verdict.is_unsat() };
        if !ok || elapsed > Duration::from_secs(1) {
            return Err(line);
        }
        lines.push(line);
    }
    Ok(lines.join("; "))
}

fn nnf_and_automata() -> Outcome {
    let rels: Vec<String> = ["lt", "eq", "gt"].iter().map(|s| s.to_string()).collect();
    let c = |s: &str| parse_concept(s).unwrap();
    let g = || Path::direct("g");
    let h = || Path::via(RoleExpr::named("R"), "h");
    let cases: Vec<(Concept, Concept)> = vec![
        (c("(not (not A))"), c("A")),
        (c("(not (and A B))"), c("(or (not A) (not B))")),
        (c("(not (or A B))"), c("(and (not A) (not B))")),
        (c("(not (some R A))"), c("(all R (not A))")),
        (c("(not (all R A))"), c("(some R (not A))")),
        (c("(not (atmost 2 R A))"), c("(atleast 3 R A)")),
        (c("(not (atleast 3 R A))"), c("(atmost 2 R A)")),
        (c("(not (atleast 0 R A))"), Concept::Bottom),
        (c("(not (catmost 1 g))"), Concept::CAtLeast(2, ConcreteRole::new("g"))),
        (c("(not (catleast 2 g))"), Concept::CAtMost(1, ConcreteRole::new("g"))),
        (c("(not (catleast 0 g))"), Concept::Bottom),
        (
            Concept::not(Concept::CForall(g(), h(), "lt".into())),
            Concept::or(Concept::CExists(g(), h(), "eq".into()), Concept::CExists(g(), h(), "gt".into())),
        ),
        (
            Concept::not(Concept::CForallInd(g(), "i".into(), Side::Right, "eq".into())),
            Concept::or(
                Concept::CExistsInd(g(), "i".into(), Side::Right, "lt".into()),
                Concept::CExistsInd(g(), "i".into(), Side::Right, "gt".into()),
            ),
        ),
        (
            Concept::not(Concept::CForallInd(g(), "i".into(), Side::Left, "gt".into())),
            Concept::or(
                Concept::CExistsInd(g(), "i".into(), Side::Left, "lt".into()),
                Concept::CExistsInd(g(), "i".into(), Side::Left, "eq".into()),
            ),
        ),
        (c("(not top)"), Concept::Bottom),
        (c("(not bottom)"), Concept::Top),
        // Primary concepts keep their negation.
        (c("(not A)"), c("(not A)")),
        (c("(not (one a))"), c("(not (one a))")),
        (c("(not (self R))"), c("(not (self R))")),
        (
            Concept::not(Concept::CExists(g(), h(), "lt".into())),
            Concept::not(Concept::CExists(g(), h(), "lt".into())),
        ),
        // Rules apply below every constructor.
        (c("(some R (not (and A (not B))))"), c("(some R (or (not A) B))")),
        (c("(atleast 1 R (not (all S A)))"), c("(atleast 1 R (some S (not A)))")),
        (c("(not (and (not (atmost 0 R A)) (some S (not B))))"), c("(or (atmost 0 R A) (all S B))")),
    ];
    let mut wrong = Vec::new();
    for (input, want) in &cases {
        let got = nnf(input, &rels);
        if &got != want {
            wrong.push(format!("{} gave {}", concept_to_string(input), concept_to_string(&got)));
        }
    }
    if !wrong.is_empty() {
        return Err(format!("NNF: {}", wrong.join("; ")));
    }

    let r = || RoleExpr::named("R");
    let s = || RoleExpr::named("S");
    let t = || RoleExpr::named("T");
    let rboxes: Vec<(&str, &str, Vec<Ria>, Vec<RoleExpr>)> = vec![
        ("{R}", "(tbox (implies (some R top) top))", vec![], vec![r(), r().inv()]),
        ("{RR<R}", "(rbox (ria (chain R R) R))", vec![(vec![r(), r()], r())], vec![r(), r().inv()]),
        (
            "{ST<R}",
            "(rbox (ria (chain S T) R))",
            vec![(vec![s(), t()], r())],
            vec![r(), r().inv(), s(), s().inv(), t(), t().inv()],
        ),
        ("{Inv(R)<R}", "(rbox (ria (chain (inv R)) R))", vec![(vec![r().inv()], r())], vec![r(), r().inv()]),
    ];
    let sys = ConstraintSystemDef::allen();
    let mut checked = 0;
    for (name, text, rias, alphabet) in &rboxes {
        let rkb = preprocess(&parse_kb(text).unwrap(), &sys).map_err(|e| format!("{name}: {e}"))?;
        for role in alphabet {
            let aut = rkb.automaton(role);
            for w in words(alphabet, 4) {
                checked += 1;
                if aut.accepts(&w) != derives(&w, role, rias) {
                    return Err(format!("{name}: automaton of {role:?} disagrees on {w:?}"));
                }
            }
        }
    }
    Ok(format!("{} NNF cases, {checked} automaton word checks", cases.len()))
}

type Ext = BTreeMap<String, Vec<Vec<String>>>;

fn ext_of(g: &GroundedExtension, minimized: &[Minimized]) -> Ext {
    let mut out = Ext::new();
    for m in minimized {
        match m {
            Minimized::Concept(c) => {
                let key = concept_to_string(c);
                let v = g.concepts.get(&key).map(|s| s.iter().map(|a| vec![a.clone()]).collect()).unwrap_or_default();
                out.insert(key, v);
            }
            Minimized::Role(r) => {
                let v = g.roles.get(r).map(|s| s.iter().map(|(a, b)| vec![a.clone(), b.clone()]).collect());
                out.insert(r.clone(), v.unwrap_or_default());
            }
        }
    }
    out
}

fn ext_subset(a: &Ext, b: &Ext) -> bool {
    a.iter().all(|(k, v)| {
        let w: BTreeSet<&Vec<String>> = b[k].iter().collect();
        v.iter().all(|x| w.contains(x))
    })
}

fn gc_minimality() -> Outcome {
    let sys = ConstraintSystemDef::allen();
    let limits = ResourceLimits { max_nodes: 5_000, timeout: Duration::from_secs(30) };
    let mut rng = StdRng::seed_from_u64(7);
    let (mut kbs, mut unsat, mut queries, mut entailed) = (0, 0, 0, 0);
    let mut failures: Vec<String> = Vec::new();
    while kbs < 60 || queries < 100 {
        let kb: KnowledgeBase = gen::universal_kb(&mut rng);
        kbs += 1;
        let text = print_kb(&kb);
        let models = named_models(&kb);
        let exts: Vec<Ext> = models.iter().map(|m| named_extension(m, &kb.minimized)).collect();
        let minimal: Vec<bool> =
            exts.iter().map(|e| !exts.iter().any(|f| f != e && ext_subset(f, e))).collect();
        let gkb = GroundedKb::new(&kb, &sys).map_err(|e| e.to_string())?;
        match gkb.model_finder(limits).map(|o| o.value) {
            Err(e) => failures.push(format!("model_finder: {e} on\n{text}")),
            Ok(GcVerdict::Unsatisfiable) => {
                unsat += 1;
                if !models.is_empty() {
                    failures.push(format!("model_finder unsat with {} grounded models on\n{text}", models.len()));
                }
            }
            Ok(GcVerdict::Satisfiable { extension, .. }) => {
                let e = ext_of(&extension, &kb.minimized);
                if !exts.contains(&e) {
                    failures.push(format!("extension {e:?} of no grounded model on\n{text}"));
                } else if exts.iter().any(|f| f != &e && ext_subset(f, &e)) {
                    failures.push(format!("extension {e:?} is not minimal on\n{text}"));
                }
            }
        }
        if queries >= 100 {
            continue;
        }
        let inds: Vec<String> = models.first().map(|m| m.sig.inds.clone()).unwrap_or_else(|| vec!["a".into(), "b".into()]);
        let names: Vec<&str> = inds.iter().map(String::as_str).collect();
        for _ in 0..2 {
            let a = names[rng.gen_range(0..names.len())];
            let c = gen::qf_concept(&mut rng, &names, 2);
            let want = models
                .iter()
                .zip(&minimal)
                .filter(|(_, min)| **min)
                .flat_map(|(m, _)| m.with_atoms_of(&c))
                .all(|m| m.eval(&c, m.individual(a)) == Some(true));
            queries += 1;
            entailed += want as usize;
            match gkb.entails_instance(a, &c, limits) {
                Ok(o) if o.value == want => {}
                other => failures.push(format!(
                    "gc-instance {a} {}: expected {want}, got {:?} on\n{text}",
                    concept_to_string(&c),
                    other.map(|o| o.value)
                )),
            }
        }
    }
    let detail = format!(
        "{kbs} KBs ({unsat} without grounded models), {queries} entailment queries ({entailed} entailed), {} failures",
        failures.len()
    );
    dump(&failures);
    if failures.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; first: {}", failures[0]))
    }
}

fn mutate(rng: &mut StdRng, bytes: &mut Vec<u8>) {
    const INTERESTING: &[u8] = b"()\"; \n\t\\0-9aZ\xff\xc3";
    for _ in 0..rng.gen_range(1..6) {
        let at = if bytes.is_empty() { 0 } else { rng.gen_range(0..bytes.len()) };
        match rng.gen_range(0..5) {
            0 if !bytes.is_empty() => {
                bytes.remove(at);
            }
            1 => bytes.insert(at, INTERESTING[rng.gen_range(0..INTERESTING.len())]),
            2 => bytes.insert(at, rng.gen()),
            3 if !bytes.is_empty() => bytes[at] ^= 1 << rng.gen_range(0..8),
            _ if !bytes.is_empty() => {
                // Duplicate a slice somewhere else.
                let end = (at + rng.gen_range(1..20)).min(bytes.len());
                let chunk = bytes[at..end].to_vec();
                let to = rng.gen_range(0..=bytes.len());
                bytes.splice(to..to, chunk);
            }
            _ => bytes.push(b'('),
        }
    }
}

fn round_trip_and_fuzz() -> Outcome {
    let mut rng = StdRng::seed_from_u64(8);
    let mut corpus = Vec::new();
    for k in 0..1000 {
        let kb = gen::any_kb(&mut rng);
        let text = print_kb(&kb);
        let parsed = parse_kb(&text).map_err(|e| format!("KB {k} does not parse back: {e}\n{text}"))?;
        if parsed != canonicalize(&kb) || print_kb(&parsed) != text {
            return Err(format!("KB {k} changes across a round trip:\n{text}"));
        }
        corpus.push(text.into_bytes());
    }
    let mut crashes = 0;
    let mut accepted = 0;
    let hook = std::panic::take_hook();
    std::panic::set_hook(Box::new(|_| {}));
    for k in 0..10_000 {
        let mut bytes = corpus[k % corpus.len()].clone();
        mutate(&mut rng, &mut bytes);
        match catch_unwind(AssertUnwindSafe(|| parse_document_bytes(&bytes).is_ok())) {
            Ok(ok) => accepted += ok as usize,
            Err(_) => crashes += 1,
        }
    }
    std::panic::set_hook(hook);
    let detail = format!("1000 round trips, 10000 mutations ({accepted} still parse), {crashes} crashes");
    if crashes == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Every failure, not just the first, when `ACCEPTANCE_VERBOSE` is set.
fn dump(failures: &[String]) {
    if std::env::var_os("ACCEPTANCE_VERBOSE").is_some() {
        for f in failures {
            eprintln!("---\n{f}");
        }
    }
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("constraint-algebra oracle equivalence", allen_oracle),
        ("patchwork spot-check", patchwork),
        ("tableau vs bounded enumeration", tableau_vs_enumeration),
        ("blocking regression", blocking_regression),
        ("concrete-clash suite", concrete_clash),
        ("NNF and automaton suite", nnf_and_automata),
        ("GC minimality and entailment", gc_minimality),
        ("round-trip and fuzz", round_trip_and_fuzz),
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        if !only.is_empty() && !only.contains(&(k + 1)) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} PASS  {name} [{secs:.1}s]: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} FAIL  {name} [{secs:.1}s]: {detail}", k + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
