use std::collections::BTreeSet;

use super::sexpr::{read_all, SExpr};
use super::{ParseDiagnostic, ParseErrors, SourceSpan};
use crate::kb_model::*;

/// A successfully parsed document together with non-fatal diagnostics.
#[derive(Clone, Debug)]
pub struct ParsedDocument {
    pub document: Document,
    pub warnings: Vec<ParseDiagnostic>,
}

type PResult<T> = Result<T, ParseDiagnostic>;

fn err<T>(msg: impl Into<String>, span: SourceSpan) -> PResult<T> {
    Err(ParseDiagnostic::error(msg, span))
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

const RESERVED: &[&str] = &["top", "bottom", "universal"];

struct Parser {
    warnings: Vec<ParseDiagnostic>,
    max_cardinality: u32,
    /// `(fxnl X)` forms whose kind is resolved after the whole document is read.
    pending_fxnl: Vec<(usize, String, SourceSpan)>,
}

impl Parser {
    fn ident(&self, e: &SExpr, what: &str) -> PResult<String> {
        match e {
            SExpr::Atom(s, span) => {
                if !is_identifier(s) {
                    return err(format!("expected {what}, found `{s}`"), *span);
                }
                if RESERVED.contains(&s.as_str()) {
                    return err(format!("`{s}` is reserved and cannot be used as {what}"), *span);
                }
                Ok(s.clone())
            }
            SExpr::List(_, span) => err(format!("expected {what}, found a list"), *span),
        }
    }

    fn number(&self, e: &SExpr) -> PResult<u32> {
        match e {
            SExpr::Atom(s, span) if !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()) => {
                match s.parse::<u64>() {
                    Ok(n) if n <= self.max_cardinality as u64 => Ok(n as u32),
                    _ => err(format!("cardinality {s} exceeds the maximum {}", self.max_cardinality), *span),
                }
            }
            other => err("expected a nonnegative decimal integer", other.span()),
        }
    }

    fn list<'a>(&self, e: &'a SExpr, what: &str) -> PResult<(&'a str, &'a [SExpr], SourceSpan)> {
        match e {
            SExpr::List(items, span) => match items.first() {
                Some(SExpr::Atom(h, _)) => Ok((h.as_str(), &items[1..], *span)),
                Some(other) => err(format!("expected a keyword at the head of {what}"), other.span()),
                None => err(format!("empty list where {what} was expected"), *span),
            },
            SExpr::Atom(s, span) => err(format!("expected {what}, found `{s}`"), *span),
        }
    }

    fn arity(&self, kw: &str, args: &[SExpr], n: usize, span: SourceSpan) -> PResult<()> {
        if args.len() != n {
            return err(format!("`{kw}` takes {n} argument(s), found {}", args.len()), span);
        }
        Ok(())
    }

    fn role(&self, e: &SExpr) -> PResult<RoleExpr> {
        match e {
            SExpr::Atom(s, _) if s == "universal" => Ok(RoleExpr::Universal),
            SExpr::Atom(..) => Ok(RoleExpr::Named(self.ident(e, "a role name")?)),
            SExpr::List(..) => {
                let (kw, args, span) = self.list(e, "a role")?;
                if kw != "inv" {
                    return err(format!("unknown role form `{kw}`"), span);
                }
                self.arity(kw, args, 1, span)?;
                match self.role(&args[0])? {
                    RoleExpr::Named(n) => Ok(RoleExpr::Inverse(n)),
                    RoleExpr::Inverse(n) => Ok(RoleExpr::Named(n)),
                    RoleExpr::Universal => err("the universal role cannot be inverted", span),
                }
            }
        }
    }

    fn path(&mut self, e: &SExpr) -> PResult<Path> {
        let (kw, args, span) = self.list(e, "a path")?;
        if kw != "path" {
            return err(format!("expected `(path ...)`, found `{kw}`"), span);
        }
        let Some((last, prefix)) = args.split_last() else {
            return err("a path needs a concrete role", span);
        };
        let concrete = ConcreteRole(self.ident(last, "a concrete role")?);
        let prefix = prefix.iter().map(|r| self.role(r)).collect::<PResult<Vec<_>>>()?;
        if prefix.len() > 1 {
            self.warnings.push(ParseDiagnostic::warning(
                format!("path of length {} is not in path normal form", prefix.len() + 1),
                span,
            ));
        }
        Ok(Path { prefix, concrete })
    }

    fn relation(&self, e: &SExpr) -> PResult<String> {
        self.ident(e, "a relation symbol")
    }

    fn concept(&mut self, e: &SExpr) -> PResult<Concept> {
        let (kw, args, span) = match e {
            SExpr::Atom(s, _) if s == "top" => return Ok(Concept::Top),
            SExpr::Atom(s, _) if s == "bottom" => return Ok(Concept::Bottom),
            SExpr::Atom(..) => return Ok(Concept::Atomic(self.ident(e, "a concept name")?)),
            SExpr::List(..) => self.list(e, "a concept")?,
        };
        let c = match kw {
            "and" | "or" => {
                self.arity(kw, args, 2, span)?;
                let a = self.concept(&args[0])?;
                let b = self.concept(&args[1])?;
                if kw == "and" {
                    Concept::and(a, b)
                } else {
                    Concept::or(a, b)
                }
            }
            "not" => {
                self.arity(kw, args, 1, span)?;
                Concept::not(self.concept(&args[0])?)
            }
            "some" | "all" => {
                self.arity(kw, args, 2, span)?;
                let r = self.role(&args[0])?;
                let c = self.concept(&args[1])?;
                if kw == "some" {
                    Concept::exists(r, c)
                } else {
                    Concept::forall(r, c)
                }
            }
            "atleast" | "atmost" => {
                self.arity(kw, args, 3, span)?;
                let n = self.number(&args[0])?;
                let r = self.role(&args[1])?;
                let c = self.concept(&args[2])?;
                if kw == "atleast" {
                    Concept::at_least(n, r, c)
                } else {
                    Concept::at_most(n, r, c)
                }
            }
            "self" => {
                self.arity(kw, args, 1, span)?;
                Concept::SelfRestriction(self.role(&args[0])?)
            }
            "one" => {
                self.arity(kw, args, 1, span)?;
                Concept::Nominal(self.ident(&args[0], "an individual")?)
            }
            "catleast" | "catmost" => {
                self.arity(kw, args, 2, span)?;
                let n = self.number(&args[0])?;
                let g = ConcreteRole(self.ident(&args[1], "a concrete role")?);
                if kw == "catleast" {
                    Concept::CAtLeast(n, g)
                } else {
                    Concept::CAtMost(n, g)
                }
            }
            "csome" | "call" => {
                self.arity(kw, args, 3, span)?;
                let p = self.path(&args[0])?;
                let q = self.path(&args[1])?;
                let r = self.relation(&args[2])?;
                if p.len() > 1 && q.len() > 1 {
                    self.warnings.push(ParseDiagnostic::warning(
                        "path pair violates path normal form: at most one path may have an abstract step",
                        span,
                    ));
                }
                if kw == "csome" {
                    Concept::CExists(p, q, r)
                } else {
                    Concept::CForall(p, q, r)
                }
            }
            "csome-ind" | "call-ind" => {
                self.arity(kw, args, 3, span)?;
                let p = self.path(&args[0])?;
                let i = self.ident(&args[1], "a constraint individual")?;
                let r = self.relation(&args[2])?;
                if kw == "csome-ind" {
                    Concept::CExistsInd(p, i, Side::Right, r)
                } else {
                    Concept::CForallInd(p, i, Side::Right, r)
                }
            }
            "cind-some" | "cind-all" => {
                self.arity(kw, args, 3, span)?;
                let i = self.ident(&args[0], "a constraint individual")?;
                let p = self.path(&args[1])?;
                let r = self.relation(&args[2])?;
                if kw == "cind-some" {
                    Concept::CExistsInd(p, i, Side::Left, r)
                } else {
                    Concept::CForallInd(p, i, Side::Left, r)
                }
            }
            "automaton-all" => return err("`automaton-all` is an internal form and cannot be parsed", span),
            other => return err(format!("unknown concept constructor `{other}`"), span),
        };
        Ok(c)
    }

    fn assertion(&mut self, e: &SExpr) -> PResult<Assertion> {
        let (kw, args, span) = self.list(e, "an assertion")?;
        let a = match kw {
            "instance" => {
                self.arity(kw, args, 2, span)?;
                Assertion::Concept(self.ident(&args[0], "an individual")?, self.concept(&args[1])?)
            }
            "related" | "not-related" => {
                self.arity(kw, args, 3, span)?;
                let a = self.ident(&args[0], "an individual")?;
                let b = self.ident(&args[1], "an individual")?;
                let r = self.role(&args[2])?;
                if kw == "related" {
                    Assertion::Role(a, b, r)
                } else {
                    Assertion::NegRole(a, b, r)
                }
            }
            "distinct" => {
                self.arity(kw, args, 2, span)?;
                Assertion::Distinct(self.ident(&args[0], "an individual")?, self.ident(&args[1], "an individual")?)
            }
            "cvalue" => {
                self.arity(kw, args, 3, span)?;
                Assertion::ConcreteValue(
                    self.ident(&args[0], "an individual")?,
                    ConcreteRole(self.ident(&args[1], "a concrete role")?),
                    self.ident(&args[2], "a constraint individual")?,
                )
            }
            "cconstraint" => {
                self.arity(kw, args, 3, span)?;
                Assertion::Constraint(
                    self.ident(&args[0], "a constraint individual")?,
                    self.relation(&args[1])?,
                    self.ident(&args[2], "a constraint individual")?,
                )
            }
            other => return err(format!("unknown assertion `{other}`"), span),
        };
        Ok(a)
    }

    fn tbox_item(&mut self, e: &SExpr, out: &mut Vec<Gci>) -> PResult<()> {
        let (kw, args, span) = self.list(e, "a GCI")?;
        match kw {
            "implies" => {
                self.arity(kw, args, 2, span)?;
                out.push(Gci::new(self.concept(&args[0])?, self.concept(&args[1])?));
            }
            "equiv" => {
                self.arity(kw, args, 2, span)?;
                let c = self.concept(&args[0])?;
                let d = self.concept(&args[1])?;
                out.push(Gci::new(c.clone(), d.clone()));
                out.push(Gci::new(d, c));
            }
            other => return err(format!("unknown T-Box form `{other}`"), span),
        }
        Ok(())
    }

    fn rbox_item(&mut self, e: &SExpr, rbox: &mut RBox) -> PResult<()> {
        let (kw, args, span) = self.list(e, "an R-Box axiom")?;
        match kw {
            "ria" => {
                self.arity(kw, args, 2, span)?;
                let (ckw, cargs, cspan) = self.list(&args[0], "a role chain")?;
                if ckw != "chain" {
                    return err(format!("expected `(chain ...)`, found `{ckw}`"), cspan);
                }
                if cargs.is_empty() {
                    return err("a role chain needs at least one role", cspan);
                }
                let chain = cargs.iter().map(|r| self.role(r)).collect::<PResult<Vec<_>>>()?;
                let sup = self.role(&args[1])?;
                rbox.abstract_rias.push(AbstractRia { chain, sup });
            }
            "cria" => {
                self.arity(kw, args, 2, span)?;
                rbox.concrete_rias.push(ConcreteRia {
                    sub: ConcreteRole(self.ident(&args[0], "a concrete role")?),
                    sup: ConcreteRole(self.ident(&args[1], "a concrete role")?),
                });
            }
            "ref" | "irr" | "sym" | "trans" => {
                self.arity(kw, args, 1, span)?;
                let r = self.role(&args[0])?;
                rbox.assertions.push(match kw {
                    "ref" => RoleAssertion::Ref(r),
                    "irr" => RoleAssertion::Irr(r),
                    "sym" => RoleAssertion::Sym(r),
                    _ => RoleAssertion::Trans(r),
                });
            }
            "dis" => {
                self.arity(kw, args, 2, span)?;
                rbox.assertions.push(RoleAssertion::Dis(self.role(&args[0])?, self.role(&args[1])?));
            }
            "fxnl" => {
                self.arity(kw, args, 1, span)?;
                match &args[0] {
                    SExpr::Atom(s, aspan) if s != "universal" => {
                        let name = self.ident(&args[0], "a role")?;
                        self.pending_fxnl.push((rbox.assertions.len(), name.clone(), *aspan));
                        rbox.assertions.push(RoleAssertion::Fxnl(FxnlTarget::Abstract(RoleExpr::Named(name))));
                    }
                    SExpr::List(items, _) if matches!(items.first(), Some(SExpr::Atom(h, _)) if h == "path") => {
                        let p = self.path(&args[0])?;
                        if !p.prefix.is_empty() {
                            return err("`fxnl` takes a role, not a path with abstract steps", span);
                        }
                        rbox.assertions.push(RoleAssertion::Fxnl(FxnlTarget::Concrete(p.concrete)));
                    }
                    other => {
                        let r = self.role(other)?;
                        rbox.assertions.push(RoleAssertion::Fxnl(FxnlTarget::Abstract(r)));
                    }
                }
            }
            "fixed" => {
                return err(
                    "fixed predicates are not supported; rewrite the KB so that every non-minimized predicate varies",
                    span,
                )
            }
            other => return err(format!("unknown R-Box form `{other}`"), span),
        }
        Ok(())
    }

    fn query(&mut self, args: &[SExpr], span: SourceSpan) -> PResult<Query> {
        let Some(first) = args.first() else {
            return err("`query` needs a query kind", span);
        };
        let kind = match first {
            SExpr::Atom(s, _) => s.as_str(),
            other => return err("expected a query kind", other.span()),
        };
        let rest = &args[1..];
        let q = match kind {
            "sat" | "gc-sat" => {
                self.arity(kind, rest, 0, span)?;
                if kind == "sat" {
                    Query::KbSat
                } else {
                    Query::GcSat
                }
            }
            "concept-sat" | "gc-concept-sat" => {
                self.arity(kind, rest, 1, span)?;
                let c = self.concept(&rest[0])?;
                if kind == "concept-sat" {
                    Query::ConceptSat(c)
                } else {
                    Query::GcConceptSat(c)
                }
            }
            "subsumes" | "gc-subsumes" => {
                self.arity(kind, rest, 2, span)?;
                let c = self.concept(&rest[0])?;
                let d = self.concept(&rest[1])?;
                if kind == "subsumes" {
                    Query::Subsumes(c, d)
                } else {
                    Query::GcSubsumes(c, d)
                }
            }
            "instance" | "gc-instance" => {
                self.arity(kind, rest, 2, span)?;
                let a = self.ident(&rest[0], "an individual")?;
                let c = self.concept(&rest[1])?;
                if kind == "instance" {
                    Query::Instance(a, c)
                } else {
                    Query::GcInstance(a, c)
                }
            }
            other => return err(format!("unknown query kind `{other}`"), first.span()),
        };
        Ok(q)
    }

    fn top_form(&mut self, e: &SExpr, doc: &mut Document, errors: &mut Vec<ParseDiagnostic>) {
        let (kw, args, span) = match self.list(e, "a top-level form") {
            Ok(x) => x,
            Err(d) => {
                errors.push(d);
                return;
            }
        };
        let mut record = |r: PResult<()>| {
            if let Err(d) = r {
                errors.push(d);
            }
        };
        match kw {
            "abox" => {
                for item in args {
                    let r = self.assertion(item).map(|a| doc.kb.abox.push(a));
                    record(r);
                }
            }
            "tbox" => {
                for item in args {
                    let r = self.tbox_item(item, &mut doc.kb.tbox);
                    record(r);
                }
            }
            "rbox" => {
                for item in args {
                    let r = self.rbox_item(item, &mut doc.kb.rbox);
                    record(r);
                }
            }
            "minimize" => {
                let r = self.arity(kw, args, 1, span).and_then(|_| self.concept(&args[0]));
                record(r.map(|c| doc.kb.minimized.push(Minimized::Concept(c))));
            }
            "minimize-role" => {
                let r = self.arity(kw, args, 1, span).and_then(|_| self.ident(&args[0], "a role name"));
                record(r.map(|n| doc.kb.minimized.push(Minimized::Role(n))));
            }
            "fixed" => record(err(
                "fixed predicates are not supported; rewrite the KB so that every non-minimized predicate varies",
                span,
            )),
            "constraint-system" => {
                let r = self.arity(kw, args, 1, span).and_then(|_| self.ident(&args[0], "a constraint system name"));
                match r {
                    Ok(name) => {
                        if doc.kb.constraint_system.is_some() {
                            record(err("constraint system declared twice", span));
                        } else {
                            doc.kb.constraint_system = Some(name);
                        }
                    }
                    Err(d) => errors.push(d),
                }
            }
            "query" => {
                let r = self.query(args, span);
                record(r.map(|q| doc.queries.push(q)));
            }
            other => record(err(format!("unknown top-level form `{other}`"), span)),
        }
    }
}

fn find_symbol_span(forms: &[SExpr], symbol: &str) -> SourceSpan {
    let mut stack: Vec<&SExpr> = forms.iter().rev().collect();
    while let Some(e) = stack.pop() {
        match e {
            SExpr::Atom(s, span) if s == symbol => return *span,
            SExpr::Atom(..) => {}
            SExpr::List(items, _) => stack.extend(items.iter().rev()),
        }
    }
    SourceSpan::default()
}

fn query_concepts(q: &Query) -> Vec<&Concept> {
    match q {
        Query::KbSat | Query::GcSat => vec![],
        Query::ConceptSat(c) | Query::GcConceptSat(c) | Query::Instance(_, c) | Query::GcInstance(_, c) => vec![c],
        Query::Subsumes(c, d) | Query::GcSubsumes(c, d) => vec![c, d],
    }
}

fn validate(doc: &Document, forms: &[SExpr], errors: &mut Vec<ParseDiagnostic>) {
    // Concepts mentioned by queries share the document's vocabulary.
    let mut probe = doc.kb.clone();
    for q in &doc.queries {
        for c in query_concepts(q) {
            probe.tbox.push(Gci::new(c.clone(), Concept::Top));
        }
        if let Query::Instance(a, _) | Query::GcInstance(a, _) = q {
            probe.tbox.push(Gci::new(Concept::Nominal(a.clone()), Concept::Top));
        }
    }
    match free_vocabulary(&probe) {
        Err(ModelError::VocabularyClash { symbol, first, second }) => {
            errors.push(ParseDiagnostic::error(
                format!("symbol `{symbol}` is used both as {first} and as {second}"),
                find_symbol_span(forms, &symbol),
            ));
        }
        Ok(v) => {
            let valued: BTreeSet<&str> = doc
                .kb
                .abox
                .iter()
                .filter_map(|a| match a {
                    Assertion::ConcreteValue(_, _, i) => Some(i.as_str()),
                    _ => None,
                })
                .collect();
            for i in &v.constraint_individuals {
                if !valued.contains(i.as_str()) {
                    errors.push(ParseDiagnostic::error(
                        format!("constraint individual `{i}` has no `cvalue` assertion"),
                        find_symbol_span(forms, i),
                    ));
                }
            }
        }
    }
}

fn parse_forms(text: &str) -> Result<(Vec<SExpr>, Document, Vec<ParseDiagnostic>), ParseErrors> {
    let forms = read_all(text)?;
    let mut p = Parser { warnings: Vec::new(), max_cardinality: DEFAULT_MAX_CARDINALITY, pending_fxnl: Vec::new() };
    let mut doc = Document::default();
    let mut errors = Vec::new();
    for f in &forms {
        p.top_form(f, &mut doc, &mut errors);
    }
    if !errors.is_empty() {
        return Err(ParseErrors(errors));
    }
    resolve_fxnl(&mut doc, &p.pending_fxnl);
    validate(&doc, &forms, &mut errors);
    if !errors.is_empty() {
        return Err(ParseErrors(errors));
    }
    Ok((forms, doc, p.warnings))
}

/// `(fxnl X)` names a concrete role exactly when X is used as a concrete role
/// somewhere else in the document.
fn resolve_fxnl(doc: &mut Document, pending: &[(usize, String, SourceSpan)]) {
    if pending.is_empty() {
        return;
    }
    let mut probe = doc.kb.clone();
    let pending_idx: BTreeSet<usize> = pending.iter().map(|p| p.0).collect();
    probe.rbox.assertions =
        probe.rbox.assertions.into_iter().enumerate().filter(|(i, _)| !pending_idx.contains(i)).map(|(_, a)| a).collect();
    for q in &doc.queries {
        for c in query_concepts(q) {
            probe.tbox.push(Gci::new(c.clone(), Concept::Top));
        }
    }
    let concrete: BTreeSet<String> = match free_vocabulary(&probe) {
        Ok(v) => v.concrete_roles,
        // The clash is reported by validation.
        Err(_) => return,
    };
    for (idx, name, _) in pending {
        if concrete.contains(name) {
            doc.kb.rbox.assertions[*idx] = RoleAssertion::Fxnl(FxnlTarget::Concrete(ConcreteRole(name.clone())));
        }
    }
}

/// Parses a whole `.kbx` document.
pub fn parse_document(text: &str) -> Result<ParsedDocument, ParseErrors> {
    let (_, document, warnings) = parse_forms(text)?;
    Ok(ParsedDocument { document, warnings })
}

/// Like [`parse_document`] but accepts arbitrary bytes, rejecting invalid UTF-8.
pub fn parse_document_bytes(bytes: &[u8]) -> Result<ParsedDocument, ParseErrors> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse_document(text),
        Err(e) => {
            let pos = e.valid_up_to();
            let prefix = &bytes[..pos];
            let line = 1 + prefix.iter().filter(|&&b| b == b'\n').count();
            let column = 1 + prefix.iter().rev().take_while(|&&b| b != b'\n').count();
            Err(ParseErrors::single("input is not valid UTF-8", SourceSpan { start: pos, end: pos + 1, line, column }))
        }
    }
}

/// Parses a document and returns its knowledge base, ignoring queries.
pub fn parse_kb(text: &str) -> Result<KnowledgeBase, ParseErrors> {
    parse_document(text).map(|p| p.document.kb)
}

/// Parses a single `(query ...)` form.
pub fn parse_query(text: &str) -> Result<Query, ParseErrors> {
    let forms = read_all(text)?;
    let [form] = forms.as_slice() else {
        return Err(ParseErrors::single("expected exactly one `(query ...)` form", SourceSpan::default()));
    };
    let mut p = Parser { warnings: Vec::new(), max_cardinality: DEFAULT_MAX_CARDINALITY, pending_fxnl: Vec::new() };
    let (kw, args, span) = p.list(form, "a query").map_err(|d| ParseErrors(vec![d]))?;
    if kw != "query" {
        return Err(ParseErrors::single(format!("expected `query`, found `{kw}`"), span));
    }
    p.query(args, span).map_err(|d| ParseErrors(vec![d]))
}

/// Parses a single concept expression.
pub fn parse_concept(text: &str) -> Result<Concept, ParseErrors> {
    let forms = read_all(text)?;
    let [form] = forms.as_slice() else {
        return Err(ParseErrors::single("expected exactly one concept", SourceSpan::default()));
    };
    let mut p = Parser { warnings: Vec::new(), max_cardinality: DEFAULT_MAX_CARDINALITY, pending_fxnl: Vec::new() };
    p.concept(form).map_err(|d| ParseErrors(vec![d]))
}
