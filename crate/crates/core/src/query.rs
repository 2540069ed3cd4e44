//! Reasoning queries reduced to knowledge-base satisfiability.

use thiserror::Error;

use crate::circumscription::{CircumscriptionError, GcVerdict, GroundedExtension, GroundedKb};
use crate::constraint::ConstraintSystemDef;
use crate::kb_model::{Assertion, Concept, KnowledgeBase, Query};
use crate::preprocess::{preprocess, PreprocessError};
use crate::tableau::{run_with, ExtractedModel, ResourceLimits, RunOptions, Stats, Verdict};

/// Individual introduced for concept-level queries; cannot clash with parsed names.
pub const FRESH_INDIVIDUAL: &str = "%x";

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
    #[error(transparent)]
    Circumscription(#[from] CircumscriptionError),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Answer {
    /// Satisfiable or entailed.
    Yes,
    /// Unsatisfiable or not entailed.
    No,
    ResourceLimitExceeded(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct QueryResult {
    pub answer: Answer,
    pub stats: Stats,
    /// A witness model, when the answer comes with one.
    pub model: Option<Box<ExtractedModel>>,
    /// Final minimized extensions for `gc-sat`.
    pub extension: Option<GroundedExtension>,
    /// Minimization rounds for `gc-sat`.
    pub iterations: Option<usize>,
    /// Rule applications of the tableau run, when tracing was requested.
    pub trace: Vec<String>,
}

impl QueryResult {
    fn plain(answer: Answer, stats: Stats) -> Self {
        QueryResult { answer, stats, model: None, extension: None, iterations: None, trace: Vec::new() }
    }
}

fn with_assertion(kb: &KnowledgeBase, a: Assertion) -> KnowledgeBase {
    let mut kb = kb.clone();
    kb.abox.push(a);
    kb.minimized.clear();
    kb
}

/// Decides satisfiability of `kb`; `positive` is the answer when satisfiable.
fn decide(kb: &KnowledgeBase, sys: &ConstraintSystemDef, opts: Options, positive: bool) -> Result<QueryResult, QueryError> {
    let rkb = preprocess(kb, sys)?;
    let out = run_with(&rkb, RunOptions { limits: opts.limits, trace: opts.trace, accept: None });
    let yes_no = |sat: bool| if sat == positive { Answer::Yes } else { Answer::No };
    let mut result = match out.verdict {
        Verdict::Satisfiable(m) => {
            let mut r = QueryResult::plain(yes_no(true), out.stats);
            if positive {
                r.model = Some(m);
            }
            r
        }
        Verdict::Unsatisfiable => QueryResult::plain(yes_no(false), out.stats),
        Verdict::ResourceLimitExceeded(why) => QueryResult::plain(Answer::ResourceLimitExceeded(why), out.stats),
    };
    result.trace = out.trace;
    Ok(result)
}

#[derive(Clone, Copy, Debug, Default)]
struct Options {
    limits: ResourceLimits,
    trace: bool,
}

fn gc(result: Result<crate::circumscription::GcOutcome<bool>, CircumscriptionError>) -> Result<QueryResult, QueryError> {
    match result {
        Ok(o) => Ok(QueryResult::plain(if o.value { Answer::Yes } else { Answer::No }, o.stats)),
        Err(CircumscriptionError::ResourceLimitExceeded(why)) => {
            Ok(QueryResult::plain(Answer::ResourceLimitExceeded(why), Stats::default()))
        }
        Err(e) => Err(e.into()),
    }
}

/// Answers `q` against `kb`. Classical queries ignore the circumscription pattern.
pub fn answer(kb: &KnowledgeBase, q: &Query, sys: &ConstraintSystemDef, limits: ResourceLimits) -> Result<QueryResult, QueryError> {
    answer_traced(kb, q, sys, limits, false)
}

/// Like [`answer`], recording the rule applications of classical queries.
pub fn answer_traced(
    kb: &KnowledgeBase,
    q: &Query,
    sys: &ConstraintSystemDef,
    limits: ResourceLimits,
    trace: bool,
) -> Result<QueryResult, QueryError> {
    let opts = Options { limits, trace };
    let fresh = || FRESH_INDIVIDUAL.to_string();
    match q {
        Query::KbSat => {
            let mut plain = kb.clone();
            plain.minimized.clear();
            decide(&plain, sys, opts, true)
        }
        Query::ConceptSat(c) => decide(&with_assertion(kb, Assertion::Concept(fresh(), c.clone())), sys, opts, true),
        Query::Subsumes(c, d) => {
            let probe = Concept::and(c.clone(), Concept::not(d.clone()));
            decide(&with_assertion(kb, Assertion::Concept(fresh(), probe)), sys, opts, false)
        }
        Query::Instance(a, c) => {
            decide(&with_assertion(kb, Assertion::Concept(a.clone(), Concept::not(c.clone()))), sys, opts, false)
        }
        Query::GcSat => {
            let g = GroundedKb::new(kb, sys)?;
            match g.model_finder(limits) {
                Ok(o) => Ok(match o.value {
                    GcVerdict::Satisfiable { extension, model, iterations } => QueryResult {
                        answer: Answer::Yes,
                        stats: o.stats,
                        model: Some(model),
                        extension: Some(extension),
                        iterations: Some(iterations),
                        trace: Vec::new(),
                    },
                    GcVerdict::Unsatisfiable => QueryResult::plain(Answer::No, o.stats),
                }),
                Err(CircumscriptionError::ResourceLimitExceeded(why)) => {
                    Ok(QueryResult::plain(Answer::ResourceLimitExceeded(why), Stats::default()))
                }
                Err(e) => Err(e.into()),
            }
        }
        Query::GcInstance(a, c) => gc(GroundedKb::new(kb, sys)?.entails_instance(a, c, limits)),
        Query::GcConceptSat(c) => gc(GroundedKb::new(kb, sys)?.concept_satisfiable(c, limits)),
        Query::GcSubsumes(c, d) => gc(GroundedKb::new(kb, sys)?.subsumes(c, d, limits)),
    }
}
