use std::time::{Duration, Instant};

use crate::preprocess::ReducedKb;

use super::blocking::blocking_status;
use super::model::{extract, ExtractedModel};
use super::rules::Engine;
use super::state::{dep_bit, CompletionSystem, Deps};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ResourceLimits {
    /// Most live abstract nodes in any completion system.
    pub max_nodes: usize,
    pub timeout: Duration,
}

impl Default for ResourceLimits {
    fn default() -> Self {
        ResourceLimits { max_nodes: 50_000, timeout: Duration::from_secs(60) }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    /// Peak number of live abstract nodes.
    pub nodes: usize,
    pub rule_applications: u64,
    pub branches: u64,
    pub millis: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    Satisfiable(Box<ExtractedModel>),
    Unsatisfiable,
    ResourceLimitExceeded(String),
}

impl Verdict {
    pub fn is_sat(&self) -> bool {
        matches!(self, Verdict::Satisfiable(_))
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self, Verdict::Unsatisfiable)
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub verdict: Verdict,
    pub stats: Stats,
    pub trace: Vec<String>,
}

/// Predicate over complete clash-free systems; rejected ones are treated as
/// failed branches.
pub type ModelFilter<'f> = &'f dyn Fn(&ExtractedModel) -> bool;

#[derive(Clone, Copy, Default)]
pub struct RunOptions<'f> {
    pub limits: ResourceLimits,
    pub trace: bool,
    pub accept: Option<ModelFilter<'f>>,
}

/// Decides satisfiability of a reduced knowledge base.
pub fn run(rkb: &ReducedKb, limits: ResourceLimits) -> RunOutcome {
    run_with(rkb, RunOptions { limits, ..Default::default() })
}

/// Open alternatives of one choice point.
struct Frame {
    alts: Vec<CompletionSystem>,
    /// Levels behind the failures of the alternatives tried so far.
    failed: Deps,
    /// Levels behind the facts that triggered the choice.
    trigger: Deps,
}

/// Next open alternative after a failure depending on `deps`. Choice points
/// the failure does not depend on are dropped without trying their other
/// alternatives.
fn backjump(stack: &mut Vec<Frame>, mut deps: Deps) -> Option<CompletionSystem> {
    while !stack.is_empty() {
        let level = stack.len() - 1;
        if deps & dep_bit(level) == 0 {
            stack.pop();
            continue;
        }
        let top = &mut stack[level];
        top.failed |= deps;
        if let Some(s) = top.alts.pop() {
            return Some(s);
        }
        deps = top.failed | top.trigger;
        stack.pop();
    }
    None
}

pub fn run_with(rkb: &ReducedKb, opts: RunOptions<'_>) -> RunOutcome {
    let start = Instant::now();
    let mut eng = Engine::new(rkb);
    let mut stats = Stats::default();
    let mut trace = Vec::new();
    let mut stack: Vec<Frame> = Vec::new();
    let mut current = eng.initialize();

    let finish = |verdict, mut stats: Stats, trace| {
        stats.millis = start.elapsed().as_millis() as u64;
        RunOutcome { verdict, stats, trace }
    };

    loop {
        let live = current.live_count();
        stats.nodes = stats.nodes.max(live);
        if live > opts.limits.max_nodes {
            return finish(
                Verdict::ResourceLimitExceeded(format!("more than {} live nodes", opts.limits.max_nodes)),
                stats,
                trace,
            );
        }
        if start.elapsed() > opts.limits.timeout {
            return finish(
                Verdict::ResourceLimitExceeded(format!("timeout after {:?}", opts.limits.timeout)),
                stats,
                trace,
            );
        }
        eng.refresh_network(&mut current);
        let failure = if let Some((why, deps)) = eng.find_clash(&current) {
            if opts.trace {
                trace.push(format!("clash: {why}"));
            }
            Some(deps)
        } else {
            let blocks = blocking_status(&current, eng.sys());
            match eng.applicable_rule(&current, &blocks) {
                None => {
                    let model = extract(&current, &blocks, &eng.it, rkb);
                    if opts.accept.is_none_or(|f| f(&model)) {
                        return finish(Verdict::Satisfiable(Box::new(model)), stats, trace);
                    }
                    if opts.trace {
                        trace.push("complete system rejected by filter".into());
                    }
                    // A rejected model is not a clash; every choice may matter.
                    Some(Deps::MAX)
                }
                Some(inst) => {
                    if opts.trace {
                        let concept = inst.concept.map(|c| format!(" {}", eng.it.concept(c))).unwrap_or_default();
                        let node = inst.node.map(|x| format!(" at {x}")).unwrap_or_default();
                        trace.push(format!("[{}] {}{node}{concept}", stack.len(), inst.kind.name()));
                    }
                    stats.rule_applications += 1;
                    let bit = dep_bit(stack.len());
                    match eng.apply_rule(&mut current, &inst, bit) {
                        None => Some(Deps::MAX),
                        Some(mut alts) => {
                            if !alts.is_empty() {
                                stats.branches += 1;
                                alts.reverse();
                                stack.push(Frame { alts, failed: 0, trigger: current.ctx });
                            }
                            None
                        }
                    }
                }
            }
        };
        if let Some(deps) = failure {
            match backjump(&mut stack, deps) {
                Some(s) => current = s,
                None => return finish(Verdict::Unsatisfiable, stats, trace),
            }
        }
    }
}
