//! Independent queries answered together, in parallel when the `parallel`
//! feature is enabled.

use crate::constraint::ConstraintSystemDef;
use crate::kb_model::{KnowledgeBase, Query};
use crate::query::{answer, QueryError, QueryResult};
use crate::tableau::ResourceLimits;

#[derive(Clone, Debug)]
pub struct Job {
    pub kb: KnowledgeBase,
    pub query: Query,
    pub system: ConstraintSystemDef,
    pub limits: ResourceLimits,
}

impl Job {
    pub fn run(&self) -> Result<QueryResult, QueryError> {
        answer(&self.kb, &self.query, &self.system, self.limits)
    }
}

/// Answers every job one after another.
pub fn run_sequential(jobs: &[Job]) -> Vec<Result<QueryResult, QueryError>> {
    jobs.iter().map(Job::run).collect()
}

/// Answers every job on the rayon pool; results keep the input order.
#[cfg(feature = "parallel")]
pub fn run_parallel(jobs: &[Job]) -> Vec<Result<QueryResult, QueryError>> {
    use rayon::prelude::*;
    jobs.par_iter().map(Job::run).collect()
}

/// Answers every job with the best available strategy.
pub fn run_batch(jobs: &[Job]) -> Vec<Result<QueryResult, QueryError>> {
    #[cfg(feature = "parallel")]
    {
        run_parallel(jobs)
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_sequential(jobs)
    }
}

/// Maps `f` over `items`, in parallel when available, keeping the order.
pub fn map_items<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}
