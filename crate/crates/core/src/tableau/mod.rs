//! Tableau decision procedure for reduced knowledge bases.

mod blocking;
mod clash;
mod interner;
mod model;
mod rules;
mod search;
mod state;

pub use model::{validate_model, ExtractedModel, ModelCEdge, ModelCNode, ModelEdge, ModelNode};
pub use rules::RuleKind;
pub use search::{run, run_with, ModelFilter, ResourceLimits, RunOptions, RunOutcome, Stats, Verdict};
