//! Query construction, evaluation and experiment orchestration.

mod eval;
mod experiment;
mod explain;
mod query;

pub use eval::{evaluate_domain, evaluate_recall, DomainRecall, EvalReport};
pub use experiment::{
    run_experiment, run_experiment_with, ExperimentConfig, ExperimentOutcome, ModeReport, SeedReport,
};
pub use explain::{explain, ExplainReport, KeywordExplanation, MarkedWord};
pub use query::{ExtractorView, QueryBuilder, QueryMode, QuerySpec, DEFAULT_CONTEXT_WORDS};

/// Number of retrieved candidates used for Recall@n.
pub const DEFAULT_N: usize = 64;
/// Number of extracted keywords added to a query.
pub const DEFAULT_K: usize = 32;
