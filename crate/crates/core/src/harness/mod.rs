//! Evaluation: mutant injection, repair with NSGA-II and a random baseline,
//! scoring against the original, and the statistics that compare the two.

mod eval;
mod mutants;
mod score;
mod stats;

use thiserror::Error;

pub use eval::{
    derive_seed, run_evaluation, write_tables, EvalConfig, EvaluationReport, FaultySet, Method, RunRow, Table2Row,
    Table3Row, FORMAT_VERSION,
};
pub use mutants::{
    applies_to, candidate_edits, classify_candidates, feasible_categories, generate_mutants, inverse, merge_mutants,
    Candidate, Merged, Mutant, MutantSet,
};
pub use score::{score_patch, Residual, Score};
pub use stats::{cohens_d, mann_whitney_u, MannWhitney, EXACT_BELOW};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("transformation `{name}` has {errors} type error(s); mutants need a clean original")]
    NotClean { name: String, errors: usize },
    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
