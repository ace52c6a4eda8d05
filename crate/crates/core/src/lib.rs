//! Pre-retrieval difficulty estimation for open-domain multi-hop questions.
//!
//! The crate answers "how hard will this multi-hop question be for a
//! retriever?" before any retrieval runs, from nothing but the question
//! text and corpus n-gram statistics. It also ships the measurement
//! protocol used to judge such predictions and a planner that turns
//! difficulty classes into per-question retrieval budgets.
//!
//! Pipeline, bottom to top:
//!
//! - [`corpus_index`]: tokenize a document collection and build the
//!   document-frequency / collection-frequency statistics everything else
//!   reads.
//! - [`term_extraction`]: pull the salient spans (entities, frozen
//!   phrases) out of a question and derive its n-gram set.
//! - [`retrieval_path`]: relate the question to its supporting documents
//!   through rare shared terms, classify the resulting path (bridge,
//!   comparison, mixed), or predict the type pre-retrieval.
//! - [`qpp`]: turn the n-gram set plus path type into a retrieval
//!   probability estimate, alongside the classic IDF / SCS / SCQ
//!   baselines.
//! - [`evaluation`]: interleaved average precision, rank correlations with
//!   significance, pairwise difficulty accuracy, PEM/PR, answer EM/F1, and
//!   quartile difficulty classes.
//! - [`budget`]: map difficulty classes to adaptive retrieval budgets.

pub mod budget;
pub mod corpus_index;
pub mod error;
pub mod evaluation;
pub mod qpp;
pub mod retrieval_path;
pub mod term_extraction;
pub mod tokenize;

pub use budget::{plan_batch, plan_budget, BatchPlan, BudgetPolicy, QuestionBudget};
pub use corpus_index::{build_index, DfIndex, Document, IndexBuilder, DEFAULT_MAX_N};
pub use error::{Error, Result};
pub use evaluation::{
    answer_em_f1, average_precision, bucket_by_quartile, bucket_scores, correlations,
    coverage_cost, evaluate_scores, interleave, pairwise_accuracy, pem_pr, AnswerPair,
    BucketAssignment, ClassCounts, Correlation, CorrelationReport, CorrelationSet,
    DifficultyClass, EvalReport, PerQuestionRow, RetrievalRun,
};
pub use qpp::{
    baseline_idf, baseline_scq, baseline_scs, estimate, estimate_bridge, estimate_comparison,
    estimate_mixed, specificity, Aggregation, ChosenNgram, DifficultyEstimate, EstimatorConfig,
};
pub use retrieval_path::{
    build_path_graph, classify_path, predict_path_type, related, BinaryPathLabel, PathGraph,
    PathType, Witness,
};
pub use term_extraction::{
    build_ngram_set, extract_entities, extract_frozen_phrases, NGram, NGramSet, SpanAnnotation,
    SpanKind, SpanSource, TermSpan,
};
pub use tokenize::{ngram_key, ngram_keys, tokenize, tokenize_spanned, SpannedToken};
