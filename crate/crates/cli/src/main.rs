use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};

use hopqpp_cli::commands::{
    cmd_bucket, cmd_classify, cmd_evaluate, cmd_import_hotpotqa, cmd_index, cmd_plan, cmd_score,
    cmd_synth, BucketOpts, ClassifyMode, ClassifyOpts, EvaluateOpts, ImportOpts, IndexOpts,
    PlanOpts, ScoreOpts, SynthOpts,
};
use hopqpp_cli::config::{require, ConfigMap};
use hopqpp_cli::hotpot::ImportMode;
use hopqpp_cli::pipeline::ScoreMethod;
use hopqpp_cli::synth::SynthConfig;
use hopqpp_core::EstimatorConfig;

/// Pre-retrieval difficulty prediction for multi-hop questions.
#[derive(Parser)]
#[command(name = "hopqpp", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a raw HotpotQA-schema JSON file into corpus and question JSONL.
    ImportHotpotqa(ImportArgs),
    /// Build the n-gram statistics index from a corpus JSONL file.
    Index(IndexArgs),
    /// Classify retrieval paths (oracle mode) or predict types (heuristic mode).
    Classify(ClassifyArgs),
    /// Score questions with the path estimator or a baseline.
    Score(ScoreArgs),
    /// Evaluate scores against retrieval runs.
    Evaluate(EvaluateArgs),
    /// Assign quartile difficulty classes to scored questions.
    Bucket(BucketArgs),
    /// Plan per-question retrieval budgets from class assignments.
    Plan(PlanArgs),
    /// Generate a seeded synthetic corpus, questions, runs, and ground truth.
    Synth(SynthArgs),
}

/// Shared `--config` flag: a JSON object whose keys mirror the long flag
/// names; explicit flags win.
#[derive(Args)]
struct ConfigArg {
    #[arg(long, global = false)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ImportArgs {
    #[command(flatten)]
    config: ConfigArg,
    /// Raw dataset file (JSON array of records).
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    corpus_out: Option<PathBuf>,
    #[arg(long)]
    questions_out: Option<PathBuf>,
    /// Corpus granularity when titles recur across records.
    #[arg(long, value_enum)]
    mode: Option<ImportMode>,
}

#[derive(Args)]
struct IndexArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Largest n-gram length to index.
    #[arg(long)]
    max_n: Option<usize>,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long)]
    questions: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<ClassifyMode>,
    /// Corpus JSONL (oracle mode).
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Index file (oracle mode).
    #[arg(long)]
    index: Option<PathBuf>,
    /// Relatedness threshold.
    #[arg(long)]
    p_thr: Option<f64>,
    /// Span annotation sidecar JSONL.
    #[arg(long)]
    annotations: Option<PathBuf>,
    /// External type predictions JSONL (heuristic mode).
    #[arg(long)]
    types: Option<PathBuf>,
}

#[derive(Args)]
struct ScoreArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long)]
    questions: Option<PathBuf>,
    #[arg(long)]
    index: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    method: Option<ScoreMethod>,
    #[arg(long)]
    annotations: Option<PathBuf>,
    #[arg(long)]
    types: Option<PathBuf>,
    #[arg(long)]
    p_thr: Option<f64>,
    /// Constant second-hop probability.
    #[arg(long)]
    p_hop2: Option<f64>,
    /// Score for questions without a usable path.
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long)]
    scores: Option<PathBuf>,
    #[arg(long)]
    runs: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-hop cutoff for PEM/PR and the uncovered-cost sentinel.
    #[arg(long)]
    k: Option<usize>,
    /// Optional per-question CSV.
    #[arg(long)]
    per_question: Option<PathBuf>,
    /// Questions JSONL with gold answers (needed with --answers).
    #[arg(long)]
    questions: Option<PathBuf>,
    /// Predicted answers JSONL for EM/F1.
    #[arg(long)]
    answers: Option<PathBuf>,
}

#[derive(Args)]
struct BucketArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long)]
    scores: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlanArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long)]
    buckets: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Policy JSON: {"easy": 1, "hard": 4, "extra_hard": 5, "base_k": 5}.
    #[arg(long)]
    policy: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    docs: Option<usize>,
    #[arg(long)]
    questions: Option<usize>,
    /// Per-hop depth of the simulated runs.
    #[arg(long)]
    k: Option<usize>,
    /// 0 = cost-consistent deterministic ranks; (0, 1] = sampled ranks.
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    p_hop2: Option<f64>,
}

fn parse_enum<T: ValueEnum>(name: &str, value: Option<String>) -> Result<Option<T>> {
    value
        .map(|s| {
            T::from_str(&s, true)
                .map_err(|e| anyhow::anyhow!("config key {name:?} has invalid value {s:?}: {e}"))
        })
        .transpose()
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::ImportHotpotqa(args) => {
            let cfg = ConfigMap::load(args.config.config.as_deref())?;
            let opts = ImportOpts {
                input: require("input", args.input, cfg.path("input")?)?,
                corpus_out: require("corpus-out", args.corpus_out, cfg.path("corpus_out")?)?,
                questions_out: require(
                    "questions-out",
                    args.questions_out,
                    cfg.path("questions_out")?,
                )?,
                mode: args
                    .mode
                    .or(parse_enum("mode", cfg.string("mode")?)?)
                    .unwrap_or(ImportMode::FirstParagraph),
            };
            let stats = cmd_import_hotpotqa(&opts)?;
            eprintln!(
                "imported {} questions, {} documents ({} records skipped, {} duplicate titles, {} empty documents)",
                stats.questions,
                stats.documents,
                stats.skipped_records,
                stats.duplicate_titles,
                stats.empty_documents
            );
        }
        Command::Index(args) => {
            let cfg = ConfigMap::load(args.config.config.as_deref())?;
            let opts = IndexOpts {
                corpus: require("corpus", args.corpus, cfg.path("corpus")?)?,
                out: require("out", args.out, cfg.path("out")?)?,
                max_n: args
                    .max_n
                    .or(cfg.usize("max_n")?)
                    .unwrap_or(hopqpp_core::DEFAULT_MAX_N),
            };
            let (docs, ngrams) = cmd_index(&opts)?;
            eprintln!("indexed {docs} documents, {ngrams} distinct n-grams");
        }
        Command::Classify(args) => {
            let cfg = ConfigMap::load(args.config.config.as_deref())?;
            let opts = ClassifyOpts {
                questions: require("questions", args.questions, cfg.path("questions")?)?,
                out: require("out", args.out, cfg.path("out")?)?,
                mode: args
                    .mode
                    .or(parse_enum("mode", cfg.string("mode")?)?)
                    .unwrap_or(ClassifyMode::Heuristic),
                corpus: args.corpus.or(cfg.path("corpus")?),
                index: args.index.or(cfg.path("index")?),
                p_thr: args.p_thr.or(cfg.f64("p_thr")?).unwrap_or(0.001),
                annotations: args.annotations.or(cfg.path("annotations")?),
                types: args.types.or(cfg.path("types")?),
            };
            let summary = cmd_classify(&opts)?;
            eprintln!(
                "classified {} questions: {} bridge, {} comparison, {} mixed, {} no_path ({} skipped)",
                summary.rows,
                summary.bridge,
                summary.comparison,
                summary.mixed,
                summary.no_path,
                summary.skipped
            );
        }
        Command::Score(args) => {
            let cfg = ConfigMap::load(args.config.config.as_deref())?;
            let defaults = EstimatorConfig::default();
            let opts = ScoreOpts {
                questions: require("questions", args.questions, cfg.path("questions")?)?,
                index: require("index", args.index, cfg.path("index")?)?,
                out: require("out", args.out, cfg.path("out")?)?,
                method: require(
                    "method",
                    args.method,
                    parse_enum("method", cfg.string("method")?)?,
                )?,
                annotations: args.annotations.or(cfg.path("annotations")?),
                types: args.types.or(cfg.path("types")?),
                estimator: EstimatorConfig {
                    p_thr: args.p_thr.or(cfg.f64("p_thr")?).unwrap_or(defaults.p_thr),
                    p_hop2: args.p_hop2.or(cfg.f64("p_hop2")?).unwrap_or(defaults.p_hop2),
                    epsilon: args
                        .epsilon
                        .or(cfg.f64("epsilon")?)
                        .unwrap_or(defaults.epsilon),
                },
            };
            let rows = cmd_score(&opts)?;
            eprintln!("scored {rows} questions with {}", opts.method.name());
        }
        Command::Evaluate(args) => {
            let cfg = ConfigMap::load(args.config.config.as_deref())?;
            let opts = EvaluateOpts {
                scores: require("scores", args.scores, cfg.path("scores")?)?,
                runs: require("runs", args.runs, cfg.path("runs")?)?,
                out: require("out", args.out, cfg.path("out")?)?,
                k: require("k", args.k, cfg.usize("k")?)?,
                per_question: args.per_question.or(cfg.path("per_question")?),
                questions: args.questions.or(cfg.path("questions")?),
                answers: args.answers.or(cfg.path("answers")?),
            };
            let report = cmd_evaluate(&opts)?;
            eprintln!(
                "evaluated {} questions: spearman {:.4} (p={:.2e}), pairwise accuracy {:.4}, PEM {:.4}, PR {:.4}",
                report.num_questions,
                report.spearman.coefficient,
                report.spearman.p_value,
                report.pairwise_accuracy,
                report.pem,
                report.pr
            );
        }
        Command::Bucket(args) => {
            let cfg = ConfigMap::load(args.config.config.as_deref())?;
            let opts = BucketOpts {
                scores: require("scores", args.scores, cfg.path("scores")?)?,
                out: require("out", args.out, cfg.path("out")?)?,
            };
            let counts = cmd_bucket(&opts)?;
            eprintln!(
                "bucketed: {} extra_hard, {} hard, {} easy",
                counts.extra_hard, counts.hard, counts.easy
            );
        }
        Command::Plan(args) => {
            let cfg = ConfigMap::load(args.config.config.as_deref())?;
            let opts = PlanOpts {
                buckets: require("buckets", args.buckets, cfg.path("buckets")?)?,
                out: require("out", args.out, cfg.path("out")?)?,
                policy: args.policy.or(cfg.path("policy")?),
            };
            let (adaptive, constant) = cmd_plan(&opts)?;
            eprintln!("planned budgets: {adaptive} documents total (constant retriever: {constant})");
        }
        Command::Synth(args) => {
            let cfg = ConfigMap::load(args.config.config.as_deref())?;
            let defaults = SynthConfig::default();
            let opts = SynthOpts {
                out_dir: require("out-dir", args.out_dir, cfg.path("out_dir")?)?,
                config: SynthConfig {
                    seed: require("seed", args.seed, cfg.u64("seed")?)?,
                    num_docs: args.docs.or(cfg.usize("docs")?).unwrap_or(defaults.num_docs),
                    num_questions: args
                        .questions
                        .or(cfg.usize("questions")?)
                        .unwrap_or(defaults.num_questions),
                    k: args.k.or(cfg.usize("k")?).unwrap_or(defaults.k),
                    noise: args.noise.or(cfg.f64("noise")?).unwrap_or(defaults.noise),
                    p_hop2: args.p_hop2.or(cfg.f64("p_hop2")?).unwrap_or(defaults.p_hop2),
                },
            };
            let paths = cmd_synth(&opts)?;
            eprintln!(
                "synthesized corpus at {} (questions, runs, truth alongside)",
                paths.corpus.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
