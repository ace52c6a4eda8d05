//! Subcommand implementations.
//!
//! Each command reads its inputs, delegates to the library, writes its
//! outputs in question-id order, and drops a manifest next to the primary
//! output. Given identical inputs and configuration, outputs are
//! byte-identical.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::json;

use hopqpp_core::{
    build_index, build_path_graph, bucket_scores, classify_path, evaluate_scores, plan_batch,
    tokenize, AnswerPair, BucketAssignment, BudgetPolicy, ClassCounts, DfIndex, Document,
    EstimatorConfig, EvalReport, PathType, RetrievalRun, SpanAnnotation,
};

use crate::dataset::{
    self, load_annotations, load_questions, load_type_labels, read_jsonl, write_jsonl,
    QuestionRecord, ScoreRow,
};
use crate::hotpot::{self, ImportMode, ImportStats};
use crate::manifest::write_manifest;
use crate::pipeline::{analyze_question, score_batch, ScoreContext, ScoreMethod};
use crate::synth::{generate, SynthConfig};

pub struct ImportOpts {
    pub input: PathBuf,
    pub corpus_out: PathBuf,
    pub questions_out: PathBuf,
    pub mode: ImportMode,
}

pub fn cmd_import_hotpotqa(opts: &ImportOpts) -> Result<ImportStats> {
    let raw = std::fs::read_to_string(&opts.input)
        .with_context(|| format!("reading {}", opts.input.display()))?;
    let imported = hotpot::import(&raw, opts.mode)?;
    write_jsonl(&opts.corpus_out, &imported.corpus)?;
    write_jsonl(&opts.questions_out, &imported.questions)?;
    write_manifest(
        &opts.corpus_out,
        "import-hotpotqa",
        json!({
            "input": opts.input.display().to_string(),
            "corpus_out": opts.corpus_out.display().to_string(),
            "questions_out": opts.questions_out.display().to_string(),
            "mode": opts.mode,
        }),
        std::slice::from_ref(&opts.input),
    )?;
    Ok(imported.stats)
}

pub struct IndexOpts {
    pub corpus: PathBuf,
    pub out: PathBuf,
    pub max_n: usize,
}

pub fn cmd_index(opts: &IndexOpts) -> Result<(u64, usize)> {
    let docs: Vec<Document> = read_jsonl(&opts.corpus)?;
    let index = build_index(&docs, opts.max_n)?;
    index.save(&opts.out)?;
    write_manifest(
        &opts.out,
        "index",
        json!({
            "corpus": opts.corpus.display().to_string(),
            "out": opts.out.display().to_string(),
            "max_n": opts.max_n,
        }),
        std::slice::from_ref(&opts.corpus),
    )?;
    Ok((index.num_docs(), index.distinct_ngrams()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifyMode {
    /// Build the relatedness graph over the gold documents.
    Oracle,
    /// Predict the binary type from the question alone.
    Heuristic,
}

/// One classification output row. Oracle mode fills the graph fields.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathRow {
    pub question_id: String,
    pub path_type: PathType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witnesses: Option<BTreeMap<String, String>>,
    /// Oracle mode only, and only when the question carries an answer:
    /// one gold document both relates to the question and contains the
    /// answer verbatim, suggesting the question is answerable single-hop.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub single_doc_answer: Option<bool>,
}

pub struct ClassifyOpts {
    pub questions: PathBuf,
    pub out: PathBuf,
    pub mode: ClassifyMode,
    pub corpus: Option<PathBuf>,
    pub index: Option<PathBuf>,
    pub p_thr: f64,
    pub annotations: Option<PathBuf>,
    pub types: Option<PathBuf>,
}

#[derive(Debug, Default, Clone, Copy)]
pub struct ClassifySummary {
    pub rows: usize,
    pub bridge: usize,
    pub comparison: usize,
    pub mixed: usize,
    pub no_path: usize,
    /// Oracle mode: questions without exactly two resolvable gold docs.
    pub skipped: usize,
}

fn contains_contiguous(hay: &[String], needle: &[String]) -> bool {
    !needle.is_empty() && hay.windows(needle.len()).any(|w| w == needle)
}

/// Oracle-mode classification of one question; `None` when the question
/// does not have exactly two gold documents present in the corpus.
pub fn classify_question_oracle(
    q: &QuestionRecord,
    docs_by_id: &HashMap<&str, &Document>,
    index: &DfIndex,
    p_thr: f64,
    annotations: Option<&[SpanAnnotation]>,
) -> Result<Option<PathRow>> {
    let gold = match &q.gold_support {
        Some(gold) if gold.len() == 2 => gold,
        _ => return Ok(None),
    };
    let ids: Vec<&String> = gold.iter().collect();
    let (d1, d2) = match (docs_by_id.get(ids[0].as_str()), docs_by_id.get(ids[1].as_str())) {
        (Some(d1), Some(d2)) => (*d1, *d2),
        _ => return Ok(None),
    };

    let analysis = analyze_question(q, index, p_thr, annotations)?;
    let q_tokens = tokenize(&q.question);
    let graph = build_path_graph(&q_tokens, &analysis.ngram_set, d1, d2, index, p_thr)?;
    let path_type = classify_path(&graph);

    let mut edges = Vec::new();
    let mut witnesses = BTreeMap::new();
    for (name, witness) in [
        ("q_d1", &graph.q_d1),
        ("q_d2", &graph.q_d2),
        ("d1_d2", &graph.d1_d2),
    ] {
        if let Some(w) = witness {
            edges.push(name.to_string());
            witnesses.insert(name.to_string(), w.key());
        }
    }

    let single_doc_answer = q.answer.as_ref().map(|answer| {
        let answer_tokens = tokenize(answer);
        [(&graph.q_d1, d1), (&graph.q_d2, d2)]
            .iter()
            .any(|(edge, doc)| {
                edge.is_some() && contains_contiguous(&doc.tokens(), &answer_tokens)
            })
    });

    Ok(Some(PathRow {
        question_id: q.question_id.clone(),
        path_type,
        edges: Some(edges),
        witnesses: Some(witnesses),
        single_doc_answer,
    }))
}

pub fn cmd_classify(opts: &ClassifyOpts) -> Result<ClassifySummary> {
    let mut questions = load_questions(&opts.questions)?;
    questions.sort_by(|a, b| a.question_id.cmp(&b.question_id));
    let annotations = match &opts.annotations {
        Some(path) => Some(load_annotations(path)?),
        None => None,
    };

    let mut inputs = vec![opts.questions.clone()];
    let mut rows: Vec<PathRow> = Vec::with_capacity(questions.len());
    let mut summary = ClassifySummary::default();

    match opts.mode {
        ClassifyMode::Oracle => {
            let corpus = opts
                .corpus
                .as_ref()
                .context("oracle mode needs --corpus for the gold document texts")?;
            let index_path = opts.index.as_ref().context("oracle mode needs --index")?;
            let docs: Vec<Document> = read_jsonl(corpus)?;
            let index = DfIndex::load(index_path)?;
            let docs_by_id: HashMap<&str, &Document> =
                docs.iter().map(|d| (d.doc_id.as_str(), d)).collect();
            inputs.push(corpus.clone());
            inputs.push(index_path.clone());
            for q in &questions {
                let ann = annotations
                    .as_ref()
                    .and_then(|m| m.get(&q.question_id))
                    .map(|v| v.as_slice());
                match classify_question_oracle(q, &docs_by_id, &index, opts.p_thr, ann)? {
                    Some(row) => rows.push(row),
                    None => summary.skipped += 1,
                }
            }
        }
        ClassifyMode::Heuristic => {
            let labels = match &opts.types {
                Some(path) => {
                    inputs.push(path.clone());
                    Some(load_type_labels(path)?)
                }
                None => None,
            };
            for q in &questions {
                let ann = annotations
                    .as_ref()
                    .and_then(|m| m.get(&q.question_id))
                    .map(|v| v.as_slice());
                let entities = hopqpp_core::extract_entities(&q.question, ann)?;
                let external = labels
                    .as_ref()
                    .and_then(|m| m.get(&q.question_id).copied())
                    .or(q.dataset_type);
                let path_type = hopqpp_core::predict_path_type(&q.question, &entities, external);
                rows.push(PathRow {
                    question_id: q.question_id.clone(),
                    path_type,
                    edges: None,
                    witnesses: None,
                    single_doc_answer: None,
                });
            }
        }
    }

    if let Some(path) = &opts.annotations {
        inputs.push(path.clone());
    }
    for row in &rows {
        match row.path_type {
            PathType::Bridge => summary.bridge += 1,
            PathType::Comparison => summary.comparison += 1,
            PathType::Mixed => summary.mixed += 1,
            PathType::NoPath => summary.no_path += 1,
        }
    }
    summary.rows = rows.len();

    write_jsonl(&opts.out, &rows)?;
    write_manifest(
        &opts.out,
        "classify",
        json!({
            "questions": opts.questions.display().to_string(),
            "out": opts.out.display().to_string(),
            "mode": opts.mode,
            "corpus": opts.corpus.as_ref().map(|p| p.display().to_string()),
            "index": opts.index.as_ref().map(|p| p.display().to_string()),
            "p_thr": opts.p_thr,
            "annotations": opts.annotations.as_ref().map(|p| p.display().to_string()),
            "types": opts.types.as_ref().map(|p| p.display().to_string()),
        }),
        &inputs,
    )?;
    Ok(summary)
}

pub struct ScoreOpts {
    pub questions: PathBuf,
    pub index: PathBuf,
    pub out: PathBuf,
    pub method: ScoreMethod,
    pub annotations: Option<PathBuf>,
    pub types: Option<PathBuf>,
    pub estimator: EstimatorConfig,
}

pub fn cmd_score(opts: &ScoreOpts) -> Result<usize> {
    opts.estimator.validate()?;
    let questions = load_questions(&opts.questions)?;
    let index = DfIndex::load(&opts.index)?;
    let annotations = match &opts.annotations {
        Some(path) => Some(load_annotations(path)?),
        None => None,
    };
    let type_labels = match &opts.types {
        Some(path) => Some(load_type_labels(path)?),
        None => None,
    };
    let ctx = ScoreContext {
        index: &index,
        cfg: opts.estimator,
        annotations: annotations.as_ref(),
        type_labels: type_labels.as_ref(),
    };
    let rows = score_batch(&questions, opts.method, &ctx)?;
    write_jsonl(&opts.out, &rows)?;

    let mut inputs = vec![opts.questions.clone(), opts.index.clone()];
    inputs.extend(opts.annotations.iter().cloned());
    inputs.extend(opts.types.iter().cloned());
    write_manifest(
        &opts.out,
        "score",
        json!({
            "questions": opts.questions.display().to_string(),
            "index": opts.index.display().to_string(),
            "out": opts.out.display().to_string(),
            "method": opts.method,
            "annotations": opts.annotations.as_ref().map(|p| p.display().to_string()),
            "types": opts.types.as_ref().map(|p| p.display().to_string()),
            "p_thr": opts.estimator.p_thr,
            "p_hop2": opts.estimator.p_hop2,
            "epsilon": opts.estimator.epsilon,
        }),
        &inputs,
    )?;
    Ok(rows.len())
}

pub struct EvaluateOpts {
    pub scores: PathBuf,
    pub runs: PathBuf,
    pub out: PathBuf,
    pub k: usize,
    pub per_question: Option<PathBuf>,
    pub questions: Option<PathBuf>,
    pub answers: Option<PathBuf>,
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn cmd_evaluate(opts: &EvaluateOpts) -> Result<EvalReport> {
    let score_rows: Vec<ScoreRow> = read_jsonl(&opts.scores)?;
    let scores: Vec<(String, f64)> = score_rows
        .iter()
        .map(|r| (r.question_id.clone(), r.score))
        .collect();
    let runs: Vec<RetrievalRun> = read_jsonl(&opts.runs)?;

    let answers = match (&opts.answers, &opts.questions) {
        (Some(answers_path), Some(questions_path)) => {
            let predicted: Vec<dataset::PredictedAnswerRow> = read_jsonl(answers_path)?;
            let questions = load_questions(questions_path)?;
            let gold: HashMap<&str, &str> = questions
                .iter()
                .filter_map(|q| q.answer.as_deref().map(|a| (q.question_id.as_str(), a)))
                .collect();
            let mut pairs = Vec::with_capacity(predicted.len());
            for row in &predicted {
                let gold_answer = gold.get(row.question_id.as_str()).with_context(|| {
                    format!("no gold answer for question {:?}", row.question_id)
                })?;
                pairs.push(AnswerPair {
                    question_id: row.question_id.clone(),
                    predicted: row.answer.clone(),
                    gold: gold_answer.to_string(),
                });
            }
            Some(pairs)
        }
        (Some(_), None) => bail!("--answers needs --questions for the gold answers"),
        _ => None,
    };

    let report = evaluate_scores(&scores, &runs, opts.k, answers.as_deref())?;

    let mut body = serde_json::to_string_pretty(&report)?;
    body.push('\n');
    std::fs::write(&opts.out, body).with_context(|| format!("writing {}", opts.out.display()))?;

    if let Some(csv_path) = &opts.per_question {
        let mut w = std::io::BufWriter::new(std::fs::File::create(csv_path)?);
        writeln!(w, "question_id,score,average_precision,coverage_cost,class")?;
        for row in &report.per_question {
            writeln!(
                w,
                "{},{},{},{},{}",
                csv_field(&row.question_id),
                row.score,
                row.average_precision,
                row.coverage_cost,
                row.class.map(|c| c.to_string()).unwrap_or_default()
            )?;
        }
        w.flush()?;
    }

    let mut inputs = vec![opts.scores.clone(), opts.runs.clone()];
    inputs.extend(opts.questions.iter().cloned());
    inputs.extend(opts.answers.iter().cloned());
    write_manifest(
        &opts.out,
        "evaluate",
        json!({
            "scores": opts.scores.display().to_string(),
            "runs": opts.runs.display().to_string(),
            "out": opts.out.display().to_string(),
            "k": opts.k,
            "per_question": opts.per_question.as_ref().map(|p| p.display().to_string()),
            "questions": opts.questions.as_ref().map(|p| p.display().to_string()),
            "answers": opts.answers.as_ref().map(|p| p.display().to_string()),
        }),
        &inputs,
    )?;
    Ok(report)
}

pub struct BucketOpts {
    pub scores: PathBuf,
    pub out: PathBuf,
}

pub fn cmd_bucket(opts: &BucketOpts) -> Result<ClassCounts> {
    let score_rows: Vec<ScoreRow> = read_jsonl(&opts.scores)?;
    let items: Vec<(String, f64)> = score_rows
        .iter()
        .map(|r| (r.question_id.clone(), r.score))
        .collect();
    let assignments = bucket_scores(&items)?;
    write_jsonl(&opts.out, &assignments)?;
    write_manifest(
        &opts.out,
        "bucket",
        json!({
            "scores": opts.scores.display().to_string(),
            "out": opts.out.display().to_string(),
        }),
        std::slice::from_ref(&opts.scores),
    )?;
    Ok(ClassCounts::tally(&assignments))
}

pub struct PlanOpts {
    pub buckets: PathBuf,
    pub out: PathBuf,
    pub policy: Option<PathBuf>,
}

pub fn cmd_plan(opts: &PlanOpts) -> Result<(u64, u64)> {
    let assignments: Vec<BucketAssignment> = read_jsonl(&opts.buckets)?;
    let policy = match &opts.policy {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<BudgetPolicy>(&text)
                .with_context(|| format!("parsing policy {}", path.display()))?
        }
        None => BudgetPolicy::default(),
    };
    let plan = plan_batch(&assignments, &policy)?;
    write_jsonl(&opts.out, &plan.budgets)?;

    let mut inputs = vec![opts.buckets.clone()];
    inputs.extend(opts.policy.iter().cloned());
    write_manifest(
        &opts.out,
        "plan",
        json!({
            "buckets": opts.buckets.display().to_string(),
            "out": opts.out.display().to_string(),
            "policy": opts.policy.as_ref().map(|p| p.display().to_string()),
            "resolved_policy": policy,
        }),
        &inputs,
    )?;
    Ok((plan.total_documents, plan.constant_total))
}

pub struct SynthOpts {
    pub out_dir: PathBuf,
    pub config: SynthConfig,
}

/// Paths produced by `cmd_synth`.
pub struct SynthPaths {
    pub corpus: PathBuf,
    pub questions: PathBuf,
    pub runs: PathBuf,
    pub truth: PathBuf,
}

pub fn synth_paths(out_dir: &Path) -> SynthPaths {
    SynthPaths {
        corpus: out_dir.join("corpus.jsonl"),
        questions: out_dir.join("questions.jsonl"),
        runs: out_dir.join("runs.jsonl"),
        truth: out_dir.join("truth.jsonl"),
    }
}

pub fn cmd_synth(opts: &SynthOpts) -> Result<SynthPaths> {
    std::fs::create_dir_all(&opts.out_dir)?;
    let output = generate(&opts.config);
    let paths = synth_paths(&opts.out_dir);
    write_jsonl(&paths.corpus, &output.corpus)?;
    write_jsonl(&paths.questions, &output.questions)?;
    write_jsonl(&paths.runs, &output.runs)?;
    write_jsonl(&paths.truth, &output.truth)?;
    write_manifest(
        &opts.out_dir,
        "synth",
        serde_json::to_value(opts.config)?,
        &[],
    )?;
    Ok(paths)
}
