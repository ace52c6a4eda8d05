//! Per-question scoring: extraction, path typing, and estimation glued
//! together the way the subcommands need it.

use std::collections::HashMap;

use anyhow::Result;
use clap::ValueEnum;

use hopqpp_core::{
    baseline_idf, baseline_scq, baseline_scs, build_ngram_set, estimate, extract_entities,
    extract_frozen_phrases, predict_path_type, tokenize, Aggregation, BinaryPathLabel, DfIndex,
    EstimatorConfig, NGramSet, PathType, SpanAnnotation, TermSpan,
};

use crate::dataset::{QuestionRecord, ScoreRow};

/// Scoring method selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreMethod {
    /// Retrieval-path estimator.
    Multhp,
    MaxIdf,
    AvgIdf,
    Scs,
    MaxScq,
    AvgScq,
}

impl ScoreMethod {
    pub fn name(&self) -> &'static str {
        match self {
            ScoreMethod::Multhp => "multhp",
            ScoreMethod::MaxIdf => "max_idf",
            ScoreMethod::AvgIdf => "avg_idf",
            ScoreMethod::Scs => "scs",
            ScoreMethod::MaxScq => "max_scq",
            ScoreMethod::AvgScq => "avg_scq",
        }
    }
}

/// Shared inputs for scoring a batch of questions.
pub struct ScoreContext<'a> {
    pub index: &'a DfIndex,
    pub cfg: EstimatorConfig,
    /// Per-question span annotations; questions without a row fall back
    /// to the heuristics.
    pub annotations: Option<&'a HashMap<String, Vec<SpanAnnotation>>>,
    /// External path-type labels; these outrank the dataset tag, which
    /// outranks the heuristic predictor.
    pub type_labels: Option<&'a HashMap<String, BinaryPathLabel>>,
}

impl<'a> ScoreContext<'a> {
    fn spans_for(&self, question_id: &str) -> Option<&'a [SpanAnnotation]> {
        self.annotations
            .and_then(|m| m.get(question_id))
            .map(|v| v.as_slice())
    }

    fn label_for(&self, q: &QuestionRecord) -> Option<BinaryPathLabel> {
        self.type_labels
            .and_then(|m| m.get(&q.question_id).copied())
            .or(q.dataset_type)
    }
}

/// Extracted spans and n-grams for one question.
pub struct QuestionAnalysis {
    pub entities: Vec<TermSpan>,
    pub frozen: Vec<TermSpan>,
    pub ngram_set: NGramSet,
}

/// Run span extraction and build the question's n-gram set.
pub fn analyze_question(
    q: &QuestionRecord,
    index: &DfIndex,
    p_thr: f64,
    annotations: Option<&[SpanAnnotation]>,
) -> Result<QuestionAnalysis> {
    let entities = extract_entities(&q.question, annotations)?;
    let frozen = extract_frozen_phrases(&q.question, index, p_thr, &entities, annotations)?;
    let ngram_set = build_ngram_set(&q.question_id, &entities, &frozen);
    Ok(QuestionAnalysis {
        entities,
        frozen,
        ngram_set,
    })
}

/// Resolve a question's pre-retrieval path type.
pub fn resolve_path_type(
    q: &QuestionRecord,
    entities: &[TermSpan],
    ctx: &ScoreContext,
) -> PathType {
    predict_path_type(&q.question, entities, ctx.label_for(q))
}

/// Score one question with the chosen method.
pub fn score_question(
    q: &QuestionRecord,
    method: ScoreMethod,
    ctx: &ScoreContext,
) -> Result<ScoreRow> {
    if method == ScoreMethod::Multhp {
        let analysis = analyze_question(q, ctx.index, ctx.cfg.p_thr, ctx.spans_for(&q.question_id))?;
        let path_type = resolve_path_type(q, &analysis.entities, ctx);
        let est = estimate(&analysis.ngram_set, path_type, ctx.index, &ctx.cfg);
        return Ok(ScoreRow {
            question_id: q.question_id.clone(),
            method: method.name().to_string(),
            path_type: Some(est.path_type),
            score: est.p_ret,
            chosen_ngrams: est.chosen_ngrams.into_iter().map(Into::into).collect(),
        });
    }

    let tokens = tokenize(&q.question);
    let score = match method {
        ScoreMethod::MaxIdf => baseline_idf(&tokens, ctx.index, Aggregation::Max),
        ScoreMethod::AvgIdf => baseline_idf(&tokens, ctx.index, Aggregation::Avg),
        ScoreMethod::Scs => baseline_scs(&tokens, ctx.index),
        ScoreMethod::MaxScq => baseline_scq(&tokens, ctx.index, Aggregation::Max),
        ScoreMethod::AvgScq => baseline_scq(&tokens, ctx.index, Aggregation::Avg),
        ScoreMethod::Multhp => unreachable!(),
    };
    Ok(ScoreRow {
        question_id: q.question_id.clone(),
        method: method.name().to_string(),
        path_type: None,
        score,
        chosen_ngrams: Vec::new(),
    })
}

/// Score a batch; output is ordered by question id.
pub fn score_batch(
    questions: &[QuestionRecord],
    method: ScoreMethod,
    ctx: &ScoreContext,
) -> Result<Vec<ScoreRow>> {
    let mut ordered: Vec<&QuestionRecord> = questions.iter().collect();
    ordered.sort_by(|a, b| a.question_id.cmp(&b.question_id));
    ordered
        .into_iter()
        .map(|q| score_question(q, method, ctx))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use hopqpp_core::build_index;
    use hopqpp_core::Document;

    fn question(id: &str, text: &str) -> QuestionRecord {
        QuestionRecord {
            question_id: id.into(),
            question: text.into(),
            answer: None,
            gold_support: None,
            dataset_type: None,
            dataset_level: None,
        }
    }

    fn tiny_index() -> DfIndex {
        let docs = vec![
            Document::new("d1", "Little Nikita", "Little Nikita is a film about spies."),
            Document::new("d2", "River Phoenix", "River Phoenix was an actor."),
            Document::new("d3", "filler", "a film about other things entirely."),
            Document::new("d4", "filler2", "yet more unrelated text here."),
        ];
        build_index(&docs, 3).unwrap()
    }

    #[test]
    fn multhp_scores_carry_provenance() {
        let index = tiny_index();
        let ctx = ScoreContext {
            index: &index,
            cfg: EstimatorConfig { p_thr: 0.6, ..Default::default() },
            annotations: None,
            type_labels: None,
        };
        let q = question("q1", "Who starred in Little Nikita?");
        let row = score_question(&q, ScoreMethod::Multhp, &ctx).unwrap();
        assert_eq!(row.method, "multhp");
        assert_eq!(row.path_type, Some(PathType::Bridge));
        assert_eq!(row.chosen_ngrams[0].ngram, "little nikita");
        assert_eq!(row.score, 1.0 * 0.125);
    }

    #[test]
    fn dataset_type_guides_multhp_but_sidecar_wins() {
        let index = tiny_index();
        let mut q = question("q1", "Were Little Nikita and River Phoenix films?");
        q.dataset_type = Some(BinaryPathLabel::Comparison);
        let ctx = ScoreContext {
            index: &index,
            cfg: EstimatorConfig { p_thr: 0.6, ..Default::default() },
            annotations: None,
            type_labels: None,
        };
        let row = score_question(&q, ScoreMethod::Multhp, &ctx).unwrap();
        assert_eq!(row.path_type, Some(PathType::Comparison));
        assert_eq!(row.chosen_ngrams.len(), 2);

        let labels: HashMap<String, BinaryPathLabel> =
            [("q1".to_string(), BinaryPathLabel::Bridge)].into_iter().collect();
        let ctx = ScoreContext { type_labels: Some(&labels), ..ctx };
        let row = score_question(&q, ScoreMethod::Multhp, &ctx).unwrap();
        assert_eq!(row.path_type, Some(PathType::Bridge));
    }

    #[test]
    fn baselines_score_all_tokens() {
        let index = tiny_index();
        let ctx = ScoreContext {
            index: &index,
            cfg: EstimatorConfig::default(),
            annotations: None,
            type_labels: None,
        };
        let q = question("q1", "a film about spies");
        for method in [
            ScoreMethod::MaxIdf,
            ScoreMethod::AvgIdf,
            ScoreMethod::Scs,
            ScoreMethod::MaxScq,
            ScoreMethod::AvgScq,
        ] {
            let row = score_question(&q, method, &ctx).unwrap();
            assert!(row.path_type.is_none());
            assert!(row.score.is_finite());
        }
        let max_idf = score_question(&q, ScoreMethod::MaxIdf, &ctx).unwrap().score;
        let avg_idf = score_question(&q, ScoreMethod::AvgIdf, &ctx).unwrap().score;
        assert!(max_idf >= avg_idf);
    }

    #[test]
    fn batch_output_is_ordered_by_question_id() {
        let index = tiny_index();
        let ctx = ScoreContext {
            index: &index,
            cfg: EstimatorConfig::default(),
            annotations: None,
            type_labels: None,
        };
        let questions = vec![
            question("zz", "Who starred in Little Nikita?"),
            question("aa", "Who was River Phoenix?"),
        ];
        let rows = score_batch(&questions, ScoreMethod::MaxIdf, &ctx).unwrap();
        assert_eq!(rows[0].question_id, "aa");
        assert_eq!(rows[1].question_id, "zz");
    }
}
