//! Pre-retrieval difficulty estimators.
//!
//! The main estimator scores a question by the probability that a
//! retriever reaches both supporting documents, decomposed along the
//! question's retrieval path. The probability of reaching a document from
//! an n-gram is taken to be the n-gram's specificity `1/N`, where `N` is
//! the number of documents mentioning it; unobservable second hops are
//! priced at a constant. The classic single-hop predictors (IDF, SCS,
//! SCQ) are provided for comparison under the same index.
//!
//! All estimators are pure functions over an immutable index: scoring is
//! safe to parallelize per question and yields identical results in any
//! order.

use std::cmp::Reverse;
use std::collections::BTreeMap;

use serde::Serialize;

use crate::corpus_index::DfIndex;
use crate::retrieval_path::PathType;
use crate::term_extraction::{NGramSet, SpanKind};

/// Tunables shared by the estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimatorConfig {
    /// Constant probability of a successful second hop when the second
    /// document is not observable before retrieval. Also calibrates
    /// bridge scores against comparison scores.
    pub p_hop2: f64,
    /// Score assigned when no retrieval path is usable. Strictly positive
    /// so that ranking and log-space processing stay well-defined.
    pub epsilon: f64,
    /// Relatedness threshold used when building path graphs.
    pub p_thr: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            p_hop2: 0.125,
            epsilon: 1e-12,
            p_thr: 0.001,
        }
    }
}

impl EstimatorConfig {
    /// All probabilities must sit in (0, 1], with epsilon below p_hop2.
    pub fn validate(&self) -> crate::error::Result<()> {
        let in_range = |v: f64| v > 0.0 && v <= 1.0;
        if !(in_range(self.p_hop2) && in_range(self.epsilon) && in_range(self.p_thr)) {
            return Err(crate::error::Error::InvalidPolicy(format!(
                "estimator config values must lie in (0, 1]: p_hop2={}, epsilon={}, p_thr={}",
                self.p_hop2, self.epsilon, self.p_thr
            )));
        }
        if self.epsilon >= self.p_hop2 {
            return Err(crate::error::Error::InvalidPolicy(format!(
                "epsilon ({}) must be below p_hop2 ({})",
                self.epsilon, self.p_hop2
            )));
        }
        Ok(())
    }
}

/// An n-gram the estimator actually used, with its document count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChosenNgram {
    pub ngram: String,
    pub doc_count: u64,
}

/// A question's predicted retrieval probability plus provenance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DifficultyEstimate {
    pub question_id: String,
    /// Path type the estimate was computed under. Degrades to `NoPath`
    /// when no indexed n-gram supplied any evidence.
    pub path_type: PathType,
    pub p_ret: f64,
    /// Up to two n-grams whose specificities entered the score.
    pub chosen_ngrams: Vec<ChosenNgram>,
    /// True when the constant second-hop probability entered the product.
    pub p_hop2_used: bool,
    /// True when a comparison-style estimate fell back to the bridge
    /// scheme because no second distinct-span n-gram was available.
    pub comparison_fallback: bool,
    /// True when admitting frozen-phrase unigrams as candidates changed
    /// the score relative to entity-derived n-grams alone.
    pub span_choice_sensitive: bool,
}

/// Specificity of an n-gram: `1/N` over the documents that mention it.
/// `None` when no document does (such n-grams supply no evidence), or
/// when the n-gram is longer than the index can answer.
pub fn specificity<S: AsRef<str>>(index: &DfIndex, ngram: &[S]) -> Option<f64> {
    if ngram.is_empty() || ngram.len() > index.max_n() {
        return None;
    }
    let key = crate::tokenize::ngram_key(ngram);
    match index.doc_count_key(&key) {
        0 => None,
        n => Some(1.0 / n as f64),
    }
}

/// One scoreable candidate from the n-gram set.
#[derive(Debug, Clone)]
struct Candidate {
    key: String,
    doc_count: u64,
    len: usize,
    char_start: usize,
    span_index: usize,
    span_kind: SpanKind,
}

impl Candidate {
    fn spec(&self) -> f64 {
        1.0 / self.doc_count as f64
    }

    /// Most specific first; ties broken by longer n-gram, then earlier
    /// char offset, then key, so selection is deterministic.
    fn rank(&self) -> (u64, Reverse<usize>, usize, &str) {
        (self.doc_count, Reverse(self.len), self.char_start, &self.key)
    }

    fn chosen(&self) -> ChosenNgram {
        ChosenNgram {
            ngram: self.key.clone(),
            doc_count: self.doc_count,
        }
    }
}

fn candidates(ng: &NGramSet, index: &DfIndex) -> Vec<Candidate> {
    ng.ngrams
        .iter()
        .filter_map(|g| {
            if g.len() > index.max_n() {
                return None;
            }
            let key = g.key();
            match index.doc_count_key(&key) {
                0 => None,
                n => Some(Candidate {
                    key,
                    doc_count: n,
                    len: g.len(),
                    char_start: g.char_start,
                    span_index: g.span_index,
                    span_kind: g.span_kind,
                }),
            }
        })
        .collect()
}

fn best_candidate(cands: &[Candidate]) -> Option<&Candidate> {
    cands.iter().min_by(|a, b| a.rank().cmp(&b.rank()))
}

/// The two most specific candidates from distinct origin spans. Two spans
/// carrying the same n-gram text do not count as distinct evidence, so the
/// secondary must differ from the primary in both span and key.
fn select_pair(cands: &[Candidate]) -> (Option<&Candidate>, Option<&Candidate>) {
    let mut per_span: BTreeMap<usize, &Candidate> = BTreeMap::new();
    for c in cands {
        per_span
            .entry(c.span_index)
            .and_modify(|cur| {
                if c.rank() < cur.rank() {
                    *cur = c;
                }
            })
            .or_insert(c);
    }
    let mut bests: Vec<&Candidate> = per_span.into_values().collect();
    bests.sort_by(|a, b| a.rank().cmp(&b.rank()));
    let primary = match bests.first() {
        Some(p) => *p,
        None => return (None, None),
    };
    let secondary = bests
        .iter()
        .skip(1)
        .find(|c| c.span_index != primary.span_index && c.key != primary.key)
        .copied();
    (Some(primary), secondary)
}

fn clamp_probability(p: f64, cfg: &EstimatorConfig) -> f64 {
    p.max(cfg.epsilon).min(1.0)
}

struct Outcome {
    p_ret: f64,
    chosen: Vec<ChosenNgram>,
    p_hop2_used: bool,
    fallback: bool,
    degraded: bool,
}

fn bridge_outcome(cands: &[Candidate], cfg: &EstimatorConfig) -> Outcome {
    match best_candidate(cands) {
        Some(best) => Outcome {
            p_ret: clamp_probability(best.spec() * cfg.p_hop2, cfg),
            chosen: vec![best.chosen()],
            p_hop2_used: true,
            fallback: false,
            degraded: false,
        },
        None => Outcome {
            p_ret: cfg.epsilon,
            chosen: Vec::new(),
            p_hop2_used: false,
            fallback: false,
            degraded: true,
        },
    }
}

fn comparison_outcome(cands: &[Candidate], cfg: &EstimatorConfig) -> Outcome {
    match select_pair(cands) {
        (Some(a), Some(b)) => Outcome {
            p_ret: clamp_probability(a.spec() * b.spec(), cfg),
            chosen: vec![a.chosen(), b.chosen()],
            p_hop2_used: false,
            fallback: false,
            degraded: false,
        },
        _ => {
            let mut out = bridge_outcome(cands, cfg);
            out.fallback = true;
            out
        }
    }
}

fn mixed_outcome(cands: &[Candidate], cfg: &EstimatorConfig) -> Outcome {
    let (primary, secondary) = select_pair(cands);
    let (a, b) = match (primary, secondary) {
        (Some(a), Some(b)) => (a, b),
        (Some(a), None) => {
            return Outcome {
                p_ret: clamp_probability(a.spec() * cfg.p_hop2, cfg),
                chosen: vec![a.chosen()],
                p_hop2_used: true,
                fallback: false,
                degraded: false,
            }
        }
        _ => {
            return Outcome {
                p_ret: cfg.epsilon,
                chosen: Vec::new(),
                p_hop2_used: false,
                fallback: false,
                degraded: true,
            }
        }
    };
    // the retriever takes whichever route is most probable
    let routes = [
        (a.spec() * b.spec(), vec![a.chosen(), b.chosen()], false),
        (a.spec() * cfg.p_hop2, vec![a.chosen()], true),
        (b.spec() * cfg.p_hop2, vec![b.chosen()], true),
    ];
    let mut winner = 0usize;
    for i in 1..routes.len() {
        if routes[i].0 > routes[winner].0 {
            winner = i;
        }
    }
    let (p, chosen, hop2) = routes[winner].clone();
    Outcome {
        p_ret: clamp_probability(p, cfg),
        chosen,
        p_hop2_used: hop2,
        fallback: false,
        degraded: false,
    }
}

fn finish(
    ng: &NGramSet,
    nominal: PathType,
    out: Outcome,
    sensitive: bool,
) -> DifficultyEstimate {
    DifficultyEstimate {
        question_id: ng.question_id.clone(),
        path_type: if out.degraded { PathType::NoPath } else { nominal },
        p_ret: out.p_ret,
        chosen_ngrams: out.chosen,
        p_hop2_used: out.p_hop2_used,
        comparison_fallback: out.fallback,
        span_choice_sensitive: sensitive,
    }
}

/// Does restricting candidates to entity-derived n-grams change the score?
fn sensitivity(
    cands: &[Candidate],
    cfg: &EstimatorConfig,
    outcome: impl Fn(&[Candidate], &EstimatorConfig) -> Outcome,
) -> bool {
    if cands.iter().all(|c| c.span_kind == SpanKind::Entity) {
        return false;
    }
    let entity_only: Vec<Candidate> = cands
        .iter()
        .filter(|c| c.span_kind == SpanKind::Entity)
        .cloned()
        .collect();
    outcome(cands, cfg).p_ret != outcome(&entity_only, cfg).p_ret
}

/// Bridge estimate: the most specific n-gram reaches the first document,
/// the second hop costs the constant `p_hop2`.
pub fn estimate_bridge(ng: &NGramSet, index: &DfIndex, cfg: &EstimatorConfig) -> DifficultyEstimate {
    let cands = candidates(ng, index);
    let sensitive = sensitivity(&cands, cfg, bridge_outcome);
    finish(ng, PathType::Bridge, bridge_outcome(&cands, cfg), sensitive)
}

/// Comparison estimate: both documents are reached independently through
/// the two most specific n-grams from distinct spans. Falls back to the
/// bridge scheme (and flags the fallback) when only one span has usable
/// evidence.
pub fn estimate_comparison(
    ng: &NGramSet,
    index: &DfIndex,
    cfg: &EstimatorConfig,
) -> DifficultyEstimate {
    let cands = candidates(ng, index);
    let sensitive = sensitivity(&cands, cfg, comparison_outcome);
    finish(
        ng,
        PathType::Comparison,
        comparison_outcome(&cands, cfg),
        sensitive,
    )
}

/// Mixed estimate: the best of the comparison route and the two bridge
/// routes, with unobservable second hops priced at `p_hop2`.
pub fn estimate_mixed(ng: &NGramSet, index: &DfIndex, cfg: &EstimatorConfig) -> DifficultyEstimate {
    let cands = candidates(ng, index);
    let sensitive = sensitivity(&cands, cfg, mixed_outcome);
    finish(ng, PathType::Mixed, mixed_outcome(&cands, cfg), sensitive)
}

/// Dispatch on the question's path type. `NoPath` questions are scored
/// with the epsilon sentinel: they are considered hard outright.
pub fn estimate(
    ng: &NGramSet,
    path_type: PathType,
    index: &DfIndex,
    cfg: &EstimatorConfig,
) -> DifficultyEstimate {
    match path_type {
        PathType::Bridge => estimate_bridge(ng, index, cfg),
        PathType::Comparison => estimate_comparison(ng, index, cfg),
        PathType::Mixed => estimate_mixed(ng, index, cfg),
        PathType::NoPath => DifficultyEstimate {
            question_id: ng.question_id.clone(),
            path_type: PathType::NoPath,
            p_ret: cfg.epsilon,
            chosen_ngrams: Vec::new(),
            p_hop2_used: false,
            comparison_fallback: false,
            span_choice_sensitive: false,
        },
    }
}

/// Aggregation over per-token baseline scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    Max,
    Avg,
}

fn aggregate(scores: &[f64], agg: Aggregation) -> f64 {
    if scores.is_empty() {
        return 0.0;
    }
    match agg {
        Aggregation::Max => scores.iter().copied().fold(0.0, f64::max),
        Aggregation::Avg => scores.iter().sum::<f64>() / scores.len() as f64,
    }
}

/// Inverse document frequency baseline: `ln(num_docs / df)` per token,
/// aggregated by max or mean. Tokens unseen in the collection score 0 and
/// still count toward the mean.
pub fn baseline_idf(tokens: &[String], index: &DfIndex, agg: Aggregation) -> f64 {
    let scores: Vec<f64> = tokens
        .iter()
        .map(|t| match index.doc_count_key(t) {
            0 => 0.0,
            df => (index.num_docs() as f64 / df as f64).ln(),
        })
        .collect();
    aggregate(&scores, agg)
}

/// Simplified clarity score: divergence between the question language
/// model and the collection language model, summed over distinct question
/// terms seen in the collection.
pub fn baseline_scs(tokens: &[String], index: &DfIndex) -> f64 {
    if tokens.is_empty() || index.total_tokens() == 0 {
        return 0.0;
    }
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    for t in tokens {
        *counts.entry(t.as_str()).or_insert(0) += 1;
    }
    let qlen = tokens.len() as f64;
    let total = index.total_tokens() as f64;
    let mut score = 0.0;
    for (term, count) in counts {
        let cf = index.collection_frequency(term);
        if cf == 0 {
            continue;
        }
        let p_q = count as f64 / qlen;
        let p_coll = cf as f64 / total;
        score += p_q * (p_q / p_coll).log2();
    }
    score
}

/// Collection query similarity: `(1 + ln cf) * ln(1 + num_docs/df)` per
/// token, aggregated by max or mean. Tokens unseen in the collection
/// score 0.
pub fn baseline_scq(tokens: &[String], index: &DfIndex, agg: Aggregation) -> f64 {
    let scores: Vec<f64> = tokens
        .iter()
        .map(|t| {
            let df = index.doc_count_key(t);
            let cf = index.collection_frequency(t);
            if df == 0 || cf == 0 {
                0.0
            } else {
                (1.0 + (cf as f64).ln()) * (1.0 + index.num_docs() as f64 / df as f64).ln()
            }
        })
        .collect();
    aggregate(&scores, agg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term_extraction::{build_ngram_set, SpanSource, TermSpan};
    use crate::tokenize::tokenize_spanned;
    use approx::assert_relative_eq;

    fn entity_span(text: &str, start: usize) -> TermSpan {
        let toks = tokenize_spanned(text);
        TermSpan {
            tokens: toks.iter().map(|t| t.text.clone()).collect(),
            char_range: start..start + text.chars().count(),
            kind: SpanKind::Entity,
            source: SpanSource::Heuristic,
            token_starts: toks.iter().map(|t| t.start + start).collect(),
        }
    }

    fn frozen_span(text: &str, start: usize) -> TermSpan {
        let mut s = entity_span(text, start);
        s.kind = SpanKind::FrozenPhrase;
        s
    }

    fn stub(num_docs: u64, df: &[(&str, u64)]) -> DfIndex {
        DfIndex::from_counts(
            num_docs,
            3,
            df.iter().map(|(k, v)| (k.to_string(), *v)),
            Vec::new(),
        )
        .unwrap()
    }

    #[test]
    fn specificity_is_reciprocal_document_count() {
        let idx = stub(10_000, &[("unique", 1), ("buck tick", 61)]);
        assert_eq!(specificity(&idx, &["unique"]), Some(1.0));
        let s = specificity(&idx, &["buck", "tick"]).unwrap();
        assert_relative_eq!(s, 0.0164, epsilon = 5e-5);
        assert_eq!(specificity(&idx, &["absent"]), None);
    }

    #[test]
    fn bridge_takes_the_most_specific_ngram() {
        let ng = build_ngram_set(
            "q",
            &[entity_span("alpha", 0), entity_span("beta", 10), entity_span("gamma", 20)],
            &[],
        );
        let idx = stub(1_000, &[("alpha", 10), ("beta", 4), ("gamma", 50)]);
        let est = estimate_bridge(&ng, &idx, &EstimatorConfig::default());
        assert_eq!(est.p_ret, 0.25 * 0.125);
        assert_eq!(est.chosen_ngrams.len(), 1);
        assert_eq!(est.chosen_ngrams[0].ngram, "beta");
        assert!(est.p_hop2_used);
        assert_eq!(est.path_type, PathType::Bridge);
    }

    #[test]
    fn bridge_without_evidence_degrades_to_no_path() {
        let ng = build_ngram_set("q", &[entity_span("ghost", 0)], &[]);
        let idx = stub(1_000, &[("other", 5)]);
        let est = estimate_bridge(&ng, &idx, &EstimatorConfig::default());
        assert_eq!(est.p_ret, 1e-12);
        assert!(est.chosen_ngrams.is_empty());
        assert_eq!(est.path_type, PathType::NoPath);
    }

    #[test]
    fn bridge_single_perfect_ngram_scores_p_hop2() {
        let ng = build_ngram_set("q", &[entity_span("onedoc", 0)], &[]);
        let idx = stub(1_000, &[("onedoc", 1)]);
        let est = estimate_bridge(&ng, &idx, &EstimatorConfig::default());
        assert_eq!(est.p_ret, 0.125);
    }

    #[test]
    fn comparison_multiplies_two_span_specificities() {
        let ng = build_ngram_set(
            "q",
            &[entity_span("toppers pizza", 0), entity_span("america's incredible", 20)],
            &[],
        );
        let idx = stub(
            10_000,
            &[
                ("toppers pizza", 3),
                ("toppers", 80),
                ("pizza", 40),
                ("america s incredible", 1),
                ("america s", 20),
                ("s incredible", 5),
                ("america", 70),
                ("s", 500),
                ("incredible", 45),
            ],
        );
        let est = estimate_comparison(&ng, &idx, &EstimatorConfig::default());
        assert_relative_eq!(est.p_ret, 1.0 / 3.0, epsilon = 1e-12);
        assert!(!est.p_hop2_used);
        assert_eq!(est.chosen_ngrams[0].doc_count, 1);
        assert_eq!(est.chosen_ngrams[1].doc_count, 3);
    }

    #[test]
    fn comparison_reproduces_the_rare_pair_score() {
        let ng = build_ngram_set(
            "q",
            &[entity_span("buck-tick", 0), entity_span("hayden", 30)],
            &[],
        );
        let idx = stub(
            1_000_000,
            &[("buck tick", 61), ("buck", 400), ("tick", 300), ("hayden", 909)],
        );
        let est = estimate_comparison(&ng, &idx, &EstimatorConfig::default());
        assert_relative_eq!(est.p_ret, 1.8e-5, max_relative = 0.02);
        assert_eq!(est.chosen_ngrams.len(), 2);
    }

    #[test]
    fn comparison_with_one_span_falls_back_to_bridge() {
        let ng = build_ngram_set("q", &[entity_span("solo", 0)], &[]);
        let idx = stub(1_000, &[("solo", 4)]);
        let est = estimate_comparison(&ng, &idx, &EstimatorConfig::default());
        assert!(est.comparison_fallback);
        assert!(est.p_hop2_used);
        assert_eq!(est.p_ret, 0.25 * 0.125);
        assert_eq!(est.path_type, PathType::Comparison);
    }

    #[test]
    fn duplicate_entity_text_does_not_count_as_two_spans() {
        let ng = build_ngram_set("q", &[entity_span("phoenix", 0), entity_span("phoenix", 30)], &[]);
        let idx = stub(1_000, &[("phoenix", 5)]);
        let est = estimate_comparison(&ng, &idx, &EstimatorConfig::default());
        assert!(est.comparison_fallback);
    }

    #[test]
    fn mixed_takes_the_best_route() {
        let cfg = EstimatorConfig::default();
        let ng = build_ngram_set("q", &[entity_span("aa", 0), entity_span("bb", 10)], &[]);

        // p1 = 0.5, p2 = 0.01: the single-hop route through aa wins
        let idx = stub(1_000, &[("aa", 2), ("bb", 100)]);
        let est = estimate_mixed(&ng, &idx, &cfg);
        assert_relative_eq!(est.p_ret, 0.0625, epsilon = 1e-15);
        assert!(est.p_hop2_used);
        assert_eq!(est.chosen_ngrams.len(), 1);

        // p1 = p2 = 0.5: the comparison route wins
        let idx = stub(1_000, &[("aa", 2), ("bb", 2)]);
        let est = estimate_mixed(&ng, &idx, &cfg);
        assert_relative_eq!(est.p_ret, 0.25, epsilon = 1e-15);
        assert!(!est.p_hop2_used);
        assert_eq!(est.chosen_ngrams.len(), 2);
    }

    #[test]
    fn mixed_without_evidence_is_epsilon() {
        let ng = build_ngram_set("q", &[entity_span("ghost", 0)], &[]);
        let idx = stub(1_000, &[("other", 5)]);
        let est = estimate_mixed(&ng, &idx, &EstimatorConfig::default());
        assert_eq!(est.p_ret, 1e-12);
        assert_eq!(est.path_type, PathType::NoPath);
    }

    #[test]
    fn estimate_dispatches_on_path_type() {
        let cfg = EstimatorConfig::default();
        let ng = build_ngram_set("q", &[entity_span("aa", 0), entity_span("bb", 10)], &[]);
        let idx = stub(1_000, &[("aa", 2), ("bb", 4)]);
        assert_eq!(
            estimate(&ng, PathType::Bridge, &idx, &cfg).p_ret,
            estimate_bridge(&ng, &idx, &cfg).p_ret
        );
        assert_eq!(
            estimate(&ng, PathType::Comparison, &idx, &cfg).p_ret,
            estimate_comparison(&ng, &idx, &cfg).p_ret
        );
        assert_eq!(
            estimate(&ng, PathType::Mixed, &idx, &cfg).p_ret,
            estimate_mixed(&ng, &idx, &cfg).p_ret
        );
        let np = estimate(&ng, PathType::NoPath, &idx, &cfg);
        assert_eq!(np.p_ret, cfg.epsilon);
        assert_eq!(np.path_type, PathType::NoPath);
    }

    #[test]
    fn frozen_unigrams_can_flip_the_score_and_get_flagged() {
        let ng = build_ngram_set(
            "q",
            &[entity_span("aa", 0)],
            &[frozen_span("rare phrase", 10)],
        );
        let idx = stub(1_000, &[("aa", 10), ("rare", 2), ("phrase", 100)]);
        let est = estimate_comparison(&ng, &idx, &EstimatorConfig::default());
        // pair = (rare: 1/2, aa: 1/10) across distinct spans
        assert_relative_eq!(est.p_ret, 0.05, epsilon = 1e-15);
        assert!(est.span_choice_sensitive);
        assert!(!est.comparison_fallback);

        // entity-only evidence: no flag
        let ng2 = build_ngram_set("q", &[entity_span("aa", 0), entity_span("bb", 5)], &[]);
        let idx2 = stub(1_000, &[("aa", 10), ("bb", 2)]);
        let est2 = estimate_comparison(&ng2, &idx2, &EstimatorConfig::default());
        assert!(!est2.span_choice_sensitive);
    }

    #[test]
    fn mixed_dominates_comparison_and_single_route() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let cfg = EstimatorConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..300 {
            let n_spans = rng.gen_range(1..4usize);
            let spans: Vec<TermSpan> = (0..n_spans)
                .map(|i| entity_span(&format!("s{i}"), i * 10))
                .collect();
            let ng = build_ngram_set("q", &spans, &[]);
            let mut df: Vec<(String, u64)> = Vec::new();
            for i in 0..n_spans {
                if rng.gen_bool(0.8) {
                    df.push((format!("s{i}"), rng.gen_range(1..200u64)));
                }
            }
            let idx = DfIndex::from_counts(10_000, 3, df, Vec::new()).unwrap();
            let mixed = estimate_mixed(&ng, &idx, &cfg).p_ret;
            let cmp = estimate_comparison(&ng, &idx, &cfg).p_ret;
            let bridge = estimate_bridge(&ng, &idx, &cfg).p_ret;
            assert!(mixed >= cmp - 1e-18, "mixed {mixed} < comparison {cmp}");
            assert!(mixed >= bridge - 1e-18, "mixed {mixed} < bridge {bridge}");
        }
    }

    #[test]
    fn bridge_matches_brute_force_enumeration() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let cfg = EstimatorConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..300 {
            let n = rng.gen_range(1..6usize);
            let spans: Vec<TermSpan> = (0..n)
                .map(|i| entity_span(&format!("tok{i} extra{i}"), i * 20))
                .collect();
            let ng = build_ngram_set("q", &spans, &[]);
            let mut df = Vec::new();
            for g in &ng.ngrams {
                if rng.gen_bool(0.7) {
                    df.push((g.key(), rng.gen_range(1..500u64)));
                }
            }
            let idx = DfIndex::from_counts(100_000, 3, df, Vec::new()).unwrap();

            // oracle: enumerate the ngram set and take the best 1/N directly
            let best = ng
                .ngrams
                .iter()
                .filter_map(|g| specificity(&idx, &g.tokens))
                .fold(f64::NAN, f64::max);
            let want = if best.is_nan() {
                cfg.epsilon
            } else {
                best * cfg.p_hop2
            };
            let got = estimate_bridge(&ng, &idx, &cfg).p_ret;
            assert_eq!(got, want.max(cfg.epsilon));
        }
    }

    #[test]
    fn scaling_all_counts_preserves_bridge_ranking() {
        let cfg = EstimatorConfig::default();
        let questions: Vec<NGramSet> = (0..20)
            .map(|i| build_ngram_set(format!("q{i}"), &[entity_span(&format!("e{i}"), 0)], &[]))
            .collect();
        let df: Vec<(String, u64)> = (0..20).map(|i| (format!("e{i}"), (i as u64 % 7) + 1)).collect();

        let rank = |scale: u64| -> Vec<String> {
            let idx = DfIndex::from_counts(
                1_000 * scale,
                3,
                df.iter().map(|(k, v)| (k.clone(), v * scale)),
                Vec::new(),
            )
            .unwrap();
            let mut scored: Vec<(String, f64)> = questions
                .iter()
                .map(|ng| (ng.question_id.clone(), estimate_bridge(ng, &idx, &cfg).p_ret))
                .collect();
            scored.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
            scored.into_iter().map(|(id, _)| id).collect()
        };

        assert_eq!(rank(1), rank(7));
    }

    #[test]
    fn idf_matches_direct_formula() {
        let idx = stub(1_000, &[("seen", 10), ("common", 100)]);
        let toks = vec!["seen".to_string(), "common".to_string()];
        assert_relative_eq!(
            baseline_idf(&toks, &idx, Aggregation::Max),
            4.605170185988092,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            baseline_idf(&toks, &idx, Aggregation::Avg),
            (100.0f64.ln() + 10.0f64.ln()) / 2.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn idf_of_ubiquitous_or_unknown_tokens_is_zero() {
        let idx = stub(1_000, &[("every", 1_000)]);
        assert_eq!(
            baseline_idf(&["every".to_string()], &idx, Aggregation::Max),
            0.0
        );
        assert_eq!(
            baseline_idf(&["unseen".to_string()], &idx, Aggregation::Max),
            0.0
        );
        assert_eq!(baseline_idf(&[], &idx, Aggregation::Avg), 0.0);
    }

    #[test]
    fn scs_single_rare_term_is_log2_of_inverse_mass() {
        let idx = DfIndex::from_counts(
            100,
            3,
            vec![("term".to_string(), 1)],
            vec![("term".to_string(), 1), ("rest".to_string(), 1023)],
        )
        .unwrap();
        assert_relative_eq!(
            baseline_scs(&["term".to_string()], &idx),
            10.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn scs_vanishes_on_matched_or_unseen_distributions() {
        // query distribution identical to the collection distribution
        let idx = DfIndex::from_counts(
            10,
            3,
            vec![("a".to_string(), 5), ("b".to_string(), 5)],
            vec![("a".to_string(), 30), ("b".to_string(), 30)],
        )
        .unwrap();
        let q = vec!["a".to_string(), "b".to_string()];
        assert_relative_eq!(baseline_scs(&q, &idx), 0.0, epsilon = 1e-12);

        let unseen = vec!["x".to_string(), "y".to_string()];
        assert_eq!(baseline_scs(&unseen, &idx), 0.0);
    }

    #[test]
    fn scq_matches_direct_formula() {
        let idx = DfIndex::from_counts(
            10,
            3,
            vec![("t".to_string(), 1)],
            vec![("t".to_string(), 1)],
        )
        .unwrap();
        let one = baseline_scq(&["t".to_string()], &idx, Aggregation::Max);
        assert_relative_eq!(one, 11.0f64.ln(), epsilon = 1e-12);

        let two = vec!["t".to_string(), "absent".to_string()];
        assert_relative_eq!(
            baseline_scq(&two, &idx, Aggregation::Avg),
            11.0f64.ln() / 2.0,
            epsilon = 1e-12
        );
        assert_eq!(baseline_scq(&["absent".to_string()], &idx, Aggregation::Max), 0.0);
    }

    #[test]
    fn estimates_stay_within_bounds() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let cfg = EstimatorConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..500 {
            let n = rng.gen_range(0..4usize);
            let spans: Vec<TermSpan> = (0..n).map(|i| entity_span(&format!("x{i}"), i * 10)).collect();
            let ng = build_ngram_set("q", &spans, &[]);
            let mut df: Vec<(String, u64)> = Vec::new();
            for i in 0..n {
                if rng.gen_bool(0.6) {
                    df.push((format!("x{i}"), rng.gen_range(1..1_000u64)));
                }
            }
            let idx = DfIndex::from_counts(1_000_000, 3, df, Vec::new()).unwrap();
            for est in [
                estimate_bridge(&ng, &idx, &cfg),
                estimate_comparison(&ng, &idx, &cfg),
                estimate_mixed(&ng, &idx, &cfg),
            ] {
                assert!(est.p_ret >= cfg.epsilon && est.p_ret <= 1.0);
                if est.p_ret > cfg.epsilon {
                    assert!(est.chosen_ngrams.iter().all(|c| c.doc_count > 0));
                }
            }
        }
    }

    #[test]
    fn config_validation_catches_bad_values() {
        assert!(EstimatorConfig::default().validate().is_ok());
        let bad = EstimatorConfig { p_hop2: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = EstimatorConfig { epsilon: 0.5, p_hop2: 0.125, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
