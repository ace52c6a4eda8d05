//! Salient-span extraction and question n-gram sets.
//!
//! Retrieval of a supporting document usually hinges on a small number of
//! salient spans in the question: named entities and frozen phrases
//! (multi-token phrases that appear verbatim in documents without being
//! entities). This module finds those spans and derives the question's
//! n-gram set: all unigrams, bigrams and trigrams of each entity span,
//! plus the unigrams of each frozen phrase.
//!
//! Span detection is pluggable. When an annotation sidecar is supplied
//! (for example, output of a real NER model) it is validated and used
//! verbatim and the built-in heuristics are bypassed entirely. Without
//! annotations, entities are approximated by capitalization runs and
//! frozen phrases by corpus-attested rare windows.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::corpus_index::DfIndex;
use crate::error::{Error, Result};
use crate::tokenize::{ngram_key, tokenize_spanned, SpannedToken};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpanKind {
    Entity,
    FrozenPhrase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpanSource {
    Heuristic,
    Annotation,
}

/// A salient span of the question, in tokens plus character offsets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermSpan {
    /// Lowercased tokens of the span.
    pub tokens: Vec<String>,
    /// Char range of the span in the question.
    pub char_range: Range<usize>,
    pub kind: SpanKind,
    pub source: SpanSource,
    /// Char offset of each token, used for deterministic tie-breaking.
    pub token_starts: Vec<usize>,
}

/// One span of an externally supplied annotation sidecar, as character
/// offsets into the question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanAnnotation {
    pub start: usize,
    pub end: usize,
    pub kind: SpanKind,
}

/// One member of a question's n-gram set, tied back to the span it came
/// from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NGram {
    pub tokens: Vec<String>,
    /// Index of the origin span in [`NGramSet::spans`].
    pub span_index: usize,
    /// Char offset of the n-gram's first token in the question.
    pub char_start: usize,
    pub span_kind: SpanKind,
}

impl NGram {
    /// Canonical lookup key (tokens joined by one space).
    pub fn key(&self) -> String {
        ngram_key(&self.tokens)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// The salient n-grams of one question.
///
/// Every member is a contiguous sub-sequence of exactly one span; n-grams
/// of length 2 and 3 originate only from entity spans. Duplicates are kept
/// once per (n-gram, span) pair; estimators deduplicate by key when only
/// probabilities matter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NGramSet {
    pub question_id: String,
    pub spans: Vec<TermSpan>,
    pub ngrams: Vec<NGram>,
}

impl NGramSet {
    pub fn is_empty(&self) -> bool {
        self.ngrams.is_empty()
    }
}

/// Characters allowed inside an entity run between two capitalized tokens.
/// Anything else (commas, parentheses, ...) breaks the run.
fn gap_joins(gap: &[char]) -> bool {
    gap.iter()
        .all(|&c| c.is_whitespace() || c == '-' || c == '\'' || c == '\u{2019}')
}

fn span_from_tokens(toks: &[SpannedToken], kind: SpanKind, source: SpanSource) -> TermSpan {
    TermSpan {
        tokens: toks.iter().map(|t| t.text.clone()).collect(),
        char_range: toks[0].start..toks[toks.len() - 1].end,
        kind,
        source,
        token_starts: toks.iter().map(|t| t.start).collect(),
    }
}

/// Extract entity spans from a question.
///
/// With `annotations` supplied the entity-kind spans are validated
/// (bounds, non-overlap, non-empty after tokenization) and used verbatim.
/// Otherwise the heuristic applies: maximal runs of capitalization-bearing
/// tokens in the original question, where the sentence-initial token never
/// participates (questions capitalize their first word regardless of
/// entity status) and a run breaks across any separator other than
/// whitespace, hyphens, or apostrophes.
pub fn extract_entities(
    question: &str,
    annotations: Option<&[SpanAnnotation]>,
) -> Result<Vec<TermSpan>> {
    if let Some(anns) = annotations {
        let entity_anns: Vec<&SpanAnnotation> = anns
            .iter()
            .filter(|a| a.kind == SpanKind::Entity)
            .collect();
        return materialize_annotations(question, &entity_anns, SpanKind::Entity);
    }

    let chars: Vec<char> = question.chars().collect();
    let toks = tokenize_spanned(question);
    let mut spans = Vec::new();
    let mut run: Vec<SpannedToken> = Vec::new();

    for (i, tok) in toks.iter().enumerate() {
        let eligible = i > 0 && tok.has_uppercase;
        let joined = match run.last() {
            Some(prev) => gap_joins(&chars[prev.end..tok.start]),
            None => true,
        };
        if eligible && joined {
            run.push(tok.clone());
        } else {
            if !run.is_empty() {
                spans.push(span_from_tokens(&run, SpanKind::Entity, SpanSource::Heuristic));
                run.clear();
            }
            if eligible {
                run.push(tok.clone());
            }
        }
    }
    if !run.is_empty() {
        spans.push(span_from_tokens(&run, SpanKind::Entity, SpanSource::Heuristic));
    }
    Ok(spans)
}

/// Extract frozen-phrase spans from a question.
///
/// With `annotations` supplied the frozen-phrase spans are validated and
/// used verbatim; an annotated frozen phrase overlapping an entity span is
/// a validation error. The heuristic otherwise looks for windows of 2 to
/// `max_n` consecutive tokens, outside every entity span, that occur
/// contiguously in at least one corpus document and whose probability of
/// appearing in an arbitrary document is strictly below `p_thr`.
/// Overlapping qualifying windows are merged into one maximal span.
pub fn extract_frozen_phrases(
    question: &str,
    index: &DfIndex,
    p_thr: f64,
    entities: &[TermSpan],
    annotations: Option<&[SpanAnnotation]>,
) -> Result<Vec<TermSpan>> {
    if let Some(anns) = annotations {
        let frozen_anns: Vec<&SpanAnnotation> = anns
            .iter()
            .filter(|a| a.kind == SpanKind::FrozenPhrase)
            .collect();
        let spans = materialize_annotations(question, &frozen_anns, SpanKind::FrozenPhrase)?;
        let offenders: Vec<String> = spans
            .iter()
            .filter(|s| {
                entities
                    .iter()
                    .any(|e| s.char_range.start < e.char_range.end && e.char_range.start < s.char_range.end)
            })
            .map(|s| format!("{:?} at {}..{}", s.tokens.join(" "), s.char_range.start, s.char_range.end))
            .collect();
        if !offenders.is_empty() {
            return Err(Error::SpanValidation(format!(
                "frozen-phrase spans overlap entity spans: {}",
                offenders.join(", ")
            )));
        }
        return Ok(spans);
    }

    let toks = tokenize_spanned(question);
    let max_window = index.max_n().clamp(2, 3);
    let in_entity = |tok: &SpannedToken| {
        entities
            .iter()
            .any(|e| tok.start < e.char_range.end && e.char_range.start < tok.end)
    };

    // token positions covered by a qualifying window
    let mut covered = vec![false; toks.len()];
    for n in 2..=max_window {
        if toks.len() < n {
            break;
        }
        for start in 0..=toks.len() - n {
            let window = &toks[start..start + n];
            if window.iter().any(in_entity) {
                continue;
            }
            let words: Vec<&str> = window.iter().map(|t| t.text.as_str()).collect();
            let count = index.doc_count(&words)?;
            if count == 0 {
                continue;
            }
            if index.term_probability(&words)? < p_thr {
                for flag in covered.iter_mut().skip(start).take(n) {
                    *flag = true;
                }
            }
        }
    }

    let mut spans = Vec::new();
    let mut run_start = None;
    for i in 0..=toks.len() {
        let on = i < toks.len() && covered[i];
        match (run_start, on) {
            (None, true) => run_start = Some(i),
            (Some(s), false) => {
                spans.push(span_from_tokens(
                    &toks[s..i],
                    SpanKind::FrozenPhrase,
                    SpanSource::Heuristic,
                ));
                run_start = None;
            }
            _ => {}
        }
    }
    Ok(spans)
}

fn materialize_annotations(
    question: &str,
    anns: &[&SpanAnnotation],
    kind: SpanKind,
) -> Result<Vec<TermSpan>> {
    let chars: Vec<char> = question.chars().collect();
    let mut offenders = Vec::new();
    let mut spans = Vec::new();

    for ann in anns {
        if ann.start >= ann.end || ann.end > chars.len() {
            offenders.push(format!("{}..{} out of bounds (0..{})", ann.start, ann.end, chars.len()));
            continue;
        }
        let text: String = chars[ann.start..ann.end].iter().collect();
        let toks = tokenize_spanned(&text);
        if toks.is_empty() {
            offenders.push(format!("{}..{} has no tokens", ann.start, ann.end));
            continue;
        }
        let mut span = span_from_tokens(&toks, kind, SpanSource::Annotation);
        span.char_range = (span.char_range.start + ann.start)..(span.char_range.end + ann.start);
        for s in &mut span.token_starts {
            *s += ann.start;
        }
        spans.push(span);
    }

    let mut sorted: Vec<&TermSpan> = spans.iter().collect();
    sorted.sort_by_key(|s| s.char_range.start);
    for pair in sorted.windows(2) {
        if pair[1].char_range.start < pair[0].char_range.end {
            offenders.push(format!(
                "{}..{} overlaps {}..{}",
                pair[0].char_range.start,
                pair[0].char_range.end,
                pair[1].char_range.start,
                pair[1].char_range.end
            ));
        }
    }

    if !offenders.is_empty() {
        return Err(Error::SpanValidation(offenders.join("; ")));
    }
    Ok(spans)
}

/// Derive the question's n-gram set from its validated spans.
///
/// Entity spans contribute every contiguous unigram, bigram, and trigram;
/// frozen-phrase spans contribute unigrams only (their remaining terms
/// need not be consecutive in documents). Duplicates are kept once per
/// (n-gram, span) pair.
pub fn build_ngram_set(
    question_id: impl Into<String>,
    entities: &[TermSpan],
    frozen: &[TermSpan],
) -> NGramSet {
    let spans: Vec<TermSpan> = entities.iter().chain(frozen.iter()).cloned().collect();
    let mut ngrams = Vec::new();
    let mut seen = std::collections::HashSet::new();

    for (span_index, span) in spans.iter().enumerate() {
        let max_n = match span.kind {
            SpanKind::Entity => 3usize,
            SpanKind::FrozenPhrase => 1,
        };
        for n in 1..=max_n.min(span.tokens.len()) {
            for start in 0..=span.tokens.len() - n {
                let tokens = span.tokens[start..start + n].to_vec();
                if seen.insert((ngram_key(&tokens), span_index)) {
                    ngrams.push(NGram {
                        tokens,
                        span_index,
                        char_start: span.token_starts[start],
                        span_kind: span.kind,
                    });
                }
            }
        }
    }

    NGramSet {
        question_id: question_id.into(),
        spans,
        ngrams,
    }
}
