//! Retrieval-path graphs over a question and its two supporting documents.
//!
//! Two nodes are related when they share a term that is unlikely to occur
//! in an arbitrary document: rarity is what makes a shared term a usable
//! retrieval handle. The three pairwise relations among {q, d1, d2} form a
//! small graph whose shape describes how a retriever can reach both
//! documents: through the question directly (comparison), through one
//! document to the other (bridge), either way (mixed), or not at all.
//!
//! Oracle mode ([`build_path_graph`] + [`classify_path`]) needs the gold
//! documents and serves dataset analysis. Pre-retrieval mode
//! ([`predict_path_type`]) sees only the question and returns the binary
//! bridge/comparison call, or defers to an external classifier's label
//! when one is supplied.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus_index::{DfIndex, Document};
use crate::error::{Error, Result};
use crate::term_extraction::{NGramSet, TermSpan};
use crate::tokenize::{ngram_key, ngram_keys, tokenize};

/// The shape of the retrieval path. `NoPath` covers every incomplete
/// configuration from which both documents cannot be reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathType {
    Bridge,
    Comparison,
    Mixed,
    NoPath,
}

impl fmt::Display for PathType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PathType::Bridge => "bridge",
            PathType::Comparison => "comparison",
            PathType::Mixed => "mixed",
            PathType::NoPath => "no_path",
        };
        f.write_str(s)
    }
}

/// Externally supplied pre-retrieval path label. Only the binary
/// bridge/comparison distinction exists before retrieval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinaryPathLabel {
    Bridge,
    Comparison,
}

impl From<BinaryPathLabel> for PathType {
    fn from(label: BinaryPathLabel) -> Self {
        match label {
            BinaryPathLabel::Bridge => PathType::Bridge,
            BinaryPathLabel::Comparison => PathType::Comparison,
        }
    }
}

impl FromStr for BinaryPathLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bridge" => Ok(BinaryPathLabel::Bridge),
            "comparison" => Ok(BinaryPathLabel::Comparison),
            other => Err(Error::InvalidPathLabel(other.to_string())),
        }
    }
}

/// The common term that established an edge, with its per-document
/// probability at the time the edge was added.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub tokens: Vec<String>,
    pub probability: f64,
}

impl Witness {
    pub fn key(&self) -> String {
        ngram_key(&self.tokens)
    }
}

/// Relatedness graph over {q, d1, d2}. A witness exists exactly for the
/// edges that are present.
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct PathGraph {
    pub q_d1: Option<Witness>,
    pub q_d2: Option<Witness>,
    pub d1_d2: Option<Witness>,
}

/// Pick the best witness among candidate keys that also occur in
/// `other_keys`: lowest probability wins, with longer n-grams and then
/// lexicographic order breaking ties. The probability must be strictly
/// below `p_thr`.
fn best_witness<'a, I>(
    candidates: I,
    other_keys: &HashSet<String>,
    index: &DfIndex,
    p_thr: f64,
) -> Result<Option<Witness>>
where
    I: IntoIterator<Item = &'a String>,
{
    let mut seen = HashSet::new();
    let mut best: Option<(f64, usize, &'a String)> = None;
    for key in candidates {
        if !other_keys.contains(key) || !seen.insert(key) {
            continue;
        }
        let prob = index.term_probability_key(key)?;
        if prob >= p_thr {
            continue;
        }
        let len = key.split(' ').count();
        let better = match &best {
            None => true,
            Some((bp, bl, bk)) => {
                (prob, std::cmp::Reverse(len), key.as_str())
                    < (*bp, std::cmp::Reverse(*bl), bk.as_str())
            }
        };
        if better {
            best = Some((prob, len, key));
        }
    }
    Ok(best.map(|(prob, _, key)| Witness {
        tokens: key.split(' ').map(str::to_string).collect(),
        probability: prob,
    }))
}

/// Decide whether two token sequences are related: is there a common
/// contiguous n-gram (up to trigram) whose probability of occurring in an
/// arbitrary document is strictly below `p_thr`? Returns the
/// lowest-probability such term as witness.
pub fn related(
    a: &[String],
    b: &[String],
    index: &DfIndex,
    p_thr: f64,
) -> Result<Option<Witness>> {
    if index.num_docs() == 0 {
        return Err(Error::EmptyIndex);
    }
    let n = index.max_n().min(3);
    let a_keys = ngram_keys(a, n);
    let b_keys: HashSet<String> = ngram_keys(b, n).into_iter().collect();
    best_witness(a_keys.iter(), &b_keys, index, p_thr)
}

/// Build the relatedness graph for a question and its two supporting
/// documents.
///
/// For the q–d edges the question side tries the salient n-gram set
/// first and falls back to plain question unigrams only when no salient
/// witness qualifies; the d1–d2 edge considers all contiguous n-grams of
/// both documents.
pub fn build_path_graph(
    q_tokens: &[String],
    ng: &NGramSet,
    d1: &Document,
    d2: &Document,
    index: &DfIndex,
    p_thr: f64,
) -> Result<PathGraph> {
    if index.num_docs() == 0 {
        return Err(Error::EmptyIndex);
    }
    let n = index.max_n().min(3);
    let d1_tokens = d1.tokens();
    let d2_tokens = d2.tokens();
    let d1_keys: HashSet<String> = ngram_keys(&d1_tokens, n).into_iter().collect();
    let d2_keys: HashSet<String> = ngram_keys(&d2_tokens, n).into_iter().collect();

    let salient: Vec<String> = ng.ngrams.iter().map(|g| g.key()).collect();
    let unigrams: Vec<String> = q_tokens.to_vec();

    let q_edge = |doc_keys: &HashSet<String>| -> Result<Option<Witness>> {
        if let Some(w) = best_witness(salient.iter(), doc_keys, index, p_thr)? {
            return Ok(Some(w));
        }
        best_witness(unigrams.iter(), doc_keys, index, p_thr)
    };

    Ok(PathGraph {
        q_d1: q_edge(&d1_keys)?,
        q_d2: q_edge(&d2_keys)?,
        d1_d2: related(&d1_tokens, &d2_tokens, index, p_thr)?,
    })
}

/// Classify a path graph into its type. Total over all eight edge
/// subsets: a single q-edge with no document-document edge leaves the
/// second document unreachable and maps to `NoPath`, as does a bare
/// d1–d2 edge.
pub fn classify_path(graph: &PathGraph) -> PathType {
    match (
        graph.q_d1.is_some(),
        graph.q_d2.is_some(),
        graph.d1_d2.is_some(),
    ) {
        (true, true, true) => PathType::Mixed,
        (true, true, false) => PathType::Comparison,
        (true, false, true) | (false, true, true) => PathType::Bridge,
        _ => PathType::NoPath,
    }
}

/// Comparative cues used by the heuristic path-type predictor. Fixed so
/// that predictions are reproducible across releases.
pub const CUE_LEXICON: &[&str] = &[
    "both", "same", "different", "or", "more", "first", "older", "younger", "longer", "earlier",
    "later",
];

/// Version of [`CUE_LEXICON`]; bump when the lexicon changes.
pub const CUE_LEXICON_VERSION: u32 = 1;

/// Predict the binary path type of a question before retrieval.
///
/// An external label always wins. The heuristic calls a question a
/// comparison when it mentions at least two distinct entities and carries
/// a comparative cue word; everything else is a bridge.
pub fn predict_path_type(
    question: &str,
    entities: &[TermSpan],
    external_label: Option<BinaryPathLabel>,
) -> PathType {
    if let Some(label) = external_label {
        return label.into();
    }
    let distinct: HashSet<String> = entities.iter().map(|s| s.tokens.join(" ")).collect();
    if distinct.len() >= 2 {
        let toks = tokenize(question);
        if toks.iter().any(|t| CUE_LEXICON.contains(&t.as_str())) {
            return PathType::Comparison;
        }
    }
    PathType::Bridge
}
