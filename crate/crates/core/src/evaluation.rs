//! Measuring prediction quality against actual retriever behavior.
//!
//! A retriever's per-question performance is summarized as average
//! precision over the interleaved ranking of its per-hop result lists.
//! Predicted difficulty scores are then compared against those values
//! with rank correlations (Pearson, Spearman, Kendall tau-b, each with a
//! two-sided p-value), with pairwise difficulty accuracy, and through
//! percentile difficulty classes whose PEM/PR show the performance drop
//! across classes. Answer-level EM/F1 covers end-to-end systems.
//!
//! P-values use standard large-sample approximations: a t approximation
//! for Pearson and Spearman, a normal approximation (with tie-corrected
//! variance) for Kendall. Reports label them as such.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::error::{Error, Result};
use crate::qpp::DifficultyEstimate;

/// Ranked per-hop retrieval output for one question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetrievalRun {
    pub question_id: String,
    /// One ranked doc-id list per hop, in hop order.
    pub hops: Vec<Vec<String>>,
    #[serde(rename = "gold")]
    pub gold_support: BTreeSet<String>,
}

impl RetrievalRun {
    /// A usable run has at least one hop, at least one gold document, and
    /// no duplicate doc id within a single hop's list.
    pub fn validate(&self) -> Result<()> {
        if self.hops.is_empty() {
            return Err(Error::Alignment(format!(
                "run {} has no hops",
                self.question_id
            )));
        }
        if self.gold_support.is_empty() {
            return Err(Error::Alignment(format!(
                "run {} has no gold documents",
                self.question_id
            )));
        }
        for (h, hop) in self.hops.iter().enumerate() {
            let mut seen = HashSet::new();
            for doc in hop {
                if !seen.insert(doc) {
                    return Err(Error::Alignment(format!(
                        "run {} hop {} lists {doc:?} twice",
                        self.question_id, h
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Round-robin merge of the per-hop lists: first document of the first
/// hop, then first of the second, and so on; exhausted hops drop out and
/// the rest continue in order. A document seen in an earlier position is
/// not repeated.
pub fn interleave(run: &RetrievalRun) -> Vec<String> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    let mut depth = 0usize;
    loop {
        let mut any = false;
        for hop in &run.hops {
            if let Some(doc) = hop.get(depth) {
                any = true;
                if seen.insert(doc.clone()) {
                    out.push(doc.clone());
                }
            }
        }
        if !any {
            return out;
        }
        depth += 1;
    }
}

/// Average precision of a ranked list against a gold set: the mean, over
/// gold documents, of precision at the rank where each is found. Gold
/// documents absent from the list contribute zero. Empty gold yields 0.
pub fn average_precision(ranked: &[String], gold: &BTreeSet<String>) -> f64 {
    if gold.is_empty() {
        return 0.0;
    }
    let mut hits = 0u64;
    let mut sum = 0.0;
    for (i, doc) in ranked.iter().enumerate() {
        if gold.contains(doc) {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    sum / gold.len() as f64
}

/// A coefficient with its two-sided p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Correlation {
    pub coefficient: f64,
    pub p_value: f64,
}

/// Pearson, Spearman, and Kendall tau-b of the same two vectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationSet {
    pub pearson: Correlation,
    pub spearman: Correlation,
    pub kendall: Correlation,
}

fn check_vectors(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 3 {
        return Err(Error::TooFewItems {
            required: 3,
            got: x.len(),
        });
    }
    for (name, v) in [("x", x), ("y", y)] {
        if v.iter().any(|e| !e.is_finite()) {
            return Err(Error::UndefinedCorrelation {
                metrics: "pearson/spearman/kendall",
                reason: format!("{name} contains a non-finite value"),
            });
        }
        if v.iter().all(|&e| e == v[0]) {
            return Err(Error::UndefinedCorrelation {
                metrics: "pearson/spearman/kendall",
                reason: format!("{name} is constant"),
            });
        }
    }
    Ok(())
}

fn pearson_coefficient(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mx;
        let dy = yi - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
}

fn t_approximation_p(r: f64, n: usize) -> f64 {
    let spread = 1.0 - r * r;
    if spread <= 0.0 {
        return 0.0;
    }
    let t = r.abs() * ((n - 2) as f64 / spread).sqrt();
    let dist = StudentsT::new(0.0, 1.0, (n - 2) as f64).expect("valid degrees of freedom");
    (2.0 * (1.0 - dist.cdf(t))).clamp(0.0, 1.0)
}

/// Average ranks, 1-based; tied values share the mean of their positions.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        values[a]
            .partial_cmp(&values[b])
            .expect("finite values")
            .then(a.cmp(&b))
    });
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Tie statistics over one sorted key stream.
#[derive(Default)]
struct TieStats {
    /// Sum of t*(t-1)/2 over tie groups (number of tied pairs).
    pairs: f64,
    /// Sum of t*(t-1)*(2t+5), the variance correction term.
    v: f64,
    /// Sum of t*(t-1).
    v1: f64,
    /// Sum of t*(t-1)*(t-2).
    v2: f64,
}

impl TieStats {
    fn add_group(&mut self, t: u64) {
        let tf = t as f64;
        self.pairs += tf * (tf - 1.0) / 2.0;
        self.v += tf * (tf - 1.0) * (2.0 * tf + 5.0);
        self.v1 += tf * (tf - 1.0);
        self.v2 += tf * (tf - 1.0) * (tf - 2.0);
    }
}

fn tie_stats<T: PartialEq>(sorted: &[T]) -> TieStats {
    let mut stats = TieStats::default();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        stats.add_group((j - i + 1) as u64);
        i = j + 1;
    }
    stats
}

/// Count inversions with a bottom-up merge sort; equal elements are not
/// inversions. The slice ends up sorted.
fn merge_count_inversions(values: &mut Vec<f64>) -> u64 {
    let n = values.len();
    let mut buf = vec![0.0; n];
    let mut swaps = 0u64;
    let mut width = 1;
    while width < n {
        let mut start = 0;
        while start < n {
            let mid = (start + width).min(n);
            let end = (start + 2 * width).min(n);
            let (mut i, mut j, mut k) = (start, mid, start);
            while i < mid || j < end {
                if i < mid && (j >= end || values[i] <= values[j]) {
                    buf[k] = values[i];
                    i += 1;
                } else {
                    swaps += (mid - i) as u64;
                    buf[k] = values[j];
                    j += 1;
                }
                k += 1;
            }
            start = end;
        }
        std::mem::swap(values, &mut buf);
        width *= 2;
    }
    swaps
}

/// Kendall tau-b with tie correction, plus the normal-approximation z
/// statistic of S under the null.
fn kendall_tau_b(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        x[a].partial_cmp(&x[b])
            .expect("finite values")
            .then(y[a].partial_cmp(&y[b]).expect("finite values"))
    });

    let x_sorted: Vec<f64> = order.iter().map(|&i| x[i]).collect();
    let xy_sorted: Vec<(f64, f64)> = order.iter().map(|&i| (x[i], y[i])).collect();
    let x_ties = tie_stats(&x_sorted);
    let xy_ties = tie_stats(&xy_sorted);

    let mut y_in_x_order: Vec<f64> = order.iter().map(|&i| y[i]).collect();
    let discordant = merge_count_inversions(&mut y_in_x_order);
    let y_ties = tie_stats(&y_in_x_order);

    let nf = n as f64;
    let n0 = nf * (nf - 1.0) / 2.0;
    let s = n0 - x_ties.pairs - y_ties.pairs + xy_ties.pairs - 2.0 * discordant as f64;
    let denom = ((n0 - x_ties.pairs) * (n0 - y_ties.pairs)).sqrt();
    let tau = (s / denom).clamp(-1.0, 1.0);

    let v0 = nf * (nf - 1.0) * (2.0 * nf + 5.0);
    let var_s = (v0 - x_ties.v - y_ties.v) / 18.0
        + (x_ties.v1 * y_ties.v1) / (2.0 * nf * (nf - 1.0))
        + (x_ties.v2 * y_ties.v2) / (9.0 * nf * (nf - 1.0) * (nf - 2.0));
    let z = if var_s > 0.0 { s / var_s.sqrt() } else { 0.0 };
    (tau, z)
}

fn normal_two_sided_p(z: f64) -> f64 {
    let dist = Normal::new(0.0, 1.0).expect("standard normal");
    (2.0 * (1.0 - dist.cdf(z.abs()))).clamp(0.0, 1.0)
}

/// Compute all three correlations between two aligned score vectors.
///
/// Requires at least three finite, non-constant observations; constant
/// input leaves every coefficient undefined and is reported as an error.
pub fn correlations(x: &[f64], y: &[f64]) -> Result<CorrelationSet> {
    check_vectors(x, y)?;
    let n = x.len();

    let r = pearson_coefficient(x, y);
    let pearson = Correlation {
        coefficient: r,
        p_value: t_approximation_p(r, n),
    };

    let rx = average_ranks(x);
    let ry = average_ranks(y);
    let rho = pearson_coefficient(&rx, &ry);
    let spearman = Correlation {
        coefficient: rho,
        p_value: t_approximation_p(rho, n),
    };

    let (tau, z) = kendall_tau_b(x, y);
    let kendall = Correlation {
        coefficient: tau,
        p_value: normal_two_sided_p(z),
    };

    Ok(CorrelationSet {
        pearson,
        spearman,
        kendall,
    })
}

/// Rank in the interleaved list at which the last gold document is
/// covered; if any gold document is missing, the sentinel cost
/// `hops * k + 1` keeps the question comparable.
pub fn coverage_cost(run: &RetrievalRun, k: usize) -> u64 {
    let ranked = interleave(run);
    let mut worst = 0u64;
    for gold in &run.gold_support {
        match ranked.iter().position(|d| d == gold) {
            Some(pos) => worst = worst.max(pos as u64 + 1),
            None => return (run.hops.len() * k) as u64 + 1,
        }
    }
    worst
}

/// Fraction of question pairs whose predicted difficulty order matches
/// their actual retrieval-cost order.
///
/// `scores` are oriented like retrieval probabilities: lower score means
/// the question is predicted harder, which should correspond to a higher
/// coverage cost. Pairs with equal actual cost are not counted; predicted
/// ties on counted pairs earn half credit.
pub fn pairwise_accuracy(
    scores: &[(String, f64)],
    runs: &[RetrievalRun],
    k: usize,
) -> Result<f64> {
    let costs = align_costs(scores, runs, k)?;
    let mut counted = 0u64;
    let mut correct = 0.0;
    for i in 0..costs.len() {
        for j in (i + 1)..costs.len() {
            let (si, ci) = costs[i];
            let (sj, cj) = costs[j];
            if ci == cj {
                continue;
            }
            counted += 1;
            if si == sj {
                correct += 0.5;
            } else if (ci > cj) == (si < sj) {
                correct += 1.0;
            }
        }
    }
    if counted == 0 {
        return Err(Error::NoComparablePairs);
    }
    Ok(correct / counted as f64)
}

fn align_costs(
    scores: &[(String, f64)],
    runs: &[RetrievalRun],
    k: usize,
) -> Result<Vec<(f64, u64)>> {
    let mut by_id: BTreeMap<&str, f64> = BTreeMap::new();
    for (id, s) in scores {
        if by_id.insert(id, *s).is_some() {
            return Err(Error::Alignment(format!("duplicate score for {id:?}")));
        }
    }
    let mut run_ids = BTreeSet::new();
    for run in runs {
        if !run_ids.insert(run.question_id.as_str()) {
            return Err(Error::Alignment(format!(
                "duplicate run for {:?}",
                run.question_id
            )));
        }
    }
    if by_id.len() != run_ids.len() || !run_ids.iter().all(|id| by_id.contains_key(id)) {
        let missing_scores: Vec<&&str> = run_ids
            .iter()
            .filter(|id| !by_id.contains_key(**id))
            .take(3)
            .collect();
        let missing_runs: Vec<&&str> = by_id
            .keys()
            .filter(|id| !run_ids.contains(**id))
            .take(3)
            .collect();
        return Err(Error::Alignment(format!(
            "{} scored vs {} run questions (runs without scores: {missing_scores:?}; scores without runs: {missing_runs:?})",
            by_id.len(),
            run_ids.len()
        )));
    }
    let mut joined: Vec<(f64, u64)> = Vec::with_capacity(runs.len());
    let mut ordered: Vec<&RetrievalRun> = runs.iter().collect();
    ordered.sort_by(|a, b| a.question_id.cmp(&b.question_id));
    for run in ordered {
        joined.push((by_id[run.question_id.as_str()], coverage_cost(run, k)));
    }
    Ok(joined)
}

/// Paragraph exact match and paragraph recall at cutoff `k`: the fraction
/// of questions whose gold documents are all inside the union of each
/// hop's top-k, and the fraction with at least one gold document there.
pub fn pem_pr(runs: &[RetrievalRun], k: usize) -> (f64, f64) {
    if runs.is_empty() {
        return (0.0, 0.0);
    }
    let mut exact = 0usize;
    let mut partial = 0usize;
    for run in runs {
        let mut retrieved: HashSet<&String> = HashSet::new();
        for hop in &run.hops {
            retrieved.extend(hop.iter().take(k));
        }
        let found = run
            .gold_support
            .iter()
            .filter(|g| retrieved.contains(g))
            .count();
        if found == run.gold_support.len() {
            exact += 1;
        }
        if found > 0 {
            partial += 1;
        }
    }
    (
        exact as f64 / runs.len() as f64,
        partial as f64 / runs.len() as f64,
    )
}

/// Lowercase, drop ASCII punctuation, drop the articles a/an/the, and
/// collapse whitespace.
fn normalize_answer(s: &str) -> Vec<String> {
    s.to_lowercase()
        .chars()
        .filter(|c| !c.is_ascii_punctuation())
        .collect::<String>()
        .split_whitespace()
        .filter(|t| !matches!(*t, "a" | "an" | "the"))
        .map(str::to_string)
        .collect()
}

/// Exact match and bag-of-words F1 between a predicted and a gold answer,
/// both normalized. Two answers that normalize to nothing count as a
/// perfect match.
pub fn answer_em_f1(predicted: &str, gold: &str) -> (bool, f64) {
    let p = normalize_answer(predicted);
    let g = normalize_answer(gold);
    if p.is_empty() && g.is_empty() {
        return (true, 1.0);
    }
    let em = p == g;
    if p.is_empty() || g.is_empty() {
        return (em, 0.0);
    }
    let mut gold_counts: HashMap<&str, usize> = HashMap::new();
    for t in &g {
        *gold_counts.entry(t).or_insert(0) += 1;
    }
    let mut common = 0usize;
    for t in &p {
        if let Some(c) = gold_counts.get_mut(t.as_str()) {
            if *c > 0 {
                *c -= 1;
                common += 1;
            }
        }
    }
    if common == 0 {
        return (em, 0.0);
    }
    let precision = common as f64 / p.len() as f64;
    let recall = common as f64 / g.len() as f64;
    (em, 2.0 * precision * recall / (precision + recall))
}

/// Percentile difficulty classes. Lowest scores are hardest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DifficultyClass {
    Easy,
    Hard,
    ExtraHard,
}

impl std::fmt::Display for DifficultyClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            DifficultyClass::Easy => "easy",
            DifficultyClass::Hard => "hard",
            DifficultyClass::ExtraHard => "extra_hard",
        };
        f.write_str(s)
    }
}

/// One question's class assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketAssignment {
    pub question_id: String,
    pub score: f64,
    pub class: DifficultyClass,
}

/// Assign quartile difficulty classes to scored questions: the hardest
/// quartile (lowest scores) is extra hard, the second quartile hard, and
/// the upper half easy. Boundaries sit at `ceil(n/4)` and `ceil(n/2)`;
/// ties are broken by question id so the split is deterministic. Returns
/// assignments sorted by question id.
pub fn bucket_scores(items: &[(String, f64)]) -> Result<Vec<BucketAssignment>> {
    if items.len() < 4 {
        return Err(Error::TooFewItems {
            required: 4,
            got: items.len(),
        });
    }
    let mut ids = HashSet::new();
    for (id, _) in items {
        if !ids.insert(id) {
            return Err(Error::Alignment(format!("duplicate question id {id:?}")));
        }
    }
    let mut order: Vec<&(String, f64)> = items.iter().collect();
    order.sort_by(|a, b| {
        a.1.partial_cmp(&b.1)
            .expect("finite scores")
            .then_with(|| a.0.cmp(&b.0))
    });
    let n = order.len();
    let extra_hard_end = n.div_ceil(4);
    let hard_end = n.div_ceil(2);
    let mut out: Vec<BucketAssignment> = order
        .into_iter()
        .enumerate()
        .map(|(pos, (id, score))| BucketAssignment {
            question_id: id.clone(),
            score: *score,
            class: if pos < extra_hard_end {
                DifficultyClass::ExtraHard
            } else if pos < hard_end {
                DifficultyClass::Hard
            } else {
                DifficultyClass::Easy
            },
        })
        .collect();
    out.sort_by(|a, b| a.question_id.cmp(&b.question_id));
    Ok(out)
}

/// [`bucket_scores`] over difficulty estimates.
pub fn bucket_by_quartile(estimates: &[DifficultyEstimate]) -> Result<Vec<BucketAssignment>> {
    let items: Vec<(String, f64)> = estimates
        .iter()
        .map(|e| (e.question_id.clone(), e.p_ret))
        .collect();
    bucket_scores(&items)
}

/// Per-class sizes of a bucket assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ClassCounts {
    pub easy: usize,
    pub hard: usize,
    pub extra_hard: usize,
}

impl ClassCounts {
    pub fn tally(assignments: &[BucketAssignment]) -> Self {
        let mut counts = ClassCounts::default();
        for a in assignments {
            match a.class {
                DifficultyClass::Easy => counts.easy += 1,
                DifficultyClass::Hard => counts.hard += 1,
                DifficultyClass::ExtraHard => counts.extra_hard += 1,
            }
        }
        counts
    }
}

/// A correlation as it appears in a report, with significance flags at
/// the two conventional thresholds and the approximation spelled out.
#[derive(Debug, Clone, Serialize)]
pub struct CorrelationReport {
    pub coefficient: f64,
    pub p_value: f64,
    pub significant_at_0_01: bool,
    pub significant_at_0_001: bool,
    pub p_value_method: &'static str,
}

impl CorrelationReport {
    fn new(c: Correlation, method: &'static str) -> Self {
        Self {
            coefficient: c.coefficient,
            p_value: c.p_value,
            significant_at_0_01: c.p_value < 0.01,
            significant_at_0_001: c.p_value < 0.001,
            p_value_method: method,
        }
    }
}

/// Predicted and gold answer strings for one question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerPair {
    pub question_id: String,
    pub predicted: String,
    pub gold: String,
}

/// Per-question detail row of an evaluation report.
#[derive(Debug, Clone, Serialize)]
pub struct PerQuestionRow {
    pub question_id: String,
    pub score: f64,
    pub average_precision: f64,
    pub coverage_cost: u64,
    pub class: Option<DifficultyClass>,
}

/// Aggregated evaluation of one score file against one run file.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub num_questions: usize,
    pub cutoff_k: usize,
    pub mean_average_precision: f64,
    pub pearson: CorrelationReport,
    pub spearman: CorrelationReport,
    pub kendall: CorrelationReport,
    pub pairwise_accuracy: f64,
    pub pem: f64,
    pub pr: f64,
    pub answer_em: Option<f64>,
    pub answer_f1: Option<f64>,
    /// Absent when there are fewer than four questions to bucket.
    pub class_counts: Option<ClassCounts>,
    pub per_question: Vec<PerQuestionRow>,
}

/// Evaluate predicted scores against retrieval runs: correlation of score
/// with interleaved AP, pairwise accuracy, PEM/PR at `k`, quartile
/// classes, and (when answer pairs are given) mean answer EM/F1. Scores
/// and runs must cover exactly the same question ids.
pub fn evaluate_scores(
    scores: &[(String, f64)],
    runs: &[RetrievalRun],
    k: usize,
    answers: Option<&[AnswerPair]>,
) -> Result<EvalReport> {
    for run in runs {
        run.validate()?;
    }
    // align_costs re-checks ids; reuse its join for cost, then recompute AP
    align_costs(scores, runs, k)?;

    let score_by_id: BTreeMap<&str, f64> = scores.iter().map(|(id, s)| (id.as_str(), *s)).collect();
    let mut ordered: Vec<&RetrievalRun> = runs.iter().collect();
    ordered.sort_by(|a, b| a.question_id.cmp(&b.question_id));

    let mut xs = Vec::with_capacity(ordered.len());
    let mut ys = Vec::with_capacity(ordered.len());
    let mut rows = Vec::with_capacity(ordered.len());
    for run in &ordered {
        let score = score_by_id[run.question_id.as_str()];
        let ap = average_precision(&interleave(run), &run.gold_support);
        xs.push(score);
        ys.push(ap);
        rows.push(PerQuestionRow {
            question_id: run.question_id.clone(),
            score,
            average_precision: ap,
            coverage_cost: coverage_cost(run, k),
            class: None,
        });
    }

    let corr = correlations(&xs, &ys)?;
    let accuracy = pairwise_accuracy(scores, runs, k)?;
    let (pem, pr) = pem_pr(runs, k);

    let class_counts = if scores.len() >= 4 {
        let assignments = bucket_scores(scores)?;
        let by_id: HashMap<&str, DifficultyClass> = assignments
            .iter()
            .map(|a| (a.question_id.as_str(), a.class))
            .collect();
        for row in &mut rows {
            row.class = by_id.get(row.question_id.as_str()).copied();
        }
        Some(ClassCounts::tally(&assignments))
    } else {
        None
    };

    let (answer_em, answer_f1) = match answers {
        Some(pairs) if !pairs.is_empty() => {
            let mut em_sum = 0.0;
            let mut f1_sum = 0.0;
            for pair in pairs {
                let (em, f1) = answer_em_f1(&pair.predicted, &pair.gold);
                em_sum += if em { 1.0 } else { 0.0 };
                f1_sum += f1;
            }
            (
                Some(em_sum / pairs.len() as f64),
                Some(f1_sum / pairs.len() as f64),
            )
        }
        _ => (None, None),
    };

    let map = ys.iter().sum::<f64>() / ys.len().max(1) as f64;
    Ok(EvalReport {
        num_questions: ordered.len(),
        cutoff_k: k,
        mean_average_precision: map,
        pearson: CorrelationReport::new(corr.pearson, "two-sided t approximation"),
        spearman: CorrelationReport::new(corr.spearman, "two-sided t approximation"),
        kendall: CorrelationReport::new(corr.kendall, "normal approximation, tie-corrected"),
        pairwise_accuracy: accuracy,
        pem,
        pr,
        answer_em,
        answer_f1,
        class_counts,
        per_question: rows,
    })
}
