//! Seeded synthetic corpus, questions, and simulated retrieval runs.
//!
//! The generator plants two-token entities with controlled document
//! frequencies into filler documents, writes bridge and comparison
//! questions that mention them, and simulates a retriever whose gold-doc
//! ranks are drawn with expectation proportional to the inverse of the
//! question's true retrieval probability. It also emits that ground-truth
//! probability per question, so estimators can be checked against a known
//! answer end to end.
//!
//! Everything derives from the seed: the same configuration produces
//! byte-identical output.
//!
//! Construction invariants the estimators rely on:
//! - an entity's bigram df is exactly its planted host count (insertion
//!   units are always separated by filler words, and entity pairs are
//!   sampled without replacement);
//! - entity bigram dfs stay below every part token's background df, so
//!   the bigram is always the most specific evidence for its span;
//! - question templates use words absent from the document vocabulary,
//!   so no frozen phrases arise and the n-gram set is exactly the
//!   planted entities.

use std::collections::{BTreeSet, HashSet};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use hopqpp_core::{Document, PathType, RetrievalRun};

use crate::dataset::{QuestionRecord, TruthRow};

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct SynthConfig {
    pub seed: u64,
    pub num_docs: usize,
    pub num_questions: usize,
    /// Per-hop depth of the simulated runs.
    pub k: usize,
    /// 0 pins gold ranks to the true cost (cost-consistent mode); values
    /// in (0, 1] mix a geometric draw with its expectation, keeping the
    /// expected rank at 1/p while scaling the spread.
    pub noise: f64,
    pub p_hop2: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            num_docs: 2_000,
            num_questions: 1_000,
            k: 20,
            noise: 1.0,
            p_hop2: 0.125,
        }
    }
}

pub struct SynthOutput {
    pub corpus: Vec<Document>,
    pub questions: Vec<QuestionRecord>,
    pub runs: Vec<RetrievalRun>,
    pub truth: Vec<TruthRow>,
}

const NUM_PARTS: usize = 40;
const NUM_ENTITIES: usize = 150;
const MAX_ENTITY_DF: u64 = 30;
const MIN_PART_BACKGROUND: u64 = 35;
const MAX_PART_BACKGROUND: u64 = 80;

struct Entity {
    parts: (usize, usize),
    df: u64,
    hosts: Vec<usize>,
}

impl Entity {
    fn tokens(&self) -> [String; 2] {
        [part_word(self.parts.0), part_word(self.parts.1)]
    }

    /// Capitalized surface form for question text, so the heuristic
    /// extractor recognizes the span.
    fn surface(&self) -> String {
        let [a, b] = self.tokens();
        format!("{} {}", capitalize(&a), capitalize(&b))
    }
}

fn part_word(j: usize) -> String {
    format!("ent{j:02}x")
}

fn capitalize(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().collect::<String>() + chars.as_str(),
        None => String::new(),
    }
}

fn doc_id(i: usize) -> String {
    format!("doc{i:05}")
}

fn sample_distinct_docs(rng: &mut ChaCha8Rng, num_docs: usize, count: usize) -> Vec<usize> {
    let mut chosen = HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let d = rng.gen_range(0..num_docs);
        if chosen.insert(d) {
            out.push(d);
        }
    }
    out
}

/// Geometric draw by inversion: number of Bernoulli(p) trials up to and
/// including the first success.
fn geometric(rng: &mut ChaCha8Rng, p: f64) -> f64 {
    if p >= 1.0 {
        return 1.0;
    }
    let u: f64 = rng.gen_range(f64::EPSILON..1.0);
    (u.ln() / (1.0 - p).ln()).ceil().max(1.0)
}

/// Rank with expectation 1/p: pure expectation at noise 0, pure
/// geometric at noise 1.
fn draw_rank(rng: &mut ChaCha8Rng, p: f64, noise: f64) -> u64 {
    let expected = 1.0 / p;
    let rank = if noise <= 0.0 {
        expected
    } else {
        noise * geometric(rng, p) + (1.0 - noise) * expected
    };
    rank.round().max(1.0) as u64
}

/// Deterministic cost-consistent rank for the second hop: a strictly
/// decreasing function of the true probability, well inside the run
/// depth, so that coverage cost orders exactly like `1/p_true`.
fn pinned_rank(p_true: f64) -> u64 {
    1 + (1.0 / p_true).log2().round().max(0.0) as u64
}

pub fn generate(cfg: &SynthConfig) -> SynthOutput {
    assert!(cfg.num_docs >= 4 * cfg.k.max(10), "corpus too small for run depth");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    // background presence of each part token
    let background: Vec<Vec<usize>> = (0..NUM_PARTS)
        .map(|_| {
            let n = rng.gen_range(MIN_PART_BACKGROUND..=MAX_PART_BACKGROUND) as usize;
            sample_distinct_docs(&mut rng, cfg.num_docs, n)
        })
        .collect();

    // entities: distinct part pairs with log-uniform document frequency
    let mut entities: Vec<Entity> = Vec::with_capacity(NUM_ENTITIES);
    let mut used_pairs = HashSet::new();
    while entities.len() < NUM_ENTITIES {
        let a = rng.gen_range(0..NUM_PARTS);
        let b = rng.gen_range(0..NUM_PARTS);
        if a == b || !used_pairs.insert((a, b)) {
            continue;
        }
        let u: f64 = rng.gen();
        let df = (MAX_ENTITY_DF as f64).powf(u).floor().max(1.0) as u64;
        let hosts = sample_distinct_docs(&mut rng, cfg.num_docs, df as usize);
        entities.push(Entity { parts: (a, b), df, hosts });
    }

    // questions reference entities; bridge questions additionally plant a
    // shared token between their two gold documents
    let mut questions = Vec::with_capacity(cfg.num_questions);
    let mut truth = Vec::with_capacity(cfg.num_questions);
    let mut extra_plants: Vec<(usize, Vec<String>)> = Vec::new();
    struct QuestionPlan {
        id: String,
        path_type: PathType,
        p_true: f64,
        hop_probs: [f64; 2],
        gold: [usize; 2],
    }
    let mut plans = Vec::with_capacity(cfg.num_questions);

    for i in 0..cfg.num_questions {
        let id = format!("q{i:05}");
        if i % 2 == 0 {
            // bridge
            let e = &entities[rng.gen_range(0..entities.len())];
            let d1 = e.hosts[0];
            let mut d2 = rng.gen_range(0..cfg.num_docs);
            while d2 == d1 {
                d2 = rng.gen_range(0..cfg.num_docs);
            }
            let link = format!("br{i:05}y");
            extra_plants.push((d1, vec![link.clone()]));
            extra_plants.push((d2, vec![link]));
            let spec = 1.0 / e.df as f64;
            let p_true = spec * cfg.p_hop2;
            questions.push(QuestionRecord {
                question_id: id.clone(),
                question: format!(
                    "What year was the actor that starred in {} born?",
                    e.surface()
                ),
                answer: Some(format!("{}", 1900 + (i % 100))),
                gold_support: Some(
                    [doc_id(d1), doc_id(d2)].into_iter().collect::<BTreeSet<_>>(),
                ),
                dataset_type: Some(hopqpp_core::BinaryPathLabel::Bridge),
                dataset_level: None,
            });
            truth.push(TruthRow {
                question_id: id.clone(),
                p_true,
                path_type: PathType::Bridge,
            });
            plans.push(QuestionPlan {
                id,
                path_type: PathType::Bridge,
                p_true,
                hop_probs: [spec, cfg.p_hop2],
                gold: [d1, d2],
            });
        } else {
            // comparison: two distinct entities hosted in distinct documents
            let (e1, e2) = loop {
                let x = rng.gen_range(0..entities.len());
                let y = rng.gen_range(0..entities.len());
                if x != y && entities[x].hosts[0] != entities[y].hosts[0] {
                    break (&entities[x], &entities[y]);
                }
            };
            let (d1, d2) = (e1.hosts[0], e2.hosts[0]);
            let (s1, s2) = (1.0 / e1.df as f64, 1.0 / e2.df as f64);
            let p_true = s1 * s2;
            questions.push(QuestionRecord {
                question_id: id.clone(),
                question: format!(
                    "Were {} and {} from different countries?",
                    e1.surface(),
                    e2.surface()
                ),
                answer: Some(if i % 4 == 1 { "yes" } else { "no" }.to_string()),
                gold_support: Some(
                    [doc_id(d1), doc_id(d2)].into_iter().collect::<BTreeSet<_>>(),
                ),
                dataset_type: Some(hopqpp_core::BinaryPathLabel::Comparison),
                dataset_level: None,
            });
            truth.push(TruthRow {
                question_id: id.clone(),
                p_true,
                path_type: PathType::Comparison,
            });
            plans.push(QuestionPlan {
                id,
                path_type: PathType::Comparison,
                p_true,
                hop_probs: [s1, s2],
                gold: [d1, d2],
            });
        }
    }

    // assemble documents: filler plus planted units, every unit followed
    // by filler so plants never touch
    let mut plants: Vec<Vec<Vec<String>>> = vec![Vec::new(); cfg.num_docs];
    for e in &entities {
        let unit: Vec<String> = e.tokens().to_vec();
        for &host in &e.hosts {
            plants[host].push(unit.clone());
        }
    }
    for (j, docs) in background.iter().enumerate() {
        for &d in docs {
            plants[d].push(vec![part_word(j)]);
        }
    }
    for (d, unit) in extra_plants {
        plants[d].push(unit);
    }

    let filler = |rng: &mut ChaCha8Rng| format!("fill{:03}", rng.gen_range(0..300));
    let corpus: Vec<Document> = plants
        .iter()
        .enumerate()
        .map(|(i, units)| {
            let mut tokens: Vec<String> = (0..3).map(|_| filler(&mut rng)).collect();
            for unit in units {
                tokens.extend(unit.iter().cloned());
                tokens.push(filler(&mut rng));
                tokens.push(filler(&mut rng));
            }
            Document::new(doc_id(i), doc_id(i), tokens.join(" "))
        })
        .collect();

    // simulated retrieval runs: two hops of depth k with disjoint
    // distractors, gold ranks drawn per hop
    let mut runs = Vec::with_capacity(cfg.num_questions);
    for plan in &plans {
        let ranks: [u64; 2] = match (cfg.noise <= 0.0, plan.path_type) {
            (true, _) => [1, pinned_rank(plan.p_true)],
            (false, _) => [
                draw_rank(&mut rng, plan.hop_probs[0], cfg.noise),
                draw_rank(&mut rng, plan.hop_probs[1], cfg.noise),
            ],
        };
        let mut pool: Vec<usize> = Vec::with_capacity(2 * cfg.k);
        let mut taken: HashSet<usize> = plan.gold.iter().copied().collect();
        while pool.len() < 2 * cfg.k {
            let d = rng.gen_range(0..cfg.num_docs);
            if taken.insert(d) {
                pool.push(d);
            }
        }
        let hop = |hop_idx: usize, rank: u64, pool_slice: &[usize]| -> Vec<String> {
            let mut docs = Vec::with_capacity(cfg.k);
            let mut fill = pool_slice.iter();
            for pos in 1..=cfg.k as u64 {
                if pos == rank {
                    docs.push(doc_id(plan.gold[hop_idx]));
                } else {
                    docs.push(doc_id(*fill.next().expect("pool sized for depth")));
                }
            }
            docs
        };
        runs.push(RetrievalRun {
            question_id: plan.id.clone(),
            hops: vec![
                hop(0, ranks[0], &pool[..cfg.k]),
                hop(1, ranks[1], &pool[cfg.k..]),
            ],
            gold_support: plan.gold.iter().map(|&d| doc_id(d)).collect(),
        });
    }

    SynthOutput {
        corpus,
        questions,
        runs,
        truth,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use hopqpp_core::build_index;

    fn small() -> SynthConfig {
        SynthConfig {
            seed: 7,
            num_docs: 400,
            num_questions: 60,
            k: 10,
            noise: 1.0,
            p_hop2: 0.125,
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate(&small());
        let b = generate(&small());
        assert_eq!(a.corpus, b.corpus);
        assert_eq!(a.questions, b.questions);
        assert_eq!(a.runs, b.runs);
        assert_eq!(
            serde_json::to_string(&a.truth.iter().map(|t| t.p_true).collect::<Vec<_>>()).unwrap(),
            serde_json::to_string(&b.truth.iter().map(|t| t.p_true).collect::<Vec<_>>()).unwrap()
        );
    }

    #[test]
    fn different_seeds_differ() {
        let a = generate(&small());
        let b = generate(&SynthConfig { seed: 8, ..small() });
        assert_ne!(a.corpus, b.corpus);
    }

    #[test]
    fn planted_entity_df_matches_the_index() {
        let out = generate(&small());
        let idx = build_index(&out.corpus, 3).unwrap();
        // reconstruct each question's entity bigram from its text and
        // check the planted frequency supports the emitted p_true
        for (q, t) in out.questions.iter().zip(&out.truth) {
            let entities = hopqpp_core::extract_entities(&q.question, None).unwrap();
            assert!(!entities.is_empty());
            match t.path_type {
                PathType::Bridge => {
                    assert_eq!(entities.len(), 1);
                    let df = idx.doc_count(&entities[0].tokens).unwrap();
                    assert!(df > 0);
                    assert_eq!(t.p_true, (1.0 / df as f64) * 0.125);
                }
                PathType::Comparison => {
                    assert_eq!(entities.len(), 2);
                    let df1 = idx.doc_count(&entities[0].tokens).unwrap();
                    let df2 = idx.doc_count(&entities[1].tokens).unwrap();
                    assert_eq!(t.p_true, (1.0 / df1 as f64) * (1.0 / df2 as f64));
                }
                _ => panic!("unexpected type"),
            }
        }
    }

    #[test]
    fn df_one_entities_have_unit_specificity() {
        let out = generate(&small());
        let idx = build_index(&out.corpus, 3).unwrap();
        let mut saw_df_one = false;
        for (q, t) in out.questions.iter().zip(&out.truth) {
            if t.path_type != PathType::Bridge {
                continue;
            }
            let entities = hopqpp_core::extract_entities(&q.question, None).unwrap();
            if idx.doc_count(&entities[0].tokens).unwrap() == 1 {
                saw_df_one = true;
                assert_eq!(t.p_true, 0.125, "specificity 1.0 times p_hop2");
            }
        }
        assert!(saw_df_one, "expected at least one df=1 entity at this size");
    }

    #[test]
    fn runs_are_well_formed() {
        let out = generate(&small());
        for run in &out.runs {
            run.validate().unwrap();
            assert_eq!(run.hops.len(), 2);
            assert_eq!(run.hops[0].len(), 10);
            // hops are disjoint by construction
            let h0: std::collections::HashSet<&String> = run.hops[0].iter().collect();
            assert!(run.hops[1].iter().all(|d| !h0.contains(d)));
        }
    }

    #[test]
    fn zero_noise_pins_gold_ranks() {
        let cfg = SynthConfig { noise: 0.0, ..small() };
        let out = generate(&cfg);
        for (run, t) in out.runs.iter().zip(&out.truth) {
            let gold_rank_hop2 = run.hops[1]
                .iter()
                .position(|d| run.gold_support.contains(d))
                .map(|p| p as u64 + 1);
            let pinned = pinned_rank(t.p_true);
            if pinned <= cfg.k as u64 {
                assert_eq!(gold_rank_hop2, Some(pinned));
            } else {
                assert_eq!(gold_rank_hop2, None, "rank beyond depth means not retrieved");
            }
            assert!(run.gold_support.contains(&run.hops[0][0]));
        }
    }
}
