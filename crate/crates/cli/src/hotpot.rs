//! HotpotQA-format importer.
//!
//! The raw file is one JSON array of records carrying a question, its
//! answer, per-paragraph contexts as `[title, [sentence, ...]]` pairs,
//! and supporting facts as `[title, sentence_index]` pairs. Contexts
//! become corpus documents keyed by title (gold evidence is addressed by
//! title, so the title is the join key); supporting-fact titles become
//! the question's gold support.
//!
//! Titles recur across records. In first-paragraph mode the first
//! occurrence wins and later collisions are only counted; in full-text
//! mode sentences not yet seen for a title are appended, for corpora
//! whose records carry different fragments of the same article.

use std::collections::BTreeSet;
use std::collections::HashMap;

use anyhow::{Context, Result};
use serde::Deserialize;
use serde_json::Value;

use hopqpp_core::{tokenize, Document};

use crate::dataset::{DatasetLevel, QuestionRecord};

/// Corpus granularity switch, see the module docs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ImportMode {
    FirstParagraph,
    FullText,
}

#[derive(Debug, Deserialize)]
struct RawRecord {
    #[serde(rename = "_id")]
    id: String,
    question: String,
    #[serde(default)]
    answer: Option<String>,
    #[serde(rename = "type", default)]
    qtype: Option<String>,
    #[serde(default)]
    level: Option<String>,
    #[serde(default)]
    supporting_facts: Vec<(String, Value)>,
    context: Vec<(String, Vec<String>)>,
}

/// What the importer did, for the log line.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct ImportStats {
    pub questions: usize,
    pub documents: usize,
    pub skipped_records: usize,
    pub duplicate_titles: usize,
    pub empty_documents: usize,
}

/// Parsed import result: corpus documents plus question records, both in
/// a canonical order (sorted by id).
pub struct Imported {
    pub corpus: Vec<Document>,
    pub questions: Vec<QuestionRecord>,
    pub stats: ImportStats,
}

/// Import a raw HotpotQA-schema JSON string. The file must parse as a
/// JSON array; individual records that do not match the schema are
/// skipped and counted.
pub fn import(raw: &str, mode: ImportMode) -> Result<Imported> {
    let records: Vec<Value> =
        serde_json::from_str(raw).context("input is not a JSON array of records")?;

    let mut stats = ImportStats::default();
    let mut questions = Vec::new();
    let mut title_order: Vec<String> = Vec::new();
    let mut sentences_by_title: HashMap<String, Vec<String>> = HashMap::new();
    let mut seen_question_ids: BTreeSet<String> = BTreeSet::new();

    for value in records {
        let record: RawRecord = match serde_json::from_value(value) {
            Ok(r) => r,
            Err(_) => {
                stats.skipped_records += 1;
                continue;
            }
        };
        if record.question.trim().is_empty()
            || record.context.is_empty()
            || !seen_question_ids.insert(record.id.clone())
        {
            stats.skipped_records += 1;
            continue;
        }

        for (title, sentences) in record.context {
            match sentences_by_title.get_mut(&title) {
                None => {
                    title_order.push(title.clone());
                    sentences_by_title.insert(title, sentences);
                }
                Some(existing) => {
                    stats.duplicate_titles += 1;
                    if mode == ImportMode::FullText {
                        for s in sentences {
                            if !existing.contains(&s) {
                                existing.push(s);
                            }
                        }
                    }
                }
            }
        }

        let gold: BTreeSet<String> = record
            .supporting_facts
            .iter()
            .map(|(title, _)| title.clone())
            .collect();
        questions.push(QuestionRecord {
            question_id: record.id,
            question: record.question,
            answer: record.answer,
            gold_support: if gold.is_empty() { None } else { Some(gold) },
            dataset_type: record.qtype.as_deref().and_then(|t| t.parse().ok()),
            dataset_level: record.level.as_deref().and_then(parse_level),
        });
    }

    let mut corpus = Vec::with_capacity(title_order.len());
    for title in title_order {
        let sentences = &sentences_by_title[&title];
        let text = sentences.join(" ");
        if tokenize(&text).is_empty() {
            stats.empty_documents += 1;
            continue;
        }
        corpus.push(Document::new(title.clone(), title, text));
    }

    corpus.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
    questions.sort_by(|a, b| a.question_id.cmp(&b.question_id));
    stats.documents = corpus.len();
    stats.questions = questions.len();
    Ok(Imported {
        corpus,
        questions,
        stats,
    })
}

fn parse_level(level: &str) -> Option<DatasetLevel> {
    match level {
        "easy" => Some(DatasetLevel::Easy),
        "medium" => Some(DatasetLevel::Medium),
        "hard" => Some(DatasetLevel::Hard),
        _ => None,
    }
}
