//! Dataset records and JSON-lines I/O.
//!
//! Every pipeline file is JSON-lines with one record per line, so that
//! partial corpora stream and diffs stay readable. Readers report the
//! offending line number on malformed input; writers emit records in a
//! fixed order so identical inputs produce byte-identical files.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use hopqpp_core::{BinaryPathLabel, ChosenNgram, PathType, SpanAnnotation};

/// HotpotQA-style difficulty tag carried through from the source dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetLevel {
    Easy,
    Medium,
    Hard,
}

/// One question of a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionRecord {
    pub question_id: String,
    pub question: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answer: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_support: Option<BTreeSet<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset_type: Option<BinaryPathLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset_level: Option<DatasetLevel>,
}

/// Annotation sidecar row: externally produced character spans for one
/// question.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub question_id: String,
    pub spans: Vec<SpanAnnotation>,
}

/// External path-type prediction row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TypeLabelRecord {
    pub question_id: String,
    #[serde(rename = "type")]
    pub label: BinaryPathLabel,
}

/// One predicted score.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoreRow {
    pub question_id: String,
    pub method: String,
    pub path_type: Option<PathType>,
    pub score: f64,
    #[serde(default)]
    pub chosen_ngrams: Vec<ChosenNgramRow>,
}

/// Wire form of a chosen n-gram.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChosenNgramRow {
    pub ngram: String,
    pub doc_count: u64,
}

impl From<ChosenNgram> for ChosenNgramRow {
    fn from(c: ChosenNgram) -> Self {
        Self {
            ngram: c.ngram,
            doc_count: c.doc_count,
        }
    }
}

/// Predicted answer row for end-to-end evaluation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictedAnswerRow {
    pub question_id: String,
    pub answer: String,
}

/// Ground-truth retrieval probability emitted by the synthetic harness.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TruthRow {
    pub question_id: String,
    pub p_true: f64,
    pub path_type: PathType,
}

/// Read a JSON-lines file, reporting the line number on failure. Blank
/// lines are ignored.
pub fn read_jsonl<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let path = path.as_ref();
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.with_context(|| format!("reading {} line {}", path.display(), i + 1))?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line)
            .with_context(|| format!("parsing {} line {}", path.display(), i + 1))?;
        out.push(record);
    }
    Ok(out)
}

/// Write records as JSON-lines.
pub fn write_jsonl<T: Serialize>(path: impl AsRef<Path>, items: &[T]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    for item in items {
        serde_json::to_writer(&mut w, item)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Load questions and enforce dataset invariants: unique ids, non-empty
/// question text.
pub fn load_questions(path: impl AsRef<Path>) -> Result<Vec<QuestionRecord>> {
    let questions: Vec<QuestionRecord> = read_jsonl(&path)?;
    let mut seen = BTreeSet::new();
    for q in &questions {
        if !seen.insert(&q.question_id) {
            bail!("duplicate question_id {:?}", q.question_id);
        }
        if q.question.trim().is_empty() {
            bail!("question {:?} has empty text", q.question_id);
        }
    }
    Ok(questions)
}

/// Load an annotation sidecar into a per-question map.
pub fn load_annotations(path: impl AsRef<Path>) -> Result<HashMap<String, Vec<SpanAnnotation>>> {
    let rows: Vec<AnnotationRecord> = read_jsonl(&path)?;
    let mut map = HashMap::new();
    for row in rows {
        if map.insert(row.question_id.clone(), row.spans).is_some() {
            bail!("duplicate annotation row for {:?}", row.question_id);
        }
    }
    Ok(map)
}

/// Load external path-type labels into a per-question map.
pub fn load_type_labels(path: impl AsRef<Path>) -> Result<HashMap<String, BinaryPathLabel>> {
    let rows: Vec<TypeLabelRecord> = read_jsonl(&path)?;
    let mut map = HashMap::new();
    for row in rows {
        if map.insert(row.question_id.clone(), row.label).is_some() {
            bail!("duplicate type label for {:?}", row.question_id);
        }
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_round_trips_and_reports_bad_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("q.jsonl");
        let items = vec![
            QuestionRecord {
                question_id: "q1".into(),
                question: "Who?".into(),
                answer: Some("x".into()),
                gold_support: None,
                dataset_type: Some(BinaryPathLabel::Bridge),
                dataset_level: Some(DatasetLevel::Hard),
            },
            QuestionRecord {
                question_id: "q2".into(),
                question: "What?".into(),
                answer: None,
                gold_support: None,
                dataset_type: None,
                dataset_level: None,
            },
        ];
        write_jsonl(&path, &items).unwrap();
        let back: Vec<QuestionRecord> = read_jsonl(&path).unwrap();
        assert_eq!(items, back);

        std::fs::write(&path, "{\"question_id\": \"q1\", \"question\": \"ok\"}\nnot json\n")
            .unwrap();
        let err = read_jsonl::<QuestionRecord>(&path).unwrap_err();
        assert!(format!("{err:#}").contains("line 2"), "{err:#}");
    }

    #[test]
    fn duplicate_question_ids_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("q.jsonl");
        std::fs::write(
            &path,
            "{\"question_id\":\"a\",\"question\":\"x?\"}\n{\"question_id\":\"a\",\"question\":\"y?\"}\n",
        )
        .unwrap();
        assert!(load_questions(&path).is_err());
    }

    #[test]
    fn optional_fields_are_omitted_from_the_wire() {
        let q = QuestionRecord {
            question_id: "q".into(),
            question: "text".into(),
            answer: None,
            gold_support: None,
            dataset_type: None,
            dataset_level: None,
        };
        let line = serde_json::to_string(&q).unwrap();
        assert_eq!(line, "{\"question_id\":\"q\",\"question\":\"text\"}");
    }
}
