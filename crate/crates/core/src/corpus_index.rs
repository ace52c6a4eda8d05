//! Corpus n-gram statistics.
//!
//! [`DfIndex`] answers two questions about a collection: in how many
//! documents does an n-gram occur (document frequency, presence-based),
//! and how often does a unigram occur overall (collection frequency,
//! occurrence-based). Document frequencies are kept for n-grams up to
//! `max_n` tokens; collection frequencies only for unigrams. Both are
//! needed: specificity estimates want document counts, the clarity and
//! collection-similarity baselines want collection term statistics.
//!
//! A finished index is immutable and can be shared freely across threads.
//! Construction can be partitioned: build one [`IndexBuilder`] per shard
//! and merge, as long as each document is added exactly once.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tokenize::{ngram_key, tokenize};

/// A document in the collection. `doc_id` must be unique per corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    #[serde(rename = "id")]
    pub doc_id: String,
    pub title: String,
    pub text: String,
}

impl Document {
    pub fn new(
        doc_id: impl Into<String>,
        title: impl Into<String>,
        text: impl Into<String>,
    ) -> Self {
        Self {
            doc_id: doc_id.into(),
            title: title.into(),
            text: text.into(),
        }
    }

    /// Token stream used for indexing and relatedness checks: title tokens
    /// prepended before text tokens.
    pub fn tokens(&self) -> Vec<String> {
        let mut toks = tokenize(&self.title);
        toks.extend(tokenize(&self.text));
        toks
    }
}

const INDEX_MAGIC: &[u8; 8] = b"HQPPIDX\0";
const INDEX_VERSION: u32 = 1;

/// Corpus-wide n-gram document-frequency and collection-frequency statistics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DfIndex {
    num_docs: u64,
    total_tokens: u64,
    max_n: usize,
    df: HashMap<String, u64>,
    cf: HashMap<String, u64>,
}

impl DfIndex {
    /// Number of documents in the collection.
    pub fn num_docs(&self) -> u64 {
        self.num_docs
    }

    /// Total count of unigram occurrences across the collection.
    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    /// Largest n-gram length this index can answer.
    pub fn max_n(&self) -> usize {
        self.max_n
    }

    /// Number of distinct n-gram keys tracked.
    pub fn distinct_ngrams(&self) -> usize {
        self.df.len()
    }

    /// How many documents mention `ngram`. Absence is not an error: an
    /// unseen n-gram has count 0 and is simply skipped by estimators.
    pub fn doc_count<S: AsRef<str>>(&self, ngram: &[S]) -> Result<u64> {
        self.check_len(ngram.len())?;
        Ok(self.df.get(&ngram_key(ngram)).copied().unwrap_or(0))
    }

    /// Document-frequency lookup by canonical key, same contract as
    /// [`DfIndex::doc_count`] but without re-joining tokens.
    pub fn doc_count_key(&self, key: &str) -> u64 {
        self.df.get(key).copied().unwrap_or(0)
    }

    /// Collection frequency of a unigram (total occurrences, 0 if unseen).
    pub fn collection_frequency(&self, unigram: &str) -> u64 {
        self.cf.get(unigram).copied().unwrap_or(0)
    }

    /// Probability of finding `ngram` in an arbitrary document:
    /// `df(ngram) / num_docs`, in `[0, 1]`.
    pub fn term_probability<S: AsRef<str>>(&self, ngram: &[S]) -> Result<f64> {
        self.check_len(ngram.len())?;
        if self.num_docs == 0 {
            return Err(Error::EmptyIndex);
        }
        let df = self.df.get(&ngram_key(ngram)).copied().unwrap_or(0);
        Ok(df as f64 / self.num_docs as f64)
    }

    /// As [`DfIndex::term_probability`] but keyed; length is not rechecked.
    pub fn term_probability_key(&self, key: &str) -> Result<f64> {
        if self.num_docs == 0 {
            return Err(Error::EmptyIndex);
        }
        Ok(self.doc_count_key(key) as f64 / self.num_docs as f64)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len == 0 {
            return Err(Error::EmptyNgram);
        }
        if len > self.max_n {
            return Err(Error::NgramTooLong {
                len,
                max_n: self.max_n,
            });
        }
        Ok(())
    }

    /// Build an index directly from counts. Intended for stubs and tests
    /// where the exact df/cf values matter more than the documents that
    /// would produce them. Keys are canonical n-gram keys (tokens joined
    /// by one space); `total_tokens` is the sum of the given cf values.
    pub fn from_counts<D, C>(num_docs: u64, max_n: usize, df: D, cf: C) -> Result<Self>
    where
        D: IntoIterator<Item = (String, u64)>,
        C: IntoIterator<Item = (String, u64)>,
    {
        let df: HashMap<String, u64> = df.into_iter().collect();
        let cf: HashMap<String, u64> = cf.into_iter().collect();
        let mut total_tokens = 0u64;
        for (key, &count) in &df {
            if count == 0 || count > num_docs {
                return Err(Error::IndexFormat(format!(
                    "df({key:?}) = {count} outside 1..={num_docs}"
                )));
            }
            let len = key.split(' ').count();
            if len > max_n {
                return Err(Error::NgramTooLong { len, max_n });
            }
        }
        for (key, &count) in &cf {
            if let Some(&df_count) = df.get(key) {
                if count < df_count {
                    return Err(Error::IndexFormat(format!(
                        "cf({key:?}) = {count} below df = {df_count}"
                    )));
                }
            }
            total_tokens += count;
        }
        Ok(Self {
            num_docs,
            total_tokens,
            max_n,
            df,
            cf,
        })
    }

    /// Write the index as a single self-describing binary file. Entries are
    /// written in sorted key order so that identical indexes serialize to
    /// identical bytes.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(INDEX_MAGIC)?;
        w.write_u32::<LittleEndian>(INDEX_VERSION)?;
        w.write_u64::<LittleEndian>(self.num_docs)?;
        w.write_u64::<LittleEndian>(self.total_tokens)?;
        w.write_u32::<LittleEndian>(self.max_n as u32)?;
        write_count_table(&mut w, &self.df)?;
        write_count_table(&mut w, &self.cf)?;
        w.flush()?;
        Ok(())
    }

    /// Load an index produced by [`DfIndex::save`]. Fails on unknown
    /// versions and on truncated or malformed files; a failed load never
    /// yields a partial index.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)
            .map_err(|e| Error::IndexFormat(format!("truncated header: {e}")))?;
        if &magic != INDEX_MAGIC {
            return Err(Error::IndexFormat("bad magic bytes".into()));
        }
        let version = read_u32(&mut r, "version")?;
        if version != INDEX_VERSION {
            return Err(Error::IndexVersion {
                found: version,
                expected: INDEX_VERSION,
            });
        }
        let num_docs = read_u64(&mut r, "num_docs")?;
        let total_tokens = read_u64(&mut r, "total_tokens")?;
        let max_n = read_u32(&mut r, "max_n")? as usize;
        let df = read_count_table(&mut r, "df")?;
        let cf = read_count_table(&mut r, "cf")?;
        let mut trailing = [0u8; 1];
        if r.read(&mut trailing)? != 0 {
            return Err(Error::IndexFormat("trailing bytes after cf table".into()));
        }
        Ok(Self {
            num_docs,
            total_tokens,
            max_n,
            df,
            cf,
        })
    }

}

fn write_count_table<W: Write>(w: &mut W, table: &HashMap<String, u64>) -> Result<()> {
    let mut keys: Vec<&String> = table.keys().collect();
    keys.sort_unstable();
    w.write_u64::<LittleEndian>(keys.len() as u64)?;
    for key in keys {
        let bytes = key.as_bytes();
        w.write_u32::<LittleEndian>(bytes.len() as u32)?;
        w.write_all(bytes)?;
        w.write_u64::<LittleEndian>(table[key])?;
    }
    Ok(())
}

fn read_u32<R: Read>(r: &mut R, what: &str) -> Result<u32> {
    r.read_u32::<LittleEndian>()
        .map_err(|e| Error::IndexFormat(format!("truncated {what}: {e}")))
}

fn read_u64<R: Read>(r: &mut R, what: &str) -> Result<u64> {
    r.read_u64::<LittleEndian>()
        .map_err(|e| Error::IndexFormat(format!("truncated {what}: {e}")))
}

fn read_count_table<R: Read>(r: &mut R, what: &str) -> Result<HashMap<String, u64>> {
    let len = read_u64(r, what)?;
    let mut table = HashMap::with_capacity(len.min(1 << 20) as usize);
    for i in 0..len {
        let key_len = read_u32(r, what)? as usize;
        let mut key = vec![0u8; key_len];
        r.read_exact(&mut key)
            .map_err(|e| Error::IndexFormat(format!("truncated {what} entry {i}: {e}")))?;
        let key = String::from_utf8(key)
            .map_err(|_| Error::IndexFormat(format!("non-utf8 key in {what} entry {i}")))?;
        let count = read_u64(r, what)?;
        table.insert(key, count);
    }
    Ok(table)
}

/// Incremental index construction. Shards may be built independently and
/// merged; df and cf counts are additive as long as no document is added
/// twice.
#[derive(Debug)]
pub struct IndexBuilder {
    max_n: usize,
    seen_ids: HashSet<String>,
    num_docs: u64,
    total_tokens: u64,
    df: HashMap<String, u64>,
    cf: HashMap<String, u64>,
}

impl IndexBuilder {
    pub fn new(max_n: usize) -> Self {
        assert!(max_n >= 1, "max_n must be at least 1");
        Self {
            max_n,
            seen_ids: HashSet::new(),
            num_docs: 0,
            total_tokens: 0,
            df: HashMap::new(),
            cf: HashMap::new(),
        }
    }

    /// Add one document. The title is indexed together with the text.
    /// df counts each document at most once per n-gram; cf counts every
    /// unigram occurrence.
    pub fn add(&mut self, doc: &Document) -> Result<()> {
        if !self.seen_ids.insert(doc.doc_id.clone()) {
            return Err(Error::DuplicateDocId(doc.doc_id.clone()));
        }
        if tokenize(&doc.text).is_empty() {
            self.seen_ids.remove(&doc.doc_id);
            return Err(Error::EmptyDocument(doc.doc_id.clone()));
        }
        let tokens = doc.tokens();

        for tok in &tokens {
            *self.cf.entry(tok.clone()).or_insert(0) += 1;
        }
        self.total_tokens += tokens.len() as u64;

        let mut seen: HashSet<String> = HashSet::new();
        for n in 1..=self.max_n.min(tokens.len()) {
            for window in tokens.windows(n) {
                let key = ngram_key(window);
                if seen.insert(key.clone()) {
                    *self.df.entry(key).or_insert(0) += 1;
                }
            }
        }
        self.num_docs += 1;
        Ok(())
    }

    /// Merge another shard into this one. Fails if the shards saw a common
    /// document id or disagree on `max_n`.
    pub fn merge(&mut self, other: IndexBuilder) -> Result<()> {
        if other.max_n != self.max_n {
            return Err(Error::IndexFormat(format!(
                "cannot merge shards with max_n {} and {}",
                self.max_n, other.max_n
            )));
        }
        for id in &other.seen_ids {
            if self.seen_ids.contains(id) {
                return Err(Error::DuplicateDocId(id.clone()));
            }
        }
        self.seen_ids.extend(other.seen_ids);
        self.num_docs += other.num_docs;
        self.total_tokens += other.total_tokens;
        for (key, count) in other.df {
            *self.df.entry(key).or_insert(0) += count;
        }
        for (key, count) in other.cf {
            *self.cf.entry(key).or_insert(0) += count;
        }
        Ok(())
    }

    pub fn finish(self) -> DfIndex {
        DfIndex {
            num_docs: self.num_docs,
            total_tokens: self.total_tokens,
            max_n: self.max_n,
            df: self.df,
            cf: self.cf,
        }
    }
}

/// Default largest n-gram length: estimators never look past trigrams.
pub const DEFAULT_MAX_N: usize = 3;

/// Index a document stream. Equivalent to feeding every document to one
/// [`IndexBuilder`].
pub fn build_index<'a, I>(docs: I, max_n: usize) -> Result<DfIndex>
where
    I: IntoIterator<Item = &'a Document>,
{
    let mut builder = IndexBuilder::new(max_n);
    for doc in docs {
        builder.add(doc)?;
    }
    Ok(builder.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(id: &str, text: &str) -> Document {
        Document::new(id, "", text)
    }

    #[test]
    fn df_counts_presence_not_frequency() {
        let docs = vec![doc("a", "phoenix rising"), doc("b", "phoenix phoenix")];
        let idx = build_index(&docs, 3).unwrap();
        assert_eq!(idx.doc_count(&["phoenix"]).unwrap(), 2);
    }

    #[test]
    fn cf_counts_occurrences() {
        let idx = build_index(&[doc("d", "a b a")], 3).unwrap();
        assert_eq!(idx.collection_frequency("a"), 2);
        assert_eq!(idx.doc_count(&["a"]).unwrap(), 1);
        assert_eq!(idx.total_tokens(), 3);
    }

    #[test]
    fn bigrams_are_contiguous() {
        let docs = vec![doc("1", "x y z"), doc("2", "x q")];
        let idx = build_index(&docs, 3).unwrap();
        assert_eq!(idx.doc_count(&["x", "y"]).unwrap(), 1);
        assert_eq!(idx.doc_count(&["x"]).unwrap(), 2);
        assert_eq!(idx.doc_count(&["x", "q"]).unwrap(), 1);
        assert_eq!(idx.doc_count(&["y", "q"]).unwrap(), 0);
    }

    #[test]
    fn duplicate_doc_id_is_rejected_by_name() {
        let mut b = IndexBuilder::new(3);
        b.add(&doc("dup", "one")).unwrap();
        match b.add(&doc("dup", "two")) {
            Err(Error::DuplicateDocId(id)) => assert_eq!(id, "dup"),
            other => panic!("expected duplicate id error, got {other:?}"),
        }
    }

    #[test]
    fn empty_text_is_rejected() {
        let mut b = IndexBuilder::new(3);
        match b.add(&Document::new("e", "Has A Title", "...!!...")) {
            Err(Error::EmptyDocument(id)) => assert_eq!(id, "e"),
            other => panic!("expected empty document error, got {other:?}"),
        }
        // the id is free again after the rejection
        b.add(&doc("e", "real text")).unwrap();
    }

    #[test]
    fn title_tokens_are_indexed() {
        let idx = build_index(&[Document::new("t", "Little Nikita", "a film")], 3).unwrap();
        assert_eq!(idx.doc_count(&["little", "nikita"]).unwrap(), 1);
        // title + text in one stream, so cf covers both
        assert_eq!(idx.total_tokens(), 4);
    }

    #[test]
    fn absent_ngram_counts_zero_and_full_corpus_counts_all() {
        let docs: Vec<Document> = (0..7)
            .map(|i| doc(&format!("d{i}"), "shared token"))
            .collect();
        let idx = build_index(&docs, 3).unwrap();
        assert_eq!(idx.doc_count(&["nowhere"]).unwrap(), 0);
        assert_eq!(idx.doc_count(&["shared"]).unwrap(), 7);
    }

    #[test]
    fn doc_count_rejects_overlong_ngrams() {
        let idx = build_index(&[doc("d", "a b c d")], 3).unwrap();
        match idx.doc_count(&["a", "b", "c", "d"]) {
            Err(Error::NgramTooLong { len: 4, max_n: 3 }) => {}
            other => panic!("expected NgramTooLong, got {other:?}"),
        }
        assert!(matches!(
            idx.doc_count(&[] as &[&str]),
            Err(Error::EmptyNgram)
        ));
    }

    #[test]
    fn term_probability_matches_ratio() {
        let mut docs = vec![doc("p1", "rare pair"), doc("p2", "rare pair")];
        for i in 0..1998 {
            docs.push(doc(&format!("f{i}"), "filler text"));
        }
        let idx = build_index(&docs, 3).unwrap();
        assert_eq!(idx.term_probability(&["rare"]).unwrap(), 2.0 / 2000.0);
        assert_eq!(idx.term_probability(&["missing"]).unwrap(), 0.0);
        assert_eq!(idx.term_probability(&["filler"]).unwrap(), 1998.0 / 2000.0);
    }

    #[test]
    fn term_probability_on_empty_index_errors() {
        let idx = IndexBuilder::new(3).finish();
        assert!(matches!(
            idx.term_probability(&["x"]),
            Err(Error::EmptyIndex)
        ));
    }

    #[test]
    fn term_probability_saturates_at_one() {
        let idx = build_index(&[doc("only", "solo")], 3).unwrap();
        assert_eq!(idx.term_probability(&["solo"]).unwrap(), 1.0);
    }

    #[test]
    fn stub_counts_support_exact_df() {
        let idx = DfIndex::from_counts(
            10_000,
            3,
            vec![("buck tick".to_string(), 61)],
            vec![("buck".to_string(), 70), ("tick".to_string(), 65)],
        )
        .unwrap();
        assert_eq!(idx.doc_count(&["buck", "tick"]).unwrap(), 61);
    }

    #[test]
    fn from_counts_validates_bounds() {
        assert!(DfIndex::from_counts(5, 3, vec![("x".to_string(), 6)], vec![]).is_err());
        assert!(DfIndex::from_counts(
            5,
            3,
            vec![("x".to_string(), 3)],
            vec![("x".to_string(), 2)]
        )
        .is_err());
    }

    #[test]
    fn merge_is_additive_and_rejects_shared_ids() {
        let mut a = IndexBuilder::new(3);
        a.add(&doc("1", "x y")).unwrap();
        let mut b = IndexBuilder::new(3);
        b.add(&doc("2", "x z")).unwrap();
        a.merge(b).unwrap();
        let merged = a.finish();
        assert_eq!(merged.num_docs(), 2);
        assert_eq!(merged.doc_count(&["x"]).unwrap(), 2);

        let mut c = IndexBuilder::new(3);
        c.add(&doc("1", "x y")).unwrap();
        let mut d = IndexBuilder::new(3);
        d.add(&doc("1", "x y")).unwrap();
        assert!(matches!(c.merge(d), Err(Error::DuplicateDocId(_))));
    }

    #[test]
    fn save_load_round_trip_is_exact() {
        let docs = vec![doc("a", "alpha beta gamma"), doc("b", "beta delta")];
        let idx = build_index(&docs, 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("idx.bin");
        idx.save(&path).unwrap();
        let loaded = DfIndex::load(&path).unwrap();
        assert_eq!(idx, loaded);
    }

    #[test]
    fn truncated_file_fails_without_partial_index() {
        let idx = build_index(&[doc("a", "alpha beta")], 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("idx.bin");
        idx.save(&path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 7]).unwrap();
        assert!(matches!(DfIndex::load(&path), Err(Error::IndexFormat(_))));
    }

    #[test]
    fn wrong_version_is_an_explicit_error() {
        let idx = build_index(&[doc("a", "alpha")], 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("idx.bin");
        idx.save(&path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[8] = 99; // version field follows the 8-byte magic
        std::fs::write(&path, &bytes).unwrap();
        match DfIndex::load(&path) {
            Err(Error::IndexVersion { found: 99, .. }) => {}
            other => panic!("expected version error, got {other:?}"),
        }
    }
}
