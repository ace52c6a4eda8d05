//! Tokenization and n-gram keys.
//!
//! One tokenizer is used everywhere: lowercase, split on any
//! non-alphanumeric character, keep digits, no stemming, no stopword
//! removal. Frequent terms are handled downstream by the relatedness
//! threshold rather than a stopword list.

/// A token together with its character span in the source string.
///
/// Offsets are in characters (not bytes) so that spans interoperate with
/// annotation files produced by other tooling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpannedToken {
    /// Lowercased token text.
    pub text: String,
    /// Char offset of the first character.
    pub start: usize,
    /// Char offset one past the last character.
    pub end: usize,
    /// True when the original surface form carried an uppercase character.
    pub has_uppercase: bool,
}

/// Lowercase and split on any non-alphanumeric character.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .collect()
}

/// Tokenize while recording char offsets and original capitalization.
pub fn tokenize_spanned(text: &str) -> Vec<SpannedToken> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut start = 0usize;
    let mut has_upper = false;

    for (pos, ch) in text.chars().enumerate() {
        if ch.is_alphanumeric() {
            if current.is_empty() {
                start = pos;
                has_upper = false;
            }
            has_upper |= ch.is_uppercase();
            current.extend(ch.to_lowercase());
        } else if !current.is_empty() {
            out.push(SpannedToken {
                text: std::mem::take(&mut current),
                start,
                end: pos,
                has_uppercase: has_upper,
            });
        }
    }
    if !current.is_empty() {
        let end = text.chars().count();
        out.push(SpannedToken {
            text: current,
            start,
            end,
            has_uppercase: has_upper,
        });
    }
    out
}

/// Canonical map key for an n-gram: tokens joined by a single space.
pub fn ngram_key<S: AsRef<str>>(tokens: &[S]) -> String {
    let mut key = String::new();
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 {
            key.push(' ');
        }
        key.push_str(t.as_ref());
    }
    key
}

/// All contiguous n-gram keys of `tokens` for n in `1..=max_n`.
pub fn ngram_keys(tokens: &[String], max_n: usize) -> Vec<String> {
    let mut keys = Vec::new();
    for n in 1..=max_n.min(tokens.len()) {
        for window in tokens.windows(n) {
            keys.push(ngram_key(window));
        }
    }
    keys
}
