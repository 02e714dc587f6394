//! Text normalization: lowercase, delimiter removal, tokenization, stop-word
//! removal and optional stemming.

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;
use serde::Serialize;

use crate::corpus::RawDocument;
use crate::error::{Error, Result};
use crate::stemmer;

const DEFAULT_STOPWORDS: &str = include_str!("stopwords_en.txt");

/// Unicode punctuation (P*) and symbol (S*) general categories.
static DELIMITER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"[\p{P}\p{S}]").expect("delimiter class compiles"));

/// A set of lowercase, delimiter-free words dropped before n-gram construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopWords {
    words: BTreeSet<String>,
    source: String,
}

impl StopWords {
    /// The bundled list of common English function words.
    pub fn english() -> Self {
        Self::parse(DEFAULT_STOPWORDS, "builtin:en").expect("bundled stop words are valid")
    }

    pub fn empty() -> Self {
        Self {
            words: BTreeSet::new(),
            source: "none".to_string(),
        }
    }

    pub fn from_words<I, S>(words: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut set = BTreeSet::new();
        for w in words {
            set.insert(validate_stopword(w.as_ref())?);
        }
        Ok(Self {
            words: set,
            source: "inline".to_string(),
        })
    }

    /// Parses the stop-word file format: one word per line, `#` starts a
    /// comment, blank lines ignored. Words are lowercased.
    pub fn parse(contents: &str, source: impl Into<String>) -> Result<Self> {
        let mut words = BTreeSet::new();
        for line in contents.lines() {
            let word = line.split('#').next().unwrap_or("").trim();
            if word.is_empty() {
                continue;
            }
            words.insert(validate_stopword(word)?);
        }
        Ok(Self {
            words,
            source: source.into(),
        })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let contents = std::fs::read_to_string(path).map_err(|source| Error::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&contents, path.display().to_string())
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Where the list came from: `builtin:en`, `none`, `inline` or a file path.
    pub fn source(&self) -> &str {
        &self.source
    }
}

fn validate_stopword(word: &str) -> Result<String> {
    let lowered = normalize_case(word.trim());
    if lowered.is_empty() {
        return Err(Error::InvalidStopword {
            word: word.to_string(),
            reason: "empty",
        });
    }
    if lowered.chars().any(char::is_whitespace) {
        return Err(Error::InvalidStopword {
            word: word.to_string(),
            reason: "contains whitespace",
        });
    }
    if DELIMITER.is_match(&lowered) {
        return Err(Error::InvalidStopword {
            word: word.to_string(),
            reason: "contains punctuation or symbols",
        });
    }
    Ok(lowered)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreprocessConfig {
    pub stopwords: StopWords,
    pub stemming: bool,
    /// Tokens with fewer characters than this are dropped. Values below 1 act as 1.
    pub min_token_length: usize,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            stopwords: StopWords::english(),
            stemming: false,
            min_token_length: 1,
        }
    }
}

/// A document reduced to its ordered sequence of normalized word tokens.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PreprocessedDocument {
    pub id: String,
    pub tokens: Vec<String>,
}

pub fn normalize_case(text: &str) -> String {
    text.to_lowercase()
}

/// Replaces every punctuation or symbol character with a single space.
pub fn strip_delimiters(text: &str) -> String {
    DELIMITER.replace_all(text, " ").into_owned()
}

/// Splits on whitespace runs, dropping tokens shorter than `min_len` characters.
pub fn tokenize(text: &str, min_len: usize) -> Vec<String> {
    text.split_whitespace()
        .filter(|t| t.chars().count() >= min_len.max(1))
        .map(str::to_string)
        .collect()
}

pub fn remove_stopwords(tokens: Vec<String>, stopwords: &StopWords) -> Vec<String> {
    if stopwords.is_empty() {
        return tokens;
    }
    tokens
        .into_iter()
        .filter(|t| !stopwords.contains(t))
        .collect()
}

/// Runs the full normalization pipeline on one document.
///
/// With stemming enabled, stems that land on a stop word (`being` -> `be`)
/// are dropped as well, so no output token is ever a stop word.
pub fn preprocess(doc: &RawDocument, cfg: &PreprocessConfig) -> PreprocessedDocument {
    PreprocessedDocument {
        id: doc.id.clone(),
        tokens: preprocess_text(&doc.text, cfg),
    }
}

pub fn preprocess_text(text: &str, cfg: &PreprocessConfig) -> Vec<String> {
    let cleaned = strip_delimiters(&normalize_case(text));
    let tokens = remove_stopwords(tokenize(&cleaned, cfg.min_token_length), &cfg.stopwords);
    if cfg.stemming {
        remove_stopwords(stemmer::stem_tokens(&tokens), &cfg.stopwords)
    } else {
        tokens
    }
}
