//! Synthetic corpora with planted copying, for tests and benchmarks.
//!
//! Documents are split into groups. Each group owns a disjoint slice of a
//! made-up vocabulary and a base text. Every member copies the same
//! contiguous `copy_rate` share of the base, placed at a random position,
//! and fills the rest with fresh words from the group's slice. Rendering adds
//! capitalization, punctuation, line breaks and a sprinkling of stop words,
//! all of which preprocessing removes again.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::corpus::{Corpus, RawDocument};
use crate::error::{Error, Result};
use crate::preprocess::StopWords;

const CONSONANTS: &[u8] = b"bdfgklmnprstvz";
const VOWELS: &[u8] = b"aeiou";
const FILLERS: &[&str] = &["the", "of", "and", "to", "in", "is", "that", "for"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SyntheticParams {
    pub n_docs: usize,
    pub n_groups: usize,
    pub copy_rate: f64,
    pub vocab_size: usize,
    pub doc_len: usize,
    pub seed: u64,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        Self {
            n_docs: 100,
            n_groups: 10,
            copy_rate: 0.9,
            vocab_size: 5000,
            doc_len: 120,
            seed: 0,
        }
    }
}

impl SyntheticParams {
    fn validate(&self) -> Result<()> {
        if self.n_docs == 0 {
            return Err(Error::usage("synthetic corpus needs at least one document"));
        }
        if self.n_groups == 0 || self.n_groups > self.n_docs {
            return Err(Error::usage("groups must be between 1 and the number of documents"));
        }
        if !(0.0..=1.0).contains(&self.copy_rate) {
            return Err(Error::usage("copy rate must be within [0, 1]"));
        }
        if self.vocab_size < self.n_groups {
            return Err(Error::usage("vocabulary must have at least one word per group"));
        }
        if self.doc_len == 0 {
            return Err(Error::usage("document length must be at least 1"));
        }
        Ok(())
    }
}

/// Pronounceable pseudo-words built from consonant-vowel syllables, skipping
/// anything that is an English stop word.
fn make_vocabulary(size: usize) -> Vec<String> {
    let stop = StopWords::english();
    let syllables: Vec<[u8; 2]> = CONSONANTS
        .iter()
        .flat_map(|&c| VOWELS.iter().map(move |&v| [c, v]))
        .collect();
    let base = syllables.len();
    let mut words = Vec::with_capacity(size);
    let mut index = 0usize;
    while words.len() < size {
        let mut digits = Vec::new();
        let mut rest = index;
        while digits.len() < 3 || rest > 0 {
            digits.push(rest % base);
            rest /= base;
        }
        let word: String = digits
            .iter()
            .rev()
            .flat_map(|&d| syllables[d].iter().map(|&b| b as char))
            .collect();
        if !stop.contains(&word) {
            words.push(word);
        }
        index += 1;
    }
    words
}

fn render(tokens: &[&str], rng: &mut ChaCha8Rng) -> String {
    let mut out = String::new();
    let mut sentence_left = 0usize;
    let mut sentences = 0usize;
    for tok in tokens {
        if sentence_left == 0 {
            if !out.is_empty() {
                out.push('.');
                sentences += 1;
                out.push(if sentences.is_multiple_of(3) { '\n' } else { ' ' });
            }
            sentence_left = rng.random_range(6..=14);
            let mut chars = tok.chars();
            if let Some(first) = chars.next() {
                out.extend(first.to_uppercase());
                out.push_str(chars.as_str());
            }
        } else {
            if rng.random_bool(0.08) {
                out.push(',');
            }
            out.push(' ');
            if rng.random_bool(0.15) {
                out.push_str(FILLERS.choose(rng).expect("non-empty filler list"));
                out.push(' ');
            }
            out.push_str(tok);
        }
        sentence_left -= 1;
    }
    if !out.is_empty() {
        out.push_str(".\n");
    }
    out
}

fn doc_id(group: usize, member: usize, n_groups: usize, per_group: usize) -> String {
    let gw = n_groups.to_string().len().max(2);
    let mw = per_group.to_string().len().max(2);
    format!("g{group:0gw$}_d{member:0mw$}.txt")
}

/// Group number encoded in a synthetic document id.
pub fn planted_group(id: &str) -> Option<usize> {
    let rest = id.strip_prefix('g')?;
    let (digits, _) = rest.split_once('_')?;
    digits.parse().ok()
}

/// Generates a planted-plagiarism corpus. Identical parameters always give
/// an identical corpus. Document `i` belongs to group `i % n_groups`.
pub fn generate_synthetic_corpus(params: &SyntheticParams) -> Result<Corpus> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let vocab = make_vocabulary(params.vocab_size);
    let slice_len = params.vocab_size / params.n_groups;
    let copy_len = (params.copy_rate * params.doc_len as f64).round() as usize;
    let per_group = params.n_docs.div_ceil(params.n_groups);

    let mut docs = Vec::with_capacity(params.n_docs);
    for group in 0..params.n_groups {
        let words = &vocab[group * slice_len..(group + 1) * slice_len];
        let base: Vec<&str> = (0..params.doc_len)
            .map(|_| words.choose(&mut rng).expect("non-empty slice").as_str())
            .collect();
        let offset = rng.random_range(0..=params.doc_len - copy_len);
        let copied = &base[offset..offset + copy_len];

        let members = (group..params.n_docs).step_by(params.n_groups).count();
        for member in 0..members {
            let place = rng.random_range(0..=params.doc_len - copy_len);
            let mut fresh = || words.choose(&mut rng).expect("non-empty slice").as_str();
            let mut tokens: Vec<&str> = Vec::with_capacity(params.doc_len);
            tokens.extend((0..place).map(|_| fresh()));
            tokens.extend_from_slice(copied);
            tokens.extend((place + copy_len..params.doc_len).map(|_| fresh()));
            let text = render(&tokens, &mut rng);
            let id = doc_id(group, member, params.n_groups, per_group);
            docs.push(RawDocument::new(id.clone(), id, text));
        }
    }
    Corpus::new(format!("synthetic-seed{}", params.seed), docs)
}
