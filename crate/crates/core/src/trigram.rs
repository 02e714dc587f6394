//! Word n-gram sets and pairwise similarity.
//!
//! A document's grams are stored as a sorted, de-duplicated vector of 64-bit
//! hashes, so intersections are a linear merge. Scores are kept as exact
//! ratios and only turned into percentages on request.

use std::cmp::Ordering;
use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use serde::ser::{Serialize, SerializeStruct, Serializer};

use crate::error::{Error, Result};
use crate::preprocess::PreprocessedDocument;

pub const DEFAULT_NGRAM: usize = 3;

/// The distinct word n-grams of one document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrigramSet {
    doc_id: String,
    n: usize,
    grams: Vec<u64>,
}

impl TrigramSet {
    pub fn doc_id(&self) -> &str {
        &self.doc_id
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> usize {
        self.grams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grams.is_empty()
    }

    /// Sorted gram hashes.
    pub fn grams(&self) -> &[u64] {
        &self.grams
    }
}

fn gram_hash(window: &[String]) -> u64 {
    // Hash for slices is length-prefixed and each str is terminated, so
    // distinct token tuples never hash the same input bytes.
    let mut h = DefaultHasher::new();
    window.hash(&mut h);
    h.finish()
}

/// Builds the set of every length-`n` window over the token stream.
pub fn build_trigrams(doc: &PreprocessedDocument, n: usize) -> Result<TrigramSet> {
    if n == 0 {
        return Err(Error::usage("n-gram size must be at least 1"));
    }
    let mut grams: Vec<u64> = doc.tokens.windows(n).map(gram_hash).collect();
    grams.sort_unstable();
    grams.dedup();
    Ok(TrigramSet {
        doc_id: doc.id.clone(),
        n,
        grams,
    })
}

fn check_same_n(a: &TrigramSet, b: &TrigramSet) -> Result<()> {
    if a.n != b.n {
        return Err(Error::NgramMismatch {
            left: a.n,
            right: b.n,
        });
    }
    Ok(())
}

fn intersection_size(a: &[u64], b: &[u64]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

/// Number of grams the two sets share.
pub fn overlap(a: &TrigramSet, b: &TrigramSet) -> Result<usize> {
    check_same_n(a, b)?;
    Ok(intersection_size(&a.grams, &b.grams))
}

/// An exact non-negative fraction. A zero denominator denotes the value 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Self {
        if den == 0 {
            Self { num: 0, den: 0 }
        } else {
            Self { num, den }
        }
    }

    pub fn percent(&self) -> f64 {
        if self.den == 0 {
            0.0
        } else {
            100.0 * self.num as f64 / self.den as f64
        }
    }
}

impl Ord for Ratio {
    fn cmp(&self, other: &Self) -> Ordering {
        // Zero-denominator ratios have num 0; give them den 1 for comparison.
        let (an, ad) = (self.num as u128, self.den.max(1) as u128);
        let (bn, bd) = (other.num as u128, other.den.max(1) as u128);
        (an * bd).cmp(&(bn * ad))
    }
}

impl PartialOrd for Ratio {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Overlap relative to the smaller set; 0 when either set is empty.
pub fn containment(a: &TrigramSet, b: &TrigramSet) -> Result<Ratio> {
    let o = overlap(a, b)?;
    Ok(Ratio::new(o as u64, a.size().min(b.size()) as u64))
}

pub fn containment_pct(a: &TrigramSet, b: &TrigramSet) -> Result<f64> {
    containment(a, b).map(|r| r.percent())
}

/// Overlap relative to the union; 0 when both sets are empty.
pub fn jaccard(a: &TrigramSet, b: &TrigramSet) -> Result<Ratio> {
    let o = overlap(a, b)?;
    Ok(Ratio::new(o as u64, (a.size() + b.size() - o) as u64))
}

pub fn jaccard_pct(a: &TrigramSet, b: &TrigramSet) -> Result<f64> {
    jaccard(a, b).map(|r| r.percent())
}

/// The comparison of one unordered document pair. `doc_a < doc_b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimilarityRecord {
    pub doc_a: String,
    pub doc_b: String,
    pub overlap: u64,
    pub size_a: u64,
    pub size_b: u64,
}

impl SimilarityRecord {
    pub fn containment(&self) -> Ratio {
        Ratio::new(self.overlap, self.size_a.min(self.size_b))
    }

    pub fn jaccard(&self) -> Ratio {
        Ratio::new(self.overlap, self.size_a + self.size_b - self.overlap)
    }

    pub fn containment_pct(&self) -> f64 {
        self.containment().percent()
    }

    pub fn jaccard_pct(&self) -> f64 {
        self.jaccard().percent()
    }

    pub fn involves(&self, id: &str) -> bool {
        self.doc_a == id || self.doc_b == id
    }

    /// The other document of the pair, if `id` is one of them.
    pub fn partner_of(&self, id: &str) -> Option<&str> {
        if self.doc_a == id {
            Some(&self.doc_b)
        } else if self.doc_b == id {
            Some(&self.doc_a)
        } else {
            None
        }
    }
}

/// Rounds a percentage to two decimals for emission.
pub fn round2(pct: f64) -> f64 {
    (pct * 100.0).round() / 100.0
}

impl Serialize for SimilarityRecord {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("SimilarityRecord", 7)?;
        s.serialize_field("doc_a", &self.doc_a)?;
        s.serialize_field("doc_b", &self.doc_b)?;
        s.serialize_field("overlap", &self.overlap)?;
        s.serialize_field("size_a", &self.size_a)?;
        s.serialize_field("size_b", &self.size_b)?;
        s.serialize_field("containment_pct", &round2(self.containment_pct()))?;
        s.serialize_field("jaccard_pct", &round2(self.jaccard_pct()))?;
        s.end()
    }
}

/// Compares two documents' gram sets. Argument order does not matter.
pub fn compare(a: &TrigramSet, b: &TrigramSet) -> Result<SimilarityRecord> {
    let o = overlap(a, b)? as u64;
    let (first, second) = if a.doc_id <= b.doc_id { (a, b) } else { (b, a) };
    Ok(SimilarityRecord {
        doc_a: first.doc_id.clone(),
        doc_b: second.doc_id.clone(),
        overlap: o,
        size_a: first.size() as u64,
        size_b: second.size() as u64,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BestMatch {
    pub partner: String,
    pub containment: Ratio,
}

/// Highest-containment partner of `doc_id` among `records`, ties going to
/// the lexicographically smallest partner id.
pub fn max_similarity(doc_id: &str, records: &[SimilarityRecord]) -> Result<BestMatch> {
    records
        .iter()
        .filter_map(|r| r.partner_of(doc_id).map(|p| (p, r.containment())))
        .min_by(|(pa, ra), (pb, rb)| rb.cmp(ra).then_with(|| pa.cmp(pb)))
        .map(|(partner, containment)| BestMatch {
            partner: partner.to_string(),
            containment,
        })
        .ok_or_else(|| Error::NoPairs(doc_id.to_string()))
}
