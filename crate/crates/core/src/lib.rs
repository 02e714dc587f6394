//! Batch plagiarism detection for plain-text assignments.
//!
//! Documents are normalized (lowercased, punctuation and symbols removed,
//! stop words dropped, optionally Porter-stemmed), turned into sets of word
//! tri-grams and compared pairwise. The headline score for a pair is the
//! share of the smaller document's tri-grams found in the other one.
//!
//! Comparing every pair is quadratic. [`engine::detect_clustered`] first
//! groups documents with k-means over bag-of-words vectors and then compares
//! only documents in the same cluster, trading possible cross-cluster misses
//! for far fewer comparisons.
//!
//! ```
//! use plagscan::corpus::{Corpus, RawDocument};
//! use plagscan::engine::{detect_full, DetectionConfig};
//!
//! let corpus = Corpus::new("demo", vec![
//!     RawDocument::new("a.txt", "a.txt", "Rivers carry sediment toward the distant delta plains."),
//!     RawDocument::new("b.txt", "b.txt", "Rivers carry sediment toward the distant delta plains!"),
//! ]).unwrap();
//! let report = detect_full(&corpus, &DetectionConfig::default()).unwrap();
//! assert_eq!(report.per_pair[0].containment_pct(), 100.0);
//! ```

pub mod cluster;
pub mod corpus;
pub mod engine;
pub mod error;
pub mod preprocess;
pub mod stemmer;
pub mod trigram;

pub use error::{Error, Result};
