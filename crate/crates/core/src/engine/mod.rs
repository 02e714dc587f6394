//! The detection pipeline: preprocess once, optionally cluster, then score
//! document pairs by n-gram overlap.
//!
//! In clustered mode only pairs that share a cluster are compared. Pruned
//! pairs are simply absent from the report; the scores of the pairs that are
//! compared are identical to full mode.

mod report;
mod synth;

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::cluster::{self, ClusterAssignment, KMeansParams};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::preprocess::{self, PreprocessConfig, PreprocessedDocument};
use crate::trigram::{self, BestMatch, Ratio, SimilarityRecord, TrigramSet};

pub use report::{emit_report, render_report, ReportFormat};
pub use synth::{generate_synthetic_corpus, planted_group, SyntheticParams};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Full,
    Clustered,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Full => "full",
            Mode::Clustered => "clustered",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterConfig {
    /// `None` picks `ceil(sqrt(n / 2))`.
    pub k: Option<usize>,
    pub seed: u64,
    pub min_term_freq: usize,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        Self {
            k: None,
            seed: 0,
            min_term_freq: 1,
            max_iter: 100,
            tol: 1e-4,
        }
    }
}

impl ClusterConfig {
    pub fn params_for(&self, n_docs: usize) -> KMeansParams {
        KMeansParams {
            k: self.k.unwrap_or_else(|| cluster::default_k(n_docs)),
            seed: self.seed,
            max_iter: self.max_iter,
            tol: self.tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionConfig {
    pub mode: Mode,
    pub ngram_n: usize,
    pub preprocess: PreprocessConfig,
    pub cluster: ClusterConfig,
    /// Pairs at or above this containment percentage are flagged in text reports.
    pub threshold_pct: f64,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Full,
            ngram_n: trigram::DEFAULT_NGRAM,
            preprocess: PreprocessConfig::default(),
            cluster: ClusterConfig::default(),
            threshold_pct: 50.0,
        }
    }
}

impl DetectionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ngram_n == 0 {
            return Err(Error::usage("n-gram size must be at least 1"));
        }
        if !(0.0..=100.0).contains(&self.threshold_pct) {
            return Err(Error::usage("threshold must be within [0, 100]"));
        }
        Ok(())
    }
}

/// The configuration as echoed into reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub ngram_n: usize,
    pub stopwords_source: String,
    pub stopwords_count: usize,
    pub stemming: bool,
    pub min_token_length: usize,
    pub threshold_pct: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kmeans: Option<KMeansEcho>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KMeansEcho {
    pub k: usize,
    pub seed: u64,
    pub min_term_freq: usize,
    pub max_iter: usize,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterRow {
    pub cluster: usize,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusteringSummary {
    pub vocabulary_size: usize,
    pub sse: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxEntry {
    pub partner: String,
    pub containment_pct: f64,
}

impl From<BestMatch> for MaxEntry {
    fn from(b: BestMatch) -> Self {
        Self {
            partner: b.partner,
            containment_pct: trigram::round2(b.containment.percent()),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Timings {
    pub preprocess_ms: f64,
    pub cluster_ms: f64,
    pub pairwise_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionReport {
    pub schema_version: u32,
    pub corpus_name: String,
    pub mode: Mode,
    pub config: ConfigEcho,
    pub documents: Vec<String>,
    pub warnings: Vec<String>,
    pub comparisons_made: u64,
    pub comparisons_possible: u64,
    pub per_pair: Vec<SimilarityRecord>,
    /// `None` for a document that was compared with nothing.
    pub per_doc_max: BTreeMap<String, Option<MaxEntry>>,
    /// Empty in full mode.
    pub cluster_table: Vec<ClusterRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clustering: Option<ClusteringSummary>,
    pub timings: Timings,
}

fn ms_since(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1000.0
}

pub fn pairs_possible(n: usize) -> u64 {
    let n = n as u64;
    n * n.saturating_sub(1) / 2
}

/// Preprocesses every document in parallel, keeping corpus order.
pub fn preprocess_corpus(corpus: &Corpus, cfg: &PreprocessConfig) -> Vec<PreprocessedDocument> {
    corpus
        .documents()
        .par_iter()
        .map(|d| preprocess::preprocess(d, cfg))
        .collect()
}

/// Runs whichever mode `cfg.mode` selects.
pub fn detect(corpus: &Corpus, cfg: &DetectionConfig) -> Result<DetectionReport> {
    match cfg.mode {
        Mode::Full => detect_full(corpus, cfg),
        Mode::Clustered => detect_clustered(corpus, cfg),
    }
}

/// Compares every unordered pair of documents.
pub fn detect_full(corpus: &Corpus, cfg: &DetectionConfig) -> Result<DetectionReport> {
    let prepared = Prepared::new(corpus, cfg)?;
    prepared.run(Mode::Full, cfg)
}

/// Clusters the documents and compares only pairs within a cluster.
pub fn detect_clustered(corpus: &Corpus, cfg: &DetectionConfig) -> Result<DetectionReport> {
    let prepared = Prepared::new(corpus, cfg)?;
    prepared.run(Mode::Clustered, cfg)
}

/// A corpus that has been through preprocessing, ready for either mode.
pub struct Prepared<'a> {
    corpus: &'a Corpus,
    docs: Vec<PreprocessedDocument>,
    preprocess_ms: f64,
}

impl<'a> Prepared<'a> {
    pub fn new(corpus: &'a Corpus, cfg: &DetectionConfig) -> Result<Self> {
        cfg.validate()?;
        if corpus.len() < 2 {
            return Err(Error::usage(format!(
                "need at least 2 documents to compare, corpus has {}",
                corpus.len()
            )));
        }
        let start = Instant::now();
        let docs = preprocess_corpus(corpus, &cfg.preprocess);
        Ok(Self {
            corpus,
            docs,
            preprocess_ms: ms_since(start),
        })
    }

    pub fn documents(&self) -> &[PreprocessedDocument] {
        &self.docs
    }

    pub fn run(&self, mode: Mode, cfg: &DetectionConfig) -> Result<DetectionReport> {
        let start = Instant::now();
        let n = self.docs.len();

        let (groups, clustering, kmeans_echo, cluster_ms) = match mode {
            Mode::Full => (vec![(0..n).collect::<Vec<_>>()], None, None, 0.0),
            Mode::Clustered => {
                let t = Instant::now();
                let params = cfg.cluster.params_for(n);
                let (assignment, vocab_len) = self.cluster(cfg, &params)?;
                let echo = KMeansEcho {
                    k: params.k,
                    seed: params.seed,
                    min_term_freq: cfg.cluster.min_term_freq,
                    max_iter: params.max_iter,
                    tol: params.tol,
                };
                let summary = ClusteringSummary {
                    vocabulary_size: vocab_len,
                    sse: assignment.sse,
                    iterations: assignment.iterations,
                };
                (assignment.members(), Some(summary), Some(echo), ms_since(t))
            }
        };

        let t = Instant::now();
        let per_pair = self.compare_within(&groups, cfg.ngram_n)?;
        let pairwise_ms = ms_since(t);

        let ids: Vec<String> = self.docs.iter().map(|d| d.id.clone()).collect();
        let cluster_table = match mode {
            Mode::Full => Vec::new(),
            Mode::Clustered => groups
                .iter()
                .enumerate()
                .map(|(c, members)| ClusterRow {
                    cluster: c,
                    members: members.iter().map(|&i| ids[i].clone()).collect(),
                })
                .collect(),
        };

        let comparisons_made = groups.iter().map(|g| pairs_possible(g.len())).sum();
        let per_doc_max = per_document_max(&ids, &per_pair);

        Ok(DetectionReport {
            schema_version: SCHEMA_VERSION,
            corpus_name: self.corpus.name().to_string(),
            mode,
            config: ConfigEcho {
                ngram_n: cfg.ngram_n,
                stopwords_source: cfg.preprocess.stopwords.source().to_string(),
                stopwords_count: cfg.preprocess.stopwords.len(),
                stemming: cfg.preprocess.stemming,
                min_token_length: cfg.preprocess.min_token_length,
                threshold_pct: cfg.threshold_pct,
                kmeans: kmeans_echo,
            },
            documents: ids,
            warnings: self.corpus.warnings().to_vec(),
            comparisons_made,
            comparisons_possible: pairs_possible(n),
            per_pair,
            per_doc_max,
            cluster_table,
            clustering,
            timings: Timings {
                preprocess_ms: self.preprocess_ms,
                cluster_ms,
                pairwise_ms,
                total_ms: self.preprocess_ms + ms_since(start),
            },
        })
    }

    fn cluster(&self, cfg: &DetectionConfig, params: &KMeansParams) -> Result<(ClusterAssignment, usize)> {
        let vocab = cluster::build_vocabulary(&self.docs, cfg.cluster.min_term_freq)?;
        let vectors: Vec<_> = self
            .docs
            .par_iter()
            .map(|d| cluster::vectorize(d, &vocab))
            .collect();
        Ok((cluster::kmeans(&vectors, vocab.len(), params)?, vocab.len()))
    }

    /// The within-cluster SSE for each `k`, on this corpus's term vectors.
    pub fn sweep_k(&self, cfg: &DetectionConfig, k_values: &[usize]) -> Result<Vec<(usize, f64)>> {
        let vocab = cluster::build_vocabulary(&self.docs, cfg.cluster.min_term_freq)?;
        let vectors: Vec<_> = self.docs.iter().map(|d| cluster::vectorize(d, &vocab)).collect();
        cluster::sweep_k(&vectors, vocab.len(), k_values, &cfg.cluster.params_for(self.docs.len()))
    }

    /// Scores every pair inside each group. Only documents that have a
    /// partner get a gram set built.
    fn compare_within(&self, groups: &[Vec<usize>], n: usize) -> Result<Vec<SimilarityRecord>> {
        let mut needed = vec![false; self.docs.len()];
        for g in groups.iter().filter(|g| g.len() > 1) {
            for &i in g {
                needed[i] = true;
            }
        }
        let sets: Vec<Option<TrigramSet>> = self
            .docs
            .par_iter()
            .zip(needed.par_iter())
            .map(|(d, &need)| need.then(|| trigram::build_trigrams(d, n)).transpose())
            .collect::<Result<_>>()?;

        let pairs: Vec<(usize, usize)> = groups
            .iter()
            .flat_map(|g| {
                g.iter()
                    .enumerate()
                    .flat_map(move |(x, &i)| g[x + 1..].iter().map(move |&j| (i, j)))
            })
            .collect();

        let mut records = pairs
            .par_iter()
            .map(|&(i, j)| {
                let a = sets[i].as_ref().expect("gram set built for grouped doc");
                let b = sets[j].as_ref().expect("gram set built for grouped doc");
                trigram::compare(a, b)
            })
            .collect::<Result<Vec<_>>>()?;
        records.sort_by(|x, y| (&x.doc_a, &x.doc_b).cmp(&(&y.doc_a, &y.doc_b)));
        Ok(records)
    }
}

/// Best partner of every document, in one pass over the records. Agrees
/// with [`trigram::max_similarity`] document by document.
fn per_document_max(ids: &[String], records: &[SimilarityRecord]) -> BTreeMap<String, Option<MaxEntry>> {
    let mut best: BTreeMap<&str, (&str, Ratio)> = BTreeMap::new();
    for r in records {
        let score = r.containment();
        for (doc, partner) in [(r.doc_a.as_str(), r.doc_b.as_str()), (r.doc_b.as_str(), r.doc_a.as_str())] {
            match best.get(doc) {
                Some(&(p, s)) if s > score || (s == score && p <= partner) => {}
                _ => {
                    best.insert(doc, (partner, score));
                }
            }
        }
    }
    ids.iter()
        .map(|id| {
            let entry = best.get(id.as_str()).map(|&(p, s)| {
                MaxEntry::from(BestMatch {
                    partner: p.to_string(),
                    containment: s,
                })
            });
            (id.clone(), entry)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeStats {
    pub comparisons: u64,
    pub cluster_ms: f64,
    pub pairwise_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub corpus_name: String,
    pub documents: usize,
    pub repeats: usize,
    pub k: usize,
    pub preprocess_ms: f64,
    /// Medians over the repeats.
    pub full: ModeStats,
    pub clustered: ModeStats,
    /// clustered / full comparisons.
    pub comparison_ratio: f64,
    /// full / clustered median pairwise time.
    pub pairwise_speedup: f64,
    /// full / clustered median total time.
    pub total_speedup: f64,
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let mid = xs.len() / 2;
    if xs.len().is_multiple_of(2) {
        (xs[mid - 1] + xs[mid]) / 2.0
    } else {
        xs[mid]
    }
}

fn mode_stats(runs: &[DetectionReport]) -> ModeStats {
    let pick = |f: fn(&Timings) -> f64| median(runs.iter().map(|r| f(&r.timings)).collect());
    ModeStats {
        comparisons: runs[0].comparisons_made,
        cluster_ms: pick(|t| t.cluster_ms),
        pairwise_ms: pick(|t| t.pairwise_ms),
        total_ms: pick(|t| t.total_ms),
    }
}

/// Times full and clustered detection on the same preprocessed corpus,
/// `repeats` times each, and reports medians.
pub fn bench(corpus: &Corpus, cfg: &DetectionConfig, repeats: usize) -> Result<BenchReport> {
    if repeats == 0 {
        return Err(Error::usage("repeats must be at least 1"));
    }
    let prepared = Prepared::new(corpus, cfg)?;
    let mut full = Vec::with_capacity(repeats);
    let mut clustered = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        full.push(prepared.run(Mode::Full, cfg)?);
        clustered.push(prepared.run(Mode::Clustered, cfg)?);
    }
    let full_stats = mode_stats(&full);
    let clustered_stats = mode_stats(&clustered);
    let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else { f64::INFINITY };
    Ok(BenchReport {
        corpus_name: corpus.name().to_string(),
        documents: corpus.len(),
        repeats,
        k: cfg.cluster.params_for(corpus.len()).k,
        preprocess_ms: prepared.preprocess_ms,
        comparison_ratio: clustered_stats.comparisons as f64 / full_stats.comparisons as f64,
        pairwise_speedup: ratio(full_stats.pairwise_ms, clustered_stats.pairwise_ms),
        total_speedup: ratio(full_stats.total_ms, clustered_stats.total_ms),
        full: full_stats,
        clustered: clustered_stats,
    })
}
