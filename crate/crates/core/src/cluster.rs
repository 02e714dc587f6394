//! Bag-of-words vectors and k-means partitioning of documents.
//!
//! Vectors are L2-normalized before clustering. Centroids are dense over the
//! vocabulary; points stay sparse. Every distance is the plain sum of squared
//! coordinate differences, so a point sitting exactly on its centroid has
//! distance exactly zero.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::preprocess::PreprocessedDocument;

/// Terms kept for vectorization, sorted, each present in at least
/// `min_term_freq` documents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
    min_term_freq: usize,
}

impl Vocabulary {
    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn min_term_freq(&self) -> usize {
        self.min_term_freq
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }
}

pub fn build_vocabulary(docs: &[PreprocessedDocument], min_term_freq: usize) -> Result<Vocabulary> {
    if min_term_freq == 0 {
        return Err(Error::usage("min term frequency must be at least 1"));
    }
    let mut doc_freq: HashMap<&str, usize> = HashMap::new();
    for doc in docs {
        let mut seen: Vec<&str> = doc.tokens.iter().map(String::as_str).collect();
        seen.sort_unstable();
        seen.dedup();
        for t in seen {
            *doc_freq.entry(t).or_default() += 1;
        }
    }
    let mut terms: Vec<String> = doc_freq
        .into_iter()
        .filter(|&(_, df)| df >= min_term_freq)
        .map(|(t, _)| t.to_string())
        .collect();
    if terms.is_empty() {
        return Err(Error::EmptyVocabulary { min_term_freq });
    }
    terms.sort();
    let index = terms
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i))
        .collect();
    Ok(Vocabulary {
        terms,
        index,
        min_term_freq,
    })
}

/// Sparse term counts of one document, sorted by vocabulary index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermVector {
    pub doc_id: String,
    pub weights: Vec<(usize, u32)>,
}

impl TermVector {
    pub fn is_zero(&self) -> bool {
        self.weights.is_empty()
    }
}

pub fn vectorize(doc: &PreprocessedDocument, vocab: &Vocabulary) -> TermVector {
    let mut counts: HashMap<usize, u32> = HashMap::new();
    for t in &doc.tokens {
        if let Some(i) = vocab.index_of(t) {
            *counts.entry(i).or_default() += 1;
        }
    }
    let mut weights: Vec<(usize, u32)> = counts.into_iter().collect();
    weights.sort_unstable();
    TermVector {
        doc_id: doc.id.clone(),
        weights,
    }
}

/// Unit-length copy of a term vector. The zero vector stays zero.
pub fn normalize(v: &TermVector) -> Vec<(usize, f64)> {
    let norm = v
        .weights
        .iter()
        .map(|&(_, w)| (w as f64) * (w as f64))
        .sum::<f64>()
        .sqrt();
    if norm == 0.0 {
        return Vec::new();
    }
    v.weights
        .iter()
        .map(|&(i, w)| (i, w as f64 / norm))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KMeansParams {
    pub k: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
}

impl KMeansParams {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            seed: 0,
            max_iter: 100,
            tol: 1e-4,
        }
    }
}

/// Default cluster count for `n` documents: `ceil(sqrt(n / 2))`, at least 1.
pub fn default_k(n: usize) -> usize {
    ((n as f64 / 2.0).sqrt().ceil() as usize).clamp(1, n.max(1))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    pub k: usize,
    pub doc_ids: Vec<String>,
    /// Cluster index of each input vector, in input order.
    pub assignment: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub sse: f64,
    /// SSE after each Lloyd iteration.
    pub sse_trace: Vec<f64>,
    pub iterations: usize,
    pub seed: u64,
}

impl ClusterAssignment {
    pub fn cluster_of(&self, doc_id: &str) -> Option<usize> {
        self.doc_ids
            .iter()
            .position(|d| d == doc_id)
            .map(|i| self.assignment[i])
    }

    /// Member positions of every cluster, in input order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (i, &c) in self.assignment.iter().enumerate() {
            out[c].push(i);
        }
        out
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &c in &self.assignment {
            sizes[c] += 1;
        }
        sizes
    }
}

fn sq_dist_dense(x: &[(usize, f64)], c: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut next = x.iter().peekable();
    for (d, &cd) in c.iter().enumerate() {
        let xd = match next.peek() {
            Some(&&(i, v)) if i == d => {
                next.next();
                v
            }
            _ => 0.0,
        };
        let diff = xd - cd;
        sum += diff * diff;
    }
    sum
}

fn sq_dist_sparse(a: &[(usize, f64)], b: &[(usize, f64)]) -> f64 {
    let (mut i, mut j, mut sum) = (0, 0, 0.0);
    while i < a.len() || j < b.len() {
        let diff = match (a.get(i), b.get(j)) {
            (Some(&(ia, va)), Some(&(ib, vb))) if ia == ib => {
                i += 1;
                j += 1;
                va - vb
            }
            (Some(&(ia, va)), Some(&(ib, _))) if ia < ib => {
                i += 1;
                va
            }
            (Some(&(_, va)), None) => {
                i += 1;
                va
            }
            (_, Some(&(_, vb))) => {
                j += 1;
                vb
            }
            (None, None) => unreachable!(),
        };
        sum += diff * diff;
    }
    sum
}

fn densify(x: &[(usize, f64)], dim: usize) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    for &(i, v) in x {
        out[i] = v;
    }
    out
}

/// Index of the nearest centroid; ties go to the lowest index.
fn nearest(x: &[(usize, f64)], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.iter().enumerate() {
        let d = sq_dist_dense(x, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

/// Greedy k-means++ seeding: each new center is the best of a few
/// D²-weighted candidates.
fn seed_centers(points: &[Vec<(usize, f64)>], k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = points.len();
    let trials = 2 + (k as f64).ln().floor() as usize;
    let first = rng.random_range(0..n);
    let mut centers = vec![first];
    let mut closest: Vec<f64> = points
        .iter()
        .map(|p| sq_dist_sparse(p, &points[first]))
        .collect();

    while centers.len() < k {
        let total: f64 = closest.iter().sum();
        if total <= 0.0 {
            // All remaining points coincide with a center.
            let next = (0..n).find(|i| !centers.contains(i)).expect("k <= n");
            centers.push(next);
            continue;
        }
        let mut best: Option<(usize, f64, Vec<f64>)> = None;
        for _ in 0..trials {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in closest.iter().enumerate() {
                if w <= 0.0 {
                    continue;
                }
                acc += w;
                pick = Some(i);
                if acc > target {
                    break;
                }
            }
            let cand = pick.expect("positive total weight");
            let updated: Vec<f64> = points
                .iter()
                .zip(&closest)
                .map(|(p, &c)| c.min(sq_dist_sparse(p, &points[cand])))
                .collect();
            let potential: f64 = updated.iter().sum();
            if best.as_ref().is_none_or(|(_, bp, _)| potential < *bp) {
                best = Some((cand, potential, updated));
            }
        }
        let (cand, _, updated) = best.expect("at least one trial");
        centers.push(cand);
        closest = updated;
    }
    centers
}

fn means(points: &[Vec<(usize, f64)>], assignment: &[usize], k: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &c) in points.iter().zip(assignment) {
        counts[c] += 1;
        for &(i, v) in p {
            sums[c][i] += v;
        }
    }
    for (sum, &count) in sums.iter_mut().zip(&counts) {
        if count > 0 {
            let n = count as f64;
            sum.iter_mut().for_each(|v| *v /= n);
        }
    }
    sums
}

fn total_sse(points: &[Vec<(usize, f64)>], assignment: &[usize], centroids: &[Vec<f64>]) -> f64 {
    points
        .iter()
        .zip(assignment)
        .map(|(p, &c)| sq_dist_dense(p, &centroids[c]))
        .sum()
}

/// Moves the farthest point of a multi-member cluster into each empty cluster.
fn repair_empty(assignment: &mut [usize], dists: &[f64], k: usize) {
    let mut sizes = vec![0usize; k];
    for &c in assignment.iter() {
        sizes[c] += 1;
    }
    let mut taken = vec![false; assignment.len()];
    for empty in 0..k {
        if sizes[empty] > 0 {
            continue;
        }
        let far = (0..assignment.len())
            .filter(|&i| !taken[i] && sizes[assignment[i]] > 1)
            .fold(None::<usize>, |best, i| match best {
                Some(b) if dists[b] >= dists[i] => Some(b),
                _ => Some(i),
            })
            .expect("k <= n leaves a cluster with spare members");
        sizes[assignment[far]] -= 1;
        assignment[far] = empty;
        sizes[empty] = 1;
        taken[far] = true;
    }
}

/// Lloyd's algorithm with greedy k-means++ seeding over L2-normalized vectors.
///
/// `dim` is the vocabulary size; every vector index must be below it.
pub fn kmeans(vectors: &[TermVector], dim: usize, params: &KMeansParams) -> Result<ClusterAssignment> {
    let n = vectors.len();
    let k = params.k;
    if k == 0 {
        return Err(Error::usage("k must be at least 1"));
    }
    if k > n {
        return Err(Error::usage(format!("k = {k} exceeds the {n} documents")));
    }
    if params.max_iter == 0 {
        return Err(Error::usage("max_iter must be at least 1"));
    }
    if params.tol.is_nan() || params.tol < 0.0 {
        return Err(Error::usage("tol must be non-negative"));
    }
    if let Some(v) = vectors.iter().find(|v| v.weights.iter().any(|&(i, _)| i >= dim)) {
        return Err(Error::usage(format!("vector {} has an index outside the vocabulary", v.doc_id)));
    }

    let points: Vec<Vec<(usize, f64)>> = vectors.iter().map(normalize).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut centroids: Vec<Vec<f64>> = seed_centers(&points, k, &mut rng)
        .into_iter()
        .map(|i| densify(&points[i], dim))
        .collect();

    let mut assignment = vec![usize::MAX; n];
    let mut sse_trace = Vec::new();
    let mut iterations = 0;
    while iterations < params.max_iter {
        iterations += 1;
        let nearest_pairs: Vec<(usize, f64)> =
            points.par_iter().map(|p| nearest(p, &centroids)).collect();
        let mut next: Vec<usize> = nearest_pairs.iter().map(|&(c, _)| c).collect();
        let dists: Vec<f64> = nearest_pairs.iter().map(|&(_, d)| d).collect();
        repair_empty(&mut next, &dists, k);

        let changed = next != assignment;
        assignment = next;
        let updated = means(&points, &assignment, k, dim);
        let shift = centroids
            .iter()
            .zip(&updated)
            .map(|(old, new)| {
                old.iter()
                    .zip(new)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max);
        centroids = updated;
        sse_trace.push(total_sse(&points, &assignment, &centroids));
        if !changed || shift < params.tol {
            break;
        }
    }

    Ok(ClusterAssignment {
        k,
        doc_ids: vectors.iter().map(|v| v.doc_id.clone()).collect(),
        assignment,
        sse: *sse_trace.last().expect("at least one iteration"),
        centroids,
        sse_trace,
        iterations,
        seed: params.seed,
    })
}

/// One k-means run per requested `k`, returning `(k, sse)` in input order.
pub fn sweep_k(
    vectors: &[TermVector],
    dim: usize,
    k_values: &[usize],
    params: &KMeansParams,
) -> Result<Vec<(usize, f64)>> {
    k_values
        .iter()
        .map(|&k| {
            let run = kmeans(vectors, dim, &KMeansParams { k, ..params.clone() })?;
            Ok((k, run.sse))
        })
        .collect()
}
