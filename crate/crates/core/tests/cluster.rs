use std::collections::BTreeSet;

use plagscan::cluster::{build_vocabulary, kmeans, sweep_k, vectorize, KMeansParams, TermVector};
use plagscan::preprocess::PreprocessedDocument;

const STONES: &[&str] = &[
    "granite", "basalt", "obsidian", "pumice", "quartz", "feldspar", "mica", "gneiss", "schist", "slate",
    "shale", "limestone", "dolomite", "sandstone", "jasper", "agate", "onyx", "flint", "chert", "tuff",
];
const INSTRUMENTS: &[&str] = &[
    "violin", "cello", "oboe", "flute", "clarinet", "bassoon", "trumpet", "trombone", "tuba", "harp",
    "lute", "sitar", "banjo", "mandolin", "zither", "cornet", "bugle", "fife", "piccolo", "viola",
];

/// Ten near-copies per group: each drops a different word of the base list.
fn planted_docs() -> Vec<PreprocessedDocument> {
    let mut docs = Vec::new();
    for (prefix, base) in [("a", STONES), ("b", INSTRUMENTS)] {
        for i in 0..10 {
            let tokens = base
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, w)| w.to_string())
                .collect();
            docs.push(PreprocessedDocument {
                id: format!("{prefix}{i:02}"),
                tokens,
            });
        }
    }
    docs
}

fn planted_vectors() -> (Vec<TermVector>, usize) {
    let docs = planted_docs();
    let vocab = build_vocabulary(&docs, 1).unwrap();
    (docs.iter().map(|d| vectorize(d, &vocab)).collect(), vocab.len())
}

fn unit_dense(v: &TermVector, dim: usize) -> Vec<f64> {
    let mut x = vec![0.0; dim];
    for &(i, w) in &v.weights {
        x[i] = w as f64;
    }
    let norm = x.iter().map(|a| a * a).sum::<f64>().sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|a| *a /= norm);
    }
    x
}

#[test]
fn planted_groups_recovered_for_every_seed() {
    let (vectors, dim) = planted_vectors();
    let truth: BTreeSet<BTreeSet<usize>> = [(0..10).collect(), (10..20).collect()].into();
    for seed in 0..10 {
        let run = kmeans(&vectors, dim, &KMeansParams { seed, ..KMeansParams::new(2) }).unwrap();
        let found: BTreeSet<BTreeSet<usize>> =
            run.members().into_iter().map(|m| m.into_iter().collect()).collect();
        assert_eq!(found, truth, "seed {seed}");
    }
}

#[test]
fn sse_does_not_grow_with_k() {
    let (vectors, dim) = planted_vectors();
    let sweep = sweep_k(&vectors, dim, &[1, 2, 4], &KMeansParams::new(1)).unwrap();
    let ks: Vec<_> = sweep.iter().map(|&(k, _)| k).collect();
    assert_eq!(ks, [1, 2, 4]);
    for w in sweep.windows(2) {
        assert!(w[1].1 <= w[0].1 + 1e-12, "{sweep:?}");
    }
}

#[test]
fn single_cluster_sse_is_total_variance() {
    let (vectors, dim) = planted_vectors();
    let points: Vec<Vec<f64>> = vectors.iter().map(|v| unit_dense(v, dim)).collect();
    let n = points.len() as f64;
    let mean: Vec<f64> = (0..dim).map(|j| points.iter().map(|p| p[j]).sum::<f64>() / n).collect();
    let expected: f64 = points
        .iter()
        .map(|p| p.iter().zip(&mean).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
        .sum();

    let run = kmeans(&vectors, dim, &KMeansParams::new(1)).unwrap();
    assert!((run.sse - expected).abs() <= 1e-9 * expected.max(1.0));
    for (c, m) in run.centroids[0].iter().zip(&mean) {
        assert!((c - m).abs() < 1e-12);
    }
}

#[test]
fn result_independent_of_thread_count() {
    let (vectors, dim) = planted_vectors();
    let params = KMeansParams { seed: 7, ..KMeansParams::new(4) };
    let run_with = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| kmeans(&vectors, dim, &params).unwrap())
    };
    assert_eq!(run_with(1), run_with(8));
}
