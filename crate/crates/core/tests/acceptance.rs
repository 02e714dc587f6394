//! Acceptance suite. Runs each criterion and prints one PASS/FAIL line for
//! it; exits non-zero if any fails.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;
use std::process::{Command, ExitCode, Stdio};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use plagscan::cluster::{kmeans, KMeansParams, TermVector};
use plagscan::corpus::{Corpus, RawDocument};
use plagscan::engine::{
    bench, detect_clustered, detect_full, generate_synthetic_corpus, planted_group, ClusterConfig,
    DetectionConfig, DetectionReport, Mode, SyntheticParams,
};
use plagscan::preprocess::{PreprocessConfig, PreprocessedDocument, StopWords};
use plagscan::trigram::{build_trigrams, compare};

type Outcome = Result<String, String>;
type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($msg)+));
        }
    };
}

fn within(limit: Duration, start: Instant) -> Result<Duration, String> {
    let elapsed = start.elapsed();
    if elapsed < limit {
        Ok(elapsed)
    } else {
        Err(format!("took {elapsed:.2?}, limit {limit:?}"))
    }
}

// ---------------------------------------------------------------------------
// 1. Similarity scores against a naive oracle

/// Distinct tri-grams as a plain list, found by linear search.
fn naive_grams(tokens: &[String]) -> Vec<Vec<String>> {
    let mut grams: Vec<Vec<String>> = Vec::new();
    if tokens.len() >= 3 {
        for i in 0..=tokens.len() - 3 {
            let g = tokens[i..i + 3].to_vec();
            if !grams.contains(&g) {
                grams.push(g);
            }
        }
    }
    grams
}

fn naive_scores(a: &[String], b: &[String]) -> (f64, f64) {
    let ga = naive_grams(a);
    let gb = naive_grams(b);
    let shared = ga.iter().filter(|g| gb.contains(g)).count();
    let smaller = ga.len().min(gb.len());
    let union = ga.len() + gb.len() - shared;
    let containment = if smaller == 0 { 0.0 } else { 100.0 * shared as f64 / smaller as f64 };
    let jaccard = if union == 0 { 0.0 } else { 100.0 * shared as f64 / union as f64 };
    (containment, jaccard)
}

fn criterion_oracle() -> Outcome {
    let start = Instant::now();
    let alphabet: Vec<String> = (0..10).map(|i| format!("tok{i}")).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let random_tokens = |rng: &mut ChaCha8Rng| -> Vec<String> {
        let len = rng.random_range(0..=50);
        // Draw from a random prefix of the alphabet so that some pairs overlap heavily.
        let width = rng.random_range(1..=alphabet.len());
        (0..len).map(|_| alphabet[rng.random_range(0..width)].clone()).collect()
    };
    let cfg = DetectionConfig {
        preprocess: PreprocessConfig {
            stopwords: StopWords::empty(),
            ..PreprocessConfig::default()
        },
        ..DetectionConfig::default()
    };
    let mut nonzero = 0;
    for case in 0..200 {
        let a = random_tokens(&mut rng);
        let b = random_tokens(&mut rng);
        let (want_c, want_j) = naive_scores(&a, &b);
        if want_c > 0.0 {
            nonzero += 1;
        }

        let set = |id: &str, tokens: &[String]| {
            build_trigrams(&PreprocessedDocument { id: id.into(), tokens: tokens.to_vec() }, 3).unwrap()
        };
        let rec = compare(&set("a", &a), &set("b", &b)).map_err(|e| e.to_string())?;
        ensure!(
            rec.containment_pct() == want_c && rec.jaccard_pct() == want_j,
            "case {case}: engine ({}, {}) vs oracle ({want_c}, {want_j})",
            rec.containment_pct(),
            rec.jaccard_pct()
        );

        let corpus = Corpus::new(
            "oracle",
            vec![RawDocument::new("a", "a", a.join(" ")), RawDocument::new("b", "b", b.join(" "))],
        )
        .map_err(|e| e.to_string())?;
        let report = detect_full(&corpus, &cfg).map_err(|e| e.to_string())?;
        let rec = &report.per_pair[0];
        ensure!(
            rec.containment_pct() == want_c && rec.jaccard_pct() == want_j,
            "case {case} via detect: ({}, {}) vs oracle ({want_c}, {want_j})",
            rec.containment_pct(),
            rec.jaccard_pct()
        );
    }
    let elapsed = within(Duration::from_secs(5), start)?;
    Ok(format!("200 pairs exact ({nonzero} with non-zero containment), {elapsed:.2?}"))
}

// ---------------------------------------------------------------------------
// 2. Porter stemmer against the reference vocabulary

fn criterion_porter() -> Outcome {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data");
    let voc = std::fs::read_to_string(data.join("porter_voc.txt")).map_err(|e| e.to_string())?;
    let expected = std::fs::read_to_string(data.join("porter_output.txt")).map_err(|e| e.to_string())?;

    let start = Instant::now();
    let mut child = Command::new(env!("CARGO_BIN_EXE_plagscan"))
        .arg("stem")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .map_err(|e| e.to_string())?;
    let mut stdin = child.stdin.take().expect("piped stdin");
    let input = voc.clone();
    let writer = std::thread::spawn(move || stdin.write_all(input.as_bytes()));
    let out = child.wait_with_output().map_err(|e| e.to_string())?;
    writer.join().expect("writer thread").map_err(|e| e.to_string())?;
    ensure!(out.status.success(), "stem exited with {}", out.status);
    let elapsed = within(Duration::from_secs(10), start)?;

    let got = String::from_utf8(out.stdout).map_err(|e| e.to_string())?;
    let want: Vec<&str> = expected.lines().collect();
    let got: Vec<&str> = got.lines().collect();
    ensure!(got.len() == want.len(), "{} stems for {} words", got.len(), want.len());
    let words: Vec<&str> = voc.lines().collect();
    let wrong: Vec<_> = (0..want.len()).filter(|&i| got[i] != want[i]).collect();
    if let Some(&i) = wrong.first() {
        return Err(format!(
            "{} of {} differ, first {:?} -> {:?} (expected {:?})",
            wrong.len(),
            want.len(),
            words[i],
            got[i],
            want[i]
        ));
    }
    Ok(format!("{} of {} words match, {elapsed:.2?}", want.len(), want.len()))
}

// ---------------------------------------------------------------------------
// 3-5. Planted synthetic corpus

fn planted_corpus() -> Corpus {
    generate_synthetic_corpus(&SyntheticParams {
        n_docs: 100,
        n_groups: 10,
        copy_rate: 0.9,
        seed: 0,
        ..SyntheticParams::default()
    })
    .expect("synthetic corpus")
}

fn clustered_config(stemming: bool) -> DetectionConfig {
    DetectionConfig {
        mode: Mode::Clustered,
        preprocess: PreprocessConfig {
            stemming,
            ..PreprocessConfig::default()
        },
        cluster: ClusterConfig {
            k: Some(10),
            seed: 0,
            ..ClusterConfig::default()
        },
        ..DetectionConfig::default()
    }
}

fn same_group(a: &str, b: &str) -> bool {
    planted_group(a).is_some() && planted_group(a) == planted_group(b)
}

fn criterion_pruning(corpus: &Corpus) -> Outcome {
    let cfg = clustered_config(false);
    let full = detect_full(corpus, &cfg).map_err(|e| e.to_string())?;
    let clustered = detect_clustered(corpus, &cfg).map_err(|e| e.to_string())?;

    for rec in &clustered.per_pair {
        let twin = full
            .per_pair
            .iter()
            .find(|r| r.doc_a == rec.doc_a && r.doc_b == rec.doc_b)
            .ok_or_else(|| format!("{} / {} missing from full mode", rec.doc_a, rec.doc_b))?;
        let bytes = |r| serde_json::to_vec(r).expect("serialize record");
        ensure!(bytes(rec) == bytes(twin), "{} / {} rescored differently", rec.doc_a, rec.doc_b);
    }

    let (within_pairs, across): (Vec<_>, Vec<_>) =
        full.per_pair.iter().partition(|r| same_group(&r.doc_a, &r.doc_b));
    ensure!(within_pairs.len() == 450, "{} within-group pairs", within_pairs.len());
    let low = within_pairs.iter().map(|r| r.containment_pct()).fold(f64::INFINITY, f64::min);
    let high = across.iter().map(|r| r.containment_pct()).fold(0.0, f64::max);
    ensure!(low >= 80.0, "lowest within-group containment {low:.2}");
    ensure!(high <= 5.0, "highest cross-group containment {high:.2}");
    Ok(format!(
        "{} clustered records identical to full; within-group min {low:.2}, cross-group max {high:.2}",
        clustered.per_pair.len()
    ))
}

fn criterion_comparisons(corpus: &Corpus) -> Outcome {
    let start = Instant::now();
    let cfg = clustered_config(false);
    let clustered = detect_clustered(corpus, &cfg).map_err(|e| e.to_string())?;
    let groups: BTreeSet<BTreeSet<usize>> = clustered
        .cluster_table
        .iter()
        .map(|row| row.members.iter().map(|m| planted_group(m).unwrap_or(usize::MAX)).collect())
        .collect();
    ensure!(
        groups.len() == 10 && groups.iter().all(|g| g.len() == 1),
        "clusters do not match the planted groups"
    );

    let b = bench(corpus, &cfg, 7).map_err(|e| e.to_string())?;
    ensure!(b.full.comparisons == 4950, "{} full comparisons", b.full.comparisons);
    ensure!(b.comparison_ratio <= 0.15, "comparison ratio {:.4}", b.comparison_ratio);
    ensure!(
        b.clustered.pairwise_ms < b.full.pairwise_ms,
        "clustered pairwise {:.3} ms, full {:.3} ms",
        b.clustered.pairwise_ms,
        b.full.pairwise_ms
    );
    let elapsed = within(Duration::from_secs(60), start)?;
    Ok(format!(
        "{}/{} comparisons (ratio {:.4}); median pairwise {:.3} ms vs {:.3} ms; {elapsed:.2?}",
        b.clustered.comparisons, b.full.comparisons, b.comparison_ratio, b.clustered.pairwise_ms, b.full.pairwise_ms
    ))
}

fn flagged(report: &DetectionReport) -> BTreeSet<(String, String)> {
    report
        .per_pair
        .iter()
        .filter(|r| r.containment_pct() > 50.0)
        .map(|r| (r.doc_a.clone(), r.doc_b.clone()))
        .collect()
}

fn criterion_stemming(corpus: &Corpus) -> Outcome {
    let plain = detect_full(corpus, &clustered_config(false)).map_err(|e| e.to_string())?;
    let stemmed = detect_full(corpus, &clustered_config(true)).map_err(|e| e.to_string())?;
    let (a, b) = (flagged(&plain), flagged(&stemmed));
    ensure!(a == b, "{} pairs flagged without stemming, {} with", a.len(), b.len());
    Ok(format!("{} pairs above 50% either way", a.len()))
}

// ---------------------------------------------------------------------------
// 6. Determinism across worker counts

fn without_timings(json: &str) -> Result<String, String> {
    let at = json.find(",\n  \"timings\"").ok_or("no timings block in report")?;
    Ok(json[..at].to_string())
}

fn criterion_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    planted_corpus().write_to(dir.path()).map_err(|e| e.to_string())?;
    let run = |workers: &str| -> Result<String, String> {
        let out = Command::new(env!("CARGO_BIN_EXE_plagscan"))
            .args(["detect", dir.path().to_str().unwrap(), "--mode", "clustered", "--k", "10"])
            .args(["--kmeans-seed", "3", "--format", "json", "--workers", workers])
            .output()
            .map_err(|e| e.to_string())?;
        ensure!(out.status.success(), "detect failed: {}", String::from_utf8_lossy(&out.stderr));
        without_timings(&String::from_utf8(out.stdout).map_err(|e| e.to_string())?)
    };
    let one = run("1")?;
    let eight = run("8")?;
    ensure!(one == eight, "reports differ between 1 and 8 workers");
    ensure!(one == run("1")?, "repeated single-worker runs differ");
    Ok(format!("{} bytes identical across 1 and 8 workers", one.len()))
}

// ---------------------------------------------------------------------------
// 7. k-means invariants on random vectors

fn unit(v: &TermVector, dim: usize) -> Vec<f64> {
    let mut x = vec![0.0; dim];
    for &(i, w) in &v.weights {
        x[i] += w as f64;
    }
    let norm = x.iter().map(|a| a * a).sum::<f64>().sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|a| *a /= norm);
    }
    x
}

fn sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn random_vectors(rng: &mut ChaCha8Rng) -> (Vec<TermVector>, usize) {
    let n = rng.random_range(2..=40);
    let dim = rng.random_range(2..=25);
    let vectors = (0..n)
        .map(|d| {
            let mut weights: Vec<(usize, u32)> = (0..dim)
                .filter(|_| rng.random_bool(0.3))
                .collect::<Vec<_>>()
                .into_iter()
                .map(|i| (i, rng.random_range(1..=5)))
                .collect();
            if weights.is_empty() {
                weights.push((rng.random_range(0..dim), 1));
            }
            TermVector { doc_id: format!("v{d:02}"), weights }
        })
        .collect();
    (vectors, dim)
}

fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

fn criterion_kmeans() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut iterations = 0;
    for set in 0..100 {
        let (vectors, dim) = random_vectors(&mut rng);
        let n = vectors.len();
        let points: Vec<Vec<f64>> = vectors.iter().map(|v| unit(v, dim)).collect();
        let run_k = |k: usize, seed: u64| {
            kmeans(&vectors, dim, &KMeansParams { seed, ..KMeansParams::new(k) }).map_err(|e| e.to_string())
        };

        let k = rng.random_range(1..=n);
        let run = run_k(k, set)?;
        iterations += run.iterations;
        for w in run.sse_trace.windows(2) {
            ensure!(w[1] <= w[0] * (1.0 + 1e-12), "set {set}: SSE rose {} -> {}", w[0], w[1]);
        }
        // Independent recomputation: centroids as plain means of the assigned points.
        let mut recomputed = 0.0;
        for c in 0..k {
            let members: Vec<&Vec<f64>> = (0..n).filter(|&i| run.assignment[i] == c).map(|i| &points[i]).collect();
            ensure!(!members.is_empty(), "set {set}: cluster {c} empty");
            let mean: Vec<f64> =
                (0..dim).map(|j| members.iter().map(|p| p[j]).sum::<f64>() / members.len() as f64).collect();
            recomputed += members.iter().map(|p| sq(p, &mean)).sum::<f64>();
        }
        ensure!(
            relative_gap(run.sse, recomputed) <= 1e-9 || (run.sse - recomputed).abs() <= 1e-12,
            "set {set}: SSE {} vs recomputed {recomputed}",
            run.sse
        );

        // k = 1: the centroid is the mean and SSE = sum |x|^2 - n |mean|^2.
        let one = run_k(1, set)?;
        let mean: Vec<f64> = (0..dim).map(|j| points.iter().map(|p| p[j]).sum::<f64>() / n as f64).collect();
        let sum_sq: f64 = points.iter().map(|p| p.iter().map(|x| x * x).sum::<f64>()).sum();
        let closed = sum_sq - n as f64 * mean.iter().map(|x| x * x).sum::<f64>();
        ensure!(one.assignment.iter().all(|&c| c == 0), "set {set}: k=1 split the points");
        ensure!(sq(&one.centroids[0], &mean) <= 1e-20, "set {set}: k=1 centroid is not the mean");
        ensure!(
            relative_gap(one.sse, closed) <= 1e-9 || (one.sse - closed).abs() <= 1e-12,
            "set {set}: k=1 SSE {} vs closed form {closed}",
            one.sse
        );

        // k = n: every point alone, zero SSE.
        let all = run_k(n, set)?;
        ensure!(all.sizes().iter().all(|&s| s == 1), "set {set}: k=n sizes {:?}", all.sizes());
        ensure!(all.sse.abs() <= 1e-12, "set {set}: k=n SSE {}", all.sse);
    }
    Ok(format!("100 sets hold ({iterations} Lloyd iterations at random k)"))
}

fn main() -> ExitCode {
    // Arguments passed by `cargo test` (filters, --nocapture) are ignored.
    let corpus = planted_corpus();
    let criteria: Vec<(&str, Check)> = vec![
        ("1 oracle equivalence", Box::new(criterion_oracle)),
        ("2 porter conformance", Box::new(criterion_porter)),
        ("3 pruning never rescores", Box::new(|| criterion_pruning(&corpus))),
        ("4 comparison count and latency", Box::new(|| criterion_comparisons(&corpus))),
        ("5 stemming invariance", Box::new(|| criterion_stemming(&corpus))),
        ("6 determinism across workers", Box::new(criterion_determinism)),
        ("7 k-means invariants", Box::new(criterion_kmeans)),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        match check() {
            Ok(detail) => println!("PASS  criterion {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  criterion {name}: {why}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
