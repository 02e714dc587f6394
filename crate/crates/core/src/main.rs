use std::io::{self, BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use plagscan::corpus::{load_corpus, Corpus};
use plagscan::engine::{
    self, generate_synthetic_corpus, render_report, ClusterConfig, DetectionConfig, Mode, Prepared,
    ReportFormat, SyntheticParams,
};
use plagscan::preprocess::{PreprocessConfig, StopWords};
use plagscan::{cluster, stemmer, Error};

#[derive(Parser)]
#[command(name = "plagscan", version, about = "Word tri-gram plagiarism detection for text assignments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score document pairs in a directory of text files.
    Detect(DetectArgs),
    /// Time full against clustered detection on the same corpus.
    Bench(BenchArgs),
    /// Write a synthetic corpus with planted copying.
    Gen(GenArgs),
    /// Porter-stem words read from stdin, one per line.
    Stem,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Full,
    Clustered,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
    Text,
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => ReportFormat::Json,
            FormatArg::Csv => ReportFormat::Csv,
            FormatArg::Text => ReportFormat::Text,
        }
    }
}

#[derive(Args)]
struct PipelineArgs {
    /// Directory of plain-text assignments.
    dir: PathBuf,
    /// File extensions to load (comma separated).
    #[arg(long, value_delimiter = ',', default_value = "txt")]
    ext: Vec<String>,
    /// Stop-word file, one word per line; defaults to the bundled English list.
    #[arg(long)]
    stopwords: Option<PathBuf>,
    /// Apply Porter stemming after stop-word removal.
    #[arg(long, overrides_with = "no_stem")]
    stem: bool,
    #[arg(long = "no-stem", overrides_with = "stem")]
    no_stem: bool,
    #[arg(long = "min-token-len", default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    min_token_len: u64,
    /// Words per n-gram.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
    ngram: u64,
    /// Number of clusters; defaults to ceil(sqrt(n/2)).
    #[arg(long)]
    k: Option<usize>,
    #[arg(long = "kmeans-seed", default_value_t = 0)]
    kmeans_seed: u64,
    #[arg(long = "min-term-freq", default_value_t = 1)]
    min_term_freq: usize,
    #[arg(long = "max-iter", default_value_t = 100)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    /// Print the within-cluster SSE for each of these k values.
    #[arg(long = "sweep-k", value_delimiter = ',')]
    sweep_k: Vec<usize>,
    /// Containment percentage at which pairs are flagged.
    #[arg(long, default_value_t = 50.0)]
    threshold: f64,
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct DetectArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    #[arg(long, value_enum, default_value = "full")]
    mode: ModeArg,
    #[arg(long, value_enum, default_value = "text")]
    format: FormatArg,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Measurements per mode; the median is reported.
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    /// Print JSON instead of a text summary.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 100)]
    docs: usize,
    #[arg(long, default_value_t = 10)]
    groups: usize,
    #[arg(long = "copy-rate", default_value_t = 0.9)]
    copy_rate: f64,
    #[arg(long, default_value_t = 5000)]
    vocab: usize,
    #[arg(long, default_value_t = 120)]
    len: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory to write the documents into.
    #[arg(long)]
    out: PathBuf,
}

fn io_error(path: &Path, source: io::Error) -> Error {
    Error::Write {
        path: path.to_path_buf(),
        source,
    }
}

fn stdout_error(source: io::Error) -> Error {
    io_error(Path::new("<stdout>"), source)
}

impl PipelineArgs {
    fn config(&self, mode: Mode) -> Result<DetectionConfig, Error> {
        let stopwords = match &self.stopwords {
            Some(path) => StopWords::from_file(path)?,
            None => StopWords::english(),
        };
        let cfg = DetectionConfig {
            mode,
            ngram_n: self.ngram as usize,
            preprocess: PreprocessConfig {
                stopwords,
                stemming: self.stem && !self.no_stem,
                min_token_length: self.min_token_len as usize,
            },
            cluster: ClusterConfig {
                k: self.k,
                seed: self.kmeans_seed,
                min_term_freq: self.min_term_freq,
                max_iter: self.max_iter,
                tol: self.tol,
            },
            threshold_pct: self.threshold,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn load(&self) -> Result<Corpus, Error> {
        let corpus = load_corpus(&self.dir, &self.ext)?;
        for w in corpus.warnings() {
            eprintln!("warning: {w}");
        }
        Ok(corpus)
    }

    fn pool(&self) -> Result<rayon::ThreadPool, Error> {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(w) = self.workers {
            if w == 0 {
                return Err(Error::Usage("--workers must be at least 1".into()));
            }
            builder = builder.num_threads(w);
        }
        builder.build().map_err(|e| Error::Usage(e.to_string()))
    }

    /// Prints the k sweep to stderr when requested, or when k was left to the default.
    fn print_sweep(&self, corpus: &Corpus, cfg: &DetectionConfig) -> Result<(), Error> {
        let n = corpus.len();
        let ks: Vec<usize> = if !self.sweep_k.is_empty() {
            self.sweep_k.clone()
        } else if cfg.mode == Mode::Clustered && self.k.is_none() {
            let d = cluster::default_k(n);
            let mut ks = vec![(d / 2).max(1), d, (2 * d).min(n)];
            ks.dedup();
            ks
        } else {
            return Ok(());
        };
        let prepared = Prepared::new(corpus, cfg)?;
        eprintln!("k\tsse");
        for (k, sse) in prepared.sweep_k(cfg, &ks)? {
            eprintln!("{k}\t{sse:.6}");
        }
        if self.k.is_none() {
            eprintln!("using k = {}", cluster::default_k(n));
        }
        Ok(())
    }
}

fn detect(args: &DetectArgs) -> Result<(), Error> {
    let mode = match args.mode {
        ModeArg::Full => Mode::Full,
        ModeArg::Clustered => Mode::Clustered,
    };
    let p = &args.pipeline;
    let cfg = p.config(mode)?;
    let corpus = p.load()?;
    let report = p.pool()?.install(|| -> Result<_, Error> {
        p.print_sweep(&corpus, &cfg)?;
        engine::detect(&corpus, &cfg)
    })?;
    let body = render_report(&report, args.format.into())?;
    match &args.out {
        Some(path) => std::fs::write(path, body).map_err(|e| io_error(path, e)),
        None => io::stdout().write_all(body.as_bytes()).map_err(stdout_error),
    }
}

fn bench(args: &BenchArgs) -> Result<(), Error> {
    let p = &args.pipeline;
    let cfg = p.config(Mode::Clustered)?;
    let corpus = p.load()?;
    let result = p.pool()?.install(|| engine::bench(&corpus, &cfg, args.repeats))?;
    let mut out = io::stdout().lock();
    if args.json {
        let json = serde_json::to_string_pretty(&result).map_err(|e| Error::Serialize(e.to_string()))?;
        writeln!(out, "{json}").map_err(stdout_error)
    } else {
        let text = format!(
            "corpus {} ({} documents), k = {}, {} repeats, preprocess {:.3} ms\n\
             mode       comparisons  cluster ms  pairwise ms  total ms\n\
             full       {:>11}  {:>10.3}  {:>11.3}  {:>8.3}\n\
             clustered  {:>11}  {:>10.3}  {:>11.3}  {:>8.3}\n\
             comparison ratio {:.4}, pairwise speedup {:.2}x, total speedup {:.2}x\n",
            result.corpus_name,
            result.documents,
            result.k,
            result.repeats,
            result.preprocess_ms,
            result.full.comparisons,
            result.full.cluster_ms,
            result.full.pairwise_ms,
            result.full.total_ms,
            result.clustered.comparisons,
            result.clustered.cluster_ms,
            result.clustered.pairwise_ms,
            result.clustered.total_ms,
            result.comparison_ratio,
            result.pairwise_speedup,
            result.total_speedup,
        );
        out.write_all(text.as_bytes()).map_err(stdout_error)
    }
}

fn generate(args: &GenArgs) -> Result<(), Error> {
    let corpus = generate_synthetic_corpus(&SyntheticParams {
        n_docs: args.docs,
        n_groups: args.groups,
        copy_rate: args.copy_rate,
        vocab_size: args.vocab,
        doc_len: args.len,
        seed: args.seed,
    })?;
    std::fs::create_dir_all(&args.out).map_err(|e| io_error(&args.out, e))?;
    corpus.write_to(&args.out)?;
    eprintln!("wrote {} documents to {}", corpus.len(), args.out.display());
    Ok(())
}

fn stem() -> Result<(), Error> {
    let stdin = io::stdin().lock();
    let mut out = BufWriter::new(io::stdout().lock());
    for line in stdin.lines() {
        let line = line.map_err(|source| Error::Read {
            path: PathBuf::from("<stdin>"),
            source,
        })?;
        writeln!(out, "{}", stemmer::porter_stem(line.trim())).map_err(stdout_error)?;
    }
    out.flush().map_err(stdout_error)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Detect(args) => detect(args),
        Command::Bench(args) => bench(args),
        Command::Gen(args) => generate(args),
        Command::Stem => stem(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
