//! The `vrdforge` command-line entry point.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error. Diagnostics go to
//! stderr; data goes to files or stdout.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::GenConfig;
use crate::corpus::{ingest_file, read_corpus, write_corpus, Sentence, DEFAULT_MAX_CHARS};
use crate::error::{Error, Result};
use crate::eval::{
    ablation_matrix, crop_regions, evaluate_predictions, flag_tall_boxes, load_annotations,
    AblationSpec, AnnotationFormat,
};
use crate::metrics::{bucket_curve_csv, AggregateMode, Normalization, DEFAULT_BUCKET_MIN_COUNT};
use crate::pipeline::{
    generate_stream, persist_dataset, GenerationJob, ManifestEntry, write_stream_record,
};
use crate::render::{resolve_font_dir, spanish_charset, FontPool};

#[derive(Parser)]
#[command(
    name = "vrdforge",
    version,
    about = "Synthetic text-line dataset generator and OCR evaluation harness for visually rich documents"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Corpus preparation utilities.
    #[command(subcommand)]
    Corpus(CorpusCmd),
    /// Generate a labeled image dataset to disk.
    Generate {
        /// JSON run configuration.
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Number of samples.
        #[arg(long)]
        n: Option<u64>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
        /// Write into a non-empty output directory.
        #[arg(long)]
        overwrite: bool,
        /// Config override, KEY=VALUE with dotted keys. Repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Stream length-prefixed sample records to stdout (no disk writes).
    Stream {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Score a prediction file against ground truth.
    Eval {
        /// Truth JSONL ({"id", "text"} or {"id", "truth"}).
        truth: PathBuf,
        /// Prediction JSONL ({"id", "text"} or {"id", "prediction"}).
        pred: PathBuf,
        /// Headline aggregation: mean or weighted.
        #[arg(long, default_value = "mean")]
        mode: String,
        /// Length bucket width in characters.
        #[arg(long, default_value_t = 10)]
        buckets: usize,
        /// Minimum samples per bucket for the headline curve.
        #[arg(long, default_value_t = DEFAULT_BUCKET_MIN_COUNT)]
        min_count: usize,
        #[arg(long)]
        casefold: bool,
        #[arg(long)]
        strip_punctuation: bool,
        /// Write the full report as JSON here.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Write the bucket curve as CSV here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Crop an XFUND-style annotated dataset into line images plus truth JSONL.
    IngestXfund {
        json: PathBuf,
        pages_dir: PathBuf,
        out: PathBuf,
    },
    /// Generate one dataset per ablation preset under a shared seed.
    Ablate {
        config: PathBuf,
        /// Comma-separated preset names (default: all built-ins).
        #[arg(long, value_delimiter = ',')]
        presets: Vec<String>,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        overwrite: bool,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Measure generation throughput on a built-in corpus.
    Bench {
        #[arg(long, default_value_t = 10_000)]
        n: u64,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Font size in pixels.
        #[arg(long, default_value_t = 64)]
        height: u32,
    },
}

#[derive(Subcommand)]
enum CorpusCmd {
    /// Segment and filter a UTF-8 text file into a corpus JSONL.
    Prep {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_CHARS)]
        max_chars: usize,
    },
}

/// Parses argv and runs the selected subcommand, returning the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version print to stdout and exit 0; everything
            // else is a usage error.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            2
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Corpus(CorpusCmd::Prep {
            input,
            output,
            max_chars,
        }) => cmd_corpus_prep(&input, &output, max_chars),
        Command::Generate {
            config,
            seed,
            n,
            out,
            workers,
            overwrite,
            set,
        } => cmd_generate(&config, seed, n, &out, workers, overwrite, &set),
        Command::Stream {
            config,
            seed,
            n,
            workers,
            set,
        } => cmd_stream(&config, seed, n, workers, &set),
        Command::Eval {
            truth,
            pred,
            mode,
            buckets,
            min_count,
            casefold,
            strip_punctuation,
            json,
            csv,
        } => cmd_eval(
            &truth,
            &pred,
            &mode,
            buckets,
            min_count,
            casefold,
            strip_punctuation,
            json.as_deref(),
            csv.as_deref(),
        ),
        Command::IngestXfund {
            json,
            pages_dir,
            out,
        } => cmd_ingest_xfund(&json, &pages_dir, &out),
        Command::Ablate {
            config,
            presets,
            n,
            seed,
            out,
            workers,
            overwrite,
            set,
        } => cmd_ablate(&config, &presets, n, seed, &out, workers, overwrite, &set),
        Command::Bench {
            n,
            workers,
            seed,
            height,
        } => cmd_bench(n, workers, seed, height),
    }
}

fn effective_workers(configured: usize) -> usize {
    if configured > 0 {
        configured
    } else {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    }
}

struct LoadedJobInputs {
    cfg: GenConfig,
    sentences: Vec<Sentence>,
    pool: FontPool,
}

fn load_job_inputs(
    config: &Path,
    seed: Option<u64>,
    n: Option<u64>,
    workers: Option<usize>,
    overrides: &[String],
) -> Result<LoadedJobInputs> {
    let mut cfg = GenConfig::load(config, overrides)?;
    if let Some(seed) = seed {
        cfg.master_seed = seed;
    }
    if let Some(n) = n {
        cfg.n_samples = n;
    }
    if let Some(w) = workers {
        cfg.workers = w;
    }
    let corpus_path = cfg
        .corpus
        .clone()
        .ok_or_else(|| Error::Config("config field \"corpus\": a corpus file is required".into()))?;
    let sentences = read_corpus(&corpus_path)?;
    let fonts_dir = resolve_font_dir(cfg.fonts_dir.as_deref())?;
    let pool = FontPool::load_dir(&fonts_dir, &spanish_charset())?;
    Ok(LoadedJobInputs {
        cfg,
        sentences,
        pool,
    })
}

fn job_from_config<'a>(
    cfg: &GenConfig,
    sentences: &'a [Sentence],
    pool: &'a FontPool,
) -> GenerationJob<'a> {
    GenerationJob {
        master_seed: cfg.master_seed,
        n_samples: cfg.n_samples,
        corpus: sentences,
        pool,
        style: cfg.style.clone(),
        artifact_cfg: cfg.artifacts,
        augment_cfg: cfg.augment,
        neighbor: cfg.neighbor,
        sampler: cfg.sampler.clone(),
        epoch_offset: cfg.epoch_offset,
    }
}

fn cmd_corpus_prep(input: &Path, output: &Path, max_chars: usize) -> Result<()> {
    let ingested = ingest_file(input, max_chars)?;
    write_corpus(output, &ingested.sentences)?;
    eprintln!(
        "corpus: {} sentences written, {} dropped over {} chars",
        ingested.sentences.len(),
        ingested.dropped_too_long,
        max_chars
    );
    println!("{}", output.display());
    Ok(())
}

fn cmd_generate(
    config: &Path,
    seed: Option<u64>,
    n: Option<u64>,
    out: &Path,
    workers: Option<usize>,
    overwrite: bool,
    overrides: &[String],
) -> Result<()> {
    let inputs = load_job_inputs(config, seed, n, workers, overrides)?;
    let job = job_from_config(&inputs.cfg, &inputs.sentences, &inputs.pool);
    let workers = effective_workers(inputs.cfg.workers);
    let outcome = persist_dataset(&job, workers, out, overwrite)?;
    eprintln!(
        "generated {} samples in {:.2}s ({:.1} samples/s, {} workers)",
        outcome.stats.n_samples, outcome.stats.elapsed_secs, outcome.stats.samples_per_sec, workers
    );
    println!("{}", outcome.manifest_path.display());
    Ok(())
}

fn cmd_stream(
    config: &Path,
    seed: Option<u64>,
    n: Option<u64>,
    workers: Option<usize>,
    overrides: &[String],
) -> Result<()> {
    let inputs = load_job_inputs(config, seed, n, workers, overrides)?;
    let job = job_from_config(&inputs.cfg, &inputs.sentences, &inputs.pool);
    let workers = effective_workers(inputs.cfg.workers);
    let stdout = std::io::stdout();
    let mut out = std::io::BufWriter::new(stdout.lock());
    let pool = &inputs.pool;
    let stats = generate_stream(&job, workers, |sample| {
        let header = ManifestEntry::from_sample(&sample, pool, None);
        write_stream_record(&mut out, &header, &sample.image.to_png())
    })?;
    out.flush().map_err(|source| Error::Io {
        path: PathBuf::from("<stdout>"),
        source,
    })?;
    eprintln!(
        "streamed {} samples in {:.2}s ({:.1} samples/s, {} workers)",
        stats.n_samples, stats.elapsed_secs, stats.samples_per_sec, workers
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_eval(
    truth: &Path,
    pred: &Path,
    mode: &str,
    buckets: usize,
    min_count: usize,
    casefold: bool,
    strip_punctuation: bool,
    json: Option<&Path>,
    csv: Option<&Path>,
) -> Result<()> {
    let mode = match mode {
        "mean" => AggregateMode::Mean,
        "weighted" => AggregateMode::Weighted,
        other => {
            return Err(Error::Config(format!(
                "mode must be \"mean\" or \"weighted\", got {other:?}"
            )))
        }
    };
    let norm = Normalization {
        casefold,
        strip_punctuation,
    };
    let report = evaluate_predictions(pred, truth, norm, mode, buckets, min_count)?;
    print!("{}", report.to_table());
    if let Some(path) = json {
        let body = serde_json::to_string_pretty(&report).expect("report serialization");
        std::fs::write(path, body).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
    }
    if let Some(path) = csv {
        std::fs::write(path, bucket_curve_csv(&report.buckets)).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
    }
    Ok(())
}

fn cmd_ingest_xfund(json: &Path, pages_dir: &Path, out: &Path) -> Result<()> {
    let loaded = load_annotations(json, AnnotationFormat::Xfund, Some(pages_dir))?;
    let flags = flag_tall_boxes(&loaded.entries);
    let crops = crop_regions(&loaded.entries)?;
    let crops_dir = out.join("crops");
    std::fs::create_dir_all(&crops_dir).map_err(|source| Error::Io {
        path: crops_dir.clone(),
        source,
    })?;
    let truth_path = out.join("truth.jsonl");
    let truth_file = std::fs::File::create(&truth_path).map_err(|source| Error::Io {
        path: truth_path.clone(),
        source,
    })?;
    let mut truth = std::io::BufWriter::new(truth_file);
    for (i, (crop, text)) in crops.iter().enumerate() {
        let name = format!("{i:06}.png");
        crop.save_png(&crops_dir.join(&name))?;
        let line = serde_json::json!({
            "id": format!("{i:06}"),
            "truth": text,
            "image": format!("crops/{name}"),
            "flagged_multiline": flags[i],
        });
        writeln!(truth, "{line}").map_err(|source| Error::Io {
            path: truth_path.clone(),
            source,
        })?;
    }
    truth.flush().map_err(|source| Error::Io {
        path: truth_path.clone(),
        source,
    })?;
    eprintln!(
        "ingested {} regions ({} skipped for invalid boxes/text, {} flagged multi-line)",
        crops.len(),
        loaded.skipped,
        flags.iter().filter(|&&f| f).count()
    );
    println!("{}", truth_path.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_ablate(
    config: &Path,
    presets: &[String],
    n: Option<u64>,
    seed: Option<u64>,
    out: &Path,
    workers: Option<usize>,
    overwrite: bool,
    overrides: &[String],
) -> Result<()> {
    let inputs = load_job_inputs(config, seed, n, workers, overrides)?;
    let preset_names: Vec<String> = if presets.is_empty() {
        crate::augment::PRESET_NAMES
            .iter()
            .map(|s| s.to_string())
            .collect()
    } else {
        presets.to_vec()
    };
    let spec = AblationSpec::from_names(&preset_names)?;
    let template = job_from_config(&inputs.cfg, &inputs.sentences, &inputs.pool);
    let workers = effective_workers(inputs.cfg.workers);
    let rows = ablation_matrix(
        &template,
        &spec,
        inputs.cfg.n_samples,
        out,
        workers,
        overwrite,
    )?;
    for row in &rows {
        eprintln!(
            "preset {}: {} samples, {} artifact / {} photometric / {} geometric steps",
            row.preset, row.n_samples, row.artifact_steps, row.photometric_steps, row.geometric_steps
        );
    }
    println!("{}", out.join("ablation_table.csv").display());
    Ok(())
}

/// Deterministic built-in corpus for throughput measurement.
fn bench_corpus() -> Vec<Sentence> {
    const WORDS: &[&str] = &[
        "factura", "cliente", "importe", "fecha", "número", "dirección", "producto", "cantidad",
        "firma", "página", "total", "código", "envío", "pedido", "teléfono", "nombre", "concepto",
        "unidades", "precio", "sucursal",
    ];
    let mut out = Vec::new();
    for i in 0..600usize {
        let k = 1 + i % 12;
        let words: Vec<&str> = (0..k).map(|j| WORDS[(i * 7 + j * 3) % WORDS.len()]).collect();
        if let Some(s) = Sentence::new(&words.join(" "), "bench") {
            if s.char_count <= 120 {
                out.push(s);
            }
        }
    }
    out
}

fn cmd_bench(n: u64, workers: Option<usize>, seed: u64, height: u32) -> Result<()> {
    let corpus = bench_corpus();
    let fonts_dir = resolve_font_dir(None)?;
    let pool = FontPool::load_dir(&fonts_dir, &spanish_charset())?;
    let mut job = GenerationJob::new(seed, n, &corpus, &pool);
    job.style.font_size = (height, height);
    let workers = effective_workers(workers.unwrap_or(0));
    let mut pixel_bytes = 0u64;
    let stats = generate_stream(&job, workers, |s| {
        pixel_bytes += s.image.pixels().len() as u64;
        Ok(())
    })?;
    println!("samples/s: {:.1}", stats.samples_per_sec);
    eprintln!(
        "bench: n={} elapsed={:.2}s workers={} font_px={} pixel_bytes={}",
        stats.n_samples, stats.elapsed_secs, workers, height, pixel_bytes
    );
    Ok(())
}
