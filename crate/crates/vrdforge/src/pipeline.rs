//! Deterministic, parallel generation of labeled samples.
//!
//! Every sample's randomness comes from a ChaCha8 stream derived from
//! `(master_seed, sample_index)` by a fixed 64-bit mix, so the output
//! keyed by id is a pure function of the job: worker count, scheduling,
//! and platform never change a byte. Within a sample the draw order is
//! fixed (style, neighbor slivers, artifacts, photometric, geometric),
//! which also keeps ids/texts/styles identical across ablation presets
//! that share a seed.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::augment::{augment, ArtifactConfig, AugmentConfig, AugmentTrace};
use crate::corpus::{sample_fixed_word_count, sample_uniform, LengthDistribution, Sentence};
use crate::error::{Error, Result};
use crate::raster::RasterImage;
use crate::render::{render_with_neighbors, sample_style, FontPool, StyleParams, StyleSpace};

/// The random stream handed to every randomized operation.
pub type SampleRng = ChaCha8Rng;

/// Desk-scale default sample count. The paper-scale regime of 2,000,000
/// sentences is the documented production setting.
pub const DEFAULT_SAMPLE_COUNT: u64 = 10_000;
/// Sentence count of the paper-scale training regime.
pub const PAPER_SCALE_SENTENCES: u64 = 2_000_000;

/// Sample index reserved for the job-level sentence selection stream.
const SENTENCE_STREAM_INDEX: u64 = u64::MAX;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the independent random stream for one sample.
///
/// Mixing is a fixed SplitMix64 sponge: the master seed is advanced one
/// round, the index is folded in, and four further rounds squeeze the
/// 256-bit ChaCha8 key. Identical inputs yield identical streams on all
/// platforms.
pub fn derive_stream(master_seed: u64, sample_index: u64) -> SampleRng {
    let mut state = master_seed;
    let mut acc = splitmix64(&mut state);
    state ^= sample_index;
    acc ^= splitmix64(&mut state);
    let mut key = [0u8; 32];
    let mut squeeze = acc;
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut squeeze).to_le_bytes());
    }
    SampleRng::from_seed(key)
}

/// Neighbor-line crop artifact settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NeighborConfig {
    /// Per-side probability of a neighbor sliver.
    pub prob: f64,
    /// Inclusive range the visible glyph-height fraction is drawn from.
    pub crop_frac_range: (f64, f64),
}

impl Default for NeighborConfig {
    fn default() -> Self {
        NeighborConfig {
            prob: 0.25,
            crop_frac_range: (0.1, 0.5),
        }
    }
}

impl NeighborConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.prob) {
            return Err(Error::Config(format!(
                "neighbor.prob {} outside [0,1]",
                self.prob
            )));
        }
        let (lo, hi) = self.crop_frac_range;
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
            return Err(Error::Config(format!(
                "neighbor.crop_frac_range ({lo},{hi}) must lie within [0,1]"
            )));
        }
        Ok(())
    }
}

/// How sentences are drawn from the corpus for a job.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SentenceSampler {
    /// Uniform over the whole pool.
    #[default]
    Pool,
    /// Length-balanced via a bucket distribution.
    Distribution {
        #[serde(flatten)]
        dist: LengthDistribution,
    },
    /// Exactly `k` words per sentence.
    FixedWordCount {
        k: usize,
        #[serde(default)]
        allow_truncation: bool,
    },
}

/// Everything one generation run needs besides the output sink.
pub struct GenerationJob<'a> {
    pub master_seed: u64,
    pub n_samples: u64,
    pub corpus: &'a [Sentence],
    pub pool: &'a FontPool,
    pub style: StyleSpace,
    pub artifact_cfg: ArtifactConfig,
    pub augment_cfg: AugmentConfig,
    pub neighbor: NeighborConfig,
    pub sampler: SentenceSampler,
    /// Added to each sample index before stream derivation, so a second
    /// epoch can either replay identical augmentations (offset 0) or
    /// draw fresh ones (offset >= n_samples).
    pub epoch_offset: u64,
}

impl<'a> GenerationJob<'a> {
    pub fn new(master_seed: u64, n_samples: u64, corpus: &'a [Sentence], pool: &'a FontPool) -> Self {
        GenerationJob {
            master_seed,
            n_samples,
            corpus,
            pool,
            style: StyleSpace::default(),
            artifact_cfg: ArtifactConfig::default(),
            augment_cfg: AugmentConfig::default(),
            neighbor: NeighborConfig::default(),
            sampler: SentenceSampler::Pool,
            epoch_offset: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::Config("n_samples must be >= 1".into()));
        }
        if self.corpus.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        self.style.validate()?;
        self.artifact_cfg.validate()?;
        self.augment_cfg.validate()?;
        self.neighbor.validate()?;
        Ok(())
    }
}

/// One generated image with its label and full generation trace.
#[derive(Debug, Clone)]
pub struct LabeledSample {
    pub id: u64,
    pub image: RasterImage,
    /// Byte-for-byte the source sentence text; artifacts never touch it.
    pub ground_truth: String,
    pub trace: AugmentTrace,
    pub style: StyleParams,
    pub seed_index: u64,
}

/// Picks the job's sentence list. Deterministic in the master seed: the
/// selection stream uses a reserved sample index.
pub fn select_sentences(job: &GenerationJob) -> Result<Vec<Sentence>> {
    let mut rng = derive_stream(job.master_seed, SENTENCE_STREAM_INDEX);
    let n = job.n_samples as usize;
    match &job.sampler {
        SentenceSampler::Pool => Ok((0..n)
            .map(|_| job.corpus[rng.random_range(0..job.corpus.len())].clone())
            .collect()),
        SentenceSampler::Distribution { dist } => sample_uniform(job.corpus, dist, n, &mut rng),
        SentenceSampler::FixedWordCount {
            k,
            allow_truncation,
        } => sample_fixed_word_count(job.corpus, *k, n, &mut rng, *allow_truncation),
    }
}

/// Generates one sample. All randomness comes from
/// `derive_stream(master_seed, index + epoch_offset)` in a fixed draw
/// order, so the result depends only on (sentence, job, index).
pub fn generate_sample(
    sentence: &Sentence,
    job: &GenerationJob,
    index: u64,
) -> Result<LabeledSample> {
    let seed_index = index.wrapping_add(job.epoch_offset);
    let mut rng = derive_stream(job.master_seed, seed_index);
    let mut inner = || -> Result<(RasterImage, AugmentTrace, StyleParams)> {
        let style = sample_style(&job.style, job.pool, &mut rng)?;
        let neighbor_text = |rng: &mut SampleRng| -> (Option<String>, f64) {
            let gate: f64 = rng.random();
            if gate < job.neighbor.prob {
                let text = job.corpus[rng.random_range(0..job.corpus.len())].text.clone();
                let u: f64 = rng.random();
                let (lo, hi) = job.neighbor.crop_frac_range;
                (Some(text), lo + u * (hi - lo))
            } else {
                (None, 0.0)
            }
        };
        let (above, frac_above) = neighbor_text(&mut rng);
        let (below, frac_below) = neighbor_text(&mut rng);
        let (img, layout) = render_with_neighbors(
            &sentence.text,
            above.as_deref(),
            below.as_deref(),
            &style,
            (frac_above, frac_below),
            job.pool,
        )?;
        let (img, trace) = augment(&img, &layout, &job.artifact_cfg, &job.augment_cfg, &mut rng)?;
        Ok((img, trace, style))
    };
    let (image, trace, style) = inner().map_err(|e| e.at_sample(index))?;
    Ok(LabeledSample {
        id: index,
        image,
        ground_truth: sentence.text.clone(),
        trace,
        style,
        seed_index,
    })
}

/// Throughput record for a finished job.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GenStats {
    pub n_samples: u64,
    pub elapsed_secs: f64,
    pub samples_per_sec: f64,
}

/// Generates `job.n_samples` samples across `workers` threads and hands
/// them to `consumer` in ascending-id order.
///
/// A bounded channel (4 × workers) plus a reordering map keeps memory
/// bounded while enforcing ordered emission. The sample bytes keyed by
/// id are identical for any worker count. Nothing here touches the
/// filesystem.
pub fn generate_stream<F>(job: &GenerationJob, workers: usize, mut consumer: F) -> Result<GenStats>
where
    F: FnMut(LabeledSample) -> Result<()>,
{
    job.validate()?;
    if workers == 0 {
        return Err(Error::Config("workers must be >= 1".into()));
    }
    let sentences = select_sentences(job)?;
    let n = job.n_samples;
    let start = Instant::now();

    if workers == 1 {
        for i in 0..n {
            consumer(generate_sample(&sentences[i as usize], job, i)?)?;
        }
    } else {
        let next = AtomicU64::new(0);
        let (tx, rx) = mpsc::sync_channel::<(u64, Result<LabeledSample>)>(4 * workers);
        std::thread::scope(|scope| -> Result<()> {
            for _ in 0..workers {
                let tx = tx.clone();
                let next = &next;
                let sentences = &sentences;
                scope.spawn(move || loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= n {
                        break;
                    }
                    let sample = generate_sample(&sentences[i as usize], job, i);
                    // A closed channel means the consumer bailed; stop.
                    if tx.send((i, sample)).is_err() {
                        break;
                    }
                });
            }
            drop(tx);
            let mut pending: BTreeMap<u64, Result<LabeledSample>> = BTreeMap::new();
            let mut expect = 0u64;
            // rx is moved in, so an early error return closes the
            // channel and unblocks any waiting worker.
            for (i, sample) in rx {
                pending.insert(i, sample);
                while let Some(sample) = pending.remove(&expect) {
                    consumer(sample?)?;
                    expect += 1;
                }
            }
            debug_assert_eq!(expect, n);
            debug_assert!(pending.is_empty());
            Ok(())
        })?;
    }

    let elapsed_secs = start.elapsed().as_secs_f64();
    Ok(GenStats {
        n_samples: n,
        elapsed_secs,
        samples_per_sec: n as f64 / elapsed_secs.max(1e-9),
    })
}

/// Style block of a manifest entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestStyle {
    /// Font file name within the pool.
    pub font: String,
    pub size: u32,
    pub text_rgb: [u8; 3],
    pub bg_rgb: [u8; 3],
    pub padding: [u32; 4],
}

/// One manifest line; also the stream-protocol header (minus `image`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: u64,
    pub text: String,
    /// Relative image path; absent in stream headers.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub image: Option<String>,
    pub w: u32,
    pub h: u32,
    pub seed_index: u64,
    pub style: ManifestStyle,
    pub trace: AugmentTrace,
}

impl ManifestEntry {
    pub fn from_sample(sample: &LabeledSample, pool: &FontPool, image: Option<String>) -> Self {
        ManifestEntry {
            id: sample.id,
            text: sample.ground_truth.clone(),
            image,
            w: sample.image.width(),
            h: sample.image.height(),
            seed_index: sample.seed_index,
            style: ManifestStyle {
                font: pool.face(sample.style.font_id).name.clone(),
                size: sample.style.font_size,
                text_rgb: sample.style.text_color,
                bg_rgb: sample.style.background_color,
                padding: sample.style.padding,
            },
            trace: sample.trace.clone(),
        }
    }
}

/// Result of persisting a dataset to disk.
#[derive(Debug, Clone)]
pub struct PersistOutcome {
    pub manifest_path: PathBuf,
    pub stats: GenStats,
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Generates and writes one PNG per sample (zero-padded id filenames)
/// plus a `manifest.jsonl`, refusing a non-empty directory unless
/// `overwrite` is set. Run metadata (throughput, workers) goes to a
/// separate sidecar so data files stay byte-stable across runs.
pub fn persist_dataset(
    job: &GenerationJob,
    workers: usize,
    out_dir: &Path,
    overwrite: bool,
) -> Result<PersistOutcome> {
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let occupied = std::fs::read_dir(out_dir)
        .map_err(io_err(out_dir))?
        .next()
        .is_some();
    if occupied && !overwrite {
        return Err(Error::OutputNotEmpty {
            path: out_dir.to_path_buf(),
        });
    }
    let manifest_path = out_dir.join("manifest.jsonl");
    let manifest_file = std::fs::File::create(&manifest_path).map_err(io_err(&manifest_path))?;
    let mut manifest = std::io::BufWriter::new(manifest_file);

    let stats = generate_stream(job, workers, |sample| {
        let file_name = format!("{:06}.png", sample.id);
        let image_path = out_dir.join(&file_name);
        sample.image.save_png(&image_path)?;
        let entry = ManifestEntry::from_sample(&sample, job.pool, Some(file_name));
        let line = serde_json::to_string(&entry).expect("manifest serialization cannot fail");
        writeln!(manifest, "{line}").map_err(io_err(&manifest_path))?;
        Ok(())
    })?;
    manifest.flush().map_err(io_err(&manifest_path))?;

    let meta_path = out_dir.join("run_meta.json");
    let meta = serde_json::json!({
        "n_samples": stats.n_samples,
        "elapsed_secs": stats.elapsed_secs,
        "samples_per_sec": stats.samples_per_sec,
        "workers": workers,
        "unix_time": std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    });
    std::fs::write(&meta_path, serde_json::to_vec_pretty(&meta).unwrap())
        .map_err(io_err(&meta_path))?;

    Ok(PersistOutcome {
        manifest_path,
        stats,
    })
}

/// Writes one stream-protocol record:
/// `[u32 LE header len][header JSON][u32 LE payload len][PNG bytes]`.
pub fn write_stream_record<W: Write>(
    out: &mut W,
    header: &ManifestEntry,
    png: &[u8],
) -> Result<()> {
    let stream_path = Path::new("<stream>");
    let header_bytes = serde_json::to_vec(header).expect("header serialization cannot fail");
    out.write_all(&(header_bytes.len() as u32).to_le_bytes())
        .map_err(io_err(stream_path))?;
    out.write_all(&header_bytes).map_err(io_err(stream_path))?;
    out.write_all(&(png.len() as u32).to_le_bytes())
        .map_err(io_err(stream_path))?;
    out.write_all(png).map_err(io_err(stream_path))?;
    Ok(())
}

/// Reads one stream-protocol record; `None` on clean end of stream.
pub fn read_stream_record<R: Read>(input: &mut R) -> Result<Option<(ManifestEntry, Vec<u8>)>> {
    let stream_path = Path::new("<stream>");
    let mut len4 = [0u8; 4];
    match input.read(&mut len4[..1]).map_err(io_err(stream_path))? {
        0 => return Ok(None),
        _ => input
            .read_exact(&mut len4[1..])
            .map_err(io_err(stream_path))?,
    }
    let header_len = u32::from_le_bytes(len4) as usize;
    let mut header_bytes = vec![0u8; header_len];
    input
        .read_exact(&mut header_bytes)
        .map_err(io_err(stream_path))?;
    let header: ManifestEntry = serde_json::from_slice(&header_bytes).map_err(|e| Error::Format {
        path: stream_path.to_path_buf(),
        line: 0,
        reason: e.to_string(),
    })?;
    input.read_exact(&mut len4).map_err(io_err(stream_path))?;
    let payload_len = u32::from_le_bytes(len4) as usize;
    let mut png = vec![0u8; payload_len];
    input.read_exact(&mut png).map_err(io_err(stream_path))?;
    Ok(Some((header, png)))
}
