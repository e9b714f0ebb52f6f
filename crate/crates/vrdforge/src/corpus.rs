//! Text ingestion and length-balanced, leakage-free sentence pools.

use std::io::Write;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default maximum sentence length in Unicode scalars.
pub const DEFAULT_MAX_CHARS: usize = 120;
/// Default maximum sentence length in words.
pub const DEFAULT_MAX_WORDS: usize = 15;

/// A corpus text unit with cached counts and provenance.
///
/// Constructing through [`Sentence::new`] guarantees the text is trimmed,
/// free of control characters, and that the cached counts match it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub text: String,
    #[serde(rename = "cc")]
    pub char_count: usize,
    #[serde(rename = "wc")]
    pub word_count: usize,
    #[serde(rename = "src")]
    pub source_id: String,
}

impl Sentence {
    /// Sanitizes `raw` (control characters become spaces, whitespace runs
    /// collapse, ends trimmed) and builds a sentence, or `None` when
    /// nothing printable remains.
    pub fn new(raw: &str, source_id: &str) -> Option<Sentence> {
        let cleaned: String = raw
            .chars()
            .map(|c| if c.is_control() { ' ' } else { c })
            .collect();
        let text = cleaned.split_whitespace().collect::<Vec<_>>().join(" ");
        if text.is_empty() {
            return None;
        }
        Some(Sentence {
            char_count: text.chars().count(),
            word_count: text.split_whitespace().count(),
            text,
            source_id: source_id.to_string(),
        })
    }

    /// A copy keeping only the first `k` words.
    fn truncated_to_words(&self, k: usize) -> Sentence {
        let text = self
            .text
            .split_whitespace()
            .take(k)
            .collect::<Vec<_>>()
            .join(" ");
        Sentence {
            char_count: text.chars().count(),
            word_count: k,
            text,
            source_id: self.source_id.clone(),
        }
    }
}

/// Ingestion output: surviving sentences plus drop accounting.
#[derive(Debug, Clone)]
pub struct Ingested {
    pub sentences: Vec<Sentence>,
    /// Segments dropped for exceeding the character cap.
    pub dropped_too_long: usize,
}

/// Ingests raw bytes, enforcing UTF-8 and the length cap.
///
/// Segmentation splits on newlines, then on sentence-final punctuation
/// (`.`, `!`, `?`) followed by whitespace. Segments longer than
/// `max_chars` are dropped and counted.
pub fn ingest_bytes(bytes: &[u8], max_chars: usize, source_id: &str) -> Result<Ingested> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Decode {
        offset: e.valid_up_to(),
    })?;
    ingest_text(text, max_chars, source_id)
}

/// Ingests already-decoded text. See [`ingest_bytes`].
pub fn ingest_text(text: &str, max_chars: usize, source_id: &str) -> Result<Ingested> {
    let mut sentences = Vec::new();
    let mut dropped_too_long = 0usize;
    let mut seq = 0usize;
    for line in text.lines() {
        for segment in split_sentences(line) {
            let Some(sentence) = Sentence::new(segment, &format!("{source_id}#{seq}")) else {
                continue;
            };
            seq += 1;
            if sentence.char_count > max_chars {
                dropped_too_long += 1;
                continue;
            }
            sentences.push(sentence);
        }
    }
    if sentences.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok(Ingested {
        sentences,
        dropped_too_long,
    })
}

/// Ingests a UTF-8 text file, using the file name as provenance.
pub fn ingest_file(path: &Path, max_chars: usize) -> Result<Ingested> {
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let source_id = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    ingest_bytes(&bytes, max_chars, &source_id)
}

/// Splits one line at `.`/`!`/`?` followed by whitespace, keeping the
/// punctuation with the preceding segment.
fn split_sentences(line: &str) -> Vec<&str> {
    let mut segments = Vec::new();
    let mut start = 0usize;
    let mut iter = line.char_indices().peekable();
    while let Some((i, c)) = iter.next() {
        if matches!(c, '.' | '!' | '?') {
            if let Some(&(_, next)) = iter.peek() {
                if next.is_whitespace() {
                    segments.push(&line[start..i + c.len_utf8()]);
                    start = i + c.len_utf8();
                }
            }
        }
    }
    if start < line.len() {
        segments.push(&line[start..]);
    }
    segments
}

/// Which sentence property the length distribution buckets over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BucketKey {
    WordCount,
    CharBucket,
}

/// One length bucket: the inclusive range `lo..=hi` and its target weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LengthBucketSpec {
    pub lo: usize,
    pub hi: usize,
    pub weight: f64,
}

/// A validated target distribution over sentence lengths.
///
/// Buckets are disjoint, contiguous over the configured span, and their
/// weights are positive and sum to 1 (within 1e-9).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDistribution", into = "RawDistribution")]
pub struct LengthDistribution {
    key: BucketKey,
    buckets: Vec<LengthBucketSpec>,
}

#[derive(Clone, Serialize, Deserialize)]
struct RawDistribution {
    key: BucketKey,
    buckets: Vec<LengthBucketSpec>,
}

impl TryFrom<RawDistribution> for LengthDistribution {
    type Error = Error;
    fn try_from(raw: RawDistribution) -> Result<LengthDistribution> {
        LengthDistribution::new(raw.key, raw.buckets)
    }
}

impl From<LengthDistribution> for RawDistribution {
    fn from(d: LengthDistribution) -> RawDistribution {
        RawDistribution {
            key: d.key,
            buckets: d.buckets,
        }
    }
}

impl LengthDistribution {
    pub fn new(key: BucketKey, buckets: Vec<LengthBucketSpec>) -> Result<LengthDistribution> {
        if buckets.is_empty() {
            return Err(Error::Config("length distribution has no buckets".into()));
        }
        let mut weight_sum = 0.0;
        for (i, b) in buckets.iter().enumerate() {
            if b.lo > b.hi {
                return Err(Error::Config(format!(
                    "bucket {}..={} is empty",
                    b.lo, b.hi
                )));
            }
            if !(b.weight > 0.0) {
                return Err(Error::Config(format!(
                    "bucket {}..={} has non-positive weight {}",
                    b.lo, b.hi, b.weight
                )));
            }
            if i > 0 && b.lo != buckets[i - 1].hi + 1 {
                return Err(Error::Config(format!(
                    "buckets must be disjoint and contiguous; {}..={} does not follow {}..={}",
                    b.lo,
                    b.hi,
                    buckets[i - 1].lo,
                    buckets[i - 1].hi
                )));
            }
            weight_sum += b.weight;
        }
        if (weight_sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "bucket weights sum to {weight_sum}, expected 1"
            )));
        }
        Ok(LengthDistribution { key, buckets })
    }

    /// One equal-weight bucket per value in `lo..=hi`.
    pub fn uniform(key: BucketKey, lo: usize, hi: usize) -> LengthDistribution {
        assert!(lo <= hi);
        let n = hi - lo + 1;
        let buckets = (lo..=hi)
            .map(|v| LengthBucketSpec {
                lo: v,
                hi: v,
                weight: 1.0 / n as f64,
            })
            .collect();
        LengthDistribution::new(key, buckets).expect("uniform distribution is always valid")
    }

    /// A single bucket covering `lo..=hi` with full weight.
    pub fn single(key: BucketKey, lo: usize, hi: usize) -> LengthDistribution {
        LengthDistribution::new(
            key,
            vec![LengthBucketSpec {
                lo,
                hi,
                weight: 1.0,
            }],
        )
        .expect("single bucket is always valid")
    }

    pub fn key(&self) -> BucketKey {
        self.key
    }

    pub fn buckets(&self) -> &[LengthBucketSpec] {
        &self.buckets
    }

    fn key_value(&self, s: &Sentence) -> usize {
        match self.key {
            BucketKey::WordCount => s.word_count,
            BucketKey::CharBucket => s.char_count,
        }
    }
}

/// Draws `n` sentences with per-bucket counts proportional to the target
/// weights, sampling with replacement within each bucket.
pub fn sample_uniform<R: Rng>(
    pool: &[Sentence],
    dist: &LengthDistribution,
    n: usize,
    rng: &mut R,
) -> Result<Vec<Sentence>> {
    if n == 0 {
        return Err(Error::Config("sample count must be positive".into()));
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); dist.buckets.len()];
    for (i, s) in pool.iter().enumerate() {
        let v = dist.key_value(s);
        if let Some(b) = dist
            .buckets
            .iter()
            .position(|b| (b.lo..=b.hi).contains(&v))
        {
            members[b].push(i);
        }
    }
    for (b, m) in dist.buckets.iter().zip(&members) {
        if m.is_empty() {
            return Err(Error::EmptyBucket { lo: b.lo, hi: b.hi });
        }
    }
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let r: f64 = rng.random();
        let mut acc = 0.0;
        let mut chosen = dist.buckets.len() - 1;
        for (i, b) in dist.buckets.iter().enumerate() {
            acc += b.weight;
            if r < acc {
                chosen = i;
                break;
            }
        }
        let m = &members[chosen];
        out.push(pool[m[rng.random_range(0..m.len())]].clone());
    }
    Ok(out)
}

/// Draws `n` sentences of exactly `k` words.
///
/// With `allow_truncation`, longer sentences are truncated to their
/// first `k` words and join the candidate set.
pub fn sample_fixed_word_count<R: Rng>(
    pool: &[Sentence],
    k: usize,
    n: usize,
    rng: &mut R,
    allow_truncation: bool,
) -> Result<Vec<Sentence>> {
    if k == 0 || n == 0 {
        return Err(Error::Config("word count and sample count must be positive".into()));
    }
    let mut candidates: Vec<Sentence> = pool
        .iter()
        .filter(|s| s.word_count == k)
        .cloned()
        .collect();
    if allow_truncation {
        candidates.extend(
            pool.iter()
                .filter(|s| s.word_count > k)
                .map(|s| s.truncated_to_words(k)),
        );
    }
    if candidates.is_empty() {
        return Err(Error::NoFixedWordCandidate { k });
    }
    Ok((0..n)
        .map(|_| candidates[rng.random_range(0..candidates.len())].clone())
        .collect())
}

/// Normalization used for the train/test leakage guard: lowercased text
/// with whitespace runs collapsed to single spaces.
pub fn normalize_for_leakage(text: &str) -> String {
    text.to_lowercase()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

/// Splits a pool by unique normalized text so no text appears on both
/// sides, with `|test| ≈ test_fraction × unique` (within ±1).
pub fn split_disjoint<R: Rng>(
    pool: &[Sentence],
    test_fraction: f64,
    rng: &mut R,
) -> Result<(Vec<Sentence>, Vec<Sentence>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Config(format!(
            "test_fraction must be in (0,1), got {test_fraction}"
        )));
    }
    if pool.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut keys: Vec<String> = Vec::new();
    {
        let mut seen = std::collections::HashSet::new();
        for s in pool {
            let k = normalize_for_leakage(&s.text);
            if seen.insert(k.clone()) {
                keys.push(k);
            }
        }
    }
    // Fisher-Yates over the unique keys.
    for i in (1..keys.len()).rev() {
        keys.swap(i, rng.random_range(0..=i));
    }
    let n_test = ((keys.len() as f64) * test_fraction).round() as usize;
    let test_keys: std::collections::HashSet<&String> = keys[..n_test].iter().collect();
    let mut train = Vec::new();
    let mut test = Vec::new();
    for s in pool {
        if test_keys.contains(&normalize_for_leakage(&s.text)) {
            test.push(s.clone());
        } else {
            train.push(s.clone());
        }
    }
    Ok((train, test))
}

/// Writes a corpus as JSON Lines (`{"text","wc","cc","src"}` per line).
pub fn write_corpus(path: &Path, sentences: &[Sentence]) -> Result<()> {
    let mut file = std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    for s in sentences {
        let line = serde_json::to_string(s).expect("sentence serialization cannot fail");
        writeln!(file, "{line}").map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
    }
    Ok(())
}

/// Reads a JSON Lines corpus written by [`write_corpus`].
pub fn read_corpus(path: &Path) -> Result<Vec<Sentence>> {
    let data = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = Vec::new();
    for (i, line) in data.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let s: Sentence = serde_json::from_str(line).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            line: i + 1,
            reason: e.to_string(),
        })?;
        out.push(s);
    }
    if out.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn rng() -> rand_chacha::ChaCha8Rng {
        rand_chacha::ChaCha8Rng::seed_from_u64(7)
    }

    fn sentence(text: &str) -> Sentence {
        Sentence::new(text, "test").unwrap()
    }

    #[test]
    fn ingest_single_line() {
        let got = ingest_text("Hola mundo.\n", 120, "t").unwrap();
        assert_eq!(got.sentences.len(), 1);
        let s = &got.sentences[0];
        assert_eq!(s.text, "Hola mundo.");
        assert_eq!(s.word_count, 2);
        assert_eq!(s.char_count, 11);
        assert_eq!(got.dropped_too_long, 0);
    }

    #[test]
    fn ingest_drops_over_cap() {
        let long = "x".repeat(130);
        let input = format!("{long}\ncorta\n");
        let got = ingest_text(&input, 120, "t").unwrap();
        assert_eq!(got.dropped_too_long, 1);
        assert_eq!(got.sentences.len(), 1);
        assert_eq!(got.sentences[0].text, "corta");
    }

    #[test]
    fn ingest_splits_on_sentence_punctuation() {
        let got = ingest_text("A. B.", 120, "t").unwrap();
        let texts: Vec<&str> = got.sentences.iter().map(|s| s.text.as_str()).collect();
        assert_eq!(texts, ["A.", "B."]);
    }

    #[test]
    fn ingest_splits_on_bang_and_question() {
        let got = ingest_text("¡Hola! ¿Qué tal? Bien.", 120, "t").unwrap();
        let texts: Vec<&str> = got.sentences.iter().map(|s| s.text.as_str()).collect();
        assert_eq!(texts, ["¡Hola!", "¿Qué tal?", "Bien."]);
    }

    #[test]
    fn ingest_rejects_invalid_utf8_with_offset() {
        let mut bytes = b"hola ".to_vec();
        bytes.push(0xFF);
        match ingest_bytes(&bytes, 120, "t") {
            Err(Error::Decode { offset }) => assert_eq!(offset, 5),
            other => panic!("expected decode error, got {other:?}"),
        }
    }

    #[test]
    fn ingest_empty_is_an_error() {
        assert!(matches!(ingest_text("\n \n", 120, "t"), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn sanitization_removes_control_chars_and_trims() {
        let s = Sentence::new("  ho\tla \u{0007} mundo  ", "t").unwrap();
        assert_eq!(s.text, "ho la mundo");
        assert!(!s.text.chars().any(|c| c.is_control()));
    }

    #[test]
    fn uniform_sampling_is_balanced() {
        // One pool sentence per word count 1..=10.
        let pool: Vec<Sentence> = (1..=10)
            .map(|k| sentence(&vec!["palabra"; k].join(" ")))
            .collect();
        let dist = LengthDistribution::uniform(BucketKey::WordCount, 1, 10);
        let out = sample_uniform(&pool, &dist, 10_000, &mut rng()).unwrap();
        assert_eq!(out.len(), 10_000);
        let mut counts = [0usize; 11];
        for s in &out {
            counts[s.word_count] += 1;
        }
        for k in 1..=10 {
            // Binomial 5 sigma at p=0.1, n=10_000.
            assert!(
                (850..=1150).contains(&counts[k]),
                "bucket {k} count {} outside [850, 1150]",
                counts[k]
            );
        }
    }

    #[test]
    fn single_bucket_degenerate() {
        let pool = vec![sentence("uno"), sentence("dos palabras aquí")];
        let dist = LengthDistribution::single(BucketKey::WordCount, 1, 100);
        let out = sample_uniform(&pool, &dist, 3, &mut rng()).unwrap();
        assert_eq!(out.len(), 3);
    }

    #[test]
    fn zero_samples_is_an_error() {
        let pool = vec![sentence("uno")];
        let dist = LengthDistribution::single(BucketKey::WordCount, 1, 10);
        assert!(sample_uniform(&pool, &dist, 0, &mut rng()).is_err());
    }

    #[test]
    fn empty_bucket_names_its_range() {
        let pool = vec![sentence("uno")];
        let dist = LengthDistribution::uniform(BucketKey::WordCount, 1, 2);
        match sample_uniform(&pool, &dist, 5, &mut rng()) {
            Err(Error::EmptyBucket { lo: 2, hi: 2 }) => {}
            other => panic!("expected empty bucket 2..=2, got {other:?}"),
        }
    }

    #[test]
    fn distribution_invariants_enforced() {
        // Non-contiguous ranges.
        assert!(LengthDistribution::new(
            BucketKey::WordCount,
            vec![
                LengthBucketSpec { lo: 1, hi: 2, weight: 0.5 },
                LengthBucketSpec { lo: 4, hi: 5, weight: 0.5 },
            ],
        )
        .is_err());
        // Weights not summing to 1.
        assert!(LengthDistribution::new(
            BucketKey::WordCount,
            vec![LengthBucketSpec { lo: 1, hi: 2, weight: 0.7 }],
        )
        .is_err());
    }

    #[test]
    fn fixed_word_count_exact_and_truncated() {
        let pool = vec![
            sentence("solo"),
            sentence("dos palabras"),
            sentence("tres palabras aquí"),
        ];
        let out = sample_fixed_word_count(&pool, 1, 50, &mut rng(), true).unwrap();
        assert!(out.iter().all(|s| s.word_count == 1));
        // Truncation produced single words from longer sentences too.
        let texts: std::collections::HashSet<&str> =
            out.iter().map(|s| s.text.as_str()).collect();
        assert!(texts.contains("solo"));
        assert!(texts.contains("dos") || texts.contains("tres"));

        let out = sample_fixed_word_count(&pool, 2, 20, &mut rng(), true).unwrap();
        assert!(out.iter().all(|s| s.word_count == 2));
    }

    #[test]
    fn fixed_word_count_single_candidate() {
        let pool = vec![sentence("a b c d e")];
        let out = sample_fixed_word_count(&pool, 5, 2, &mut rng(), false).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].text, "a b c d e");
        assert_eq!(out[1].text, "a b c d e");
    }

    #[test]
    fn fixed_word_count_no_candidate_errors() {
        let pool = vec![sentence("una palabra aquí")];
        assert!(matches!(
            sample_fixed_word_count(&pool, 5, 1, &mut rng(), false),
            Err(Error::NoFixedWordCandidate { k: 5 })
        ));
    }

    #[test]
    fn split_is_disjoint_and_sized() {
        let pool: Vec<Sentence> = (0..100)
            .map(|i| sentence(&format!("frase número {i}")))
            .collect();
        let (train, test) = split_disjoint(&pool, 0.1, &mut rng()).unwrap();
        assert_eq!(train.len(), 90);
        assert_eq!(test.len(), 10);
        let train_norm: std::collections::HashSet<String> =
            train.iter().map(|s| normalize_for_leakage(&s.text)).collect();
        assert!(test
            .iter()
            .all(|s| !train_norm.contains(&normalize_for_leakage(&s.text))));
    }

    #[test]
    fn split_keeps_duplicates_together() {
        let mut pool = vec![sentence("Hola"), Sentence::new("hola ", "t").unwrap()];
        pool.extend((0..20).map(|i| sentence(&format!("otra {i}"))));
        for seed in 0..20 {
            let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let (train, test) = split_disjoint(&pool, 0.5, &mut r).unwrap();
            let in_train = train.iter().any(|s| s.text.eq_ignore_ascii_case("hola"));
            let in_test = test.iter().any(|s| s.text.eq_ignore_ascii_case("hola"));
            assert!(in_train != in_test, "duplicates split across sides");
        }
    }

    #[test]
    fn split_rejects_bad_fraction() {
        let pool = vec![sentence("uno")];
        assert!(split_disjoint(&pool, 1.0, &mut rng()).is_err());
        assert!(split_disjoint(&pool, 0.0, &mut rng()).is_err());
    }

    #[test]
    fn corpus_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.jsonl");
        let pool = vec![sentence("Hola mundo."), sentence("ñandú va")];
        write_corpus(&path, &pool).unwrap();
        let line = std::fs::read_to_string(&path).unwrap();
        assert!(line.lines().next().unwrap().contains("\"wc\":2"));
        assert!(line.lines().next().unwrap().contains("\"cc\":11"));
        let back = read_corpus(&path).unwrap();
        assert_eq!(back, pool);
    }
}
