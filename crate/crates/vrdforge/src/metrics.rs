//! Edit-distance alignment counts and CER/WER scoring.
//!
//! Error rates are `(S + D + I) / N` where `N` is the length of the
//! ground truth (characters for CER, whitespace-delimited words for WER).
//! The alignment convention fixes `D` as truth tokens the prediction
//! misses and `I` as prediction tokens absent from the truth, so the
//! identity `N = S + D + C` holds for every result.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Alignment counts from a minimal edit script between a prediction and
/// its ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditCounts {
    /// Substitutions: aligned pairs that do not match.
    pub substitutions: usize,
    /// Deletions: truth tokens with no prediction counterpart.
    pub deletions: usize,
    /// Insertions: prediction tokens with no truth counterpart.
    pub insertions: usize,
    /// Correct: aligned pairs that match.
    pub correct: usize,
    /// Ground-truth length.
    pub truth_len: usize,
}

impl EditCounts {
    /// Total edit distance `S + D + I`.
    pub fn distance(&self) -> usize {
        self.substitutions + self.deletions + self.insertions
    }

    /// Error rate `(S + D + I) / N`. May exceed 1 via insertions.
    pub fn rate(&self) -> f64 {
        self.distance() as f64 / self.truth_len as f64
    }
}

/// Computes alignment counts between token sequences with unit costs.
///
/// The backtrace resolves ties by preferring match/substitution over
/// deletion over insertion, so the counts are deterministic even when
/// several minimal alignments exist; the distance itself is unaffected.
///
/// Errors if `truth` is empty, since the rate would be undefined.
pub fn edit_counts<T: PartialEq>(prediction: &[T], truth: &[T]) -> Result<EditCounts> {
    if truth.is_empty() {
        return Err(Error::EmptyTruth);
    }
    let n = truth.len();
    let m = prediction.len();

    // dp[i][j]: minimal edits aligning truth[..i] with prediction[..j].
    let mut dp = vec![vec![0usize; m + 1]; n + 1];
    for (i, row) in dp.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=m {
        dp[0][j] = j;
    }
    for i in 1..=n {
        for j in 1..=m {
            let cost = usize::from(truth[i - 1] != prediction[j - 1]);
            dp[i][j] = (dp[i - 1][j - 1] + cost)
                .min(dp[i - 1][j] + 1)
                .min(dp[i][j - 1] + 1);
        }
    }

    let (mut i, mut j) = (n, m);
    let mut counts = EditCounts {
        substitutions: 0,
        deletions: 0,
        insertions: 0,
        correct: 0,
        truth_len: n,
    };
    while i > 0 || j > 0 {
        if i > 0 && j > 0 {
            let cost = usize::from(truth[i - 1] != prediction[j - 1]);
            if dp[i][j] == dp[i - 1][j - 1] + cost {
                if cost == 0 {
                    counts.correct += 1;
                } else {
                    counts.substitutions += 1;
                }
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && dp[i][j] == dp[i - 1][j] + 1 {
            counts.deletions += 1;
            i -= 1;
        } else {
            counts.insertions += 1;
            j -= 1;
        }
    }
    debug_assert_eq!(counts.distance(), dp[n][m]);
    debug_assert_eq!(
        counts.truth_len,
        counts.substitutions + counts.deletions + counts.correct
    );
    Ok(counts)
}

/// Character error rate over Unicode scalar sequences.
pub fn cer(prediction: &str, truth: &str) -> Result<f64> {
    Ok(cer_counts(prediction, truth)?.rate())
}

/// Alignment counts at character granularity.
pub fn cer_counts(prediction: &str, truth: &str) -> Result<EditCounts> {
    let p: Vec<char> = prediction.chars().collect();
    let t: Vec<char> = truth.chars().collect();
    edit_counts(&p, &t)
}

/// Text normalization applied before word tokenization for WER.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Normalization {
    /// Lowercase both strings before tokenizing.
    #[serde(default)]
    pub casefold: bool,
    /// Drop Unicode punctuation characters before tokenizing.
    #[serde(default)]
    pub strip_punctuation: bool,
}

impl Normalization {
    fn apply(&self, text: &str) -> String {
        let mut s = if self.casefold {
            text.to_lowercase()
        } else {
            text.to_string()
        };
        if self.strip_punctuation {
            s.retain(|c| !is_punctuation(c));
        }
        s
    }
}

fn is_punctuation(c: char) -> bool {
    c.is_ascii_punctuation() || matches!(c, '¿' | '¡' | '«' | '»' | '…' | '—' | '–' | '·')
}

/// Word error rate over whitespace-delimited tokens, raw by default.
pub fn wer(prediction: &str, truth: &str) -> Result<f64> {
    wer_normalized(prediction, truth, Normalization::default())
}

/// Word error rate with explicit normalization flags.
pub fn wer_normalized(prediction: &str, truth: &str, norm: Normalization) -> Result<f64> {
    Ok(wer_counts(prediction, truth, norm)?.rate())
}

/// Alignment counts at word granularity.
pub fn wer_counts(prediction: &str, truth: &str, norm: Normalization) -> Result<EditCounts> {
    let p_text = norm.apply(prediction);
    let t_text = norm.apply(truth);
    let p: Vec<&str> = p_text.split_whitespace().collect();
    let t: Vec<&str> = t_text.split_whitespace().collect();
    edit_counts(&p, &t)
}

/// Per-sample score holding both character- and word-level counts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleScore {
    pub id: String,
    pub cer: f64,
    pub wer: f64,
    pub char_counts: EditCounts,
    pub word_counts: EditCounts,
}

/// Scores one (prediction, truth) pair at both granularities.
pub fn score_sample(
    id: &str,
    prediction: &str,
    truth: &str,
    norm: Normalization,
) -> Result<SampleScore> {
    let char_counts = cer_counts(prediction, truth)?;
    let word_counts = wer_counts(prediction, truth, norm)?;
    Ok(SampleScore {
        id: id.to_string(),
        cer: char_counts.rate(),
        wer: word_counts.rate(),
        char_counts,
        word_counts,
    })
}

/// Which aggregate is the headline figure of a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggregateMode {
    /// Arithmetic mean of per-sample rates.
    Mean,
    /// Pooled `Σ edits / Σ N` over the whole set.
    Weighted,
}

/// One row of the length-bucketed error curve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LengthBucket {
    /// Inclusive lower char-length bound of the bucket.
    pub lo: usize,
    /// Exclusive upper char-length bound of the bucket.
    pub hi: usize,
    pub count: usize,
    pub mean_cer: f64,
    pub mean_wer: f64,
    pub std_cer: f64,
    pub std_wer: f64,
    /// True when `count` is below the configured minimum; such buckets
    /// are excluded from the headline curve but still reported.
    pub under_sampled: bool,
}

/// Aggregated CER/WER statistics over a scored sample set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub mode: AggregateMode,
    pub n_samples: usize,
    pub mean_cer: f64,
    pub mean_wer: f64,
    pub weighted_cer: f64,
    pub weighted_wer: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub buckets: Vec<LengthBucket>,
    /// Truth ids that had no prediction to score.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unmatched_truths: Vec<String>,
}

impl EvalReport {
    /// The CER selected by `mode`.
    pub fn headline_cer(&self) -> f64 {
        match self.mode {
            AggregateMode::Mean => self.mean_cer,
            AggregateMode::Weighted => self.weighted_cer,
        }
    }

    /// The WER selected by `mode`.
    pub fn headline_wer(&self) -> f64 {
        match self.mode {
            AggregateMode::Mean => self.mean_wer,
            AggregateMode::Weighted => self.weighted_wer,
        }
    }

    /// Plain-text summary table.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("samples        {}\n", self.n_samples));
        out.push_str(&format!("mean CER       {:.6}\n", self.mean_cer));
        out.push_str(&format!("mean WER       {:.6}\n", self.mean_wer));
        out.push_str(&format!("weighted CER   {:.6}\n", self.weighted_cer));
        out.push_str(&format!("weighted WER   {:.6}\n", self.weighted_wer));
        out.push_str(&format!(
            "headline       {} (CER {:.6}, WER {:.6})\n",
            match self.mode {
                AggregateMode::Mean => "mean",
                AggregateMode::Weighted => "weighted",
            },
            self.headline_cer(),
            self.headline_wer()
        ));
        if !self.buckets.is_empty() {
            out.push_str("length_bucket  count  mean_cer  mean_wer\n");
            for b in &self.buckets {
                out.push_str(&format!(
                    "[{:>3},{:>3})     {:>6}  {:.6}  {:.6}{}\n",
                    b.lo,
                    b.hi,
                    b.count,
                    b.mean_cer,
                    b.mean_wer,
                    if b.under_sampled { "  (under-sampled)" } else { "" }
                ));
            }
        }
        if !self.unmatched_truths.is_empty() {
            out.push_str(&format!(
                "unmatched truth ids: {}\n",
                self.unmatched_truths.len()
            ));
        }
        out
    }
}

/// Aggregates per-sample scores into a report.
///
/// Mean aggregation averages the per-sample rates; weighted aggregation
/// pools edits over the set as `Σ(S+D+I) / ΣN`. Both are always computed
/// and `mode` only selects the headline figure.
pub fn aggregate(scores: &[SampleScore], mode: AggregateMode) -> Result<EvalReport> {
    if scores.is_empty() {
        return Err(Error::Config("cannot aggregate zero samples".into()));
    }
    let n = scores.len() as f64;
    let mean_cer = scores.iter().map(|s| s.cer).sum::<f64>() / n;
    let mean_wer = scores.iter().map(|s| s.wer).sum::<f64>() / n;
    let char_edits: usize = scores.iter().map(|s| s.char_counts.distance()).sum();
    let char_n: usize = scores.iter().map(|s| s.char_counts.truth_len).sum();
    let word_edits: usize = scores.iter().map(|s| s.word_counts.distance()).sum();
    let word_n: usize = scores.iter().map(|s| s.word_counts.truth_len).sum();
    Ok(EvalReport {
        mode,
        n_samples: scores.len(),
        mean_cer,
        mean_wer,
        weighted_cer: char_edits as f64 / char_n as f64,
        weighted_wer: word_edits as f64 / word_n as f64,
        buckets: Vec::new(),
        unmatched_truths: Vec::new(),
    })
}

/// Groups scores into `[k*w, (k+1)*w)` buckets of ground-truth character
/// length and reports per-bucket mean and standard deviation.
///
/// Buckets with fewer than `min_count` samples are flagged under-sampled.
pub fn bucket_by_length(
    scores: &[SampleScore],
    bucket_width: usize,
    min_count: usize,
) -> Vec<LengthBucket> {
    assert!(bucket_width >= 1, "bucket width must be positive");
    let mut grouped: std::collections::BTreeMap<usize, Vec<&SampleScore>> =
        std::collections::BTreeMap::new();
    for s in scores {
        let k = s.char_counts.truth_len / bucket_width;
        grouped.entry(k).or_default().push(s);
    }
    grouped
        .into_iter()
        .map(|(k, group)| {
            let count = group.len();
            let mean_cer = group.iter().map(|s| s.cer).sum::<f64>() / count as f64;
            let mean_wer = group.iter().map(|s| s.wer).sum::<f64>() / count as f64;
            let var = |mean: f64, get: &dyn Fn(&SampleScore) -> f64| {
                group
                    .iter()
                    .map(|s| {
                        let d = get(s) - mean;
                        d * d
                    })
                    .sum::<f64>()
                    / count as f64
            };
            LengthBucket {
                lo: k * bucket_width,
                hi: (k + 1) * bucket_width,
                count,
                mean_cer,
                mean_wer,
                std_cer: var(mean_cer, &|s| s.cer).sqrt(),
                std_wer: var(mean_wer, &|s| s.wer).sqrt(),
                under_sampled: count < min_count,
            }
        })
        .collect()
}

/// Default minimum bucket population for the headline curve.
pub const DEFAULT_BUCKET_MIN_COUNT: usize = 100;

/// Renders the bucket curve as CSV: `length_bucket,count,mean_cer,mean_wer`.
pub fn bucket_curve_csv(buckets: &[LengthBucket]) -> String {
    let mut out = String::from("length_bucket,count,mean_cer,mean_wer,std_cer,std_wer,under_sampled\n");
    for b in buckets {
        out.push_str(&format!(
            "{}-{},{},{},{},{},{},{}\n",
            b.lo, b.hi, b.count, b.mean_cer, b.mean_wer, b.std_cer, b.std_wer, b.under_sampled
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Plain Levenshtein distance, kept independent of `edit_counts` so
    /// it can serve as an oracle (no backtrace, single rolling row).
    fn levenshtein_oracle<T: PartialEq>(a: &[T], b: &[T]) -> usize {
        let mut row: Vec<usize> = (0..=b.len()).collect();
        for i in 1..=a.len() {
            let mut prev_diag = row[0];
            row[0] = i;
            for j in 1..=b.len() {
                let prev = row[j];
                let cost = usize::from(a[i - 1] != b[j - 1]);
                row[j] = (prev_diag + cost).min(prev + 1).min(row[j - 1] + 1);
                prev_diag = prev;
            }
        }
        row[b.len()]
    }

    #[test]
    fn identity_counts() {
        let c = cer_counts("abc", "abc").unwrap();
        assert_eq!(
            c,
            EditCounts {
                substitutions: 0,
                deletions: 0,
                insertions: 0,
                correct: 3,
                truth_len: 3
            }
        );
    }

    #[test]
    fn empty_prediction_is_all_deletions() {
        let c = cer_counts("", "abc").unwrap();
        assert_eq!(c.deletions, 3);
        assert_eq!(c.correct, 0);
        assert_eq!(c.truth_len, 3);
        assert_eq!(c.distance(), 3);
    }

    #[test]
    fn single_substitution() {
        // Oracle: distance("abd", "abc") = 1, reachable only via one
        // substitution, so S=1, C=2.
        let c = cer_counts("abd", "abc").unwrap();
        assert_eq!(c.substitutions, 1);
        assert_eq!(c.correct, 2);
        assert_eq!(c.truth_len, 3);
        assert!((c.rate() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn empty_truth_is_an_error() {
        assert!(matches!(cer("abc", ""), Err(Error::EmptyTruth)));
        assert!(matches!(wer("abc", "   "), Err(Error::EmptyTruth)));
    }

    #[test]
    fn cer_can_exceed_one() {
        // "abxyz" vs "ab": 3 insertions over N=2.
        let c = cer_counts("abxyz", "ab").unwrap();
        assert_eq!(c.insertions, 3);
        assert_eq!(c.truth_len, 2);
        assert_eq!(cer("abxyz", "ab").unwrap(), 1.5);
    }

    #[test]
    fn wer_examples() {
        assert_eq!(wer("hola mundo", "hola mundo").unwrap(), 0.0);
        // One truth word missing: D=1, N=3.
        let c = wer_counts("el gato", "el gato negro", Normalization::default()).unwrap();
        assert_eq!(c.deletions, 1);
        assert!((c.rate() - 1.0 / 3.0).abs() < 1e-15);
        // One word substituted: S=1, N=2.
        let c = wer_counts("hola mundos", "hola mundo", Normalization::default()).unwrap();
        assert_eq!(c.substitutions, 1);
        assert_eq!(c.rate(), 0.5);
    }

    #[test]
    fn normalization_flags() {
        assert!(wer("Hola Mundo", "hola mundo").unwrap() > 0.0);
        let norm = Normalization {
            casefold: true,
            strip_punctuation: false,
        };
        assert_eq!(wer_normalized("Hola Mundo", "hola mundo", norm).unwrap(), 0.0);
        let norm = Normalization {
            casefold: true,
            strip_punctuation: true,
        };
        assert_eq!(
            wer_normalized("¿hola, mundo?", "Hola mundo", norm).unwrap(),
            0.0
        );
    }

    #[test]
    fn unicode_scalars_are_the_cer_unit() {
        // "ñ" is one scalar; byte-level counting would see two.
        let c = cer_counts("nandu", "ñandú").unwrap();
        assert_eq!(c.truth_len, 5);
        assert_eq!(c.substitutions, 2);
        assert_eq!(c.correct, 3);
    }

    #[test]
    fn oracle_equivalence_randomized() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xED17);
        for _ in 0..500 {
            let alphabet = rng.random_range(4..=30u32);
            let tn = rng.random_range(1..=40usize);
            let pm = rng.random_range(0..=40usize);
            let truth: Vec<u32> = (0..tn).map(|_| rng.random_range(0..alphabet)).collect();
            let pred: Vec<u32> = (0..pm).map(|_| rng.random_range(0..alphabet)).collect();
            let counts = edit_counts(&pred, &truth).unwrap();
            assert_eq!(counts.distance(), levenshtein_oracle(&pred, &truth));
            assert_eq!(
                counts.truth_len,
                counts.substitutions + counts.deletions + counts.correct
            );
            // |len(pred) - len(truth)| <= S+D+I <= max(len(pred), len(truth))
            let lo = tn.abs_diff(pm);
            let hi = tn.max(pm);
            assert!(counts.distance() >= lo && counts.distance() <= hi);
        }
    }

    #[test]
    fn aggregate_mean_vs_weighted() {
        let scores = vec![
            score_sample("a", "abcdefghiX", "abcdefghij", Normalization::default()).unwrap(),
            score_sample(
                "b",
                &("x".to_string() + &"a".repeat(99)),
                &"a".repeat(100),
                Normalization::default(),
            )
            .unwrap(),
        ];
        let rep = aggregate(&scores, AggregateMode::Mean).unwrap();
        assert!((rep.mean_cer - 0.055).abs() < 1e-12);
        assert!((rep.weighted_cer - 2.0 / 110.0).abs() < 1e-12);
        assert_eq!(rep.headline_cer(), rep.mean_cer);
        let rep = aggregate(&scores, AggregateMode::Weighted).unwrap();
        assert_eq!(rep.headline_cer(), rep.weighted_cer);
    }

    #[test]
    fn aggregate_degenerate_cases() {
        let s = score_sample("a", "abc", "abc", Normalization::default()).unwrap();
        let rep = aggregate(std::slice::from_ref(&s), AggregateMode::Mean).unwrap();
        assert_eq!(rep.mean_cer, 0.0);
        assert_eq!(rep.mean_cer, rep.weighted_cer);
        assert!(aggregate(&[], AggregateMode::Mean).is_err());
    }

    #[test]
    fn aggregate_mean_equals_weighted_for_equal_lengths() {
        let scores: Vec<SampleScore> = (0..5)
            .map(|i| {
                let truth = "abcdefgh";
                let pred = if i % 2 == 0 { "abcdefgX" } else { "abcdefgh" };
                score_sample(&i.to_string(), pred, truth, Normalization::default()).unwrap()
            })
            .collect();
        let rep = aggregate(&scores, AggregateMode::Mean).unwrap();
        assert!((rep.mean_cer - rep.weighted_cer).abs() < 1e-15);
    }

    #[test]
    fn buckets_group_and_flag() {
        let mk = |len: usize| {
            score_sample("x", &"a".repeat(len), &"a".repeat(len), Normalization::default())
                .unwrap()
        };
        let scores = vec![mk(5), mk(15), mk(15)];
        let buckets = bucket_by_length(&scores, 10, 2);
        assert_eq!(buckets.len(), 2);
        assert_eq!((buckets[0].lo, buckets[0].hi, buckets[0].count), (0, 10, 1));
        assert!(buckets[0].under_sampled);
        assert_eq!((buckets[1].lo, buckets[1].hi, buckets[1].count), (10, 20, 2));
        assert!(!buckets[1].under_sampled);
    }

    #[test]
    fn bucket_means_match_injected_error() {
        // k substitutions injected into truths of one length per bucket:
        // the bucket mean CER must equal k/length exactly.
        let mut scores = Vec::new();
        for &len in &[15usize, 25, 35] {
            for i in 0..4 {
                let truth = "a".repeat(len);
                let mut pred: Vec<char> = truth.chars().collect();
                pred[i] = 'X';
                pred[i + 5] = 'X';
                let pred: String = pred.into_iter().collect();
                scores.push(
                    score_sample(&format!("{len}-{i}"), &pred, &truth, Normalization::default())
                        .unwrap(),
                );
            }
        }
        let buckets = bucket_by_length(&scores, 10, 1);
        assert_eq!(buckets.len(), 3);
        for b in &buckets {
            let len = b.lo + 5;
            assert_eq!(b.mean_cer, 2.0 / len as f64);
            assert_eq!(b.std_cer, 0.0);
        }
    }

    #[test]
    fn csv_export_shape() {
        let s = score_sample("a", "ab", "ab", Normalization::default()).unwrap();
        let buckets = bucket_by_length(std::slice::from_ref(&s), 10, 1);
        let csv = bucket_curve_csv(&buckets);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "length_bucket,count,mean_cer,mean_wer,std_cer,std_wer,under_sampled"
        );
        assert!(lines.next().unwrap().starts_with("0-10,1,0,0,"));
    }
}
