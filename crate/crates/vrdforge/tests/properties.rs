//! Property tests for the spec-level invariants that hold over all
//! inputs rather than fixed fixtures.

use proptest::prelude::*;

use vrdforge::augment;
use vrdforge::corpus;
use vrdforge::metrics;
use vrdforge::RasterImage;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// cer(x, x) = 0 and the N = S + D + C identity for self-comparison.
    #[test]
    fn self_cer_is_zero(text in "[a-zñáéíóú ]{1,60}") {
        prop_assume!(!text.chars().all(char::is_whitespace));
        let counts = metrics::cer_counts(&text, &text).unwrap();
        prop_assert_eq!(counts.distance(), 0);
        prop_assert_eq!(counts.correct, counts.truth_len);
        if text.split_whitespace().count() > 0 {
            prop_assert_eq!(metrics::wer(&text, &text).unwrap(), 0.0);
        }
    }

    /// |len(pred) - len(truth)| <= S+D+I <= max(len(pred), len(truth)),
    /// and N = S + D + C, over arbitrary unicode-ish strings.
    #[test]
    fn edit_distance_bounds(
        pred in proptest::collection::vec(0u8..26, 0..50),
        truth in proptest::collection::vec(0u8..26, 1..50),
    ) {
        let counts = metrics::edit_counts(&pred, &truth).unwrap();
        let lo = truth.len().abs_diff(pred.len());
        let hi = truth.len().max(pred.len());
        prop_assert!(counts.distance() >= lo);
        prop_assert!(counts.distance() <= hi);
        prop_assert_eq!(
            counts.truth_len,
            counts.substitutions + counts.deletions + counts.correct
        );
    }

    /// Ingestion output always satisfies the sentence invariants.
    #[test]
    fn ingest_invariants(raw in "[\\x00-\\x7Fñáéíóú]{0,300}", max_chars in 5usize..200) {
        match corpus::ingest_text(&raw, max_chars, "prop") {
            Ok(got) => {
                for s in &got.sentences {
                    prop_assert!(s.char_count <= max_chars);
                    prop_assert!(s.word_count >= 1);
                    prop_assert_eq!(s.char_count, s.text.chars().count());
                    prop_assert_eq!(s.word_count, s.text.split_whitespace().count());
                    prop_assert!(!s.text.chars().any(char::is_control));
                    prop_assert_eq!(s.text.trim(), s.text.as_str());
                }
            }
            Err(e) => prop_assert!(matches!(e, vrdforge::Error::EmptyCorpus)),
        }
    }

    /// Inversion is an involution on arbitrary images.
    #[test]
    fn inversion_involution(
        w in 1u32..12,
        h in 1u32..12,
        seed in any::<u64>(),
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let pixels: Vec<u8> = (0..w as usize * h as usize * 3).map(|_| rng.random()).collect();
        let img = RasterImage::from_pixels(w, h, pixels);
        let mut cfg = augment::AugmentConfig::disabled();
        cfg.invert = 1.0;
        let (once, _) = augment::apply_photometric(&img, &cfg, &mut rng).unwrap();
        let (twice, _) = augment::apply_photometric(&once, &cfg, &mut rng).unwrap();
        prop_assert_eq!(twice, img);
    }

    /// split_disjoint never leaks a normalized text across the split.
    #[test]
    fn split_never_leaks(seed in any::<u64>(), n in 2usize..60) {
        use rand::SeedableRng;
        let pool: Vec<corpus::Sentence> = (0..n)
            .map(|i| corpus::Sentence::new(&format!("texto {}", i % (n / 2 + 1)), "p").unwrap())
            .collect();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let (train, test) = corpus::split_disjoint(&pool, 0.3, &mut rng).unwrap();
        prop_assert_eq!(train.len() + test.len(), pool.len());
        let train_norm: std::collections::HashSet<String> =
            train.iter().map(|s| corpus::normalize_for_leakage(&s.text)).collect();
        for s in &test {
            prop_assert!(!train_norm.contains(&corpus::normalize_for_leakage(&s.text)));
        }
    }
}
