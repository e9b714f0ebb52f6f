//! JSON run configuration with `key=value` overrides (flags win).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::augment::{ArtifactConfig, AugmentConfig};
use crate::error::{Error, Result};
use crate::pipeline::{NeighborConfig, SentenceSampler, DEFAULT_SAMPLE_COUNT};
use crate::render::StyleSpace;

/// Generation run configuration. Every field has a default, so a config
/// file only states what it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenConfig {
    /// Corpus JSON Lines file produced by `corpus prep`.
    pub corpus: Option<PathBuf>,
    /// Font directory; `VRDFORGE_FONTS` overrides it.
    pub fonts_dir: Option<PathBuf>,
    pub n_samples: u64,
    pub master_seed: u64,
    /// 0 means one worker per available core.
    pub workers: usize,
    pub epoch_offset: u64,
    pub style: StyleSpace,
    pub artifacts: ArtifactConfig,
    pub augment: AugmentConfig,
    pub neighbor: NeighborConfig,
    pub sampler: SentenceSampler,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            corpus: None,
            fonts_dir: None,
            n_samples: DEFAULT_SAMPLE_COUNT,
            master_seed: 0,
            workers: 0,
            epoch_offset: 0,
            style: StyleSpace::default(),
            artifacts: ArtifactConfig::default(),
            augment: AugmentConfig::default(),
            neighbor: NeighborConfig::default(),
            sampler: SentenceSampler::Pool,
        }
    }
}

impl GenConfig {
    /// Reads a config file and applies `key=value` overrides on top.
    pub fn load(path: &Path, overrides: &[String]) -> Result<GenConfig> {
        let data = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let cfg: GenConfig = serde_json::from_str(&data).map_err(|e| Error::Config(format!(
            "{}: {e}",
            path.display()
        )))?;
        cfg.with_overrides(overrides)
    }

    /// Applies dotted-path overrides (e.g. `augment.blur.prob=0`).
    ///
    /// Keys must reference existing config fields; values parse as JSON
    /// when possible and fall back to strings.
    pub fn with_overrides(self, overrides: &[String]) -> Result<GenConfig> {
        if overrides.is_empty() {
            self.validate()?;
            return Ok(self);
        }
        // Round-trip through a JSON tree so every defaulted field is
        // present and addressable.
        let mut tree = serde_json::to_value(&self).expect("config serialization cannot fail");
        for spec in overrides {
            let (key, raw) = spec.split_once('=').ok_or_else(|| {
                Error::Config(format!("override {spec:?} is not KEY=VALUE"))
            })?;
            let mut node = &mut tree;
            let parts: Vec<&str> = key.split('.').collect();
            for (i, part) in parts.iter().enumerate() {
                let known = node
                    .as_object()
                    .ok_or_else(|| {
                        Error::Config(format!("config key {key:?}: {part:?} is not an object"))
                    })?
                    .contains_key(*part);
                if !known {
                    return Err(Error::Config(format!(
                        "unknown config key {key:?} (no field {part:?})"
                    )));
                }
                if i + 1 == parts.len() {
                    let value = serde_json::from_str(raw)
                        .unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
                    node.as_object_mut().unwrap().insert(part.to_string(), value);
                } else {
                    node = node.get_mut(*part).unwrap();
                }
            }
        }
        let cfg: GenConfig = serde_json::from_value(tree)
            .map_err(|e| Error::Config(format!("override produced invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.style.validate()?;
        self.artifacts.validate()?;
        self.augment.validate()?;
        self.neighbor.validate()?;
        if self.n_samples == 0 {
            return Err(Error::Config("n_samples must be >= 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = GenConfig::default();
        let json = serde_json::to_string(&cfg).unwrap();
        let back: GenConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn minimal_file_uses_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, r#"{"master_seed": 9}"#).unwrap();
        let cfg = GenConfig::load(&path, &[]).unwrap();
        assert_eq!(cfg.master_seed, 9);
        assert_eq!(cfg.n_samples, DEFAULT_SAMPLE_COUNT);
    }

    #[test]
    fn overrides_win_and_parse_json() {
        let cfg = GenConfig::default()
            .with_overrides(&[
                "augment.blur.prob=0".to_string(),
                "style.font_size=[30,40]".to_string(),
                "n_samples=5".to_string(),
            ])
            .unwrap();
        assert_eq!(cfg.augment.blur.prob, 0.0);
        assert_eq!(cfg.style.font_size, (30, 40));
        assert_eq!(cfg.n_samples, 5);
    }

    #[test]
    fn unknown_override_key_is_rejected() {
        let err = GenConfig::default()
            .with_overrides(&["augment.sharpen.prob=1".to_string()])
            .unwrap_err();
        assert!(err.to_string().contains("sharpen"));
    }

    #[test]
    fn invalid_override_value_is_rejected() {
        assert!(GenConfig::default()
            .with_overrides(&["augment.blur.prob=7".to_string()])
            .is_err());
        assert!(GenConfig::default()
            .with_overrides(&["n_samples=0".to_string()])
            .is_err());
    }

    #[test]
    fn unknown_file_field_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, r#"{"not_a_field": 1}"#).unwrap();
        assert!(matches!(
            GenConfig::load(&path, &[]),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn sampler_variants_deserialize() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(
            &path,
            r#"{"sampler": {"kind": "fixed_word_count", "k": 3}}"#,
        )
        .unwrap();
        let cfg = GenConfig::load(&path, &[]).unwrap();
        assert_eq!(
            cfg.sampler,
            SentenceSampler::FixedWordCount {
                k: 3,
                allow_truncation: false
            }
        );

        std::fs::write(
            &path,
            r#"{"sampler": {"kind": "distribution", "key": "word_count",
                "buckets": [{"lo": 1, "hi": 5, "weight": 0.5},
                            {"lo": 6, "hi": 10, "weight": 0.5}]}}"#,
        )
        .unwrap();
        let cfg = GenConfig::load(&path, &[]).unwrap();
        assert!(matches!(cfg.sampler, SentenceSampler::Distribution { .. }));
    }
}
