//! Crate-wide error type.

use std::path::PathBuf;

/// Errors produced by corpus, rendering, generation, and evaluation.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("input is not valid UTF-8 at byte offset {offset}")]
    Decode { offset: usize },

    #[error("no sentences survived ingestion")]
    EmptyCorpus,

    #[error("length bucket {lo}..={hi} has no candidate sentences")]
    EmptyBucket { lo: usize, hi: usize },

    #[error("no sentence with word count {k} (truncation disabled)")]
    NoFixedWordCandidate { k: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("failed to load font {path}: {reason}")]
    FontLoad { path: PathBuf, reason: String },

    #[error("font pool is empty: no face covers the configured charset")]
    EmptyFontPool,

    #[error("style space exhausted: no contrasting color pair found in {attempts} attempts")]
    StyleSpace { attempts: u32 },

    #[error("font {font_id} has no glyph for {scalar:?}")]
    MissingGlyph { font_id: usize, scalar: char },

    #[error("cannot render empty text")]
    EmptyText,

    #[error("ground truth is empty; error rate is undefined")]
    EmptyTruth,

    #[error("sample {index}: {source}")]
    Sample {
        index: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("preset {preset}: {source}")]
    Preset {
        preset: String,
        #[source]
        source: Box<Error>,
    },

    #[error("output directory {path} is not empty (pass overwrite to replace)")]
    OutputNotEmpty { path: PathBuf },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path} line {line}: {reason}")]
    Format {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("referenced image {path} does not exist")]
    MissingImage { path: PathBuf },

    #[error("failed to decode image {path}: {reason}")]
    ImageDecode { path: PathBuf, reason: String },

    #[error("id join failed: {0}")]
    Join(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Wraps an error with the index of the sample that produced it.
    pub fn at_sample(self, index: u64) -> Error {
        Error::Sample {
            index,
            source: Box::new(self),
        }
    }

    /// Exit code class for the CLI: usage errors are 1, data errors 2.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            _ => 2,
        }
    }
}
