//! Synthetic text-line image generation and OCR evaluation for visually
//! rich documents (forms, receipts, and similar box-and-line layouts).
//!
//! The crate covers the full data side of an OCR training workflow:
//!
//! * [`corpus`] — text ingestion, length-balanced sampling, and
//!   leakage-free train/test splitting.
//! * [`render`] — font loading with glyph-coverage validation and
//!   deterministic single-line rasterization, including neighbor-line
//!   crop artifacts.
//! * [`augment`] — form artifacts (boxes, separator combs, stray lines)
//!   and photometric/geometric augmentations with a full parameter trace.
//! * [`pipeline`] — seeded, worker-count-invariant sample generation,
//!   PNG dataset persistence, and a length-prefixed streaming protocol.
//! * [`metrics`] — edit-distance alignment counts, CER/WER, mean and
//!   length-weighted aggregation, and length-bucketed report curves.
//! * [`eval`] — XFUND-style annotation ingestion, region cropping,
//!   prediction scoring, and the ablation configuration matrix.
//! * [`cli`] — the `vrdforge` command-line entry point.
//!
//! Everything that consumes randomness takes an explicit stream derived
//! from a master seed, so any sample can be regenerated bit-exactly from
//! `(seed, index)` alone, regardless of worker count.

pub mod augment;
pub mod cli;
pub mod config;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod metrics;
pub mod pipeline;
pub mod raster;
pub mod render;

pub use error::{Error, Result};
pub use raster::RasterImage;
