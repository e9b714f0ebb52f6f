//! External annotated-dataset ingestion, evaluation crops, prediction
//! scoring, and the ablation configuration matrix.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::augment::{preset_configs, ArtifactConfig, AugmentConfig};
use crate::error::{Error, Result};
use crate::metrics::{
    aggregate, bucket_by_length, score_sample, AggregateMode, EvalReport, Normalization,
    SampleScore,
};
use crate::pipeline::{persist_dataset, GenerationJob, ManifestEntry};
use crate::raster::RasterImage;

/// One labeled region of an annotated page.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationEntry {
    pub image_ref: PathBuf,
    /// Pixel box (x1, y1, x2, y2) with x1 < x2 and y1 < y2.
    pub bbox: (i64, i64, i64, i64),
    pub text: String,
    pub label: Option<String>,
}

/// Supported annotation file layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnnotationFormat {
    /// Official XFUND JSON: a top-level `documents` array, each document
    /// holding an image descriptor and `{box, text, label}` entries.
    Xfund,
    /// One JSON object per line: `{image, box, text, label?, page_w?, page_h?}`.
    Jsonl,
}

/// Loader output: surviving entries plus skip accounting.
#[derive(Debug)]
pub struct LoadedAnnotations {
    pub entries: Vec<AnnotationEntry>,
    /// Entries dropped for violating box/text invariants. The XFUND
    /// Spanish split is known to carry a few percent of such mislabels.
    pub skipped: usize,
}

#[derive(Deserialize)]
struct XfundDoc {
    img: XfundImg,
    document: Vec<XfundRegion>,
}

#[derive(Deserialize)]
struct XfundImg {
    fname: String,
    width: i64,
    height: i64,
}

#[derive(Deserialize)]
struct XfundRegion {
    #[serde(rename = "box")]
    bbox: Vec<i64>,
    text: String,
    #[serde(default)]
    label: Option<String>,
}

#[derive(Deserialize)]
struct JsonlRegion {
    image: String,
    #[serde(rename = "box")]
    bbox: Vec<i64>,
    text: String,
    #[serde(default)]
    label: Option<String>,
    #[serde(default)]
    page_w: Option<i64>,
    #[serde(default)]
    page_h: Option<i64>,
}

fn box_ok(bbox: &[i64], page_w: Option<i64>, page_h: Option<i64>) -> Option<(i64, i64, i64, i64)> {
    if bbox.len() != 4 {
        return None;
    }
    let (x1, y1, x2, y2) = (bbox[0], bbox[1], bbox[2], bbox[3]);
    if x1 >= x2 || y1 >= y2 || x1 < 0 || y1 < 0 {
        return None;
    }
    if let Some(w) = page_w {
        if x2 > w {
            return None;
        }
    }
    if let Some(h) = page_h {
        if y2 > h {
            return None;
        }
    }
    Some((x1, y1, x2, y2))
}

/// Loads annotations, skipping (and counting) entries that violate the
/// box or text invariants. With `pages_dir` given, image references are
/// resolved against it and must exist.
pub fn load_annotations(
    path: &Path,
    format: AnnotationFormat,
    pages_dir: Option<&Path>,
) -> Result<LoadedAnnotations> {
    let data = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut entries = Vec::new();
    let mut skipped = 0usize;

    let mut push_entry = |image: &str,
                          bbox: Option<(i64, i64, i64, i64)>,
                          text: &str,
                          label: Option<String>|
     -> Result<()> {
        let text = text.trim();
        let Some(bbox) = bbox else {
            skipped += 1;
            return Ok(());
        };
        if text.is_empty() {
            skipped += 1;
            return Ok(());
        }
        let image_ref = match pages_dir {
            Some(dir) => {
                let p = dir.join(image);
                if !p.exists() {
                    return Err(Error::MissingImage { path: p });
                }
                p
            }
            None => PathBuf::from(image),
        };
        entries.push(AnnotationEntry {
            image_ref,
            bbox,
            text: text.to_string(),
            label,
        });
        Ok(())
    };

    match format {
        AnnotationFormat::Xfund => {
            let root: serde_json::Value =
                serde_json::from_str(&data).map_err(|e| Error::Format {
                    path: path.to_path_buf(),
                    line: 0,
                    reason: e.to_string(),
                })?;
            let docs = root
                .get("documents")
                .and_then(|d| d.as_array())
                .ok_or_else(|| Error::Format {
                    path: path.to_path_buf(),
                    line: 0,
                    reason: "missing top-level \"documents\" array".into(),
                })?;
            for (i, doc_value) in docs.iter().enumerate() {
                let doc: XfundDoc =
                    serde_json::from_value(doc_value.clone()).map_err(|e| Error::Format {
                        path: path.to_path_buf(),
                        line: 0,
                        reason: format!("document {i}: {e}"),
                    })?;
                for region in doc.document {
                    push_entry(
                        &doc.img.fname,
                        box_ok(&region.bbox, Some(doc.img.width), Some(doc.img.height)),
                        &region.text,
                        region.label,
                    )?;
                }
            }
        }
        AnnotationFormat::Jsonl => {
            for (lineno, line) in data.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let region: JsonlRegion =
                    serde_json::from_str(line).map_err(|e| Error::Format {
                        path: path.to_path_buf(),
                        line: lineno + 1,
                        reason: e.to_string(),
                    })?;
                push_entry(
                    &region.image,
                    box_ok(&region.bbox, region.page_w, region.page_h),
                    &region.text,
                    region.label,
                )?;
            }
        }
    }
    Ok(LoadedAnnotations { entries, skipped })
}

/// Flags entries whose box height exceeds twice the median: likely
/// multi-line or vertical regions the single-line contract cannot honor.
pub fn flag_tall_boxes(entries: &[AnnotationEntry]) -> Vec<bool> {
    if entries.is_empty() {
        return Vec::new();
    }
    let mut heights: Vec<i64> = entries.iter().map(|e| e.bbox.3 - e.bbox.1).collect();
    heights.sort_unstable();
    let median = heights[heights.len() / 2];
    entries
        .iter()
        .map(|e| (e.bbox.3 - e.bbox.1) > 2 * median)
        .collect()
}

/// Extracts the axis-aligned crop of each entry, paired with its text.
/// Pages are decoded once and cached by path.
pub fn crop_regions(entries: &[AnnotationEntry]) -> Result<Vec<(RasterImage, String)>> {
    let mut pages: BTreeMap<PathBuf, RasterImage> = BTreeMap::new();
    let mut out = Vec::with_capacity(entries.len());
    for entry in entries {
        if !pages.contains_key(&entry.image_ref) {
            pages.insert(entry.image_ref.clone(), RasterImage::load(&entry.image_ref)?);
        }
        let page = &pages[&entry.image_ref];
        let (x1, y1, x2, y2) = entry.bbox;
        if x2 > page.width() as i64 || y2 > page.height() as i64 {
            return Err(Error::ImageDecode {
                path: entry.image_ref.clone(),
                reason: format!(
                    "box ({x1},{y1},{x2},{y2}) exceeds decoded page {}x{}",
                    page.width(),
                    page.height()
                ),
            });
        }
        let crop = page.crop(x1 as u32, y1 as u32, x2 as u32, y2 as u32);
        out.push((crop, entry.text.clone()));
    }
    Ok(out)
}

enum IdTextRole {
    Truth,
    Prediction,
}

/// Reads a JSONL file of `{"id", "<role key>"}` records into an id map.
/// Accepts `truth`/`prediction` or the generic `text` key, and numeric
/// or string ids.
fn read_id_text(path: &Path, role: IdTextRole) -> Result<BTreeMap<String, String>> {
    let data = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut map = BTreeMap::new();
    for (lineno, line) in data.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(line).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            line: lineno + 1,
            reason: e.to_string(),
        })?;
        let id = match value.get("id") {
            Some(serde_json::Value::String(s)) => s.clone(),
            Some(serde_json::Value::Number(n)) => n.to_string(),
            _ => {
                return Err(Error::Format {
                    path: path.to_path_buf(),
                    line: lineno + 1,
                    reason: "record has no id".into(),
                })
            }
        };
        let keys: &[&str] = match role {
            IdTextRole::Truth => &["truth", "text"],
            IdTextRole::Prediction => &["prediction", "text"],
        };
        let text = keys
            .iter()
            .find_map(|k| value.get(*k).and_then(|v| v.as_str()))
            .ok_or_else(|| Error::Format {
                path: path.to_path_buf(),
                line: lineno + 1,
                reason: format!("record has none of the keys {keys:?}"),
            })?;
        if map.insert(id.clone(), text.to_string()).is_some() {
            return Err(Error::Join(format!("duplicate id {id:?} in {}", path.display())));
        }
    }
    Ok(map)
}

/// Scores a prediction file against a truth file.
///
/// Every prediction id must have a matching truth id; truth ids without
/// predictions are reported in the result. Both aggregation modes are
/// computed, `mode` selects the headline, and the length-bucket curve is
/// attached.
pub fn evaluate_predictions(
    pred_path: &Path,
    truth_path: &Path,
    norm: Normalization,
    mode: AggregateMode,
    bucket_width: usize,
    min_count: usize,
) -> Result<EvalReport> {
    let truths = read_id_text(truth_path, IdTextRole::Truth)?;
    let preds = read_id_text(pred_path, IdTextRole::Prediction)?;

    let missing: Vec<&String> = preds.keys().filter(|id| !truths.contains_key(*id)).collect();
    if !missing.is_empty() {
        let shown: Vec<&str> = missing.iter().take(5).map(|s| s.as_str()).collect();
        return Err(Error::Join(format!(
            "{} prediction id(s) have no matching truth (first: {:?})",
            missing.len(),
            shown
        )));
    }

    let mut scores: Vec<SampleScore> = Vec::with_capacity(preds.len());
    for (id, pred) in &preds {
        let truth = &truths[id];
        let score = score_sample(id, pred, truth, norm)
            .map_err(|e| Error::Join(format!("id {id:?}: {e}")))?;
        scores.push(score);
    }
    let mut report = aggregate(&scores, mode)?;
    report.buckets = bucket_by_length(&scores, bucket_width, min_count);
    report.unmatched_truths = truths
        .keys()
        .filter(|id| !preds.contains_key(*id))
        .cloned()
        .collect();
    Ok(report)
}

/// Named augmentation configurations for the ablation matrix.
#[derive(Debug, Clone)]
pub struct AblationSpec {
    pub presets: Vec<AblationPreset>,
}

#[derive(Debug, Clone)]
pub struct AblationPreset {
    pub name: String,
    pub artifact_cfg: ArtifactConfig,
    pub augment_cfg: AugmentConfig,
}

impl AblationSpec {
    /// Resolves preset names against the built-in vocabulary.
    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Result<AblationSpec> {
        let mut seen = std::collections::BTreeSet::new();
        let mut presets = Vec::new();
        for name in names {
            let name = name.as_ref();
            if !seen.insert(name.to_string()) {
                return Err(Error::Config(format!("duplicate preset {name:?}")));
            }
            let (artifact_cfg, augment_cfg) = preset_configs(name)?;
            presets.push(AblationPreset {
                name: name.to_string(),
                artifact_cfg,
                augment_cfg,
            });
        }
        if presets.is_empty() {
            return Err(Error::Config("no presets selected".into()));
        }
        Ok(AblationSpec { presets })
    }
}

/// One row of the ablation comparison table. The cer/wer columns stay
/// empty until downstream model scores are filled in.
#[derive(Debug, Clone, Serialize)]
pub struct AblationRow {
    pub preset: String,
    pub n_samples: u64,
    pub out_dir: PathBuf,
    pub mean_width: f64,
    pub mean_height: f64,
    pub artifact_steps: u64,
    pub photometric_steps: u64,
    pub geometric_steps: u64,
    pub cer: Option<f64>,
    pub wer: Option<f64>,
}

/// Generates one dataset per preset with identical sentences, seeds, and
/// styles (only the augmentation configs differ), then writes a table
/// skeleton ready to receive downstream model scores.
pub fn ablation_matrix(
    template: &GenerationJob,
    spec: &AblationSpec,
    n_per_preset: u64,
    out_root: &Path,
    workers: usize,
    overwrite: bool,
) -> Result<Vec<AblationRow>> {
    std::fs::create_dir_all(out_root).map_err(|source| Error::Io {
        path: out_root.to_path_buf(),
        source,
    })?;
    let mut rows = Vec::new();
    for preset in &spec.presets {
        let job = GenerationJob {
            master_seed: template.master_seed,
            n_samples: n_per_preset,
            corpus: template.corpus,
            pool: template.pool,
            style: template.style.clone(),
            artifact_cfg: preset.artifact_cfg,
            augment_cfg: preset.augment_cfg,
            neighbor: template.neighbor,
            sampler: template.sampler.clone(),
            epoch_offset: template.epoch_offset,
        };
        let out_dir = out_root.join(&preset.name);
        let outcome = persist_dataset(&job, workers, &out_dir, overwrite).map_err(|e| {
            Error::Preset {
                preset: preset.name.clone(),
                source: Box::new(e),
            }
        })?;
        let manifest =
            std::fs::read_to_string(&outcome.manifest_path).map_err(|source| Error::Io {
                path: outcome.manifest_path.clone(),
                source,
            })?;
        let mut row = AblationRow {
            preset: preset.name.clone(),
            n_samples: 0,
            out_dir,
            mean_width: 0.0,
            mean_height: 0.0,
            artifact_steps: 0,
            photometric_steps: 0,
            geometric_steps: 0,
            cer: None,
            wer: None,
        };
        for line in manifest.lines() {
            let entry: ManifestEntry = serde_json::from_str(line).map_err(|e| Error::Format {
                path: outcome.manifest_path.clone(),
                line: 0,
                reason: e.to_string(),
            })?;
            row.n_samples += 1;
            row.mean_width += entry.w as f64;
            row.mean_height += entry.h as f64;
            for t in &entry.trace {
                match t.name.as_str() {
                    "box" | "h_line" | "v_line" => row.artifact_steps += 1,
                    "noise" | "invert" | "blur" => row.photometric_steps += 1,
                    _ => row.geometric_steps += 1,
                }
            }
        }
        if row.n_samples > 0 {
            row.mean_width /= row.n_samples as f64;
            row.mean_height /= row.n_samples as f64;
        }
        rows.push(row);
    }

    let table_path = out_root.join("ablation_table.csv");
    let mut csv = String::from(
        "preset,n_samples,mean_width,mean_height,artifact_steps,photometric_steps,geometric_steps,cer,wer\n",
    );
    for row in &rows {
        csv.push_str(&format!(
            "{},{},{:.1},{:.1},{},{},{},{},{}\n",
            row.preset,
            row.n_samples,
            row.mean_width,
            row.mean_height,
            row.artifact_steps,
            row.photometric_steps,
            row.geometric_steps,
            row.cer.map(|v| v.to_string()).unwrap_or_default(),
            row.wer.map(|v| v.to_string()).unwrap_or_default(),
        ));
    }
    std::fs::write(&table_path, csv).map_err(|source| Error::Io {
        path: table_path,
        source,
    })?;
    Ok(rows)
}
