//! Font loading, style sampling, and deterministic single-line rasterization.
//!
//! Rendering is a pure function of (text, style, face bytes): the same
//! inputs always produce byte-identical buffers. Glyphs are drawn with
//! anti-aliased coverage blended onto the background in 8-bit integer
//! arithmetic, clipped to the nominal line box so the padding frame
//! stays pure background.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use ab_glyph::{point, Font, FontVec, ScaleFont};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{luma, RasterImage, Rgb};

/// ASCII printable plus the Spanish letters and inverted punctuation.
pub fn spanish_charset() -> BTreeSet<char> {
    let mut set: BTreeSet<char> = (0x20u8..=0x7E).map(|b| b as char).collect();
    set.extend("áéíóúüñÁÉÍÓÚÜÑ¿¡".chars());
    set
}

/// Typography for one sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StyleParams {
    /// Index into the font pool.
    pub font_id: usize,
    /// Font size in pixels.
    pub font_size: u32,
    pub text_color: Rgb,
    pub background_color: Rgb,
    /// Padding in pixels: top, right, bottom, left.
    pub padding: [u32; 4],
}

impl StyleParams {
    /// Luma gap between text and background.
    pub fn contrast(&self) -> f64 {
        (luma(self.text_color) - luma(self.background_color)).abs()
    }
}

/// How text/background colors are sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum ColorSpace {
    /// Dark gray text on a light gray background (the VRD default;
    /// scanned forms are predominantly near-monochrome).
    GrayscaleBias {
        text_gray: (u8, u8),
        bg_gray: (u8, u8),
    },
    /// Unconstrained RGB for both colors.
    FullRgb,
    /// Fixed colors, mainly for tests and ablations.
    Fixed { text: Rgb, background: Rgb },
}

impl Default for ColorSpace {
    fn default() -> Self {
        ColorSpace::GrayscaleBias {
            text_gray: (0, 100),
            bg_gray: (155, 255),
        }
    }
}

/// The randomized style configuration sample_style draws from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StyleSpace {
    /// Inclusive font size range in pixels.
    pub font_size: (u32, u32),
    /// Inclusive per-side padding range in pixels.
    pub padding: (u32, u32),
    pub colors: ColorSpace,
    /// Minimum |luma(text) - luma(background)|.
    pub min_contrast: f64,
}

impl Default for StyleSpace {
    fn default() -> Self {
        StyleSpace {
            font_size: (24, 64),
            padding: (2, 20),
            colors: ColorSpace::default(),
            min_contrast: 60.0,
        }
    }
}

impl StyleSpace {
    pub fn validate(&self) -> Result<()> {
        if self.font_size.0 < 1 || self.font_size.0 > self.font_size.1 {
            return Err(Error::Config(format!(
                "font size range {:?} is invalid",
                self.font_size
            )));
        }
        if self.padding.0 > self.padding.1 {
            return Err(Error::Config(format!(
                "padding range {:?} is invalid",
                self.padding
            )));
        }
        if self.min_contrast < 0.0 || self.min_contrast > 255.0 {
            return Err(Error::Config(format!(
                "min_contrast {} outside [0, 255]",
                self.min_contrast
            )));
        }
        Ok(())
    }
}

const MAX_CONTRAST_ATTEMPTS: u32 = 100;

/// Samples one StyleParams from the space, resampling colors until the
/// contrast bound holds (at most 100 attempts).
pub fn sample_style<R: Rng>(
    space: &StyleSpace,
    pool: &FontPool,
    rng: &mut R,
) -> Result<StyleParams> {
    space.validate()?;
    if pool.is_empty() {
        return Err(Error::EmptyFontPool);
    }
    let font_id = rng.random_range(0..pool.len());
    let font_size = rng.random_range(space.font_size.0..=space.font_size.1);
    let padding = [
        rng.random_range(space.padding.0..=space.padding.1),
        rng.random_range(space.padding.0..=space.padding.1),
        rng.random_range(space.padding.0..=space.padding.1),
        rng.random_range(space.padding.0..=space.padding.1),
    ];
    let mut colors = None;
    for _ in 0..MAX_CONTRAST_ATTEMPTS {
        let (text, background) = match space.colors {
            ColorSpace::GrayscaleBias { text_gray, bg_gray } => {
                let t = rng.random_range(text_gray.0..=text_gray.1);
                let b = rng.random_range(bg_gray.0..=bg_gray.1);
                ([t, t, t], [b, b, b])
            }
            ColorSpace::FullRgb => {
                let mut triple = || {
                    [
                        rng.random_range(0..=255u8),
                        rng.random_range(0..=255u8),
                        rng.random_range(0..=255u8),
                    ]
                };
                (triple(), triple())
            }
            ColorSpace::Fixed { text, background } => (text, background),
        };
        if (luma(text) - luma(background)).abs() >= space.min_contrast {
            colors = Some((text, background));
            break;
        }
    }
    let Some((text_color, background_color)) = colors else {
        return Err(Error::StyleSpace {
            attempts: MAX_CONTRAST_ATTEMPTS,
        });
    };
    Ok(StyleParams {
        font_id,
        font_size,
        text_color,
        background_color,
        padding,
    })
}

/// A parsed font face admitted to the pool.
pub struct FontFace {
    /// File name the face was loaded from.
    pub name: String,
    font: FontVec,
}

/// Coverage report for one candidate face.
#[derive(Debug, Clone, Serialize)]
pub struct CoverageReport {
    pub file: String,
    /// Charset scalars the face has no glyph for; admitted iff empty.
    pub missing: Vec<char>,
    pub admitted: bool,
}

/// Checks a face's glyph coverage against a charset.
pub fn validate_font_coverage(
    face_data: &[u8],
    charset: &BTreeSet<char>,
    file_name: &str,
) -> Result<CoverageReport> {
    let font = FontVec::try_from_vec(face_data.to_vec()).map_err(|e| Error::FontLoad {
        path: PathBuf::from(file_name),
        reason: e.to_string(),
    })?;
    let missing: Vec<char> = charset
        .iter()
        .copied()
        .filter(|&c| font.glyph_id(c).0 == 0)
        .collect();
    Ok(CoverageReport {
        file: file_name.to_string(),
        admitted: missing.is_empty(),
        missing,
    })
}

/// An immutable pool of validated font faces, shareable across threads.
pub struct FontPool {
    faces: Vec<FontFace>,
    reports: Vec<CoverageReport>,
}

impl FontPool {
    /// Loads every `.ttf`/`.otf` under `dir` (sorted by file name for a
    /// stable face order), admitting only faces that fully cover
    /// `charset`. Unparseable or incomplete faces are recorded in the
    /// coverage reports rather than failing the load.
    pub fn load_dir(dir: &Path, charset: &BTreeSet<char>) -> Result<FontPool> {
        let entries = std::fs::read_dir(dir).map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let mut paths: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.extension()
                    .and_then(|e| e.to_str())
                    .map(|e| e.eq_ignore_ascii_case("ttf") || e.eq_ignore_ascii_case("otf"))
                    .unwrap_or(false)
            })
            .collect();
        paths.sort();
        let mut faces = Vec::new();
        let mut reports = Vec::new();
        for path in paths {
            let name = path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string());
            let data = std::fs::read(&path).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            match validate_font_coverage(&data, charset, &name) {
                Ok(report) => {
                    if report.admitted {
                        let font = FontVec::try_from_vec(data).expect("validated above");
                        faces.push(FontFace { name, font });
                    }
                    reports.push(report);
                }
                // Unparseable face: record it and move on.
                Err(_) => reports.push(CoverageReport {
                    file: name,
                    missing: Vec::new(),
                    admitted: false,
                }),
            }
        }
        if faces.is_empty() {
            return Err(Error::EmptyFontPool);
        }
        Ok(FontPool { faces, reports })
    }

    /// Builds a pool from a single face, validating coverage.
    pub fn from_face_data(data: Vec<u8>, name: &str, charset: &BTreeSet<char>) -> Result<FontPool> {
        let report = validate_font_coverage(&data, charset, name)?;
        if !report.admitted {
            return Err(Error::FontLoad {
                path: PathBuf::from(name),
                reason: format!("missing glyphs: {:?}", report.missing),
            });
        }
        let font = FontVec::try_from_vec(data).expect("validated above");
        Ok(FontPool {
            faces: vec![FontFace {
                name: name.to_string(),
                font,
            }],
            reports: vec![report],
        })
    }

    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn face(&self, font_id: usize) -> &FontFace {
        &self.faces[font_id]
    }

    /// Per-file coverage status, JSON-serializable for the pool manifest.
    pub fn reports(&self) -> &[CoverageReport] {
        &self.reports
    }

    pub fn manifest_json(&self) -> String {
        serde_json::to_string_pretty(&self.reports).expect("report serialization cannot fail")
    }
}

/// Resolves the font directory: `VRDFORGE_FONTS` wins, then the
/// configured directory, then well-known system locations.
pub fn resolve_font_dir(configured: Option<&Path>) -> Result<PathBuf> {
    if let Ok(dir) = std::env::var("VRDFORGE_FONTS") {
        return Ok(PathBuf::from(dir));
    }
    if let Some(dir) = configured {
        return Ok(dir.to_path_buf());
    }
    for candidate in ["/usr/share/fonts/truetype/dejavu", "/usr/share/fonts"] {
        let p = Path::new(candidate);
        if p.is_dir() {
            return Ok(p.to_path_buf());
        }
    }
    Err(Error::Config(
        "no font directory configured and no system default found (set VRDFORGE_FONTS)".into(),
    ))
}

/// Horizontal cell of one rendered character in canvas coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GlyphCell {
    pub ch: char,
    /// Inclusive left edge.
    pub x0: u32,
    /// Exclusive right edge.
    pub x1: u32,
}

/// Per-character advance boundaries and the line's ink band.
///
/// Whitespace produces an advance but no cell, so adjacent letter cells
/// tile the advance exactly; a space leaves a gap between cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlyphLayout {
    pub cells: Vec<GlyphCell>,
    /// Inclusive y rows containing glyph ink, if any ink was drawn.
    pub ink_band: Option<(u32, u32)>,
    /// x-range of the full text advance (inclusive, exclusive).
    pub text_extent: (u32, u32),
}

/// One rasterized line before padding: an alpha coverage buffer plus
/// layout in line-local coordinates.
struct LineRaster {
    width: u32,
    height: u32,
    coverage: Vec<u8>,
    cells: Vec<GlyphCell>,
    ink_band: Option<(u32, u32)>,
}

fn rasterize_line(text: &str, face: &FontFace, font_size: u32, font_id: usize) -> Result<LineRaster> {
    if text.is_empty() {
        return Err(Error::EmptyText);
    }
    let scale = ab_glyph::PxScale::from(font_size as f32);
    let scaled = face.font.as_scaled(scale);

    // Layout pass: cumulative advances without kerning, so letter cells
    // tile the advance exactly (comb separators rely on shared edges).
    let mut pen = 0.0f32;
    let mut cells = Vec::new();
    let mut glyph_slots = Vec::new();
    for ch in text.chars() {
        let id = face.font.glyph_id(ch);
        if id.0 == 0 {
            return Err(Error::MissingGlyph {
                font_id,
                scalar: ch,
            });
        }
        let advance = scaled.h_advance(id);
        let x0 = pen.round() as u32;
        let x1 = (pen + advance).round() as u32;
        if !ch.is_whitespace() {
            cells.push(GlyphCell { ch, x0, x1 });
            glyph_slots.push((id, pen));
        }
        pen += advance;
    }
    let line_height = (scaled.ascent() - scaled.descent()).ceil() as u32;
    let width = (pen.ceil() as u32).max(1);
    let height = line_height.max(1);
    let mut coverage = vec![0u8; width as usize * height as usize];
    let baseline = scaled.ascent();

    let mut ink_band: Option<(u32, u32)> = None;
    for (id, x) in glyph_slots {
        let glyph = id.with_scale_and_position(scale, point(x, baseline));
        let Some(outlined) = face.font.outline_glyph(glyph) else {
            continue;
        };
        let bounds = outlined.px_bounds();
        let (ox, oy) = (bounds.min.x as i64, bounds.min.y as i64);
        outlined.draw(|gx, gy, c| {
            let px = ox + gx as i64;
            let py = oy + gy as i64;
            // Clip to the line box so padding stays pure background.
            if px < 0 || py < 0 || px >= width as i64 || py >= height as i64 {
                return;
            }
            let a = (c.clamp(0.0, 1.0) * 255.0 + 0.5) as u8;
            if a == 0 {
                return;
            }
            let idx = py as usize * width as usize + px as usize;
            coverage[idx] = coverage[idx].max(a);
            let y = py as u32;
            ink_band = Some(match ink_band {
                None => (y, y),
                Some((t, b)) => (t.min(y), b.max(y)),
            });
        });
    }
    Ok(LineRaster {
        width,
        height,
        coverage,
        cells,
        ink_band,
    })
}

#[inline]
fn blend(fg: Rgb, bg: Rgb, alpha: u8) -> Rgb {
    let a = alpha as u32;
    let na = 255 - a;
    [
        ((fg[0] as u32 * a + bg[0] as u32 * na + 127) / 255) as u8,
        ((fg[1] as u32 * a + bg[1] as u32 * na + 127) / 255) as u8,
        ((fg[2] as u32 * a + bg[2] as u32 * na + 127) / 255) as u8,
    ]
}

/// Rasterizes `text` on one baseline inside its padding frame.
///
/// Canvas width is the text advance plus horizontal padding; height is
/// the line height plus vertical padding.
pub fn render_text(
    text: &str,
    style: &StyleParams,
    pool: &FontPool,
) -> Result<(RasterImage, GlyphLayout)> {
    let line = rasterize_line(text, pool.face(style.font_id), style.font_size, style.font_id)?;
    let [pad_top, pad_right, pad_bottom, pad_left] = style.padding;
    let width = line.width + pad_left + pad_right;
    let height = line.height + pad_top + pad_bottom;
    let mut img = RasterImage::filled(width, height, style.background_color);
    blit_coverage(
        &mut img,
        &line.coverage,
        line.width,
        line.height,
        pad_left,
        pad_top,
        0,
        line.height,
        style.text_color,
    );
    let layout = GlyphLayout {
        cells: line
            .cells
            .iter()
            .map(|c| GlyphCell {
                ch: c.ch,
                x0: c.x0 + pad_left,
                x1: c.x1 + pad_left,
            })
            .collect(),
        ink_band: line.ink_band.map(|(t, b)| (t + pad_top, b + pad_top)),
        text_extent: (pad_left, pad_left + line.width),
    };
    Ok((img, layout))
}

/// Blends rows `[row0, row1)` of an alpha buffer onto `img` at
/// `(dst_x, dst_y)`, clipping to the canvas.
#[allow(clippy::too_many_arguments)]
fn blit_coverage(
    img: &mut RasterImage,
    coverage: &[u8],
    cov_width: u32,
    _cov_height: u32,
    dst_x: u32,
    dst_y: u32,
    row0: u32,
    row1: u32,
    color: Rgb,
) {
    for sy in row0..row1 {
        let dy = dst_y + (sy - row0);
        if dy >= img.height() {
            break;
        }
        for sx in 0..cov_width {
            let dx = dst_x + sx;
            if dx >= img.width() {
                break;
            }
            let a = coverage[sy as usize * cov_width as usize + sx as usize];
            if a == 0 {
                continue;
            }
            let blended = blend(color, img.get(dx, dy), a);
            img.set(dx, dy, blended);
        }
    }
}

/// Renders `text` with optional slivers of neighbor lines intruding into
/// the vertical padding, simulating text-detection crop errors.
///
/// `crop_fracs.0` bounds the visible fraction of the above-neighbor's
/// glyph height (its bottom rows); `crop_fracs.1` the below-neighbor's
/// (top rows). Slivers are clamped to their padding band, so they never
/// touch the main glyph band; the ground-truth label stays `text`.
pub fn render_with_neighbors(
    text: &str,
    neighbor_above: Option<&str>,
    neighbor_below: Option<&str>,
    style: &StyleParams,
    crop_fracs: (f64, f64),
    pool: &FontPool,
) -> Result<(RasterImage, GlyphLayout)> {
    for frac in [crop_fracs.0, crop_fracs.1] {
        if !(0.0..=1.0).contains(&frac) {
            return Err(Error::Config(format!(
                "crop fraction {frac} outside [0,1]"
            )));
        }
    }
    let (mut img, layout) = render_text(text, style, pool)?;
    let [pad_top, _, pad_bottom, pad_left] = style.padding;
    let face = pool.face(style.font_id);

    if let Some(above) = neighbor_above {
        if crop_fracs.0 > 0.0 && pad_top > 0 && !above.is_empty() {
            let line = rasterize_line(above, face, style.font_size, style.font_id)?;
            if let Some((ink_top, ink_bot)) = line.ink_band {
                let ink_h = ink_bot - ink_top + 1;
                let visible =
                    ((crop_fracs.0 * ink_h as f64).round() as u32).min(pad_top).min(ink_h);
                if visible > 0 {
                    // Bottom `visible` ink rows sit flush against the
                    // end of the top padding band.
                    let src_row0 = ink_bot + 1 - visible;
                    blit_coverage(
                        &mut img,
                        &line.coverage,
                        line.width,
                        line.height,
                        pad_left,
                        pad_top - visible,
                        src_row0,
                        ink_bot + 1,
                        style.text_color,
                    );
                }
            }
        }
    }
    if let Some(below) = neighbor_below {
        if crop_fracs.1 > 0.0 && pad_bottom > 0 && !below.is_empty() {
            let line = rasterize_line(below, face, style.font_size, style.font_id)?;
            if let Some((ink_top, ink_bot)) = line.ink_band {
                let ink_h = ink_bot - ink_top + 1;
                let visible = ((crop_fracs.1 * ink_h as f64).round() as u32)
                    .min(pad_bottom)
                    .min(ink_h);
                if visible > 0 {
                    // Top `visible` ink rows start at the first bottom
                    // padding row.
                    let dst_y = img.height() - pad_bottom;
                    blit_coverage(
                        &mut img,
                        &line.coverage,
                        line.width,
                        line.height,
                        pad_left,
                        dst_y,
                        ink_top,
                        ink_top + visible,
                        style.text_color,
                    );
                }
            }
        }
    }
    Ok((img, layout))
}


#[cfg(test)]
mod tests {
    use super::test_support::*;
    use super::*;
    use rand::SeedableRng;

    fn rng() -> rand_chacha::ChaCha8Rng {
        rand_chacha::ChaCha8Rng::seed_from_u64(11)
    }

    #[test]
    fn pool_loads_and_reports_coverage() {
        let pool = test_pool();
        assert!(pool.len() >= 1);
        assert!(pool.reports().iter().any(|r| r.admitted));
        let manifest = pool.manifest_json();
        assert!(manifest.contains("\"admitted\""));
    }

    #[test]
    fn coverage_rejects_missing_glyphs() {
        let dir = test_font_dir();
        let any_font = std::fs::read_dir(&dir)
            .unwrap()
            .filter_map(|e| e.ok().map(|e| e.path()))
            .find(|p| p.extension().map(|e| e == "ttf").unwrap_or(false))
            .expect("a ttf in the test font dir");
        let data = std::fs::read(&any_font).unwrap();
        // DejaVu has no glyph for this Cherokee-range scalar.
        let mut charset = BTreeSet::new();
        charset.insert('a');
        charset.insert('\u{13A0}');
        let report = validate_font_coverage(&data, &charset, "x.ttf").unwrap();
        if !report.admitted {
            assert!(report.missing.contains(&'\u{13A0}'));
        }
    }

    #[test]
    fn coverage_errors_on_corrupt_font() {
        let charset = spanish_charset();
        match validate_font_coverage(b"not a font at all", &charset, "bad.ttf") {
            Err(Error::FontLoad { path, .. }) => {
                assert_eq!(path, PathBuf::from("bad.ttf"));
            }
            other => panic!("expected font-load error, got {other:?}"),
        }
    }

    #[test]
    fn style_sampling_respects_ranges() {
        let pool = test_pool();
        let space = StyleSpace::default();
        for _ in 0..50 {
            let s = sample_style(&space, &pool, &mut rng()).unwrap();
            assert!((24..=64).contains(&s.font_size));
            assert!(s.padding.iter().all(|p| (2..=20).contains(p)));
            assert!(s.contrast() >= 60.0);
            assert!(s.font_id < pool.len());
        }
    }

    #[test]
    fn style_sampling_fixed_black_on_white_always_valid() {
        let pool = test_pool();
        let space = StyleSpace {
            colors: ColorSpace::Fixed {
                text: [0, 0, 0],
                background: [255, 255, 255],
            },
            ..StyleSpace::default()
        };
        let s = sample_style(&space, &pool, &mut rng()).unwrap();
        assert_eq!(s.contrast(), 255.0);
    }

    #[test]
    fn style_sampling_zero_contrast_errors() {
        let pool = test_pool();
        let space = StyleSpace {
            colors: ColorSpace::Fixed {
                text: [128, 128, 128],
                background: [128, 128, 128],
            },
            ..StyleSpace::default()
        };
        match sample_style(&space, &pool, &mut rng()) {
            Err(Error::StyleSpace { attempts: 100 }) => {}
            other => panic!("expected style-space error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_render_has_clean_padding_frame() {
        let pool = test_pool();
        let style = black_on_white(32, [2, 2, 2, 2]);
        let (img, layout) = render_text("A", &style, &pool).unwrap();
        // 2-px frame is pure background.
        for y in 0..img.height() {
            for x in 0..img.width() {
                let in_frame = x < 2 || y < 2 || x >= img.width() - 2 || y >= img.height() - 2;
                if in_frame {
                    assert_eq!(img.get(x, y), [255, 255, 255], "frame pixel ({x},{y})");
                }
            }
        }
        // Interior contains ink.
        assert!(img.pixels().chunks(3).any(|p| p[0] == 0));
        assert_eq!(layout.cells.len(), 1);
        assert!(layout.ink_band.is_some());
    }

    #[test]
    fn rendering_is_deterministic() {
        let pool = test_pool();
        let style = black_on_white(30, [4, 3, 2, 1]);
        let (a, la) = render_text("ñandú 42", &style, &pool).unwrap();
        let (b, lb) = render_text("ñandú 42", &style, &pool).unwrap();
        assert_eq!(a, b);
        assert_eq!(la, lb);
    }

    #[test]
    fn spanish_text_renders() {
        let pool = test_pool();
        let style = black_on_white(28, [2, 2, 2, 2]);
        let (img, layout) = render_text("ñandú", &style, &pool).unwrap();
        assert!(img.width() > 0);
        assert_eq!(layout.cells.len(), 5);
    }

    #[test]
    fn layout_boundaries_strictly_increase_and_tile() {
        let pool = test_pool();
        let style = black_on_white(36, [2, 2, 2, 2]);
        let (_, layout) = render_text("abc def", &style, &pool).unwrap();
        assert_eq!(layout.cells.len(), 6);
        for w in layout.cells.windows(2) {
            assert!(w[0].x0 < w[0].x1);
            assert!(w[0].x1 <= w[1].x0);
        }
        // Adjacent letters share an edge; the space leaves a gap.
        assert_eq!(layout.cells[0].x1, layout.cells[1].x0);
        assert!(layout.cells[2].x1 < layout.cells[3].x0);
    }

    #[test]
    fn whitespace_has_no_cell() {
        let pool = test_pool();
        let style = black_on_white(24, [2, 2, 2, 2]);
        let (_, layout) = render_text("a b", &style, &pool).unwrap();
        assert_eq!(layout.cells.len(), 2);
    }

    #[test]
    fn empty_text_is_an_error() {
        let pool = test_pool();
        let style = black_on_white(24, [2, 2, 2, 2]);
        assert!(matches!(
            render_text("", &style, &pool),
            Err(Error::EmptyText)
        ));
    }

    #[test]
    fn neighbors_absent_matches_plain_render() {
        let pool = test_pool();
        let style = black_on_white(30, [8, 4, 8, 4]);
        let (plain, _) = render_text("texto", &style, &pool).unwrap();
        let (with, _) =
            render_with_neighbors("texto", None, None, &style, (0.3, 0.3), &pool).unwrap();
        assert_eq!(plain, with);
    }

    #[test]
    fn zero_crop_fraction_matches_plain_render() {
        let pool = test_pool();
        let style = black_on_white(30, [8, 4, 8, 4]);
        let (plain, _) = render_text("texto", &style, &pool).unwrap();
        let (with, _) =
            render_with_neighbors("texto", Some("Mg"), Some("Qy"), &style, (0.0, 0.0), &pool)
                .unwrap();
        assert_eq!(plain, with);
    }

    #[test]
    fn neighbor_ink_stays_in_padding_band() {
        let pool = test_pool();
        let style = black_on_white(32, [10, 4, 10, 4]);
        let (plain, plain_layout) = render_text("texto", &style, &pool).unwrap();
        let (with, layout) =
            render_with_neighbors("texto", Some("Mg"), Some("Qy"), &style, (0.3, 0.3), &pool)
                .unwrap();
        assert_eq!(layout, plain_layout);
        let (band_top, band_bot) = layout.ink_band.unwrap();
        // Main glyph band rows are untouched.
        for y in band_top..=band_bot {
            for x in 0..with.width() {
                assert_eq!(with.get(x, y), plain.get(x, y), "main band pixel ({x},{y})");
            }
        }
        // Some neighbor ink appeared, and only inside the padding bands.
        let mut changed = Vec::new();
        for y in 0..with.height() {
            for x in 0..with.width() {
                if with.get(x, y) != plain.get(x, y) {
                    changed.push(y);
                }
            }
        }
        assert!(!changed.is_empty(), "expected neighbor ink");
        let pad_top = style.padding[0];
        let pad_bottom = style.padding[2];
        for &y in &changed {
            let in_top = y < pad_top;
            let in_bottom = y >= with.height() - pad_bottom;
            assert!(in_top || in_bottom, "neighbor ink at row {y} outside padding");
        }
    }
}
