//! VRD artifacts (form boxes, stray lines) and photometric/geometric
//! augmentations with a full applied-parameter trace.
//!
//! Application order is fixed: artifacts → photometric (noise, invert,
//! blur) → geometric (rotate, elastic, resize degradation). Artifacts
//! are drawn in the text's coordinate frame, so they must precede any
//! warp. Every pixel-modifying step records a trace entry; an empty
//! trace implies byte-identical output.
//!
//! All arithmetic that touches pixels is either 8-bit integer blending
//! or f64 kernels evaluated in a fixed order, so a given random stream
//! reproduces identical bytes on every run.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{RasterImage, Rgb};
use crate::render::GlyphLayout;

/// Box and line artifact probabilities and parameter ranges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ArtifactConfig {
    pub box_prob: f64,
    pub line_prob: f64,
    /// Inclusive count range of full-width horizontal lines.
    pub h_line_count_range: (u32, u32),
    /// Inclusive count range of full-height vertical lines.
    pub v_line_count_range: (u32, u32),
    /// Inclusive line thickness range in pixels.
    pub line_thickness_range: (u32, u32),
    /// Inclusive gray level range for line/box strokes.
    pub line_gray_range: (u8, u8),
}

impl Default for ArtifactConfig {
    fn default() -> Self {
        ArtifactConfig {
            box_prob: 0.3,
            line_prob: 0.4,
            h_line_count_range: (1, 2),
            v_line_count_range: (1, 3),
            line_thickness_range: (1, 3),
            line_gray_range: (0, 120),
        }
    }
}

impl ArtifactConfig {
    /// All probabilities zero; the config used by the no-artifacts preset.
    pub fn disabled() -> Self {
        ArtifactConfig {
            box_prob: 0.0,
            line_prob: 0.0,
            ..ArtifactConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("box_prob", self.box_prob), ("line_prob", self.line_prob)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} {p} outside [0,1]")));
            }
        }
        for (name, (lo, hi)) in [
            ("h_line_count_range", self.h_line_count_range),
            ("v_line_count_range", self.v_line_count_range),
            ("line_thickness_range", self.line_thickness_range),
        ] {
            if lo > hi {
                return Err(Error::Config(format!("{name} ({lo},{hi}) is empty")));
            }
        }
        if self.line_gray_range.0 > self.line_gray_range.1 {
            return Err(Error::Config("line_gray_range is empty".into()));
        }
        if self.line_thickness_range.0 == 0 {
            return Err(Error::Config("line thickness must be >= 1".into()));
        }
        Ok(())
    }
}

/// One probability-gated augmentation family with a sampled scalar range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GatedRange {
    pub prob: f64,
    /// Inclusive parameter range sampled when the gate fires.
    pub range: (f64, f64),
}

/// Photometric and geometric augmentation configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AugmentConfig {
    /// Rotation about the image center; degrees sampled in ±max_degrees.
    pub rotate: RotateConfig,
    /// Additive per-channel Gaussian noise; sigma sampled from the range.
    pub noise: GatedRange,
    /// Color inversion probability.
    pub invert: f64,
    /// Separable Gaussian blur; sigma sampled from the range.
    pub blur: GatedRange,
    /// Elastic deformation: displacement scale alpha and field smoothing.
    pub elastic: ElasticConfig,
    /// Bilinear downscale-then-upscale; scale sampled in (0,1).
    pub resize_degrade: GatedRange,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotateConfig {
    pub prob: f64,
    pub max_degrees: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElasticConfig {
    pub prob: f64,
    pub alpha_range: (f64, f64),
    pub smooth_sigma_range: (f64, f64),
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig {
            rotate: RotateConfig {
                prob: 0.5,
                max_degrees: 3.0,
            },
            noise: GatedRange {
                prob: 0.5,
                range: (2.0, 12.0),
            },
            invert: 0.1,
            blur: GatedRange {
                prob: 0.5,
                range: (0.5, 1.5),
            },
            elastic: ElasticConfig {
                prob: 0.5,
                alpha_range: (8.0, 34.0),
                smooth_sigma_range: (3.0, 5.0),
            },
            resize_degrade: GatedRange {
                prob: 0.5,
                range: (0.5, 0.9),
            },
        }
    }
}

impl AugmentConfig {
    /// All probabilities zero; the config used by the "none" preset.
    pub fn disabled() -> Self {
        let mut cfg = AugmentConfig::default();
        cfg.rotate.prob = 0.0;
        cfg.noise.prob = 0.0;
        cfg.invert = 0.0;
        cfg.blur.prob = 0.0;
        cfg.elastic.prob = 0.0;
        cfg.resize_degrade.prob = 0.0;
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        let probs = [
            ("rotate.prob", self.rotate.prob),
            ("noise.prob", self.noise.prob),
            ("invert", self.invert),
            ("blur.prob", self.blur.prob),
            ("elastic.prob", self.elastic.prob),
            ("resize_degrade.prob", self.resize_degrade.prob),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} {p} outside [0,1]")));
            }
        }
        let ranges = [
            ("noise.range", self.noise.range, 0.0f64),
            ("blur.range", self.blur.range, 0.0),
            ("elastic.alpha_range", self.elastic.alpha_range, 0.0),
            (
                "elastic.smooth_sigma_range",
                self.elastic.smooth_sigma_range,
                0.0,
            ),
        ];
        for (name, (lo, hi), min) in ranges {
            if lo > hi || lo < min {
                return Err(Error::Config(format!("{name} ({lo},{hi}) is invalid")));
            }
        }
        if self.rotate.max_degrees < 0.0 {
            return Err(Error::Config("rotate.max_degrees must be >= 0".into()));
        }
        let (lo, hi) = self.resize_degrade.range;
        if self.resize_degrade.prob > 0.0 && !(lo > 0.0 && hi < 1.0 && lo <= hi) {
            return Err(Error::Config(format!(
                "resize_degrade.range ({lo},{hi}) must lie within (0,1)"
            )));
        }
        Ok(())
    }
}

/// The fixed augmentation vocabulary trace entries draw their names from.
pub const TRACE_NAMES: &[&str] = &[
    "box",
    "h_line",
    "v_line",
    "noise",
    "invert",
    "blur",
    "rotate",
    "elastic",
    "resize_degrade",
];

/// One applied augmentation step: its name and sampled parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub name: String,
    pub params: serde_json::Value,
}

impl TraceEntry {
    fn new(name: &'static str, params: serde_json::Value) -> TraceEntry {
        debug_assert!(TRACE_NAMES.contains(&name), "unknown trace name {name}");
        TraceEntry {
            name: name.to_string(),
            params,
        }
    }
}

/// Ordered record of every pixel-modifying step, in application order.
pub type AugmentTrace = Vec<TraceEntry>;

/// Uniform sample in `[lo, hi]` that never panics on degenerate ranges
/// and always consumes exactly one draw.
fn uniform_in<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    let u: f64 = rng.random();
    lo + u * (hi - lo)
}

fn fill_rows(img: &mut RasterImage, y0: u32, y1: u32, color: Rgb) {
    for y in y0..y1.min(img.height()) {
        for x in 0..img.width() {
            img.set(x, y, color);
        }
    }
}

fn fill_cols(img: &mut RasterImage, x0: u32, x1: u32, color: Rgb) {
    for x in x0..x1.min(img.width()) {
        for y in 0..img.height() {
            img.set(x, y, color);
        }
    }
}

fn draw_rect_outline(img: &mut RasterImage, x0: u32, y0: u32, x1: u32, y1: u32, t: u32, color: Rgb) {
    // Inclusive corners; strokes grow inward.
    for dy in 0..t {
        for x in x0..=x1.min(img.width() - 1) {
            if y0 + dy < img.height() {
                img.set(x, y0 + dy, color);
            }
            if y1 >= dy && y1 - dy < img.height() {
                img.set(x, y1 - dy, color);
            }
        }
    }
    for dx in 0..t {
        for y in y0..=y1.min(img.height() - 1) {
            if x0 + dx < img.width() {
                img.set(x0 + dx, y, color);
            }
            if x1 >= dx && x1 - dx < img.width() {
                img.set(x1 - dx, y, color);
            }
        }
    }
}

const BOX_MARGIN: u32 = 2;

/// Draws the comb-field box and stray-line artifacts.
///
/// The box is an outer rectangle around the glyph band plus vertical
/// separators at shared character-cell edges (spaces leave a gap and get
/// no separator), so artifacts never change what the label should read.
/// Lines may legitimately cross glyphs.
pub fn apply_artifacts<R: Rng>(
    img: &RasterImage,
    layout: &GlyphLayout,
    cfg: &ArtifactConfig,
    rng: &mut R,
) -> Result<(RasterImage, AugmentTrace)> {
    cfg.validate()?;
    let mut out = img.clone();
    let mut trace = AugmentTrace::new();

    let gate: f64 = rng.random();
    if gate < cfg.box_prob {
        if let (Some((band_top, band_bot)), false) = (layout.ink_band, layout.cells.is_empty()) {
            let t = rng.random_range(1..=2u32);
            let gray = rng.random_range(cfg.line_gray_range.0..=cfg.line_gray_range.1);
            let color = [gray, gray, gray];
            let x0 = layout.cells.first().unwrap().x0.saturating_sub(BOX_MARGIN);
            let x1 = (layout.cells.last().unwrap().x1 + BOX_MARGIN - 1).min(out.width() - 1);
            let y0 = band_top.saturating_sub(BOX_MARGIN);
            let y1 = (band_bot + BOX_MARGIN).min(out.height() - 1);
            draw_rect_outline(&mut out, x0, y0, x1, y1, t, color);
            let mut separators = Vec::new();
            for w in layout.cells.windows(2) {
                if w[0].x1 == w[1].x0 {
                    let x = w[0].x1;
                    for dx in 0..t {
                        if x + dx <= x1 {
                            fill_col_span(&mut out, x + dx, y0, y1, color);
                        }
                    }
                    separators.push(x);
                }
            }
            trace.push(TraceEntry::new(
                "box",
                serde_json::json!({
                    "x0": x0, "y0": y0, "x1": x1, "y1": y1,
                    "thickness": t, "gray": gray, "separators": separators,
                }),
            ));
        }
    }

    let gate: f64 = rng.random();
    if gate < cfg.line_prob {
        let h_count = rng.random_range(cfg.h_line_count_range.0..=cfg.h_line_count_range.1);
        let v_count = rng.random_range(cfg.v_line_count_range.0..=cfg.v_line_count_range.1);
        for _ in 0..h_count {
            let y = rng.random_range(0..out.height());
            let t = rng.random_range(cfg.line_thickness_range.0..=cfg.line_thickness_range.1);
            let gray = rng.random_range(cfg.line_gray_range.0..=cfg.line_gray_range.1);
            fill_rows(&mut out, y, y + t, [gray, gray, gray]);
            trace.push(TraceEntry::new(
                "h_line",
                serde_json::json!({"y": y, "thickness": t, "gray": gray}),
            ));
        }
        for _ in 0..v_count {
            let x = rng.random_range(0..out.width());
            let t = rng.random_range(cfg.line_thickness_range.0..=cfg.line_thickness_range.1);
            let gray = rng.random_range(cfg.line_gray_range.0..=cfg.line_gray_range.1);
            fill_cols(&mut out, x, x + t, [gray, gray, gray]);
            trace.push(TraceEntry::new(
                "v_line",
                serde_json::json!({"x": x, "thickness": t, "gray": gray}),
            ));
        }
    }
    Ok((out, trace))
}

fn fill_col_span(img: &mut RasterImage, x: u32, y0: u32, y1: u32, color: Rgb) {
    for y in y0..=y1.min(img.height() - 1) {
        img.set(x, y, color);
    }
}

/// Standard-normal generator: Box-Muller over the sample's own uniform
/// stream, so noise is reproducible from the seed alone.
struct Gauss {
    spare: Option<f64>,
}

impl Gauss {
    fn new() -> Gauss {
        Gauss { spare: None }
    }

    fn next<R: Rng>(&mut self, rng: &mut R) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let mut u1: f64 = rng.random();
        while u1 <= f64::MIN_POSITIVE {
            u1 = rng.random();
        }
        let u2: f64 = rng.random();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }
}

/// Normalized 1-D Gaussian kernel with radius `ceil(3σ)`.
fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    if sigma <= 0.0 {
        return vec![1.0];
    }
    let radius = (3.0 * sigma).ceil() as i64;
    let mut kernel = Vec::with_capacity((2 * radius + 1) as usize);
    let denom = 2.0 * sigma * sigma;
    for d in -radius..=radius {
        kernel.push((-((d * d) as f64) / denom).exp());
    }
    let sum: f64 = kernel.iter().sum();
    for k in &mut kernel {
        *k /= sum;
    }
    kernel
}

/// Separable convolution of an f64 plane with edge replication.
fn convolve_plane(plane: &[f64], width: usize, height: usize, kernel: &[f64]) -> Vec<f64> {
    let radius = (kernel.len() / 2) as i64;
    let mut tmp = vec![0.0f64; plane.len()];
    for y in 0..height {
        for x in 0..width {
            let mut acc = 0.0;
            for (i, k) in kernel.iter().enumerate() {
                let sx = (x as i64 + i as i64 - radius).clamp(0, width as i64 - 1) as usize;
                acc += k * plane[y * width + sx];
            }
            tmp[y * width + x] = acc;
        }
    }
    let mut out = vec![0.0f64; plane.len()];
    for y in 0..height {
        for x in 0..width {
            let mut acc = 0.0;
            for (i, k) in kernel.iter().enumerate() {
                let sy = (y as i64 + i as i64 - radius).clamp(0, height as i64 - 1) as usize;
                acc += k * tmp[sy * width + x];
            }
            out[y * width + x] = acc;
        }
    }
    out
}

/// Separable Gaussian blur: f64 intermediates, one final round per pixel.
pub fn gaussian_blur(img: &RasterImage, sigma: f64) -> RasterImage {
    let kernel = gaussian_kernel(sigma);
    if kernel.len() == 1 {
        return img.clone();
    }
    let (w, h) = (img.width() as usize, img.height() as usize);
    let mut out = img.clone();
    for ch in 0..3 {
        let plane: Vec<f64> = img.pixels()[ch..]
            .iter()
            .step_by(3)
            .map(|&v| v as f64)
            .collect();
        let blurred = convolve_plane(&plane, w, h, &kernel);
        for (i, v) in blurred.iter().enumerate() {
            out.pixels_mut()[i * 3 + ch] = (v + 0.5).floor().clamp(0.0, 255.0) as u8;
        }
    }
    out
}

/// Applies noise → invert → blur, each gated by its probability.
pub fn apply_photometric<R: Rng>(
    img: &RasterImage,
    cfg: &AugmentConfig,
    rng: &mut R,
) -> Result<(RasterImage, AugmentTrace)> {
    cfg.validate()?;
    let mut out = img.clone();
    let mut trace = AugmentTrace::new();

    let gate: f64 = rng.random();
    if gate < cfg.noise.prob {
        let sigma = uniform_in(rng, cfg.noise.range.0, cfg.noise.range.1);
        let mut gauss = Gauss::new();
        for v in out.pixels_mut() {
            let noisy = *v as f64 + sigma * gauss.next(rng);
            *v = (noisy + 0.5).floor().clamp(0.0, 255.0) as u8;
        }
        trace.push(TraceEntry::new("noise", serde_json::json!({"sigma": sigma})));
    }

    let gate: f64 = rng.random();
    if gate < cfg.invert {
        for v in out.pixels_mut() {
            *v = 255 - *v;
        }
        trace.push(TraceEntry::new("invert", serde_json::json!({})));
    }

    let gate: f64 = rng.random();
    if gate < cfg.blur.prob {
        let sigma = uniform_in(rng, cfg.blur.range.0, cfg.blur.range.1);
        out = gaussian_blur(&out, sigma);
        trace.push(TraceEntry::new("blur", serde_json::json!({"sigma": sigma})));
    }
    Ok((out, trace))
}

/// Most frequent pixel among the four corners: the fill color used when
/// a rotation exposes canvas outside the original image.
fn modal_corner(img: &RasterImage) -> Rgb {
    let corners = [
        img.get(0, 0),
        img.get(img.width() - 1, 0),
        img.get(0, img.height() - 1),
        img.get(img.width() - 1, img.height() - 1),
    ];
    let mut best = corners[0];
    let mut best_count = 0;
    for c in corners {
        let count = corners.iter().filter(|&&o| o == c).count();
        if count > best_count {
            best = c;
            best_count = count;
        }
    }
    best
}

fn bilinear_at(img: &RasterImage, sx: f64, sy: f64, fill: Option<Rgb>) -> Rgb {
    let x0 = sx.floor();
    let y0 = sy.floor();
    let fx = sx - x0;
    let fy = sy - y0;
    let sample = |ix: i64, iy: i64| -> [f64; 3] {
        match fill {
            Some(bg) => {
                if ix < 0 || iy < 0 || ix >= img.width() as i64 || iy >= img.height() as i64 {
                    [bg[0] as f64, bg[1] as f64, bg[2] as f64]
                } else {
                    let p = img.get(ix as u32, iy as u32);
                    [p[0] as f64, p[1] as f64, p[2] as f64]
                }
            }
            None => {
                // Edge replication.
                let cx = ix.clamp(0, img.width() as i64 - 1) as u32;
                let cy = iy.clamp(0, img.height() as i64 - 1) as u32;
                let p = img.get(cx, cy);
                [p[0] as f64, p[1] as f64, p[2] as f64]
            }
        }
    };
    let (x0i, y0i) = (x0 as i64, y0 as i64);
    let p00 = sample(x0i, y0i);
    let p10 = sample(x0i + 1, y0i);
    let p01 = sample(x0i, y0i + 1);
    let p11 = sample(x0i + 1, y0i + 1);
    let mut out = [0u8; 3];
    for ch in 0..3 {
        let top = p00[ch] * (1.0 - fx) + p10[ch] * fx;
        let bot = p01[ch] * (1.0 - fx) + p11[ch] * fx;
        let v = top * (1.0 - fy) + bot * fy;
        out[ch] = (v + 0.5).floor().clamp(0.0, 255.0) as u8;
    }
    out
}

/// Rotates about the image center with bilinear resampling; the canvas
/// grows to contain the rotated extent and exposed area fills with `fill`.
pub fn rotate_image(img: &RasterImage, degrees: f64, fill: Rgb) -> RasterImage {
    let theta = degrees.to_radians();
    let (c, s) = (theta.cos(), theta.sin());
    let (w, h) = (img.width() as f64, img.height() as f64);
    // The epsilon absorbs sin/cos representation error at right angles.
    let new_w = ((w * c.abs() + h * s.abs() - 1e-6).ceil().max(1.0)) as u32;
    let new_h = ((w * s.abs() + h * c.abs() - 1e-6).ceil().max(1.0)) as u32;
    let mut out = RasterImage::filled(new_w, new_h, fill);
    let (cx_src, cy_src) = (w / 2.0, h / 2.0);
    let (cx_dst, cy_dst) = (new_w as f64 / 2.0, new_h as f64 / 2.0);
    for y in 0..new_h {
        for x in 0..new_w {
            let dx = x as f64 + 0.5 - cx_dst;
            let dy = y as f64 + 0.5 - cy_dst;
            // Inverse rotation of the dest offset.
            let sx = c * dx + s * dy + cx_src - 0.5;
            let sy = -s * dx + c * dy + cy_src - 0.5;
            out.set(x, y, bilinear_at(img, sx, sy, Some(fill)));
        }
    }
    out
}

/// Warps with a per-pixel displacement field (edge-replicated sampling).
fn elastic_warp(img: &RasterImage, dx: &[f64], dy: &[f64]) -> RasterImage {
    let (w, h) = (img.width(), img.height());
    let mut out = img.clone();
    for y in 0..h {
        for x in 0..w {
            let i = (y * w + x) as usize;
            let sx = x as f64 + dx[i];
            let sy = y as f64 + dy[i];
            out.set(x, y, bilinear_at(img, sx, sy, None));
        }
    }
    out
}

/// Bilinear resize with the half-pixel center convention.
pub fn resize_bilinear(img: &RasterImage, new_w: u32, new_h: u32) -> RasterImage {
    let mut out = RasterImage::filled(new_w, new_h, [0, 0, 0]);
    let sx_ratio = img.width() as f64 / new_w as f64;
    let sy_ratio = img.height() as f64 / new_h as f64;
    for y in 0..new_h {
        for x in 0..new_w {
            let sx = (x as f64 + 0.5) * sx_ratio - 0.5;
            let sy = (y as f64 + 0.5) * sy_ratio - 0.5;
            out.set(x, y, bilinear_at(img, sx, sy, None));
        }
    }
    out
}

/// Applies rotate → elastic → resize degradation, each gated by its
/// probability.
pub fn apply_geometric<R: Rng>(
    img: &RasterImage,
    cfg: &AugmentConfig,
    rng: &mut R,
) -> Result<(RasterImage, AugmentTrace)> {
    cfg.validate()?;
    let mut out = img.clone();
    let mut trace = AugmentTrace::new();

    let gate: f64 = rng.random();
    if gate < cfg.rotate.prob {
        let degrees = uniform_in(rng, -cfg.rotate.max_degrees, cfg.rotate.max_degrees);
        let fill = modal_corner(&out);
        out = rotate_image(&out, degrees, fill);
        trace.push(TraceEntry::new(
            "rotate",
            serde_json::json!({"degrees": degrees}),
        ));
    }

    let gate: f64 = rng.random();
    if gate < cfg.elastic.prob {
        let alpha = uniform_in(rng, cfg.elastic.alpha_range.0, cfg.elastic.alpha_range.1);
        let smooth_sigma = uniform_in(
            rng,
            cfg.elastic.smooth_sigma_range.0,
            cfg.elastic.smooth_sigma_range.1,
        );
        let (w, h) = (out.width() as usize, out.height() as usize);
        // Field draw order is fixed: the x field first, then the y field,
        // both row-major.
        let mut dx: Vec<f64> = (0..w * h).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let mut dy: Vec<f64> = (0..w * h).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let kernel = gaussian_kernel(smooth_sigma);
        if kernel.len() > 1 {
            dx = convolve_plane(&dx, w, h, &kernel);
            dy = convolve_plane(&dy, w, h, &kernel);
        }
        for v in dx.iter_mut().chain(dy.iter_mut()) {
            *v *= alpha;
        }
        out = elastic_warp(&out, &dx, &dy);
        trace.push(TraceEntry::new(
            "elastic",
            serde_json::json!({"alpha": alpha, "smooth_sigma": smooth_sigma}),
        ));
    }

    let gate: f64 = rng.random();
    if gate < cfg.resize_degrade.prob {
        let scale = uniform_in(rng, cfg.resize_degrade.range.0, cfg.resize_degrade.range.1);
        let (w, h) = (out.width(), out.height());
        let dw = ((w as f64 * scale).round() as u32).max(1);
        let dh = ((h as f64 * scale).round() as u32).max(1);
        let small = resize_bilinear(&out, dw, dh);
        out = resize_bilinear(&small, w, h);
        trace.push(TraceEntry::new(
            "resize_degrade",
            serde_json::json!({"scale": scale}),
        ));
    }
    Ok((out, trace))
}

/// Full augmentation: artifacts → photometric → geometric, with the
/// concatenated trace.
pub fn augment<R: Rng>(
    img: &RasterImage,
    layout: &GlyphLayout,
    artifact_cfg: &ArtifactConfig,
    augment_cfg: &AugmentConfig,
    rng: &mut R,
) -> Result<(RasterImage, AugmentTrace)> {
    let (out, mut trace) = apply_artifacts(img, layout, artifact_cfg, rng)?;
    let (out, photo_trace) = apply_photometric(&out, augment_cfg, rng)?;
    trace.extend(photo_trace);
    let (out, geo_trace) = apply_geometric(&out, augment_cfg, rng)?;
    trace.extend(geo_trace);
    Ok((out, trace))
}

/// Named ablation presets mirroring the augmentation-effect comparisons.
pub const PRESET_NAMES: &[&str] = &["comprehensive", "none", "no-elastic", "no-artifacts"];

/// Resolves a preset name to its configuration pair.
///
/// `with-hw-generation` names an external generative-model column and is
/// deliberately unsupported.
pub fn preset_configs(name: &str) -> Result<(ArtifactConfig, AugmentConfig)> {
    match name {
        "comprehensive" => Ok((ArtifactConfig::default(), AugmentConfig::default())),
        "none" => Ok((ArtifactConfig::disabled(), AugmentConfig::disabled())),
        "no-elastic" => {
            let mut cfg = AugmentConfig::default();
            cfg.elastic.prob = 0.0;
            Ok((ArtifactConfig::default(), cfg))
        }
        "no-artifacts" => Ok((ArtifactConfig::disabled(), AugmentConfig::default())),
        "with-hw-generation" => Err(Error::Unsupported(
            "external generative model (handwriting synthesis is out of scope)".into(),
        )),
        other => Err(Error::Config(format!("unknown preset {other:?}"))),
    }
}
