//! RGB 8-bit image buffer shared by the renderer, augmentor, and pipeline.

use std::path::Path;

use crate::error::{Error, Result};

/// An RGB color as `[r, g, b]` with 8-bit channels.
pub type Rgb = [u8; 3];

/// Relative luminance on the 0–255 scale (ITU BT.601 weights).
pub fn luma(c: Rgb) -> f64 {
    0.299 * c[0] as f64 + 0.587 * c[1] as f64 + 0.114 * c[2] as f64
}

/// A width × height RGB image with a row-major 8-bit pixel buffer.
///
/// The buffer length is always `width * height * 3` and both dimensions
/// are at least 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl RasterImage {
    /// Creates an image filled with a solid color.
    pub fn filled(width: u32, height: u32, color: Rgb) -> RasterImage {
        assert!(width >= 1 && height >= 1, "image dimensions must be >= 1");
        let mut pixels = Vec::with_capacity(width as usize * height as usize * 3);
        for _ in 0..width as usize * height as usize {
            pixels.extend_from_slice(&color);
        }
        RasterImage {
            width,
            height,
            pixels,
        }
    }

    /// Wraps an existing row-major RGB buffer.
    pub fn from_pixels(width: u32, height: u32, pixels: Vec<u8>) -> RasterImage {
        assert!(width >= 1 && height >= 1, "image dimensions must be >= 1");
        assert_eq!(
            pixels.len(),
            width as usize * height as usize * 3,
            "pixel buffer length must be width * height * 3"
        );
        RasterImage {
            width,
            height,
            pixels,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> Rgb {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, c: Rgb) {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        self.pixels[i..i + 3].copy_from_slice(&c);
    }

    /// Copies the axis-aligned region `[x0, x1) × [y0, y1)` into a new image.
    pub fn crop(&self, x0: u32, y0: u32, x1: u32, y1: u32) -> RasterImage {
        assert!(x0 < x1 && y0 < y1, "empty crop region");
        assert!(x1 <= self.width && y1 <= self.height, "crop out of bounds");
        let (w, h) = (x1 - x0, y1 - y0);
        let mut pixels = Vec::with_capacity(w as usize * h as usize * 3);
        for y in y0..y1 {
            let row = (y as usize * self.width as usize + x0 as usize) * 3;
            pixels.extend_from_slice(&self.pixels[row..row + w as usize * 3]);
        }
        RasterImage::from_pixels(w, h, pixels)
    }

    /// Encodes the image as PNG bytes.
    pub fn to_png(&self) -> Vec<u8> {
        let mut out = Vec::new();
        let enc = image::codecs::png::PngEncoder::new(&mut out);
        image::ImageEncoder::write_image(
            enc,
            &self.pixels,
            self.width,
            self.height,
            image::ExtendedColorType::Rgb8,
        )
        .expect("in-memory PNG encoding cannot fail");
        out
    }

    /// Writes the image as a PNG file.
    pub fn save_png(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_png()).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Loads any supported image file and converts it to RGB.
    pub fn load(path: &Path) -> Result<RasterImage> {
        let img = image::open(path).map_err(|e| Error::ImageDecode {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        let rgb = img.to_rgb8();
        Ok(RasterImage::from_pixels(
            rgb.width(),
            rgb.height(),
            rgb.into_raw(),
        ))
    }

    /// Decodes PNG bytes into an image.
    pub fn from_png(bytes: &[u8]) -> Result<RasterImage> {
        let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png).map_err(
            |e| Error::ImageDecode {
                path: "<memory>".into(),
                reason: e.to_string(),
            },
        )?;
        let rgb = img.to_rgb8();
        Ok(RasterImage::from_pixels(
            rgb.width(),
            rgb.height(),
            rgb.into_raw(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filled_and_get_set() {
        let mut img = RasterImage::filled(3, 2, [10, 20, 30]);
        assert_eq!(img.pixels().len(), 3 * 2 * 3);
        assert_eq!(img.get(2, 1), [10, 20, 30]);
        img.set(1, 0, [1, 2, 3]);
        assert_eq!(img.get(1, 0), [1, 2, 3]);
        assert_eq!(img.get(0, 0), [10, 20, 30]);
    }

    #[test]
    fn crop_copies_region() {
        let mut img = RasterImage::filled(4, 4, [0, 0, 0]);
        img.set(2, 1, [9, 9, 9]);
        let c = img.crop(2, 1, 4, 3);
        assert_eq!(c.width(), 2);
        assert_eq!(c.height(), 2);
        assert_eq!(c.get(0, 0), [9, 9, 9]);
        assert_eq!(c.get(1, 1), [0, 0, 0]);
    }

    #[test]
    fn png_round_trip() {
        let mut img = RasterImage::filled(5, 3, [200, 100, 50]);
        img.set(4, 2, [1, 2, 3]);
        let png = img.to_png();
        let back = RasterImage::from_png(&png).unwrap();
        assert_eq!(back, img);
    }

    #[test]
    fn luma_weights() {
        assert_eq!(luma([255, 255, 255]), 255.0);
        assert_eq!(luma([0, 0, 0]), 0.0);
        assert!((luma([255, 0, 0]) - 76.245).abs() < 1e-9);
    }
}
