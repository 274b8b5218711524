//! Image ingestion and the grayscale preprocessing pipeline.
//!
//! Decoded samples live in `[0, 1]` ([`DynamicRange::Unit`]). The measures
//! operate on [`DynamicRange::Byte`] images, so the usual pipeline is
//! `load_image` → `rgb_to_gray` → optional `mat2gray_normalize` →
//! `to_byte_range` → optional `crop`.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use image::{DynamicImage, ImageBuffer, ImageError, Luma, Rgb};

use crate::error::{IqaError, Result};

/// Slack allowed when checking that samples sit inside the declared range.
pub const RANGE_TOLERANCE: f64 = 1e-9;

const RGB_WEIGHTS: [f64; 3] = [0.2989, 0.5870, 0.1140];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DynamicRange {
    /// `[0, 1]`
    Unit,
    /// `[0, 255]`
    Byte,
}

impl DynamicRange {
    pub fn max(self) -> f64 {
        match self {
            DynamicRange::Unit => 1.0,
            DynamicRange::Byte => 255.0,
        }
    }
}

impl fmt::Display for DynamicRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DynamicRange::Unit => f.write_str("unit"),
            DynamicRange::Byte => f.write_str("byte"),
        }
    }
}

fn check_dimensions(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(IqaError::ZeroDimension { width, height });
    }
    if width.checked_mul(height) != Some(len) {
        return Err(IqaError::param(format!(
            "buffer of {len} samples does not match {width}x{height}"
        )));
    }
    Ok(())
}

/// Single-channel raster stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
    range: DynamicRange,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>, range: DynamicRange) -> Result<Self> {
        check_dimensions(width, height, data.len())?;
        let max = range.max();
        if let Some(bad) = data
            .iter()
            .find(|v| !(**v >= -RANGE_TOLERANCE && **v <= max + RANGE_TOLERANCE))
        {
            return Err(IqaError::DynamicRange(format!(
                "sample {bad} outside the {range} range [0, {max}]"
            )));
        }
        Ok(GrayImage {
            width,
            height,
            data,
            range,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        range: DynamicRange,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        GrayImage::new(width, height, data, range)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn range(&self) -> DynamicRange {
        self.range
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Sample at column `x`, row `y`.
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn transpose(&self) -> GrayImage {
        let mut data = Vec::with_capacity(self.data.len());
        for x in 0..self.width {
            for y in 0..self.height {
                data.push(self.get(x, y));
            }
        }
        GrayImage {
            width: self.height,
            height: self.width,
            data,
            range: self.range,
        }
    }

    pub(crate) fn ensure_same_dimensions(&self, other: &GrayImage) -> Result<()> {
        if self.dimensions() != other.dimensions() {
            return Err(IqaError::mismatch(self.dimensions(), other.dimensions()));
        }
        Ok(())
    }

    pub(crate) fn ensure_range(&self, range: DynamicRange) -> Result<()> {
        if self.range != range {
            return Err(IqaError::DynamicRange(format!(
                "expected a {range}-range image, got {}",
                self.range
            )));
        }
        Ok(())
    }
}

/// Three-channel raster with channels in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<[f64; 3]>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, data: Vec<[f64; 3]>) -> Result<Self> {
        check_dimensions(width, height, data.len())?;
        if let Some(bad) = data
            .iter()
            .flatten()
            .find(|v| !(**v >= -RANGE_TOLERANCE && **v <= 1.0 + RANGE_TOLERANCE))
        {
            return Err(IqaError::DynamicRange(format!(
                "channel value {bad} outside [0, 1]"
            )));
        }
        Ok(RgbImage {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[[f64; 3]] {
        &self.data
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Raster {
    Rgb(RgbImage),
    Gray(GrayImage),
}

impl Raster {
    pub fn dimensions(&self) -> (usize, usize) {
        match self {
            Raster::Rgb(img) => (img.width, img.height),
            Raster::Gray(img) => img.dimensions(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitDepth {
    Eight,
    Sixteen,
}

impl BitDepth {
    fn max_sample(self) -> f64 {
        match self {
            BitDepth::Eight => 255.0,
            BitDepth::Sixteen => 65535.0,
        }
    }
}

impl FromStr for BitDepth {
    type Err = IqaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "8" => Ok(BitDepth::Eight),
            "16" => Ok(BitDepth::Sixteen),
            other => Err(IqaError::param(format!("bit depth must be 8 or 16, got {other}"))),
        }
    }
}

/// A decoded file together with the sample width it was stored at.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedImage {
    pub raster: Raster,
    pub bit_depth: BitDepth,
}

fn map_image_error(path: &Path, err: ImageError) -> IqaError {
    match err {
        ImageError::IoError(source) => IqaError::io(path, source),
        ImageError::Unsupported(e) => IqaError::UnsupportedFormat {
            path: path.to_path_buf(),
            message: e.to_string(),
        },
        other => IqaError::Decode {
            path: path.to_path_buf(),
            message: other.to_string(),
        },
    }
}

fn gray_from_samples<T: Copy + Into<f64>>(
    width: usize,
    height: usize,
    samples: &[T],
    depth: BitDepth,
) -> Result<GrayImage> {
    let scale = depth.max_sample();
    let data = samples.iter().map(|v| (*v).into() / scale).collect();
    GrayImage::new(width, height, data, DynamicRange::Unit)
}

fn rgb_from_samples<T: Copy + Into<f64>>(
    width: usize,
    height: usize,
    samples: &[T],
    depth: BitDepth,
) -> Result<RgbImage> {
    let scale = depth.max_sample();
    let data = samples
        .chunks_exact(3)
        .map(|px| [px[0].into() / scale, px[1].into() / scale, px[2].into() / scale])
        .collect();
    RgbImage::new(width, height, data)
}

/// Decodes a PNG or binary PGM/PPM file.
///
/// 8-bit samples map to `v / 255` and 16-bit samples to `v / 65535`.
pub fn load_image(path: impl AsRef<Path>) -> Result<LoadedImage> {
    let path = path.as_ref();
    let reader = image::ImageReader::open(path)
        .map_err(|e| IqaError::io(path, e))?
        .with_guessed_format()
        .map_err(|e| IqaError::io(path, e))?;
    if reader.format().is_none() {
        return Err(IqaError::UnsupportedFormat {
            path: path.to_path_buf(),
            message: "unrecognized file signature".into(),
        });
    }
    let decoded = reader.decode().map_err(|e| map_image_error(path, e))?;
    let (width, height) = (decoded.width() as usize, decoded.height() as usize);
    if width == 0 || height == 0 {
        return Err(IqaError::ZeroDimension { width, height });
    }

    let (raster, bit_depth) = match &decoded {
        DynamicImage::ImageLuma8(buf) => (
            Raster::Gray(gray_from_samples(width, height, buf.as_raw(), BitDepth::Eight)?),
            BitDepth::Eight,
        ),
        DynamicImage::ImageLuma16(buf) => (
            Raster::Gray(gray_from_samples(width, height, buf.as_raw(), BitDepth::Sixteen)?),
            BitDepth::Sixteen,
        ),
        DynamicImage::ImageRgb8(buf) => (
            Raster::Rgb(rgb_from_samples(width, height, buf.as_raw(), BitDepth::Eight)?),
            BitDepth::Eight,
        ),
        DynamicImage::ImageRgb16(buf) => (
            Raster::Rgb(rgb_from_samples(width, height, buf.as_raw(), BitDepth::Sixteen)?),
            BitDepth::Sixteen,
        ),
        DynamicImage::ImageLumaA8(_)
        | DynamicImage::ImageLumaA16(_)
        | DynamicImage::ImageRgba8(_)
        | DynamicImage::ImageRgba16(_)
        | DynamicImage::ImageRgba32F(_) => {
            return Err(IqaError::AlphaChannel {
                path: path.to_path_buf(),
            })
        }
        other => {
            return Err(IqaError::UnsupportedFormat {
                path: path.to_path_buf(),
                message: format!("sample layout {:?}", other.color()),
            })
        }
    };
    Ok(LoadedImage { raster, bit_depth })
}

fn quantize(v: f64, max_sample: f64) -> f64 {
    (v.clamp(0.0, 1.0) * max_sample).round()
}

fn save_error(path: &Path, err: ImageError) -> IqaError {
    match err {
        ImageError::IoError(source) => IqaError::io(path, source),
        other => IqaError::Format {
            path: path.to_path_buf(),
            message: other.to_string(),
        },
    }
}

/// Writes a grayscale image; the container is chosen from the file
/// extension (`.png`, `.pgm`). Samples are scaled by the image's declared
/// range so Unit and Byte images of the same content produce the same file.
pub fn save_gray(img: &GrayImage, path: impl AsRef<Path>, depth: BitDepth) -> Result<()> {
    let path = path.as_ref();
    let range_max = img.range.max();
    let (w, h) = (img.width as u32, img.height as u32);
    let result = match depth {
        BitDepth::Eight => {
            let raw = img
                .data
                .iter()
                .map(|v| quantize(v / range_max, 255.0) as u8)
                .collect();
            ImageBuffer::<Luma<u8>, Vec<u8>>::from_raw(w, h, raw)
                .expect("buffer size matches dimensions")
                .save(path)
        }
        BitDepth::Sixteen => {
            let raw = img
                .data
                .iter()
                .map(|v| quantize(v / range_max, 65535.0) as u16)
                .collect();
            ImageBuffer::<Luma<u16>, Vec<u16>>::from_raw(w, h, raw)
                .expect("buffer size matches dimensions")
                .save(path)
        }
    };
    result.map_err(|e| save_error(path, e))
}

pub fn save_rgb(img: &RgbImage, path: impl AsRef<Path>, depth: BitDepth) -> Result<()> {
    let path = path.as_ref();
    let (w, h) = (img.width as u32, img.height as u32);
    let result = match depth {
        BitDepth::Eight => {
            let raw = img
                .data
                .iter()
                .flatten()
                .map(|v| quantize(*v, 255.0) as u8)
                .collect();
            ImageBuffer::<Rgb<u8>, Vec<u8>>::from_raw(w, h, raw)
                .expect("buffer size matches dimensions")
                .save(path)
        }
        BitDepth::Sixteen => {
            let raw = img
                .data
                .iter()
                .flatten()
                .map(|v| quantize(*v, 65535.0) as u16)
                .collect();
            ImageBuffer::<Rgb<u16>, Vec<u16>>::from_raw(w, h, raw)
                .expect("buffer size matches dimensions")
                .save(path)
        }
    };
    result.map_err(|e| save_error(path, e))
}

/// Luma with the fixed weights 0.2989, 0.5870, 0.1140.
pub fn rgb_to_gray(img: &RgbImage) -> GrayImage {
    let data = img
        .data
        .iter()
        .map(|[r, g, b]| RGB_WEIGHTS[0] * r + RGB_WEIGHTS[1] * g + RGB_WEIGHTS[2] * b)
        .collect();
    GrayImage {
        width: img.width,
        height: img.height,
        data,
        range: DynamicRange::Unit,
    }
}

/// Min-max normalization to `[0, 1]`. A constant image maps to all zeros.
pub fn mat2gray_normalize(img: &GrayImage) -> GrayImage {
    let (min, max) = img
        .data
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(*v), hi.max(*v))
        });
    let span = max - min;
    let data = if span > 0.0 {
        img.data.iter().map(|v| (v - min) / span).collect()
    } else {
        vec![0.0; img.data.len()]
    };
    GrayImage {
        width: img.width,
        height: img.height,
        data,
        range: DynamicRange::Unit,
    }
}

pub fn to_byte_range(img: &GrayImage) -> Result<GrayImage> {
    img.ensure_range(DynamicRange::Unit)?;
    Ok(GrayImage {
        width: img.width,
        height: img.height,
        data: img.data.iter().map(|v| v * 255.0).collect(),
        range: DynamicRange::Byte,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CropRect {
    pub x0: usize,
    pub y0: usize,
    pub w: usize,
    pub h: usize,
}

impl CropRect {
    pub fn new(x0: usize, y0: usize, w: usize, h: usize) -> Self {
        CropRect { x0, y0, w, h }
    }

    pub fn full(width: usize, height: usize) -> Self {
        CropRect::new(0, 0, width, height)
    }

    /// `inner` is relative to `self`; the result is relative to the
    /// image `self` was taken from.
    pub fn compose(&self, inner: &CropRect) -> CropRect {
        CropRect::new(self.x0 + inner.x0, self.y0 + inner.y0, inner.w, inner.h)
    }

    pub fn fits(&self, width: usize, height: usize) -> bool {
        self.w >= 1
            && self.h >= 1
            && self.x0.checked_add(self.w).is_some_and(|r| r <= width)
            && self.y0.checked_add(self.h).is_some_and(|b| b <= height)
    }
}

impl FromStr for CropRect {
    type Err = IqaError;

    /// Parses `x,y,w,h`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(IqaError::param(format!("crop must be x,y,w,h, got {s:?}")));
        }
        let mut v = [0usize; 4];
        for (slot, part) in v.iter_mut().zip(&parts) {
            *slot = part
                .parse()
                .map_err(|_| IqaError::param(format!("bad crop component {part:?}")))?;
        }
        Ok(CropRect::new(v[0], v[1], v[2], v[3]))
    }
}

pub fn crop(img: &GrayImage, rect: &CropRect) -> Result<GrayImage> {
    if !rect.fits(img.width, img.height) {
        return Err(IqaError::CropOutOfBounds {
            x0: rect.x0,
            y0: rect.y0,
            w: rect.w,
            h: rect.h,
            width: img.width,
            height: img.height,
        });
    }
    let mut data = Vec::with_capacity(rect.w * rect.h);
    for row in rect.y0..rect.y0 + rect.h {
        let start = row * img.width + rect.x0;
        data.extend_from_slice(&img.data[start..start + rect.w]);
    }
    Ok(GrayImage {
        width: rect.w,
        height: rect.h,
        data,
        range: img.range,
    })
}
