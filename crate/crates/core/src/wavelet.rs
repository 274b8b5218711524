//! Haar filter bank and same-size separable convolution.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use crate::error::{IqaError, Result};
use crate::imgio::GrayImage;

pub const MAX_SCALE: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FilterKind {
    Lowpass,
    Highpass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Filter1D {
    coeffs: Vec<f64>,
    scale: u32,
    kind: FilterKind,
}

impl Filter1D {
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn kind(&self) -> FilterKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }
}

/// `h_1 = [1, 1] / √2` and `g_1 = [-1, 1] / √2`.
pub fn base_filters() -> (Filter1D, Filter1D) {
    let low = Filter1D {
        coeffs: vec![FRAC_1_SQRT_2, FRAC_1_SQRT_2],
        scale: 1,
        kind: FilterKind::Lowpass,
    };
    let high = Filter1D {
        coeffs: vec![-FRAC_1_SQRT_2, FRAC_1_SQRT_2],
        scale: 1,
        kind: FilterKind::Highpass,
    };
    (low, high)
}

/// Inserts a zero after every coefficient.
pub fn upsample_dyadic(f: &Filter1D) -> Filter1D {
    let coeffs = f.coeffs.iter().flat_map(|c| [*c, 0.0]).collect();
    Filter1D {
        coeffs,
        scale: f.scale,
        kind: f.kind,
    }
}

fn full_convolution(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Scale-`scale` filter from `f_j = h_1 ⋆ (f_{j-1})↑2`, trimmed to `2^scale` taps.
pub fn haar_filter_1d(scale: u32, kind: FilterKind) -> Result<Filter1D> {
    if !(1..=MAX_SCALE).contains(&scale) {
        return Err(IqaError::param(format!(
            "filter scale must be in 1..={MAX_SCALE}, got {scale}"
        )));
    }
    let (low, high) = base_filters();
    let mut current = match kind {
        FilterKind::Lowpass => low.clone(),
        FilterKind::Highpass => high,
    };
    for j in 2..=scale {
        let up = upsample_dyadic(&current);
        let mut coeffs = full_convolution(&low.coeffs, &up.coeffs);
        coeffs.truncate(1 << j);
        current = Filter1D {
            coeffs,
            scale: j,
            kind,
        };
    }
    Ok(current)
}

/// Which image axis carries the high-pass factor.
///
/// `Vertical` is orientation 1 (`g_j` along rows, i.e. down the columns,
/// `h_j` along the horizontal axis); `Horizontal` is orientation 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    Vertical,
    Horizontal,
}

impl Orientation {
    pub const ALL: [Orientation; 2] = [Orientation::Vertical, Orientation::Horizontal];

    /// 1 or 2.
    pub fn index(self) -> usize {
        match self {
            Orientation::Vertical => 1,
            Orientation::Horizontal => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Filter2D {
    pub vertical: Filter1D,
    pub horizontal: Filter1D,
    pub orientation: Orientation,
    pub scale: u32,
}

impl Filter2D {
    pub fn haar(scale: u32, orientation: Orientation) -> Result<Self> {
        let low = haar_filter_1d(scale, FilterKind::Lowpass)?;
        let high = haar_filter_1d(scale, FilterKind::Highpass)?;
        let (vertical, horizontal) = match orientation {
            Orientation::Vertical => (high, low),
            Orientation::Horizontal => (low, high),
        };
        Ok(Filter2D {
            vertical,
            horizontal,
            orientation,
            scale,
        })
    }

    /// Row-major `vertical.len() x horizontal.len()` outer product.
    pub fn dense_kernel(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.vertical.len() * self.horizontal.len());
        for v in &self.vertical.coeffs {
            for h in &self.horizontal.coeffs {
                out.push(v * h);
            }
        }
        out
    }
}

/// Boundary extension used by [`convolve_same`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Padding {
    /// Mirror about the outer edge of the border sample: `x[-1] = x[0]`,
    /// `x[-2] = x[1]`, ...
    #[default]
    Symmetric,
    Zero,
}

impl fmt::Display for Padding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Padding::Symmetric => f.write_str("symmetric"),
            Padding::Zero => f.write_str("zero"),
        }
    }
}

impl FromStr for Padding {
    type Err = IqaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "symmetric" => Ok(Padding::Symmetric),
            "zero" => Ok(Padding::Zero),
            other => Err(IqaError::param(format!(
                "padding must be symmetric or zero, got {other}"
            ))),
        }
    }
}

/// Maps a possibly out-of-range index onto `0..n` by symmetric reflection.
pub(crate) fn reflect_index(i: isize, n: usize) -> usize {
    let n = n as isize;
    let period = 2 * n;
    let m = i.rem_euclid(period);
    (if m >= n { period - 1 - m } else { m }) as usize
}

/// Offset of the output sample inside the full convolution.
pub(crate) fn same_offset(taps: usize) -> usize {
    (taps - 1) / 2
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResponseMap {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl ResponseMap {
    pub(crate) fn from_parts(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(width * height, data.len());
        ResponseMap {
            width,
            height,
            data,
        }
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

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }
}

/// Vertical pass with `kernel` down every column of a `width x height` buffer.
fn vertical_pass(
    src: &[f64],
    width: usize,
    height: usize,
    kernel: &[f64],
    padding: Padding,
) -> Vec<f64> {
    let offset = same_offset(kernel.len()) as isize;
    let mut out = vec![0.0; src.len()];
    for y in 0..height {
        let out_row = &mut out[y * width..(y + 1) * width];
        for (t, k) in kernel.iter().enumerate() {
            let r = y as isize + offset - t as isize;
            let row = if (0..height as isize).contains(&r) {
                r as usize
            } else {
                match padding {
                    Padding::Symmetric => reflect_index(r, height),
                    Padding::Zero => continue,
                }
            };
            let src_row = &src[row * width..(row + 1) * width];
            for (o, s) in out_row.iter_mut().zip(src_row) {
                *o += k * s;
            }
        }
    }
    out
}

fn horizontal_pass(
    src: &[f64],
    width: usize,
    height: usize,
    kernel: &[f64],
    padding: Padding,
) -> Vec<f64> {
    let taps = kernel.len();
    let offset = same_offset(taps);
    // Full extension: `taps - 1 - offset` samples on the left, `offset` on the right.
    let left = taps - 1 - offset;
    let mut padded = vec![0.0; width + taps - 1];
    let mut out = vec![0.0; src.len()];
    for y in 0..height {
        let row = &src[y * width..(y + 1) * width];
        for (p, slot) in padded.iter_mut().enumerate() {
            let i = p as isize - left as isize;
            *slot = if (0..width as isize).contains(&i) {
                row[i as usize]
            } else {
                match padding {
                    Padding::Symmetric => row[reflect_index(i, width)],
                    Padding::Zero => 0.0,
                }
            };
        }
        let out_row = &mut out[y * width..(y + 1) * width];
        for (x, o) in out_row.iter_mut().enumerate() {
            // x + offset - t in image coordinates is x + offset - t + left in `padded`.
            let base = x + offset + left;
            let mut acc = 0.0;
            for (t, k) in kernel.iter().enumerate() {
                acc += k * padded[base - t];
            }
            *o = acc;
        }
    }
    out
}

pub(crate) fn convolve_separable(
    data: &[f64],
    width: usize,
    height: usize,
    filter: &Filter2D,
    padding: Padding,
) -> Result<Vec<f64>> {
    let (kh, kw) = (filter.vertical.len(), filter.horizontal.len());
    if width < kw || height < kh {
        return Err(IqaError::TooSmall {
            width,
            height,
            min_width: kw,
            min_height: kh,
        });
    }
    let tmp = vertical_pass(data, width, height, filter.vertical.coeffs(), padding);
    Ok(horizontal_pass(
        &tmp,
        width,
        height,
        filter.horizontal.coeffs(),
        padding,
    ))
}

/// Same-size true convolution, vertical pass then horizontal pass.
pub fn convolve_same(img: &GrayImage, filter: &Filter2D, padding: Padding) -> Result<ResponseMap> {
    let (w, h) = img.dimensions();
    let data = convolve_separable(img.data(), w, h, filter, padding)?;
    Ok(ResponseMap::from_parts(w, h, data))
}

/// 2×2 mean pooling; an odd trailing row or column is dropped.
pub fn subsample2(img: &GrayImage) -> Result<GrayImage> {
    let (w, h) = img.dimensions();
    if w < 2 || h < 2 {
        return Err(IqaError::TooSmall {
            width: w,
            height: h,
            min_width: 2,
            min_height: 2,
        });
    }
    let (ow, oh) = (w / 2, h / 2);
    let src = img.data();
    let mut data = Vec::with_capacity(ow * oh);
    for y in 0..oh {
        let top = &src[2 * y * w..];
        let bottom = &src[(2 * y + 1) * w..];
        for x in 0..ow {
            let sum = top[2 * x] + top[2 * x + 1] + bottom[2 * x] + bottom[2 * x + 1];
            data.push(sum / 4.0);
        }
    }
    GrayImage::new(ow, oh, data, img.range())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imgio::DynamicRange;

    const S2: f64 = std::f64::consts::SQRT_2;

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn base_filter_values() {
        let (h, g) = base_filters();
        assert_close(h.coeffs(), &[1.0 / S2, 1.0 / S2], 1e-15);
        assert_close(g.coeffs(), &[-1.0 / S2, 1.0 / S2], 1e-15);
        assert_eq!(g.coeffs().iter().sum::<f64>(), 0.0);
    }

    #[test]
    fn upsample_examples() {
        let f = |c: &[f64]| Filter1D {
            coeffs: c.to_vec(),
            scale: 1,
            kind: FilterKind::Highpass,
        };
        assert_eq!(upsample_dyadic(&f(&[-1.0, 1.0])).coeffs(), &[-1.0, 0.0, 1.0, 0.0]);
        assert_eq!(upsample_dyadic(&f(&[3.5])).coeffs(), &[3.5, 0.0]);
        assert_eq!(upsample_dyadic(&f(&[1.0, 1.0])).coeffs(), &[1.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn hand_derived_filters() {
        let g2 = haar_filter_1d(2, FilterKind::Highpass).unwrap();
        assert_close(g2.coeffs(), &[-0.5, -0.5, 0.5, 0.5], 1e-12);
        let c = 1.0 / (2.0 * S2);
        let g3 = haar_filter_1d(3, FilterKind::Highpass).unwrap();
        assert_close(g3.coeffs(), &[-c, -c, -c, -c, c, c, c, c], 1e-12);
        let h3 = haar_filter_1d(3, FilterKind::Lowpass).unwrap();
        assert_close(h3.coeffs(), &[c; 8], 1e-12);
    }

    #[test]
    fn filter_sums_and_lengths() {
        for j in 1..=MAX_SCALE {
            let g = haar_filter_1d(j, FilterKind::Highpass).unwrap();
            let h = haar_filter_1d(j, FilterKind::Lowpass).unwrap();
            assert_eq!(g.len(), 1 << j);
            assert_eq!(h.len(), 1 << j);
            assert!(g.coeffs().iter().sum::<f64>().abs() < 1e-12);
            let expected = 2f64.powf(j as f64 / 2.0);
            assert!((h.coeffs().iter().sum::<f64>() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn scale_bounds() {
        assert!(haar_filter_1d(0, FilterKind::Lowpass).is_err());
        assert!(haar_filter_1d(9, FilterKind::Highpass).is_err());
    }

    #[test]
    fn orientation_pairing() {
        let f1 = Filter2D::haar(2, Orientation::Vertical).unwrap();
        assert_eq!(f1.vertical.kind(), FilterKind::Highpass);
        assert_eq!(f1.horizontal.kind(), FilterKind::Lowpass);
        let f2 = Filter2D::haar(2, Orientation::Horizontal).unwrap();
        assert_eq!(f2.vertical.kind(), FilterKind::Lowpass);
        assert_eq!(f2.horizontal.kind(), FilterKind::Highpass);
    }

    #[test]
    fn reflect_mapping() {
        let n = 4;
        let got: Vec<usize> = (-5..9).map(|i| reflect_index(i, n)).collect();
        assert_eq!(got, vec![3, 3, 2, 1, 0, 0, 1, 2, 3, 3, 2, 1, 0, 0]);
    }

    #[test]
    fn constant_image_has_zero_highpass_response() {
        let img = GrayImage::from_fn(16, 12, DynamicRange::Byte, |_, _| 77.0).unwrap();
        for j in 1..=3 {
            for o in Orientation::ALL {
                let f = Filter2D::haar(j, o).unwrap();
                let r = convolve_same(&img, &f, Padding::Symmetric).unwrap();
                assert!(r.data().iter().all(|v| v.abs() < 1e-12));
                let z = convolve_same(&img, &f, Padding::Zero).unwrap();
                let (w, h) = z.dimensions();
                // Zero padding only disturbs a band of kernel width at the border.
                for y in 8..h.saturating_sub(8) {
                    for x in 8..w.saturating_sub(8) {
                        assert!(z.get(x, y).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn step_response_only_at_step() {
        let step = 5;
        let img = GrayImage::from_fn(12, 4, DynamicRange::Byte, |x, _| {
            if x >= step {
                100.0
            } else {
                0.0
            }
        })
        .unwrap();
        let f = Filter2D::haar(1, Orientation::Horizontal).unwrap();
        let r = convolve_same(&img, &f, Padding::Symmetric).unwrap();
        for y in 0..4 {
            for x in 0..12 {
                let v = r.get(x, y);
                if x == step {
                    // h_1 sums to √2 vertically, g_1 = [-1, 1]/√2 gives x[i-1] - x[i].
                    assert!((v + 100.0).abs() < 1e-12, "{v}");
                } else {
                    assert_eq!(v, 0.0, "x={x} y={y}");
                }
            }
        }
    }

    #[test]
    fn too_small_rejected() {
        let img = GrayImage::from_fn(7, 9, DynamicRange::Byte, |_, _| 0.0).unwrap();
        let f = Filter2D::haar(3, Orientation::Vertical).unwrap();
        assert!(matches!(
            convolve_same(&img, &f, Padding::Symmetric),
            Err(IqaError::TooSmall { .. })
        ));
    }

    #[test]
    fn subsample_examples() {
        let img = GrayImage::new(2, 2, vec![0.0, 2.0, 4.0, 6.0], DynamicRange::Byte).unwrap();
        assert_eq!(subsample2(&img).unwrap().data(), &[3.0]);

        let c = GrayImage::from_fn(4, 4, DynamicRange::Byte, |_, _| 9.5).unwrap();
        let s = subsample2(&c).unwrap();
        assert_eq!(s.dimensions(), (2, 2));
        assert!(s.data().iter().all(|v| *v == 9.5));

        let odd = GrayImage::new(3, 3, (1..=9).map(f64::from).collect(), DynamicRange::Byte)
            .unwrap();
        assert_eq!(subsample2(&odd).unwrap().data(), &[3.0]);

        let thin = GrayImage::new(1, 3, vec![0.0; 3], DynamicRange::Byte).unwrap();
        assert!(subsample2(&thin).is_err());
    }
}
