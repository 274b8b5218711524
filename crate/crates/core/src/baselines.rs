//! PSNR and single-scale SSIM.

use crate::error::{IqaError, Result};
use crate::imgio::GrayImage;

fn ensure_comparable(f1: &GrayImage, f2: &GrayImage) -> Result<()> {
    f1.ensure_same_dimensions(f2)?;
    if f1.range() != f2.range() {
        return Err(IqaError::DynamicRange(format!(
            "images have different ranges ({} vs {})",
            f1.range(),
            f2.range()
        )));
    }
    Ok(())
}

/// `10 log10(peak² / MSE)`; identical images give `f64::INFINITY`.
pub fn psnr(f1: &GrayImage, f2: &GrayImage, peak: f64) -> Result<f64> {
    ensure_comparable(f1, f2)?;
    if !(peak > 0.0) {
        return Err(IqaError::param(format!("peak must be positive, got {peak}")));
    }
    let sum: f64 = f1
        .data()
        .iter()
        .zip(f2.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let mse = sum / f1.data().len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (peak * peak / mse).log10())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsimConfig {
    /// Gaussian window side length.
    pub window: usize,
    pub sigma: f64,
    pub k1: f64,
    pub k2: f64,
    pub peak: f64,
}

impl Default for SsimConfig {
    fn default() -> Self {
        SsimConfig {
            window: 11,
            sigma: 1.5,
            k1: 0.01,
            k2: 0.03,
            peak: 255.0,
        }
    }
}

impl SsimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window < 3 || self.window.is_multiple_of(2) {
            return Err(IqaError::param(format!(
                "SSIM window must be odd and at least 3, got {}",
                self.window
            )));
        }
        if !(self.sigma > 0.0 && self.k1 > 0.0 && self.k2 > 0.0 && self.peak > 0.0) {
            return Err(IqaError::param(
                "SSIM sigma, k1, k2 and peak must be positive",
            ));
        }
        Ok(())
    }

    /// Normalized 1-D Gaussian; the 2-D window is its outer product.
    pub fn gaussian(&self) -> Vec<f64> {
        let r = (self.window / 2) as f64;
        let raw: Vec<f64> = (0..self.window)
            .map(|i| {
                let d = i as f64 - r;
                (-(d * d) / (2.0 * self.sigma * self.sigma)).exp()
            })
            .collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|v| v / total).collect()
    }
}

/// Separable Gaussian filtering restricted to positions where the window
/// fits entirely inside the image.
fn filter_valid(src: &[f64], width: usize, height: usize, kernel: &[f64]) -> Vec<f64> {
    let n = kernel.len();
    let (ow, oh) = (width - n + 1, height - n + 1);
    let mut rows = vec![0.0; ow * height];
    for y in 0..height {
        let row = &src[y * width..(y + 1) * width];
        for x in 0..ow {
            rows[y * ow + x] = kernel.iter().zip(&row[x..x + n]).map(|(k, v)| k * v).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for (t, k) in kernel.iter().enumerate() {
            let src_row = &rows[(y + t) * ow..(y + t + 1) * ow];
            for (o, v) in out[y * ow..(y + 1) * ow].iter_mut().zip(src_row) {
                *o += k * v;
            }
        }
    }
    out
}

/// Mean SSIM over the valid region with Gaussian-weighted local statistics.
pub fn ssim(f1: &GrayImage, f2: &GrayImage, cfg: &SsimConfig) -> Result<f64> {
    ensure_comparable(f1, f2)?;
    cfg.validate()?;
    let (w, h) = f1.dimensions();
    if w < cfg.window || h < cfg.window {
        return Err(IqaError::TooSmall {
            width: w,
            height: h,
            min_width: cfg.window,
            min_height: cfg.window,
        });
    }
    let kernel = cfg.gaussian();
    let (x, y) = (f1.data(), f2.data());
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();

    let mu_x = filter_valid(x, w, h, &kernel);
    let mu_y = filter_valid(y, w, h, &kernel);
    let e_xx = filter_valid(&xx, w, h, &kernel);
    let e_yy = filter_valid(&yy, w, h, &kernel);
    let e_xy = filter_valid(&xy, w, h, &kernel);

    let c1 = (cfg.k1 * cfg.peak).powi(2);
    let c2 = (cfg.k2 * cfg.peak).powi(2);
    let mut total = 0.0;
    for i in 0..mu_x.len() {
        let (mx, my) = (mu_x[i], mu_y[i]);
        let var_x = e_xx[i] - mx * mx;
        let var_y = e_yy[i] - my * my;
        let cov = e_xy[i] - mx * my;
        total += ((2.0 * mx * my + c1) * (2.0 * cov + c2))
            / ((mx * mx + my * my + c1) * (var_x + var_y + c2));
    }
    Ok(total / mu_x.len() as f64)
}
