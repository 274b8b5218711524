//! Seeded synthetic images and datasets for fixtures, sweeps and timing.
//!
//! Every generated sample is an integer in `[0, 255]`, so datasets survive
//! a round trip through 8-bit PGM files unchanged.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{IqaError, Result};
use crate::haarpsi::{HaarPsiParams, HaarResponses, Preset};
use crate::imgio::{save_gray, BitDepth, DynamicRange, GrayImage};

use super::manifest::{write_manifest, ManifestRow};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn quantize(v: f64) -> f64 {
    v.round().clamp(0.0, 255.0)
}

/// Smooth shading with rectangles, disks and grating patches. Values stay
/// inside roughly `[48, 208]`, away from the clipping limits.
pub fn structured_image(width: usize, height: usize, seed: u64) -> Result<GrayImage> {
    let mut r = rng(seed);
    let (wf, hf) = (width as f64, height as f64);
    let gx = r.gen_range(-30.0..30.0);
    let gy = r.gen_range(-30.0..30.0);

    let rects: Vec<(f64, f64, f64, f64, f64)> = (0..6)
        .map(|_| {
            let x0 = r.gen_range(0.0..wf);
            let y0 = r.gen_range(0.0..hf);
            let w = r.gen_range(0.1..0.4) * wf;
            let h = r.gen_range(0.1..0.4) * hf;
            (x0, y0, w, h, r.gen_range(-35.0..35.0))
        })
        .collect();
    let disks: Vec<(f64, f64, f64, f64)> = (0..4)
        .map(|_| {
            let rad = r.gen_range(0.05..0.2) * wf.min(hf);
            (r.gen_range(0.0..wf), r.gen_range(0.0..hf), rad, r.gen_range(-30.0..30.0))
        })
        .collect();
    let gratings: Vec<(f64, f64, f64, f64, f64, f64)> = (0..2)
        .map(|_| {
            let theta: f64 = r.gen_range(0.0..std::f64::consts::PI);
            let period = r.gen_range(3.0..12.0);
            (
                r.gen_range(0.0..wf),
                r.gen_range(0.0..hf),
                0.2 * wf.min(hf),
                theta,
                period,
                r.gen_range(8.0..18.0),
            )
        })
        .collect();
    let texture = Normal::new(0.0, 2.0).expect("valid normal");

    let mut data = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let (xf, yf) = (x as f64, y as f64);
            let mut v = 128.0 + gx * (xf / wf - 0.5) + gy * (yf / hf - 0.5);
            for (x0, y0, w, h, a) in &rects {
                if xf >= *x0 && xf < x0 + w && yf >= *y0 && yf < y0 + h {
                    v += a;
                }
            }
            for (cx, cy, rad, a) in &disks {
                if (xf - cx).powi(2) + (yf - cy).powi(2) <= rad * rad {
                    v += a;
                }
            }
            for (cx, cy, half, theta, period, a) in &gratings {
                if (xf - cx).abs() < *half && (yf - cy).abs() < *half {
                    let t = xf * theta.cos() + yf * theta.sin();
                    v += a * (2.0 * std::f64::consts::PI * t / period).sin();
                }
            }
            v += texture.sample(&mut r);
            data.push(v.clamp(48.0, 208.0).round());
        }
    }
    GrayImage::new(width, height, data, DynamicRange::Byte)
}

/// Adds zero-mean Gaussian noise, then rounds and clips to `[0, 255]`.
/// Also returns the empirical standard deviation of the drawn noise.
pub fn add_gaussian_noise(img: &GrayImage, sigma: f64, seed: u64) -> Result<(GrayImage, f64)> {
    let normal = Normal::new(0.0, sigma)
        .map_err(|e| IqaError::param(format!("noise sigma {sigma}: {e}")))?;
    let mut r = rng(seed);
    let noise: Vec<f64> = (0..img.data().len()).map(|_| normal.sample(&mut r)).collect();
    let n = noise.len() as f64;
    let mean = noise.iter().sum::<f64>() / n;
    let var = noise.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let data = img
        .data()
        .iter()
        .zip(&noise)
        .map(|(v, e)| quantize(v + e))
        .collect();
    let out = GrayImage::new(img.width(), img.height(), data, DynamicRange::Byte)?;
    Ok((out, var.sqrt()))
}

/// Noise of strength `sigma` inside the block `(x0, y0, w, h)` only.
pub fn add_block_noise(
    img: &GrayImage,
    block: (usize, usize, usize, usize),
    sigma: f64,
    seed: u64,
) -> Result<GrayImage> {
    let (x0, y0, bw, bh) = block;
    let unit = Normal::new(0.0, 1.0).expect("valid normal");
    let mut r = rng(seed);
    GrayImage::from_fn(img.width(), img.height(), DynamicRange::Byte, |x, y| {
        let v = img.get(x, y);
        if x >= x0 && x < x0 + bw && y >= y0 && y < y0 + bh {
            quantize(v + sigma * unit.sample(&mut r))
        } else {
            v
        }
    })
}

/// Mean over a `(2 radius + 1)²` window with clamped borders.
pub fn box_blur(img: &GrayImage, radius: usize) -> Result<GrayImage> {
    let (w, h) = img.dimensions();
    let r = radius as isize;
    GrayImage::from_fn(w, h, DynamicRange::Byte, |x, y| {
        let mut sum = 0.0;
        for dy in -r..=r {
            for dx in -r..=r {
                let xx = (x as isize + dx).clamp(0, w as isize - 1) as usize;
                let yy = (y as isize + dy).clamp(0, h as isize - 1) as usize;
                sum += img.get(xx, yy);
            }
        }
        quantize(sum / ((2 * r + 1) * (2 * r + 1)) as f64)
    })
}

/// Noisy versions of `reference`, one per sigma, each with its empirical
/// noise level.
pub fn noise_ladder(reference: &GrayImage, sigmas: &[f64], seed: u64) -> Result<Vec<(GrayImage, f64)>> {
    sigmas
        .iter()
        .enumerate()
        .map(|(i, s)| add_gaussian_noise(reference, *s, seed.wrapping_add(i as u64)))
        .collect()
}

#[derive(Debug, Clone)]
pub struct SyntheticEntry {
    pub image_id: String,
    /// Index into [`SyntheticDataset::references`].
    pub reference: usize,
    pub distorted: GrayImage,
}

#[derive(Debug, Clone, Default)]
pub struct SyntheticDataset {
    pub references: Vec<GrayImage>,
    pub entries: Vec<SyntheticEntry>,
    /// `(image_id, grader_id, rating)`; empty means no ratings file.
    pub ratings: Vec<(String, String, f64)>,
}

impl SyntheticDataset {
    pub fn reference_of(&self, entry: &SyntheticEntry) -> &GrayImage {
        &self.references[entry.reference]
    }

    /// Writes PGM files, `<name>.csv`, `<name>.meta` and, when ratings are
    /// present, `<name>_ratings.csv` into `dir`. Returns the manifest path.
    pub fn write(&self, dir: &Path, name: &str) -> Result<PathBuf> {
        fs::create_dir_all(dir).map_err(|e| IqaError::io(dir, e))?;
        for (i, img) in self.references.iter().enumerate() {
            save_gray(img, dir.join(format!("{name}_ref{i}.pgm")), BitDepth::Eight)?;
        }
        let mut rows = Vec::with_capacity(self.entries.len());
        for e in &self.entries {
            let file = format!("{name}_{}.pgm", e.image_id);
            save_gray(&e.distorted, dir.join(&file), BitDepth::Eight)?;
            rows.push(ManifestRow {
                image_id: e.image_id.clone(),
                reference: format!("{name}_ref{}.pgm", e.reference),
                distorted: file,
                crop: None,
            });
        }
        let ratings_file = if self.ratings.is_empty() {
            None
        } else {
            let file = format!("{name}_ratings.csv");
            let mut text = String::from("image_id,grader_id,rating\n");
            for (id, g, r) in &self.ratings {
                // `{}` prints the shortest representation that parses back exactly.
                text.push_str(&format!("{id},{g},{r}\n"));
            }
            let path = dir.join(&file);
            fs::write(&path, text).map_err(|e| IqaError::io(&path, e))?;
            Some(file)
        };
        write_manifest(dir, name, &rows, ratings_file.as_deref(), false, false)
    }
}

/// Five noise levels of one structured reference; ids `s0`..`s4`.
pub fn noise_ladder_dataset(size: usize, sigmas: &[f64], seed: u64) -> Result<SyntheticDataset> {
    let reference = structured_image(size, size, seed)?;
    let entries = noise_ladder(&reference, sigmas, seed ^ 0x5eed)?
        .into_iter()
        .enumerate()
        .map(|(i, (distorted, _))| SyntheticEntry {
            image_id: format!("s{i}"),
            reference: 0,
            distorted,
        })
        .collect();
    Ok(SyntheticDataset {
        references: vec![reference],
        entries,
        ratings: Vec::new(),
    })
}

/// `count` pairs over a handful of references with mixed noise and blur,
/// rated by three graders as a noisy increasing function of the HaarPSI
/// (med) score.
pub fn rated_dataset(count: usize, size: usize, seed: u64) -> Result<SyntheticDataset> {
    let mut r = rng(seed);
    let n_refs = count.div_ceil(10).max(1);
    let references = (0..n_refs)
        .map(|i| structured_image(size, size, seed.wrapping_add(1000 + i as u64)))
        .collect::<Result<Vec<_>>>()?;
    let params = Preset::Med.params();
    let grader_noise = Normal::new(0.0, 0.02).expect("valid normal");
    let graders = [("g1", 5.0, 0.0), ("g2", 3.0, 1.0), ("g3", 7.0, -0.5)];

    let mut entries = Vec::with_capacity(count);
    let mut ratings = Vec::with_capacity(count * graders.len());
    for i in 0..count {
        let reference = i % n_refs;
        let sigma = r.gen_range(1.0..30.0);
        let noisy = add_gaussian_noise(&references[reference], sigma, r.gen())?.0;
        let distorted = if r.gen_bool(0.3) {
            box_blur(&noisy, r.gen_range(1..3))?
        } else {
            noisy
        };
        let quality = crate::haarpsi::haarpsi(&references[reference], &distorted, &params)?;
        let image_id = format!("img{i:03}");
        for (g, scale, offset) in graders {
            let rating = scale * quality + offset + grader_noise.sample(&mut r);
            ratings.push((image_id.clone(), g.to_string(), rating));
        }
        entries.push(SyntheticEntry {
            image_id,
            reference,
            distorted,
        });
    }
    Ok(SyntheticDataset {
        references,
        entries,
        ratings,
    })
}

/// A dataset whose single-grader ratings are the HaarPSI scores at `planted`
/// (full precision), so the SRCC is exactly 1 there.
///
/// Besides a noise ladder it contains a pair of images whose order flips
/// between `alpha - 0.1` and `alpha`: one with mild global noise, one with a
/// strong local defect tuned by bisection. With the smallest-C-first tie
/// rule that makes `planted` the unique winner as long as `planted.c` is the
/// smallest C on the grid and the flip holds for every smaller α.
pub fn planted_optimum_dataset(size: usize, seed: u64, planted: HaarPsiParams) -> Result<SyntheticDataset> {
    let reference = structured_image(size, size, seed)?;
    let (mild, _) = add_gaussian_noise(&reference, 6.0, seed.wrapping_add(1))?;
    let block = (size / 4, size / 4, size / 3, size / 3);
    // balance the pair halfway between the planted alpha and the grid step below
    let crossing = planted.alpha - 0.05;
    let responses = |img: &GrayImage| {
        HaarResponses::compute(&reference, img, planted.subsample, planted.padding)
    };
    let mild_field = responses(&mild)?;
    let gap = |t: f64| -> Result<f64> {
        let local = add_block_noise(&reference, block, t, seed.wrapping_add(2))?;
        let r = responses(&local)?;
        Ok(mild_field.score(planted.c, crossing) - r.score(planted.c, crossing))
    };

    // Coarse scan for a sign change, then bisect on the defect strength.
    let mut lo = 0.0;
    let g_lo = gap(lo)?;
    let mut hi = None;
    let mut t = 2.0;
    while t <= 256.0 {
        if gap(t)?.signum() != g_lo.signum() {
            hi = Some(t);
            break;
        }
        lo = t;
        t *= 1.5;
    }
    let mut hi = hi.ok_or_else(|| IqaError::stats("planted fixture: no crossing strength"))?;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if gap(mid)?.signum() == g_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let local = add_block_noise(&reference, block, hi, seed.wrapping_add(2))?;

    let mut distorted = vec![mild, local];
    for (img, _) in noise_ladder(&reference, &[1.0, 3.0, 10.0, 20.0], seed.wrapping_add(3))? {
        distorted.push(img);
    }
    let mut entries = Vec::new();
    let mut ratings = Vec::new();
    for (i, d) in distorted.into_iter().enumerate() {
        let image_id = format!("p{i}");
        let score = responses(&d)?.score(planted.c, planted.alpha);
        ratings.push((image_id.clone(), "g1".to_string(), score));
        entries.push(SyntheticEntry {
            image_id,
            reference: 0,
            distorted: d,
        });
    }
    Ok(SyntheticDataset {
        references: vec![reference],
        entries,
        ratings,
    })
}
