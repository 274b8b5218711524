//! Brute-force reference implementations used as oracles by the integration
//! tests. Nothing here calls into the library's numerical code: filters are
//! written out in closed form, convolution is a dense per-pixel loop, and
//! the statistics are the textbook sums.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use iqa_core::imgio::{DynamicRange, GrayImage};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Row-major uniform noise in `[0, 255]`.
pub fn random_pixels(r: &mut ChaCha8Rng, w: usize, h: usize) -> Vec<f64> {
    (0..w * h).map(|_| r.gen_range(0.0..=255.0)).collect()
}

pub fn byte_image(w: usize, h: usize, data: Vec<f64>) -> GrayImage {
    GrayImage::new(w, h, data, DynamicRange::Byte).unwrap()
}

/// Reference plus a perturbed copy, clipped to `[0, 255]`.
pub fn random_pair(r: &mut ChaCha8Rng, w: usize, h: usize, noise: f64) -> (Vec<f64>, Vec<f64>) {
    let a = random_pixels(r, w, h);
    let b = a
        .iter()
        .map(|v| (v + r.gen_range(-noise..=noise)).clamp(0.0, 255.0))
        .collect();
    (a, b)
}

/// Scale-`j` Haar low-pass: `2^j` taps of `2^(-j/2)`.
pub fn oracle_lowpass(j: u32) -> Vec<f64> {
    let n = 1usize << j;
    vec![2f64.powf(-(j as f64) / 2.0); n]
}

/// Scale-`j` Haar high-pass: `2^(j-1)` taps of `-2^(-j/2)` then as many of `+2^(-j/2)`.
pub fn oracle_highpass(j: u32) -> Vec<f64> {
    let n = 1usize << j;
    let a = 2f64.powf(-(j as f64) / 2.0);
    (0..n).map(|i| if i < n / 2 { -a } else { a }).collect()
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum OraclePad {
    Mirror,
    Zero,
}

fn mirror(mut i: i64, n: i64) -> i64 {
    loop {
        if i < 0 {
            i = -i - 1;
        } else if i >= n {
            i = 2 * n - 1 - i;
        } else {
            return i;
        }
    }
}

/// Dense same-size true 2-D convolution.
/// `out[y][x] = Σ_{u,v} k[u][v] · img[y + oy - u][x + ox - v]`, `o = (len - 1) / 2`.
pub fn oracle_conv2(
    img: &[f64],
    w: usize,
    h: usize,
    kernel: &[Vec<f64>],
    pad: OraclePad,
) -> Vec<f64> {
    let kh = kernel.len() as i64;
    let kw = kernel[0].len() as i64;
    let (oy, ox) = ((kh - 1) / 2, (kw - 1) / 2);
    let mut out = vec![0.0; w * h];
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let mut acc = 0.0;
            for u in 0..kh {
                for v in 0..kw {
                    let (mut sy, mut sx) = (y + oy - u, x + ox - v);
                    let inside = sy >= 0 && sy < h as i64 && sx >= 0 && sx < w as i64;
                    if !inside {
                        match pad {
                            OraclePad::Zero => continue,
                            OraclePad::Mirror => {
                                sy = mirror(sy, h as i64);
                                sx = mirror(sx, w as i64);
                            }
                        }
                    }
                    acc += kernel[u as usize][v as usize] * img[(sy as usize) * w + sx as usize];
                }
            }
            out[(y as usize) * w + x as usize] = acc;
        }
    }
    out
}

fn outer(col: &[f64], row: &[f64]) -> Vec<Vec<f64>> {
    col.iter().map(|c| row.iter().map(|r| c * r).collect()).collect()
}

/// Orientation 1 (high-pass down the columns) or 2 (high-pass along rows).
pub fn oracle_kernel(j: u32, orientation: usize) -> Vec<Vec<f64>> {
    match orientation {
        1 => outer(&oracle_highpass(j), &oracle_lowpass(j)),
        2 => outer(&oracle_lowpass(j), &oracle_highpass(j)),
        _ => panic!("orientation must be 1 or 2"),
    }
}

/// 2x2 block mean, dropping an odd trailing row/column.
pub fn oracle_subsample(img: &[f64], w: usize, h: usize) -> (Vec<f64>, usize, usize) {
    let (w2, h2) = (w / 2, h / 2);
    let mut out = Vec::with_capacity(w2 * h2);
    for y in 0..h2 {
        for x in 0..w2 {
            let s = img[2 * y * w + 2 * x]
                + img[2 * y * w + 2 * x + 1]
                + img[(2 * y + 1) * w + 2 * x]
                + img[(2 * y + 1) * w + 2 * x + 1];
            out.push(s / 4.0);
        }
    }
    (out, w2, h2)
}

pub fn oracle_similarity(a: f64, b: f64, c: f64) -> f64 {
    ((2.0 * a * b + c) / (a * a + b * b + c)).min(1.0)
}

pub fn oracle_logistic(x: f64, alpha: f64) -> f64 {
    1.0 / (1.0 + (-alpha * x).exp())
}

/// Straight-line HaarPSI on raw Byte samples.
#[allow(clippy::too_many_arguments)]
pub fn oracle_haarpsi(
    f1: &[f64],
    f2: &[f64],
    w: usize,
    h: usize,
    c: f64,
    alpha: f64,
    subsample: bool,
    pad: OraclePad,
) -> f64 {
    let (a, b, w, h) = if subsample {
        let (a, w2, h2) = oracle_subsample(f1, w, h);
        let (b, _, _) = oracle_subsample(f2, w, h);
        (a, b, w2, h2)
    } else {
        (f1.to_vec(), f2.to_vec(), w, h)
    };
    let mut num = 0.0;
    let mut den = 0.0;
    for orientation in [1, 2] {
        let resp = |img: &[f64], j: u32| oracle_conv2(img, w, h, &oracle_kernel(j, orientation), pad);
        let (a1, a2, a3) = (resp(&a, 1), resp(&a, 2), resp(&a, 3));
        let (b1, b2, b3) = (resp(&b, 1), resp(&b, 2), resp(&b, 3));
        for i in 0..w * h {
            let s1 = oracle_similarity(a1[i].abs(), b1[i].abs(), c);
            let s2 = oracle_similarity(a2[i].abs(), b2[i].abs(), c);
            let hs = oracle_logistic((s1 + s2) / 2.0, alpha);
            let weight = a3[i].abs().max(b3[i].abs());
            num += hs * weight;
            den += weight;
        }
    }
    let p = num / den;
    let y = (p / (1.0 - p)).ln() / alpha;
    (y * y).min(1.0)
}

/// SSIM with every local statistic computed from scratch per window.
pub fn oracle_ssim(f1: &[f64], f2: &[f64], w: usize, h: usize) -> f64 {
    let (size, sigma, peak) = (11usize, 1.5f64, 255.0f64);
    let c1 = (0.01 * peak) * (0.01 * peak);
    let c2 = (0.03 * peak) * (0.03 * peak);
    let half = (size / 2) as f64;
    let mut win = vec![vec![0.0; size]; size];
    let mut total_w = 0.0;
    for (u, row) in win.iter_mut().enumerate() {
        for (v, cell) in row.iter_mut().enumerate() {
            let (du, dv) = (u as f64 - half, v as f64 - half);
            *cell = (-(du * du + dv * dv) / (2.0 * sigma * sigma)).exp();
            total_w += *cell;
        }
    }
    let mut acc = 0.0;
    let mut count = 0usize;
    for y in 0..=h - size {
        for x in 0..=w - size {
            let (mut mx, mut my) = (0.0, 0.0);
            for u in 0..size {
                for v in 0..size {
                    let k = win[u][v] / total_w;
                    mx += k * f1[(y + u) * w + x + v];
                    my += k * f2[(y + u) * w + x + v];
                }
            }
            let (mut vx, mut vy, mut cov) = (0.0, 0.0, 0.0);
            for u in 0..size {
                for v in 0..size {
                    let k = win[u][v] / total_w;
                    let dx = f1[(y + u) * w + x + v] - mx;
                    let dy = f2[(y + u) * w + x + v] - my;
                    vx += k * dx * dx;
                    vy += k * dy * dy;
                    cov += k * dx * dy;
                }
            }
            acc += ((2.0 * mx * my + c1) * (2.0 * cov + c2))
                / ((mx * mx + my * my + c1) * (vx + vy + c2));
            count += 1;
        }
    }
    acc / count as f64
}

/// Ranks of a tie-free vector, 1-based, by counting smaller elements.
pub fn oracle_ranks_distinct(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|v| 1.0 + x.iter().filter(|u| *u < v).count() as f64)
        .collect()
}

/// Average ranks by counting smaller and equal elements.
pub fn oracle_ranks(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|v| {
            let below = x.iter().filter(|u| *u < v).count() as f64;
            let equal = x.iter().filter(|u| *u == v).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

/// `1 - 6 Σ d_i² / (n (n² - 1))` for tie-free data.
pub fn oracle_srcc_distinct(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (oracle_ranks_distinct(x), oracle_ranks_distinct(y));
    let n = x.len() as f64;
    let d2: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - b) * (a - b)).sum();
    1.0 - 6.0 * d2 / (n * (n * n - 1.0))
}

pub fn oracle_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Pearson correlation of average ranks.
pub fn oracle_srcc(x: &[f64], y: &[f64]) -> f64 {
    oracle_pearson(&oracle_ranks(x), &oracle_ranks(y))
}

/// Tau-a by the `O(n²)` pair sum.
pub fn oracle_krcc(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let sign = |v: f64| (v > 0.0) as i64 - (v < 0.0) as i64;
    let mut s = 0i64;
    for i in 0..n {
        for j in i + 1..n {
            s += sign(x[i] - x[j]) * sign(y[i] - y[j]);
        }
    }
    2.0 * s as f64 / (n * (n - 1)) as f64
}

/// Steiger's Z with the pooled correlation, written out term by term.
pub fn oracle_steiger(r_jk: f64, r_jh: f64, r_kh: f64, n: usize) -> (f64, f64) {
    let rbar = (r_jk + r_jh) / 2.0;
    let psi = r_kh * (1.0 - 2.0 * rbar * rbar)
        - 0.5 * rbar * rbar * (1.0 - 2.0 * rbar * rbar - r_kh * r_kh);
    let s = psi / ((1.0 - rbar * rbar) * (1.0 - rbar * rbar));
    let fz = |r: f64| 0.5 * ((1.0 + r) / (1.0 - r)).ln();
    let z = (fz(r_jk) - fz(r_jh)) * ((n as f64) - 3.0).sqrt() / (2.0 - 2.0 * s).sqrt();
    (z, 2.0 * normal_sf(z.abs()))
}

/// Upper tail of the standard normal via the complementary error function
/// (Numerical Recipes' Chebyshev fit, relative error below 1.2e-7).
pub fn normal_sf(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let poly = -z * z - 1.26551223
        + t * (1.00002368
            + t * (0.37409196
                + t * (0.09678418
                    + t * (-0.18628806
                        + t * (0.27886807
                            + t * (-1.13520398
                                + t * (1.48851587 + t * (-0.82215223 + t * 0.17087277))))))));
    let r = t * poly.exp();
    if x >= 0.0 {
        r
    } else {
        2.0 - r
    }
}

/// Mean of per-grader z-scores (sample standard deviation), one grader per column.
pub fn oracle_zscores(table: &[Vec<f64>]) -> Vec<f64> {
    let graders = table[0].len();
    let n = table.len() as f64;
    let mut out = vec![0.0; table.len()];
    for g in 0..graders {
        let col: Vec<f64> = table.iter().map(|row| row[g]).collect();
        let mean = col.iter().sum::<f64>() / n;
        let sd = (col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt();
        for (o, v) in out.iter_mut().zip(&col) {
            *o += (v - mean) / sd / graders as f64;
        }
    }
    out
}

/// Lexicographic permutations of `0..n`.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}
