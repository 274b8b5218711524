use std::cmp::Ordering;

use crate::error::{IqaError, Result};

/// Fractional ranks starting at 1; tied values share the mean of the ranks
/// they span.
pub fn ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|a, b| (x[*a] + 0.0).total_cmp(&(x[*b] + 0.0)));
    let mut out = vec![0.0; x.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && x[order[end]] == x[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let rank = (start + 1 + end) as f64 / 2.0;
        for idx in &order[start..end] {
            out[*idx] = rank;
        }
        start = end;
    }
    out
}

fn has_ties(x: &[f64]) -> bool {
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.windows(2).any(|w| w[0] == w[1])
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(IqaError::stats(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(IqaError::stats("need at least two observations"));
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(IqaError::stats("NaN in input"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spearman {
    pub rho: f64,
    /// True when ties forced the Pearson-of-ranks route instead of the
    /// `1 - 6 Σd² / (n(n² - 1))` closed form.
    pub tie_corrected: bool,
}

pub fn spearman(x: &[f64], y: &[f64]) -> Result<Spearman> {
    check_pair(x, y)?;
    let rx = ranks(x);
    let ry = ranks(y);
    if !has_ties(x) && !has_ties(y) {
        let n = x.len() as f64;
        let d2: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - b) * (a - b)).sum();
        return Ok(Spearman {
            rho: 1.0 - 6.0 * d2 / (n * (n * n - 1.0)),
            tie_corrected: false,
        });
    }
    let rho = pearson(&rx, &ry)?;
    Ok(Spearman {
        rho,
        tie_corrected: true,
    })
}

/// Spearman rank correlation.
pub fn srcc(x: &[f64], y: &[f64]) -> Result<f64> {
    spearman(x, y).map(|s| s.rho)
}

pub(crate) fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(IqaError::stats("zero variance"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Counts pairs `i < j` with `v[i] > v[j]` while merge-sorting `v`.
fn count_inversions(v: &mut [f64], buf: &mut Vec<f64>) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut count = count_inversions(&mut v[..mid], buf) + count_inversions(&mut v[mid..], buf);
    buf.clear();
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if v[j] < v[i] {
            count += (mid - i) as u64;
            buf.push(v[j]);
            j += 1;
        } else {
            buf.push(v[i]);
            i += 1;
        }
    }
    buf.extend_from_slice(&v[i..mid]);
    buf.extend_from_slice(&v[j..n]);
    v.copy_from_slice(buf);
    count
}

fn tied_pairs<T: PartialEq>(sorted: &[T]) -> u64 {
    let mut total = 0u64;
    let mut run = 1u64;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    total + run * (run - 1) / 2
}

/// Kendall rank correlation, tau-a: tied pairs add nothing to the numerator
/// and the denominator is always `n(n - 1) / 2`. Runs in `O(n log n)`.
pub fn krcc(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    let n = x.len();
    // `+ 0.0` folds -0.0 into 0.0 so total_cmp agrees with ==.
    let mut pairs: Vec<(f64, f64)> = x.iter().zip(y).map(|(a, b)| (a + 0.0, b + 0.0)).collect();
    pairs.sort_by(|a, b| match a.0.total_cmp(&b.0) {
        Ordering::Equal => a.1.total_cmp(&b.1),
        other => other,
    });

    let x_sorted: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ties_x = tied_pairs(&x_sorted);
    let ties_xy = tied_pairs(&pairs);

    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mut buf = Vec::with_capacity(n);
    let discordant = count_inversions(&mut ys, &mut buf);
    let ties_y = tied_pairs(&ys);

    let total = (n as u64) * (n as u64 - 1) / 2;
    // Pairs tied in neither variable split into concordant and discordant.
    let untied = total + ties_xy - ties_x - ties_y;
    let score = untied as i64 - 2 * discordant as i64;
    Ok((2 * score) as f64 / (n * (n - 1)) as f64)
}
