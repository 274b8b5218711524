//! Tests for the difference between two dependent correlations that share
//! one variable (`j`): `r_jk` and `r_jh`, with `r_kh` linking the other two.

use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::error::{IqaError, Result};

/// Two-sided level used to flag a difference as significant.
pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

pub fn fisher_z(r: f64) -> Result<f64> {
    if !(r.abs() < 1.0) {
        return Err(IqaError::stats(format!(
            "Fisher transform needs |r| < 1, got {r}"
        )));
    }
    // odd by construction, so swapping the two correlations flips the sign exactly
    let z = r.abs().atanh();
    Ok(if r < 0.0 { -z } else { z })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestOutcome {
    /// z for [`steiger_test`], t for [`williams_test`].
    pub statistic: f64,
    /// Two-sided.
    pub p: f64,
}

fn check_inputs(r_jk: f64, r_jh: f64, r_kh: f64, n: usize) -> Result<()> {
    if n < 4 {
        return Err(IqaError::stats(format!(
            "dependent-correlation test needs n >= 4, got {n}"
        )));
    }
    for (name, r) in [("r_jk", r_jk), ("r_jh", r_jh), ("r_kh", r_kh)] {
        if !(r.abs() < 1.0) {
            return Err(IqaError::stats(format!("{name} must lie in (-1, 1), got {r}")));
        }
    }
    Ok(())
}

/// Steiger's Z for `H0: rho_jk = rho_jh`, using Fisher-transformed
/// correlations and the pooled estimate `(r_jk + r_jh) / 2` in the
/// covariance of the two transforms. The p-value is two-sided normal.
///
/// Equal correlations short-circuit to `z = 0, p = 1`, whatever `r_kh` is.
pub fn steiger_test(r_jk: f64, r_jh: f64, r_kh: f64, n: usize) -> Result<TestOutcome> {
    if r_jk == r_jh && r_jk.abs() < 1.0 && n >= 4 {
        return Ok(TestOutcome {
            statistic: 0.0,
            p: 1.0,
        });
    }
    check_inputs(r_jk, r_jh, r_kh, n)?;
    let mean = (r_jk + r_jh) / 2.0;
    let mean2 = mean * mean;
    let psi = r_kh * (1.0 - 2.0 * mean2) - 0.5 * mean2 * (1.0 - 2.0 * mean2 - r_kh * r_kh);
    let covariance = psi / ((1.0 - mean2) * (1.0 - mean2));
    let z = (fisher_z(r_jk)? - fisher_z(r_jh)?) * ((n - 3) as f64).sqrt()
        / (2.0 - 2.0 * covariance).sqrt();
    let normal = Normal::standard();
    let p = (2.0 * normal.sf(z.abs())).min(1.0);
    Ok(TestOutcome { statistic: z, p })
}

/// Williams' t with `n - 3` degrees of freedom, the statistic reported by
/// `psych::paired.r` when all three correlations are supplied.
pub fn williams_test(r_jk: f64, r_jh: f64, r_kh: f64, n: usize) -> Result<TestOutcome> {
    if r_jk == r_jh && r_jk.abs() < 1.0 && n >= 4 {
        return Ok(TestOutcome {
            statistic: 0.0,
            p: 1.0,
        });
    }
    check_inputs(r_jk, r_jh, r_kh, n)?;
    let nf = n as f64;
    let det = 1.0 - r_jk * r_jk - r_jh * r_jh - r_kh * r_kh + 2.0 * r_jk * r_jh * r_kh;
    let mean = (r_jk + r_jh) / 2.0;
    let cube = (1.0 - r_kh).powi(3);
    let t = (r_jk - r_jh)
        * ((nf - 1.0) * (1.0 + r_kh) / (2.0 * (nf - 1.0) / (nf - 3.0) * det + mean * mean * cube))
            .sqrt();
    let dist = StudentsT::new(0.0, 1.0, nf - 3.0)
        .map_err(|e| IqaError::stats(format!("t distribution: {e}")))?;
    let p = (2.0 * dist.sf(t.abs())).min(1.0);
    Ok(TestOutcome { statistic: t, p })
}
