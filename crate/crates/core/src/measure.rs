use std::fmt;

use crate::baselines::{psnr, ssim, SsimConfig};
use crate::error::{IqaError, Result};
use crate::haarpsi::{haarpsi, HaarPsiParams, Preset};
use crate::imgio::{DynamicRange, GrayImage};

/// A configured full-reference measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Measure {
    HaarPsi(HaarPsiParams),
    Psnr,
    Ssim(SsimConfig),
}

impl Measure {
    /// Resolves a measure id plus optional overrides.
    ///
    /// Accepted ids are `haarpsi`, `haarpsi-<preset>`, `psnr` and `ssim`.
    /// `preset` and `c`/`alpha` only apply to HaarPSI; `c` and `alpha` must
    /// be given together and exclude a preset.
    pub fn resolve(
        id: &str,
        preset: Option<&str>,
        c: Option<f64>,
        alpha: Option<f64>,
    ) -> Result<Measure> {
        let id = id.to_ascii_lowercase();
        let (base, suffix) = match id.split_once('-') {
            Some((b, s)) => (b, Some(s)),
            None => (id.as_str(), None),
        };
        match base {
            "haarpsi" => {
                let preset = match (suffix, preset) {
                    (Some(_), Some(_)) => {
                        return Err(IqaError::param(format!(
                            "measure {id} already names a preset"
                        )))
                    }
                    (Some(s), None) | (None, Some(s)) => Some(s.parse::<Preset>()?),
                    (None, None) => None,
                };
                let params = match (preset, c, alpha) {
                    (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
                        return Err(IqaError::param(
                            "--C/--alpha cannot be combined with a preset",
                        ))
                    }
                    (Some(p), None, None) => p.params(),
                    (None, Some(c), Some(a)) => HaarPsiParams::new(c, a)?,
                    (None, None, None) => Preset::Default.params(),
                    (None, _, _) => {
                        return Err(IqaError::param("--C and --alpha must be given together"))
                    }
                };
                Ok(Measure::HaarPsi(params))
            }
            "psnr" | "ssim" if suffix.is_none() => {
                if preset.is_some() || c.is_some() || alpha.is_some() {
                    return Err(IqaError::param(format!(
                        "{base} takes no preset or HaarPSI parameters"
                    )));
                }
                Ok(if base == "psnr" {
                    Measure::Psnr
                } else {
                    Measure::Ssim(SsimConfig::default())
                })
            }
            _ => Err(IqaError::param(format!("unknown measure {id:?}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Measure::HaarPsi(_) => "haarpsi",
            Measure::Psnr => "psnr",
            Measure::Ssim(_) => "ssim",
        }
    }

    /// Canonical parameter string, also the input of the provenance hash.
    pub fn parameters(&self) -> String {
        match self {
            Measure::HaarPsi(p) => format!(
                "C={} alpha={} subsample={} padding={}",
                p.c, p.alpha, p.subsample, p.padding
            ),
            Measure::Psnr => "peak=255".to_string(),
            Measure::Ssim(cfg) => format!(
                "window={} sigma={} k1={} k2={} peak={}",
                cfg.window, cfg.sigma, cfg.k1, cfg.k2, cfg.peak
            ),
        }
    }

    /// Scores a Byte-range pair.
    pub fn evaluate(&self, reference: &GrayImage, distorted: &GrayImage) -> Result<f64> {
        reference.ensure_range(DynamicRange::Byte)?;
        distorted.ensure_range(DynamicRange::Byte)?;
        match self {
            Measure::HaarPsi(p) => haarpsi(reference, distorted, p),
            Measure::Psnr => psnr(reference, distorted, 255.0),
            Measure::Ssim(cfg) => ssim(reference, distorted, cfg),
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.name(), self.parameters())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolve_variants() {
        let med = Measure::resolve("haarpsi-med", None, None, None).unwrap();
        assert_eq!(med, Measure::resolve("haarpsi", Some("med"), None, None).unwrap());
        assert_eq!(med, Measure::resolve("haarpsi", None, Some(5.0), Some(4.9)).unwrap());
        assert_eq!(
            Measure::resolve("haarpsi", None, None, None).unwrap(),
            Measure::HaarPsi(Preset::Default.params())
        );
        assert_eq!(Measure::resolve("PSNR", None, None, None).unwrap(), Measure::Psnr);
        assert!(Measure::resolve("fsim", None, None, None).is_err());
        assert!(Measure::resolve("haarpsi", None, Some(5.0), None).is_err());
        assert!(Measure::resolve("haarpsi-med", Some("pa"), None, None).is_err());
        assert!(Measure::resolve("haarpsi", Some("med"), Some(5.0), Some(4.0)).is_err());
        assert!(Measure::resolve("psnr", Some("med"), None, None).is_err());
        assert!(Measure::resolve("haarpsi", None, Some(-1.0), Some(4.0)).is_err());
    }
}
