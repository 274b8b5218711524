//! Haar wavelet-based perceptual similarity index.
//!
//! For each orientation the scale-1 and scale-2 Haar responses of the two
//! images are compared with [`similarity`], averaged and passed through the
//! logistic [`logistic`]. The resulting local similarity maps are pooled with
//! weights taken from the scale-3 responses, and the pooled value is mapped
//! back through the inverse logistic and squared.
//!
//! The wavelet responses do not depend on `C` or `alpha`, so
//! [`HaarResponses`] keeps them around for parameter sweeps. Both the
//! one-shot [`haarpsi_score`] and the sweep go through
//! [`HaarResponses::similarity_field`] and [`SimilarityField::score`], which
//! keeps their results bit-identical.

use std::fmt;
use std::str::FromStr;

use crate::error::{IqaError, Result};
use crate::imgio::{DynamicRange, GrayImage};
use crate::wavelet::{convolve_separable, subsample2, Filter2D, Orientation, Padding, ResponseMap};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HaarPsiParams {
    /// Stabilization constant of the similarity function, in squared
    /// Byte-range response units.
    pub c: f64,
    /// Logistic steepness.
    pub alpha: f64,
    /// 2×2 mean pooling before filtering.
    pub subsample: bool,
    pub padding: Padding,
}

impl HaarPsiParams {
    pub fn new(c: f64, alpha: f64) -> Result<Self> {
        let params = HaarPsiParams {
            c,
            alpha,
            subsample: true,
            padding: Padding::Symmetric,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_subsample(mut self, subsample: bool) -> Self {
        self.subsample = subsample;
        self
    }

    pub fn with_padding(mut self, padding: Padding) -> Self {
        self.padding = padding;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(IqaError::param(format!("C must be positive, got {}", self.c)));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(IqaError::param(format!(
                "alpha must be positive, got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

impl Default for HaarPsiParams {
    fn default() -> Self {
        Preset::Default.params()
    }
}

/// Named parameter choices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    /// C = 30, α = 4.2
    Default,
    /// C = 5, α = 4.9, jointly tuned on chest X-ray and photoacoustic data.
    Med,
    /// Same values as `Med`.
    Cxr,
    /// C = 5, α = 6.3
    Pa,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Default, Preset::Med, Preset::Cxr, Preset::Pa];

    pub fn params(self) -> HaarPsiParams {
        let (c, alpha) = match self {
            Preset::Default => (30.0, 4.2),
            Preset::Med | Preset::Cxr => (5.0, 4.9),
            Preset::Pa => (5.0, 6.3),
        };
        HaarPsiParams {
            c,
            alpha,
            subsample: true,
            padding: Padding::Symmetric,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::Default => "default",
            Preset::Med => "med",
            Preset::Cxr => "cxr",
            Preset::Pa => "pa",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = IqaError;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| IqaError::param(format!("unknown preset {s:?}")))
    }
}

pub fn preset(name: &str) -> Result<HaarPsiParams> {
    name.parse::<Preset>().map(Preset::params)
}

/// `(2ab + C) / (a² + b² + C)`, capped at 1 against rounding.
#[inline]
pub fn similarity(a: f64, b: f64, c: f64) -> f64 {
    ((2.0 * a * b + c) / (a * a + b * b + c)).min(1.0)
}

#[inline]
pub fn logistic(y: f64, alpha: f64) -> f64 {
    1.0 / (1.0 + (-alpha * y).exp())
}

pub fn logistic_inverse(p: f64, alpha: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(IqaError::param(format!(
            "logistic inverse needs p in (0, 1), got {p}"
        )));
    }
    if !(alpha > 0.0) {
        return Err(IqaError::param(format!("alpha must be positive, got {alpha}")));
    }
    Ok((p / (1.0 - p)).ln() / alpha)
}

/// Absolute wavelet responses of an image pair, independent of `C` and `alpha`.
///
/// Every per-pixel buffer holds orientation 1 followed by orientation 2,
/// each in row-major order.
#[derive(Debug, Clone)]
pub struct HaarResponses {
    width: usize,
    height: usize,
    /// |g_1 ⋆ f1|, |g_2 ⋆ f1|
    first: [Vec<f64>; 2],
    /// |g_1 ⋆ f2|, |g_2 ⋆ f2|
    second: [Vec<f64>; 2],
    /// max(|g_3 ⋆ f1|, |g_3 ⋆ f2|)
    weights: Vec<f64>,
    weight_sum: f64,
}

fn abs_responses(
    data: &[f64],
    width: usize,
    height: usize,
    scale: u32,
    padding: Padding,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(2 * data.len());
    for orientation in Orientation::ALL {
        let filter = Filter2D::haar(scale, orientation)?;
        let r = convolve_separable(data, width, height, &filter, padding)?;
        out.extend(r.into_iter().map(f64::abs));
    }
    Ok(out)
}

impl HaarResponses {
    pub fn compute(f1: &GrayImage, f2: &GrayImage, subsample: bool, padding: Padding) -> Result<Self> {
        f1.ensure_same_dimensions(f2)?;
        f1.ensure_range(DynamicRange::Byte)?;
        f2.ensure_range(DynamicRange::Byte)?;
        let (f1, f2) = if subsample {
            (subsample2(f1)?, subsample2(f2)?)
        } else {
            (f1.clone(), f2.clone())
        };
        let (w, h) = f1.dimensions();

        let first = [
            abs_responses(f1.data(), w, h, 1, padding)?,
            abs_responses(f1.data(), w, h, 2, padding)?,
        ];
        let second = [
            abs_responses(f2.data(), w, h, 1, padding)?,
            abs_responses(f2.data(), w, h, 2, padding)?,
        ];
        let w1 = abs_responses(f1.data(), w, h, 3, padding)?;
        let w2 = abs_responses(f2.data(), w, h, 3, padding)?;
        let weights: Vec<f64> = w1.iter().zip(&w2).map(|(a, b)| a.max(*b)).collect();
        let weight_sum = weights.iter().sum();

        Ok(HaarResponses {
            width: w,
            height: h,
            first,
            second,
            weights,
            weight_sum,
        })
    }

    /// Dimensions of the (possibly subsampled) maps.
    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Per-pixel mean of the scale-1 and scale-2 similarities for `c`.
    pub fn similarity_field(&self, c: f64) -> SimilarityField<'_> {
        let mean_similarity = (0..self.weights.len())
            .map(|i| {
                let s1 = similarity(self.first[0][i], self.second[0][i], c);
                let s2 = similarity(self.first[1][i], self.second[1][i], c);
                0.5 * (s1 + s2)
            })
            .collect();
        SimilarityField {
            responses: self,
            mean_similarity,
        }
    }

    pub fn score(&self, c: f64, alpha: f64) -> f64 {
        self.similarity_field(c).score(alpha)
    }

    fn split(&self, data: Vec<f64>) -> [ResponseMap; 2] {
        let n = self.width * self.height;
        let mut first = data;
        let second = first.split_off(n);
        [
            ResponseMap::from_parts(self.width, self.height, first),
            ResponseMap::from_parts(self.width, self.height, second),
        ]
    }
}

/// Mean similarities of an image pair for a fixed `C`.
#[derive(Debug, Clone)]
pub struct SimilarityField<'a> {
    responses: &'a HaarResponses,
    mean_similarity: Vec<f64>,
}

impl SimilarityField<'_> {
    pub fn local_similarity(&self, alpha: f64) -> Vec<f64> {
        self.mean_similarity
            .iter()
            .map(|m| logistic(*m, alpha))
            .collect()
    }

    /// Pools the local similarity with the weight maps, accumulating in
    /// row-major order over orientation 1 then orientation 2.
    pub fn score(&self, alpha: f64) -> f64 {
        let weights = &self.responses.weights;
        let pooled = if self.responses.weight_sum > 0.0 {
            let mut num = 0.0;
            for (m, w) in self.mean_similarity.iter().zip(weights) {
                num += logistic(*m, alpha) * w;
            }
            num / self.responses.weight_sum
        } else {
            // Both images constant: every weight is zero.
            let mut num = 0.0;
            for m in &self.mean_similarity {
                num += logistic(*m, alpha);
            }
            num / self.mean_similarity.len() as f64
        };
        pooled_to_score(pooled, alpha)
    }
}

fn pooled_to_score(pooled: f64, alpha: f64) -> f64 {
    // pooled lies in (0.5, l(1)] so the logit is non-negative.
    let y = (pooled / (1.0 - pooled)).ln() / alpha;
    (y * y).min(1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HaarPsiResult {
    pub score: f64,
    /// Local similarity maps, orientation 1 and 2.
    pub hs_maps: [ResponseMap; 2],
    /// Weight maps, orientation 1 and 2.
    pub weight_maps: [ResponseMap; 2],
}

pub fn haarpsi_score(f1: &GrayImage, f2: &GrayImage, params: &HaarPsiParams) -> Result<HaarPsiResult> {
    params.validate()?;
    let responses = HaarResponses::compute(f1, f2, params.subsample, params.padding)?;
    let field = responses.similarity_field(params.c);
    let score = field.score(params.alpha);
    let hs_maps = responses.split(field.local_similarity(params.alpha));
    let weight_maps = responses.split(responses.weights.clone());
    Ok(HaarPsiResult {
        score,
        hs_maps,
        weight_maps,
    })
}

/// Score only, without materializing the maps.
pub fn haarpsi(f1: &GrayImage, f2: &GrayImage, params: &HaarPsiParams) -> Result<f64> {
    params.validate()?;
    let responses = HaarResponses::compute(f1, f2, params.subsample, params.padding)?;
    Ok(responses.score(params.c, params.alpha))
}

pub fn local_similarity_map(
    f1: &GrayImage,
    f2: &GrayImage,
    orientation: Orientation,
    params: &HaarPsiParams,
) -> Result<ResponseMap> {
    params.validate()?;
    let responses = HaarResponses::compute(f1, f2, params.subsample, params.padding)?;
    let local = responses
        .similarity_field(params.c)
        .local_similarity(params.alpha);
    let [first, second] = responses.split(local);
    Ok(match orientation {
        Orientation::Vertical => first,
        Orientation::Horizontal => second,
    })
}

pub fn weight_map(
    f1: &GrayImage,
    f2: &GrayImage,
    orientation: Orientation,
    params: &HaarPsiParams,
) -> Result<ResponseMap> {
    params.validate()?;
    let responses = HaarResponses::compute(f1, f2, params.subsample, params.padding)?;
    let weights = responses.weights.clone();
    let [first, second] = responses.split(weights);
    Ok(match orientation {
        Orientation::Vertical => first,
        Orientation::Horizontal => second,
    })
}
