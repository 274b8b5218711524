//! Full-reference image quality assessment built around HaarPSI, with PSNR
//! and SSIM baselines, rank-correlation evaluation against human ratings and
//! a cached grid search over HaarPSI's two parameters.

pub mod baselines;
pub mod cli;
pub mod error;
pub mod harness;
pub mod haarpsi;
pub mod imgio;
pub mod measure;
pub mod stats;
pub mod wavelet;

pub use error::{IqaError, Result};
pub use haarpsi::{haarpsi, haarpsi_score, HaarPsiParams, HaarPsiResult, Preset};
pub use imgio::{DynamicRange, GrayImage};
pub use measure::Measure;
