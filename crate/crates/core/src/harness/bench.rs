use std::time::Instant;

use rayon::prelude::*;

use crate::error::{IqaError, Result};
use crate::imgio::GrayImage;
use crate::measure::Measure;

use super::manifest::DatasetManifest;
use super::run_in_pool;
use super::scoring::prepare_pair;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunTiming {
    pub decode_seconds: f64,
    pub score_seconds: f64,
}

impl RunTiming {
    pub fn total_seconds(&self) -> f64 {
        self.decode_seconds + self.score_seconds
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub measure: String,
    pub images: usize,
    pub threads: usize,
    pub repetitions: usize,
    /// Every repetition in order.
    pub runs: Vec<RunTiming>,
    /// The run with the smallest total.
    pub best: RunTiming,
}

/// Wall-clock timing of decoding and scoring a whole dataset, best of
/// `repetitions`.
pub fn benchmark(
    manifest: &DatasetManifest,
    measure: &Measure,
    repetitions: usize,
    threads: usize,
) -> Result<BenchReport> {
    if repetitions == 0 {
        return Err(IqaError::param("benchmark needs at least one repetition"));
    }
    let mut runs = Vec::with_capacity(repetitions);
    for _ in 0..repetitions {
        let start = Instant::now();
        let pairs: Vec<(GrayImage, GrayImage)> = run_in_pool(threads, || {
            manifest
                .entries
                .par_iter()
                .map(|e| prepare_pair(manifest, e))
                .collect::<Result<Vec<_>>>()
        })??;
        let decode_seconds = start.elapsed().as_secs_f64();

        let start = Instant::now();
        let scores: Vec<f64> = run_in_pool(threads, || {
            pairs
                .par_iter()
                .zip(&manifest.entries)
                .map(|((r, d), e)| {
                    measure
                        .evaluate(r, d)
                        .map_err(|err| IqaError::in_entry(&e.image_id, err))
                })
                .collect::<Result<Vec<_>>>()
        })??;
        let score_seconds = start.elapsed().as_secs_f64();
        std::hint::black_box(&scores);
        runs.push(RunTiming {
            decode_seconds,
            score_seconds,
        });
    }
    let best = *runs
        .iter()
        .min_by(|a, b| a.total_seconds().total_cmp(&b.total_seconds()))
        .expect("at least one run");
    Ok(BenchReport {
        measure: measure.name().to_string(),
        images: manifest.entries.len(),
        threads,
        repetitions,
        runs,
        best,
    })
}
