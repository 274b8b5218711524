//! Dataset-level evaluation: manifests, batch scoring, correlation against
//! ratings, the (C, α) grid search, and throughput timing.

pub mod bench;
pub mod grid;
pub mod manifest;
pub mod scoring;
pub mod synthetic;

pub use bench::{benchmark, BenchReport, RunTiming};
pub use grid::{grid_search, GridAxis, GridDataset, GridOptions, Selection, SurfaceGrid};
pub use manifest::{load_manifest, write_manifest, DatasetManifest, ManifestEntry, ManifestRow};
pub use scoring::{
    compare_measures, evaluate, parameter_hash, prepare_pair, score_dataset, score_entry,
    Preprocess, ScoreOptions, ScoreRow, ScoreTable, SMALL_SAMPLE, TOOLKIT_VERSION,
};

use crate::error::{IqaError, Result};

/// Six-decimal fixed formatting used by every CSV writer.
pub fn fmt6(v: f64) -> String {
    format!("{v:.6}")
}

/// Runs `f` on a dedicated pool with exactly `threads` workers.
pub fn run_in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if threads == 0 {
        return Err(IqaError::param("thread count must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| IqaError::stats(format!("cannot start thread pool: {e}")))?;
    Ok(pool.install(f))
}
