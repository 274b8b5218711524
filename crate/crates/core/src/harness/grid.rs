//! Exhaustive (C, α) search for the HaarPSI parameters that maximize the
//! mean SRCC against z-scored ratings, over one or more datasets.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{IqaError, Result};
use crate::haarpsi::HaarResponses;
use crate::stats::{srcc, zscore_ratings};
use crate::wavelet::Padding;

use super::manifest::DatasetManifest;
use super::scoring::prepare_pair;
use super::{fmt6, run_in_pool};

/// Grid coordinates are snapped to this many decimals so that `2 + 29 * 0.1`
/// lands on the literal `4.9`.
const AXIS_DECIMALS: i32 = 10;

fn snap(v: f64) -> f64 {
    let scale = 10f64.powi(AXIS_DECIMALS);
    (v * scale).round() / scale
}

/// Ascending list of parameter values.
#[derive(Debug, Clone, PartialEq)]
pub struct GridAxis(Vec<f64>);

impl GridAxis {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(IqaError::param("grid axis is empty"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(IqaError::param("grid values must be finite"));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(IqaError::param("grid values must be strictly ascending"));
        }
        Ok(GridAxis(values))
    }

    /// `lo, lo + step, ...` up to and including `hi`.
    pub fn range(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !(hi >= lo) {
            return Err(IqaError::param(format!(
                "bad grid range {lo}:{hi}:{step}"
            )));
        }
        let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
        GridAxis::new((0..count).map(|k| snap(lo + k as f64 * step)).collect())
    }

    /// C values 5, 6, ..., 100.
    pub fn default_c() -> Self {
        GridAxis::range(5.0, 100.0, 1.0).expect("valid default grid")
    }

    /// α values 2, 2.1, ..., 8.
    pub fn default_alpha() -> Self {
        GridAxis::range(2.0, 8.0, 0.1).expect("valid default grid")
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromStr for GridAxis {
    type Err = IqaError;

    /// `lo:hi:step`, a single value, or a comma-separated list.
    fn from_str(s: &str) -> Result<Self> {
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| IqaError::param(format!("bad grid value {t:?}")))
        };
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [lo, hi, step] => GridAxis::range(num(lo)?, num(hi)?, num(step)?),
            [single] => GridAxis::new(single.split(',').map(num).collect::<Result<_>>()?),
            _ => Err(IqaError::param(format!(
                "grid must be lo:hi:step or a list, got {s:?}"
            ))),
        }
    }
}

/// How the optimum is picked from the mean surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Selection {
    /// Compare full-precision mean SRCC.
    #[default]
    FullPrecision,
    /// Compare mean SRCC rounded to 4 decimals.
    Rounded4,
}

/// Cached wavelet responses of one dataset, ready for the sweep.
#[derive(Debug, Clone)]
pub struct GridDataset {
    pub name: String,
    pub responses: Vec<HaarResponses>,
    /// Mean z-scores aligned with `responses`.
    pub targets: Vec<f64>,
}

impl GridDataset {
    pub fn from_manifest(
        manifest: &DatasetManifest,
        subsample: bool,
        padding: Padding,
        threads: usize,
    ) -> Result<Self> {
        let z = zscore_ratings(manifest.ratings()?)?;
        let responses = run_in_pool(threads, || {
            manifest
                .entries
                .par_iter()
                .map(|entry| {
                    let (r, d) = prepare_pair(manifest, entry)?;
                    HaarResponses::compute(&r, &d, subsample, padding)
                        .map_err(|e| IqaError::in_entry(&entry.image_id, e))
                })
                .collect::<Result<Vec<_>>>()
        })??;
        let targets = manifest
            .entries
            .iter()
            .map(|e| z.get(&e.image_id).expect("manifest load checks ratings"))
            .collect();
        Ok(GridDataset {
            name: manifest.name.clone(),
            responses,
            targets,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridOptions {
    pub threads: usize,
    pub selection: Selection,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions {
            threads: 1,
            selection: Selection::FullPrecision,
        }
    }
}

/// SRCC over the grid; each block is indexed `[ci * alphas + ai]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceGrid {
    pub c_values: Vec<f64>,
    pub alpha_values: Vec<f64>,
    pub datasets: Vec<String>,
    pub srcc: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    /// `(c index, alpha index)` of the selected optimum.
    pub argmax: (usize, usize),
}

pub fn round4(v: f64) -> f64 {
    (v * 1e4).round() / 1e4
}

fn select_argmax(mean: &[f64], n_alpha: usize, selection: Selection) -> (usize, usize) {
    let key = |v: f64| match selection {
        Selection::FullPrecision => v,
        Selection::Rounded4 => round4(v),
    };
    let mut best = 0;
    for (i, v) in mean.iter().enumerate().skip(1) {
        // strict: the first maximum in C-major order wins ties
        if key(*v) > key(mean[best]) {
            best = i;
        }
    }
    (best / n_alpha, best % n_alpha)
}

impl SurfaceGrid {
    pub fn cell_index(&self, ci: usize, ai: usize) -> usize {
        ci * self.alpha_values.len() + ai
    }

    pub fn best_c(&self) -> f64 {
        self.c_values[self.argmax.0]
    }

    pub fn best_alpha(&self) -> f64 {
        self.alpha_values[self.argmax.1]
    }

    pub fn best_mean(&self) -> f64 {
        self.mean[self.cell_index(self.argmax.0, self.argmax.1)]
    }

    /// Per-dataset SRCC at the optimum.
    pub fn best_per_dataset(&self) -> Vec<(&str, f64)> {
        let idx = self.cell_index(self.argmax.0, self.argmax.1);
        self.datasets
            .iter()
            .zip(&self.srcc)
            .map(|(n, block)| (n.as_str(), block[idx]))
            .collect()
    }

    /// `argmax C=<c> alpha=<alpha> mean_srcc=<v>`
    pub fn argmax_line(&self) -> String {
        format!(
            "argmax C={} alpha={} mean_srcc={}",
            self.best_c(),
            self.best_alpha(),
            fmt6(self.best_mean())
        )
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("C,alpha");
        for name in &self.datasets {
            out.push(',');
            out.push_str(name);
        }
        out.push_str(",mean\n");
        for (ci, c) in self.c_values.iter().enumerate() {
            for (ai, a) in self.alpha_values.iter().enumerate() {
                let idx = self.cell_index(ci, ai);
                let _ = write!(out, "{},{}", fmt6(*c), fmt6(*a));
                for block in &self.srcc {
                    let _ = write!(out, ",{}", fmt6(block[idx]));
                }
                let _ = writeln!(out, ",{}", fmt6(self.mean[idx]));
            }
        }
        let _ = writeln!(out, "# {}", self.argmax_line());
        out
    }

    pub fn export(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()).map_err(|e| IqaError::io(path, e))
    }

    pub fn import(path: impl AsRef<Path>) -> Result<SurfaceGrid> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| IqaError::io(path, e))?;
        let bad = |message: String| IqaError::Format {
            path: path.to_path_buf(),
            message,
        };
        let mut lines = text.lines();
        let header: Vec<&str> = lines
            .next()
            .ok_or_else(|| bad("empty surface file".into()))?
            .split(',')
            .collect();
        if header.len() < 3 || header[0] != "C" || header[1] != "alpha" || header.last() != Some(&"mean") {
            return Err(bad("expected header C,alpha,<datasets...>,mean".into()));
        }
        let datasets: Vec<String> = header[2..header.len() - 1].iter().map(|s| s.to_string()).collect();
        let mut cells: Vec<Vec<f64>> = Vec::new();
        let mut argmax_coords = None;
        for line in lines {
            if let Some(comment) = line.strip_prefix('#') {
                let mut c = None;
                let mut a = None;
                for token in comment.split_whitespace() {
                    if let Some(v) = token.strip_prefix("C=") {
                        c = v.parse::<f64>().ok();
                    } else if let Some(v) = token.strip_prefix("alpha=") {
                        a = v.parse::<f64>().ok();
                    }
                }
                if let (Some(c), Some(a)) = (c, a) {
                    argmax_coords = Some((c, a));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|_| bad(format!("bad row {line:?}")))?;
            if row.len() != header.len() {
                return Err(bad(format!("row has {} fields, expected {}", row.len(), header.len())));
            }
            cells.push(row);
        }
        let mut c_values: Vec<f64> = Vec::new();
        let mut alpha_values: Vec<f64> = Vec::new();
        for row in &cells {
            if c_values.last() != Some(&row[0]) {
                c_values.push(row[0]);
            }
            if c_values.len() == 1 {
                alpha_values.push(row[1]);
            }
        }
        if c_values.len() * alpha_values.len() != cells.len() || cells.is_empty() {
            return Err(bad("rows do not form a C-major grid".into()));
        }
        for (i, row) in cells.iter().enumerate() {
            if row[0] != c_values[i / alpha_values.len()] || row[1] != alpha_values[i % alpha_values.len()] {
                return Err(bad("rows do not form a C-major grid".into()));
            }
        }
        let srcc = (0..datasets.len())
            .map(|d| cells.iter().map(|r| r[2 + d]).collect())
            .collect();
        let mean = cells.iter().map(|r| r[header.len() - 1]).collect();
        let (c, a) = argmax_coords.ok_or_else(|| bad("missing argmax footer".into()))?;
        let ci = c_values
            .iter()
            .position(|v| *v == c)
            .ok_or_else(|| bad(format!("argmax C={c} not on the grid")))?;
        let ai = alpha_values
            .iter()
            .position(|v| *v == a)
            .ok_or_else(|| bad(format!("argmax alpha={a} not on the grid")))?;
        Ok(SurfaceGrid {
            c_values,
            alpha_values,
            datasets,
            srcc,
            mean,
            argmax: (ci, ai),
        })
    }
}

/// SRCC of every dataset for every α at one C value.
fn sweep_c(datasets: &[GridDataset], c: f64, alphas: &[f64]) -> Result<Vec<Vec<f64>>> {
    let mut per_dataset = Vec::with_capacity(datasets.len());
    for ds in datasets {
        // scores[alpha][image]
        let mut scores = vec![vec![0.0; ds.responses.len()]; alphas.len()];
        for (img, responses) in ds.responses.iter().enumerate() {
            let field = responses.similarity_field(c);
            for (ai, alpha) in alphas.iter().enumerate() {
                scores[ai][img] = field.score(*alpha);
            }
        }
        let row = scores
            .iter()
            .zip(alphas)
            .map(|(s, alpha)| {
                srcc(&ds.targets, s).map_err(|e| {
                    IqaError::stats(format!("dataset {} at C={c} alpha={alpha}: {e}", ds.name))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        per_dataset.push(row);
    }
    Ok(per_dataset)
}

/// Evaluates every (C, α) cell. Wavelet responses come precomputed in
/// `datasets`; only the similarity and logistic stages run per cell.
pub fn grid_search(
    datasets: &[GridDataset],
    c_grid: &GridAxis,
    alpha_grid: &GridAxis,
    options: &GridOptions,
) -> Result<SurfaceGrid> {
    if datasets.is_empty() {
        return Err(IqaError::param("grid search needs at least one dataset"));
    }
    let alphas = alpha_grid.values();
    let per_c: Vec<Vec<Vec<f64>>> = run_in_pool(options.threads, || {
        c_grid
            .values()
            .par_iter()
            .map(|c| sweep_c(datasets, *c, alphas))
            .collect::<Result<Vec<_>>>()
    })??;

    let cells = c_grid.len() * alphas.len();
    let mut srcc_blocks = vec![Vec::with_capacity(cells); datasets.len()];
    for by_dataset in &per_c {
        for (block, row) in srcc_blocks.iter_mut().zip(by_dataset) {
            block.extend_from_slice(row);
        }
    }
    let mean: Vec<f64> = (0..cells)
        .map(|i| {
            let mut sum = 0.0;
            for block in &srcc_blocks {
                sum += block[i];
            }
            sum / datasets.len() as f64
        })
        .collect();
    let argmax = select_argmax(&mean, alphas.len(), options.selection);
    Ok(SurfaceGrid {
        c_values: c_grid.values().to_vec(),
        alpha_values: alphas.to_vec(),
        datasets: datasets.iter().map(|d| d.name.clone()).collect(),
        srcc: srcc_blocks,
        mean,
        argmax,
    })
}
