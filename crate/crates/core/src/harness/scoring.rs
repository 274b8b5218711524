use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{IqaError, Result};
use crate::imgio::{self, CropRect, GrayImage, Raster};
use crate::measure::Measure;
use crate::stats::{
    krcc, srcc, zscore_ratings, CorrelationReport, DependentTest, RankStatistic,
    RatingMatrix, SignificanceEntry, Verdict,
};

use super::manifest::{DatasetManifest, ManifestEntry};
use super::{fmt6, run_in_pool};

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Below this many images the significance report carries a caveat.
pub const SMALL_SAMPLE: usize = 30;

/// Conversion steps applied to every decoded image, in this order:
/// grayscale, normalization, Byte scaling, crop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Preprocess {
    pub grayscale: bool,
    pub normalize: bool,
    pub crop: Option<CropRect>,
}

impl Preprocess {
    pub fn for_entry(manifest: &DatasetManifest, entry: &ManifestEntry) -> Self {
        Preprocess {
            grayscale: manifest.grayscale,
            normalize: manifest.normalize,
            crop: entry.crop,
        }
    }

    pub fn apply(&self, raster: Raster) -> Result<GrayImage> {
        let gray = match raster {
            Raster::Gray(g) => g,
            Raster::Rgb(rgb) if self.grayscale => imgio::rgb_to_gray(&rgb),
            Raster::Rgb(_) => {
                return Err(IqaError::param(
                    "color input needs grayscale conversion (grayscale=true / --gray)",
                ))
            }
        };
        let gray = if self.normalize {
            imgio::mat2gray_normalize(&gray)
        } else {
            gray
        };
        let byte = imgio::to_byte_range(&gray)?;
        match &self.crop {
            Some(rect) => imgio::crop(&byte, rect),
            None => Ok(byte),
        }
    }

    pub fn load(&self, path: &Path) -> Result<GrayImage> {
        self.apply(imgio::load_image(path)?.raster)
    }
}

/// Loads and preprocesses both images of a manifest entry.
pub fn prepare_pair(
    manifest: &DatasetManifest,
    entry: &ManifestEntry,
) -> Result<(GrayImage, GrayImage)> {
    let pre = Preprocess::for_entry(manifest, entry);
    let wrap = |e| IqaError::in_entry(&entry.image_id, e);
    let reference = pre.load(&entry.reference).map_err(wrap)?;
    let distorted = pre.load(&entry.distorted).map_err(wrap)?;
    Ok((reference, distorted))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow {
    pub image_id: String,
    /// `None` for entries skipped after an error.
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    pub measure: String,
    pub parameters: String,
    pub version: String,
    pub parameter_hash: String,
    pub rows: Vec<ScoreRow>,
}

pub fn parameter_hash(measure: &str, parameters: &str) -> String {
    let digest = Sha256::digest(format!("{measure}|{parameters}").as_bytes());
    digest[..8].iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn format_score(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        fmt6(v)
    }
}

impl ScoreTable {
    pub fn new(measure: &Measure, rows: Vec<ScoreRow>) -> Self {
        let parameters = measure.parameters();
        ScoreTable {
            measure: measure.name().to_string(),
            parameter_hash: parameter_hash(measure.name(), &parameters),
            parameters,
            version: TOOLKIT_VERSION.to_string(),
            rows,
        }
    }

    /// `(image_id, score)` for rows that have a score.
    pub fn scored(&self) -> impl Iterator<Item = (&str, f64)> {
        self.rows
            .iter()
            .filter_map(|r| r.score.map(|s| (r.image_id.as_str(), s)))
    }

    pub fn missing(&self) -> usize {
        self.rows.iter().filter(|r| r.score.is_none()).count()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# measure={}", self.measure);
        let _ = writeln!(out, "# parameters={}", self.parameters);
        let _ = writeln!(out, "# version={}", self.version);
        let _ = writeln!(out, "# parameter_hash={}", self.parameter_hash);
        out.push_str("image_id,score\n");
        for (id, score) in self.scored() {
            let _ = writeln!(out, "{id},{}", format_score(score));
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()).map_err(|e| IqaError::io(path, e))
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| IqaError::io(path, e))?;
        let bad = |message: String| IqaError::Format {
            path: path.to_path_buf(),
            message,
        };
        let mut meta: HashMap<&str, &str> = HashMap::new();
        let mut rows = Vec::new();
        let mut seen_header = false;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if let Some(comment) = line.strip_prefix('#') {
                if let Some((k, v)) = comment.trim().split_once('=') {
                    meta.insert(k.trim(), v.trim());
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            if !seen_header {
                if line.trim() != "image_id,score" {
                    return Err(bad(format!("expected header image_id,score, got {line:?}")));
                }
                seen_header = true;
                continue;
            }
            let (id, score) = line
                .split_once(',')
                .ok_or_else(|| bad(format!("line {}: expected image_id,score", i + 1)))?;
            let score: f64 = score
                .trim()
                .parse()
                .map_err(|_| bad(format!("line {}: bad score {score:?}", i + 1)))?;
            rows.push(ScoreRow {
                image_id: id.trim().to_string(),
                score: Some(score),
            });
        }
        if !seen_header {
            return Err(bad("missing header image_id,score".into()));
        }
        let get = |k: &str| meta.get(k).map(|v| v.to_string()).unwrap_or_default();
        Ok(ScoreTable {
            measure: get("measure"),
            parameters: get("parameters"),
            version: get("version"),
            parameter_hash: get("parameter_hash"),
            rows,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScoreOptions {
    pub threads: usize,
    /// Record failing entries as absent rows instead of failing the run.
    pub skip_errors: bool,
}

impl Default for ScoreOptions {
    fn default() -> Self {
        ScoreOptions {
            threads: 1,
            skip_errors: false,
        }
    }
}

pub fn score_entry(
    manifest: &DatasetManifest,
    entry: &ManifestEntry,
    measure: &Measure,
) -> Result<f64> {
    let (reference, distorted) = prepare_pair(manifest, entry)?;
    measure
        .evaluate(&reference, &distorted)
        .map_err(|e| IqaError::in_entry(&entry.image_id, e))
}

/// Scores every entry. Rows follow manifest order whatever the thread count.
pub fn score_dataset(
    manifest: &DatasetManifest,
    measure: &Measure,
    options: &ScoreOptions,
) -> Result<ScoreTable> {
    let results: Vec<Result<f64>> = run_in_pool(options.threads, || {
        manifest
            .entries
            .par_iter()
            .map(|e| score_entry(manifest, e, measure))
            .collect()
    })?;
    let mut rows = Vec::with_capacity(results.len());
    let mut failures = 0;
    for (entry, result) in manifest.entries.iter().zip(results) {
        let score = match result {
            Ok(v) => Some(v),
            Err(e) if options.skip_errors => {
                log::warn!("skipping {}: {e}", entry.image_id);
                failures += 1;
                None
            }
            Err(e) => return Err(e),
        };
        rows.push(ScoreRow {
            image_id: entry.image_id.clone(),
            score,
        });
    }
    if failures > 0 {
        log::warn!(
            "{failures} of {} entries failed and were left out",
            manifest.entries.len()
        );
    }
    Ok(ScoreTable::new(measure, rows))
}

/// Scores aligned with per-image mean z-scores, in score-table order.
fn aligned(scores: &ScoreTable, ratings: &RatingMatrix) -> Result<(Vec<f64>, Vec<f64>)> {
    let z = zscore_ratings(ratings)?;
    let mut zs = Vec::new();
    let mut xs = Vec::new();
    for (id, s) in scores.scored() {
        let zv = z
            .get(id)
            .ok_or_else(|| IqaError::stats(format!("image {id} has no rating")))?;
        zs.push(zv);
        xs.push(s);
    }
    if xs.len() < 2 {
        return Err(IqaError::stats("need at least two scored images"));
    }
    Ok((zs, xs))
}

/// SRCC and KRCC between a measure's scores and the mean z-scored ratings.
pub fn evaluate(scores: &ScoreTable, ratings: &RatingMatrix) -> Result<CorrelationReport> {
    let (z, s) = aligned(scores, ratings)?;
    Ok(CorrelationReport {
        measure: scores.measure.clone(),
        srcc: srcc(&z, &s)?,
        krcc: krcc(&z, &s)?,
        n: s.len(),
        significance: Vec::new(),
    })
}

/// Dependent-correlation test of `a` against `b`, once on SRCC and once on
/// KRCC. Correlations are compared in absolute value, so a distance-like
/// measure is not penalized for its sign.
pub fn compare_measures(
    a: &ScoreTable,
    b: &ScoreTable,
    ratings: &RatingMatrix,
    test: DependentTest,
) -> Result<Vec<SignificanceEntry>> {
    let b_scores: HashMap<&str, f64> = b.scored().collect();
    let a_ids: Vec<&str> = a.scored().map(|(id, _)| id).collect();
    if a_ids.len() != b_scores.len() || a_ids.iter().any(|id| !b_scores.contains_key(id)) {
        return Err(IqaError::stats(
            "compared score tables cover different image sets",
        ));
    }
    let (z, xa) = aligned(a, ratings)?;
    let xb: Vec<f64> = a_ids.iter().map(|id| b_scores[id]).collect();
    let n = xa.len();
    let caveat = (n < SMALL_SAMPLE).then(|| {
        format!("small sample (n={n}): normal-theory p-value is unreliable")
    });

    let mut out = Vec::with_capacity(2);
    for statistic in [RankStatistic::Srcc, RankStatistic::Krcc] {
        let corr = |x: &[f64], y: &[f64]| match statistic {
            RankStatistic::Srcc => srcc(x, y),
            RankStatistic::Krcc => krcc(x, y),
        };
        let r_jk = corr(&z, &xa)?;
        let r_jh = corr(&z, &xb)?;
        let r_kh = corr(&xa, &xb)?;
        let sign = |r: f64| if r < 0.0 { -1.0 } else { 1.0 };
        let outcome = test.run(r_jk.abs(), r_jh.abs(), r_kh * sign(r_jk) * sign(r_jh), n)?;
        out.push(SignificanceEntry {
            against: b.measure.clone(),
            statistic,
            test,
            verdict: Verdict::from_outcome(&outcome),
            outcome,
            n,
            caveat: caveat.clone(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(measure: &str, rows: &[(&str, f64)]) -> ScoreTable {
        ScoreTable {
            measure: measure.into(),
            parameters: String::new(),
            version: TOOLKIT_VERSION.into(),
            parameter_hash: String::new(),
            rows: rows
                .iter()
                .map(|(id, s)| ScoreRow {
                    image_id: id.to_string(),
                    score: Some(*s),
                })
                .collect(),
        }
    }

    fn ratings(rows: &[(&str, f64)]) -> RatingMatrix {
        RatingMatrix::from_records(rows.iter().map(|(id, r)| (*id, "g", *r))).unwrap()
    }

    #[test]
    fn evaluate_identity_and_reversal() {
        let r = ratings(&[("a", 1.0), ("b", 2.0), ("c", 4.0), ("d", 3.0)]);
        let z = zscore_ratings(&r).unwrap();
        let same: Vec<(&str, f64)> = ["a", "b", "c", "d"]
            .iter()
            .map(|id| (*id, z.get(id).unwrap()))
            .collect();
        let rep = evaluate(&table("m", &same), &r).unwrap();
        assert_eq!((rep.srcc, rep.krcc, rep.n), (1.0, 1.0, 4));

        let neg: Vec<(&str, f64)> = same.iter().map(|(id, v)| (*id, -v)).collect();
        let rep = evaluate(&table("m", &neg), &r).unwrap();
        assert_eq!(rep.srcc, -1.0);
        assert_eq!(rep.abs_srcc(), 1.0);
    }

    #[test]
    fn evaluate_needs_ratings_for_every_row() {
        let r = ratings(&[("a", 1.0), ("b", 2.0)]);
        let t = table("m", &[("a", 0.1), ("b", 0.2), ("zz", 0.3)]);
        assert!(evaluate(&t, &r).is_err());
    }

    #[test]
    fn compare_identical_measures() {
        let r = ratings(&[("a", 1.0), ("b", 2.0), ("c", 4.0), ("d", 3.0), ("e", 5.0)]);
        let t = table("m", &[("a", 0.1), ("b", 0.3), ("c", 0.2), ("d", 0.5), ("e", 0.4)]);
        let entries = compare_measures(&t, &t, &r, DependentTest::Steiger).unwrap();
        assert_eq!(entries.len(), 2);
        for e in &entries {
            assert_eq!(e.outcome.p, 1.0);
            assert_eq!(e.verdict, Verdict::NotSignificant);
            assert!(e.caveat.as_deref().unwrap().contains("n=5"));
        }
    }

    #[test]
    fn compare_rejects_different_image_sets() {
        let r = ratings(&[("a", 1.0), ("b", 2.0), ("c", 3.0)]);
        let a = table("a", &[("a", 0.1), ("b", 0.2), ("c", 0.3)]);
        let b = table("b", &[("a", 0.1), ("b", 0.2)]);
        assert!(compare_measures(&a, &b, &r, DependentTest::Steiger).is_err());
    }

    #[test]
    fn score_table_text_roundtrip() {
        let mut t = table("psnr", &[("a", 31.25), ("b", f64::INFINITY), ("c", 0.1234567)]);
        t.parameters = "peak=255".into();
        t.parameter_hash = parameter_hash("psnr", "peak=255");
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        t.write_csv(&p).unwrap();
        let back = ScoreTable::read_csv(&p).unwrap();
        assert_eq!(back.measure, "psnr");
        assert_eq!(back.parameter_hash, t.parameter_hash);
        assert_eq!(back.rows[1].score, Some(f64::INFINITY));
        assert_eq!(back.rows[2].score, Some(0.123457));
        assert_eq!(back.to_csv(), t.to_csv());
    }

    #[test]
    fn hash_is_stable_and_parameter_sensitive() {
        assert_eq!(parameter_hash("haarpsi", "C=5"), parameter_hash("haarpsi", "C=5"));
        assert_ne!(parameter_hash("haarpsi", "C=5"), parameter_hash("haarpsi", "C=6"));
        assert_eq!(parameter_hash("x", "y").len(), 16);
    }
}
