use std::collections::HashMap;
use std::path::Path;

use serde::Deserialize;

use crate::error::{IqaError, Result};

/// Per-grader quality ratings, `images x graders`, with gaps allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingMatrix {
    images: Vec<String>,
    graders: Vec<String>,
    /// `ratings[image][grader]`
    ratings: Vec<Vec<Option<f64>>>,
    index: HashMap<String, usize>,
}

#[derive(Debug, Deserialize)]
struct RatingRecord {
    image_id: String,
    grader_id: String,
    rating: f64,
}

impl RatingMatrix {
    /// Builds the matrix from `(image, grader, rating)` triples. Images and
    /// graders keep their order of first appearance.
    pub fn from_records<I, S>(records: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, S, f64)>,
        S: Into<String>,
    {
        let mut images = Vec::new();
        let mut index = HashMap::new();
        let mut graders = Vec::new();
        let mut grader_index = HashMap::new();
        let mut cells: Vec<(usize, usize, f64)> = Vec::new();
        for (image, grader, rating) in records {
            let (image, grader) = (image.into(), grader.into());
            if !rating.is_finite() {
                return Err(IqaError::stats(format!(
                    "rating for {image}/{grader} is not finite"
                )));
            }
            let i = *index.entry(image.clone()).or_insert_with(|| {
                images.push(image.clone());
                images.len() - 1
            });
            let g = *grader_index.entry(grader.clone()).or_insert_with(|| {
                graders.push(grader.clone());
                graders.len() - 1
            });
            cells.push((i, g, rating));
        }
        if images.len() < 2 {
            return Err(IqaError::stats("ratings need at least two images"));
        }
        let mut ratings = vec![vec![None; graders.len()]; images.len()];
        for (i, g, r) in cells {
            if ratings[i][g].replace(r).is_some() {
                return Err(IqaError::stats(format!(
                    "duplicate rating for image {} by grader {}",
                    images[i], graders[g]
                )));
            }
        }
        Ok(RatingMatrix {
            images,
            graders,
            ratings,
            index,
        })
    }

    /// Reads a CSV with header `image_id,grader_id,rating`.
    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| IqaError::io(path, e))?;
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(file);
        let format_err = |message: String| IqaError::Format {
            path: path.to_path_buf(),
            message,
        };
        let headers = reader
            .headers()
            .map_err(|e| format_err(e.to_string()))?
            .clone();
        if headers.iter().collect::<Vec<_>>() != ["image_id", "grader_id", "rating"] {
            return Err(format_err(format!(
                "expected header image_id,grader_id,rating, got {}",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut records = Vec::new();
        for row in reader.deserialize::<RatingRecord>() {
            let row = row.map_err(|e| format_err(e.to_string()))?;
            records.push((row.image_id, row.grader_id, row.rating));
        }
        RatingMatrix::from_records(records).map_err(|e| format_err(e.to_string()))
    }

    pub fn images(&self) -> &[String] {
        &self.images
    }

    pub fn graders(&self) -> &[String] {
        &self.graders
    }

    pub fn contains(&self, image_id: &str) -> bool {
        self.index.contains_key(image_id)
    }

    pub fn rating(&self, image_id: &str, grader: usize) -> Option<f64> {
        self.index
            .get(image_id)
            .and_then(|i| self.ratings[*i].get(grader).copied().flatten())
    }
}

/// Per-image mean of per-grader standardized ratings.
#[derive(Debug, Clone, PartialEq)]
pub struct ZScores {
    images: Vec<String>,
    values: Vec<f64>,
    index: HashMap<String, usize>,
    /// Graders dropped for having no rating variance.
    pub excluded_graders: Vec<String>,
}

impl ZScores {
    pub fn images(&self) -> &[String] {
        &self.images
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, image_id: &str) -> Option<f64> {
        self.index.get(image_id).map(|i| self.values[*i])
    }
}

/// Standardizes each grader with their own mean and sample (n - 1)
/// standard deviation, then averages the available z-scores per image.
pub fn zscore_ratings(ratings: &RatingMatrix) -> Result<ZScores> {
    let n_images = ratings.images.len();
    let mut sums = vec![0.0; n_images];
    let mut counts = vec![0usize; n_images];
    let mut excluded = Vec::new();

    for (g, grader) in ratings.graders.iter().enumerate() {
        let present: Vec<(usize, f64)> = ratings
            .ratings
            .iter()
            .enumerate()
            .filter_map(|(i, row)| row[g].map(|r| (i, r)))
            .collect();
        let n = present.len() as f64;
        let mean = present.iter().map(|p| p.1).sum::<f64>() / n;
        let var = if present.len() >= 2 {
            present.iter().map(|p| (p.1 - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        if !(var > 0.0) {
            log::warn!("grader {grader} has no rating variance; excluded from z-scores");
            excluded.push(grader.clone());
            continue;
        }
        let sd = var.sqrt();
        for (i, r) in present {
            sums[i] += (r - mean) / sd;
            counts[i] += 1;
        }
    }

    if excluded.len() == ratings.graders.len() {
        return Err(IqaError::stats("no grader has rating variance"));
    }
    if let Some(i) = counts.iter().position(|c| *c == 0) {
        return Err(IqaError::stats(format!(
            "image {} has no rating from a usable grader",
            ratings.images[i]
        )));
    }
    let values = sums
        .iter()
        .zip(&counts)
        .map(|(s, c)| s / *c as f64)
        .collect();
    Ok(ZScores {
        images: ratings.images.clone(),
        values,
        index: ratings.index.clone(),
        excluded_graders: excluded,
    })
}
