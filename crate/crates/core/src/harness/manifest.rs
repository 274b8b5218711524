use std::collections::HashSet;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{IqaError, Result};
use crate::imgio::CropRect;
use crate::stats::RatingMatrix;

pub const MANIFEST_HEADER: [&str; 7] = [
    "image_id",
    "reference",
    "distorted",
    "crop_x",
    "crop_y",
    "crop_w",
    "crop_h",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub image_id: String,
    /// Resolved against the manifest directory.
    pub reference: PathBuf,
    pub distorted: PathBuf,
    pub crop: Option<CropRect>,
}

/// A dataset described by `<name>.csv` plus the optional `<name>.meta` sidecar.
#[derive(Debug, Clone)]
pub struct DatasetManifest {
    pub name: String,
    pub root: PathBuf,
    pub entries: Vec<ManifestEntry>,
    pub ratings_path: Option<PathBuf>,
    pub ratings: Option<RatingMatrix>,
    /// Convert color inputs to grayscale.
    pub grayscale: bool,
    /// Min-max normalize each image before scaling to Byte range.
    pub normalize: bool,
}

impl DatasetManifest {
    pub fn ratings(&self) -> Result<&RatingMatrix> {
        self.ratings.as_ref().ok_or_else(|| IqaError::Manifest {
            path: self.root.join(format!("{}.meta", self.name)),
            message: "no ratings= entry in the sidecar".into(),
        })
    }
}

#[derive(Debug, Default)]
struct Meta {
    ratings: Option<String>,
    grayscale: bool,
    normalize: bool,
}

fn parse_bool(value: &str) -> Option<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" => Some(true),
        "false" | "0" | "no" => Some(false),
        _ => None,
    }
}

fn read_meta(path: &Path) -> Result<Meta> {
    let mut meta = Meta::default();
    if !path.exists() {
        return Ok(meta);
    }
    let text = fs::read_to_string(path).map_err(|e| IqaError::io(path, e))?;
    let bad = |message: String| IqaError::Manifest {
        path: path.to_path_buf(),
        message,
    };
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| bad(format!("line {}: expected key=value", lineno + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "ratings" => meta.ratings = Some(value.to_string()),
            "grayscale" | "normalize" => {
                let flag = parse_bool(value)
                    .ok_or_else(|| bad(format!("line {}: {key} must be a bool", lineno + 1)))?;
                if key == "grayscale" {
                    meta.grayscale = flag;
                } else {
                    meta.normalize = flag;
                }
            }
            other => return Err(bad(format!("line {}: unknown key {other:?}", lineno + 1))),
        }
    }
    Ok(meta)
}

fn parse_crop(fields: &[&str]) -> std::result::Result<Option<CropRect>, String> {
    if fields.iter().all(|f| f.is_empty()) {
        return Ok(None);
    }
    let mut v = [0usize; 4];
    for (slot, f) in v.iter_mut().zip(fields) {
        *slot = f
            .parse()
            .map_err(|_| format!("crop fields must all be set to integers, got {fields:?}"))?;
    }
    let rect = CropRect::new(v[0], v[1], v[2], v[3]);
    if rect.w == 0 || rect.h == 0 {
        return Err("crop extent must be at least 1x1".into());
    }
    Ok(Some(rect))
}

/// Reads and validates a manifest; ratings named in the sidecar are loaded
/// and cross-checked against the entries.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<DatasetManifest> {
    let path = path.as_ref();
    let bad = |message: String| IqaError::Manifest {
        path: path.to_path_buf(),
        message,
    };
    let file = fs::File::open(path).map_err(|e| IqaError::io(path, e))?;
    let root = path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| bad("manifest file name is not valid UTF-8".into()))?
        .to_string();

    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(file);
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| bad(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header != MANIFEST_HEADER[..3] && header != MANIFEST_HEADER {
        return Err(bad(format!(
            "expected header {}, got {}",
            MANIFEST_HEADER.join(","),
            header.join(",")
        )));
    }

    let mut entries = Vec::new();
    let mut seen = HashSet::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let fields: Vec<&str> = record.iter().collect();
        if fields.len() != 3 && fields.len() != 7 {
            return Err(bad(format!("row {}: expected 3 or 7 fields", i + 1)));
        }
        let image_id = fields[0].to_string();
        if image_id.is_empty() {
            return Err(bad(format!("row {}: empty image_id", i + 1)));
        }
        if !seen.insert(image_id.clone()) {
            return Err(bad(format!("duplicate image_id {image_id:?}")));
        }
        let crop = if fields.len() == 7 {
            parse_crop(&fields[3..7]).map_err(|m| bad(format!("entry {image_id}: {m}")))?
        } else {
            None
        };
        let reference = root.join(fields[1]);
        let distorted = root.join(fields[2]);
        for p in [&reference, &distorted] {
            if !p.is_file() {
                return Err(bad(format!(
                    "entry {image_id}: image {} does not exist",
                    p.display()
                )));
            }
        }
        entries.push(ManifestEntry {
            image_id,
            reference,
            distorted,
            crop,
        });
    }
    if entries.is_empty() {
        return Err(bad("manifest has no entries".into()));
    }

    let meta = read_meta(&root.join(format!("{name}.meta")))?;
    let ratings_path = meta.ratings.as_ref().map(|r| root.join(r));
    let ratings = match &ratings_path {
        Some(p) => {
            let m = RatingMatrix::load_csv(p)?;
            if let Some(missing) = entries.iter().find(|e| !m.contains(&e.image_id)) {
                return Err(bad(format!(
                    "image_id {:?} has no ratings in {}",
                    missing.image_id,
                    p.display()
                )));
            }
            Some(m)
        }
        None => None,
    };

    Ok(DatasetManifest {
        name,
        root,
        entries,
        ratings_path,
        ratings,
        grayscale: meta.grayscale,
        normalize: meta.normalize,
    })
}

/// Entry as written to disk; paths are taken verbatim.
#[derive(Debug, Clone)]
pub struct ManifestRow {
    pub image_id: String,
    pub reference: String,
    pub distorted: String,
    pub crop: Option<CropRect>,
}

/// Writes `<dir>/<name>.csv` and `<dir>/<name>.meta`; returns the manifest path.
pub fn write_manifest(
    dir: &Path,
    name: &str,
    rows: &[ManifestRow],
    ratings_file: Option<&str>,
    grayscale: bool,
    normalize: bool,
) -> Result<PathBuf> {
    let path = dir.join(format!("{name}.csv"));
    let mut out = String::new();
    out.push_str(&MANIFEST_HEADER.join(","));
    out.push('\n');
    for r in rows {
        let crop = match r.crop {
            Some(c) => format!("{},{},{},{}", c.x0, c.y0, c.w, c.h),
            None => ",,,".to_string(),
        };
        out.push_str(&format!("{},{},{},{}\n", r.image_id, r.reference, r.distorted, crop));
    }
    fs::write(&path, out).map_err(|e| IqaError::io(&path, e))?;

    let meta_path = dir.join(format!("{name}.meta"));
    let mut meta = fs::File::create(&meta_path).map_err(|e| IqaError::io(&meta_path, e))?;
    let mut text = String::new();
    if let Some(r) = ratings_file {
        text.push_str(&format!("ratings={r}\n"));
    }
    text.push_str(&format!("grayscale={grayscale}\nnormalize={normalize}\n"));
    meta.write_all(text.as_bytes())
        .map_err(|e| IqaError::io(&meta_path, e))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn touch(dir: &Path, name: &str) {
        fs::write(dir.join(name), b"x").unwrap();
    }

    #[test]
    fn minimal_manifest() {
        let dir = tempfile::tempdir().unwrap();
        touch(dir.path(), "r.png");
        touch(dir.path(), "d1.png");
        touch(dir.path(), "d2.png");
        fs::write(
            dir.path().join("set.csv"),
            "image_id,reference,distorted,crop_x,crop_y,crop_w,crop_h\n\
             a,r.png,d1.png,,,,\n\
             b,r.png,d2.png,1,2,3,4\n",
        )
        .unwrap();
        fs::write(dir.path().join("ratings.csv"), "image_id,grader_id,rating\na,g,1\nb,g,2\n").unwrap();
        fs::write(dir.path().join("set.meta"), "ratings=ratings.csv\ngrayscale=true\n").unwrap();
        let m = load_manifest(dir.path().join("set.csv")).unwrap();
        assert_eq!(m.name, "set");
        assert_eq!(m.entries.len(), 2);
        assert_eq!(m.entries[1].crop, Some(CropRect::new(1, 2, 3, 4)));
        assert!(m.grayscale && !m.normalize);
        assert!(m.ratings.is_some());
    }

    #[test]
    fn three_column_manifest_without_meta() {
        let dir = tempfile::tempdir().unwrap();
        touch(dir.path(), "r.png");
        fs::write(dir.path().join("s.csv"), "image_id,reference,distorted\na,r.png,r.png\n").unwrap();
        let m = load_manifest(dir.path().join("s.csv")).unwrap();
        assert!(m.ratings.is_none());
        assert!(m.ratings().is_err());
        assert_eq!(m.entries[0].crop, None);
    }

    #[test]
    fn validation_errors() {
        let dir = tempfile::tempdir().unwrap();
        touch(dir.path(), "r.png");
        let write = |body: &str| {
            fs::write(dir.path().join("m.csv"), body).unwrap();
            load_manifest(dir.path().join("m.csv"))
        };
        let err = write("image_id,reference,distorted\nbroken,r.png,gone.png\n").unwrap_err();
        assert!(err.to_string().contains("broken"), "{err}");
        let err = write("image_id,reference,distorted\na,r.png,r.png\na,r.png,r.png\n").unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
        assert!(write("id,ref,dist\na,r.png,r.png\n").is_err());
        assert!(write("image_id,reference,distorted,crop_x,crop_y,crop_w,crop_h\na,r.png,r.png,1,,3,4\n").is_err());
        assert!(matches!(
            load_manifest(dir.path().join("nope.csv")),
            Err(IqaError::Io { .. })
        ));

        fs::write(dir.path().join("ratings.csv"), "image_id,grader_id,rating\nx,g,1\ny,g,2\n").unwrap();
        fs::write(dir.path().join("m.meta"), "ratings=ratings.csv\n").unwrap();
        let err = write("image_id,reference,distorted\na,r.png,r.png\n").unwrap_err();
        assert!(err.to_string().contains("no ratings"), "{err}");
    }
}
