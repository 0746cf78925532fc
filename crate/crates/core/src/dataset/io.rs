//! On-disk formats.
//!
//! A dataset manifest is a JSON document
//!
//! ```json
//! { "views": ["view0.csv", "view1.csv"], "labels": "labels.txt", "c": 3 }
//! ```
//!
//! Each view file is a headerless CSV with one row per instance. Relative paths
//! are resolved against the manifest's directory. A masked dataset adds
//! `"m"` and `"mask"` entries; its view files then hold only the presented
//! rows and the mask file lists the presented indices.
//!
//! Mask files take one of three forms:
//!
//! ```json
//! { "rates": [0.1, 0.3, 0.6], "seed": 7 }
//! { "multipliers": [0.2, 1.0, 1.8], "per": 0.1, "seed": 7 }
//! { "presented": [[0, 1, 4], [2, 3]] }
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{
    apply_mask, apply_presented, build_indicator, densify_labels, rates_from_multipliers, IncompleteDataset, MaskSpec,
    MultiViewDataset,
};
use crate::{Result, UimcError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub views: Vec<PathBuf>,
    #[serde(default)]
    pub labels: Option<PathBuf>,
    pub c: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum MaskFile {
    Presented { presented: Vec<Vec<usize>> },
    Rates { rates: Vec<f64>, seed: u64 },
    Scheme { multipliers: Vec<f64>, per: f64, seed: u64 },
}

impl MaskFile {
    /// Applies the mask to a complete dataset.
    pub fn apply(&self, data: &MultiViewDataset) -> Result<IncompleteDataset> {
        match self {
            MaskFile::Presented { presented } => apply_presented(data, presented),
            MaskFile::Rates { rates, seed } => apply_mask(data, &MaskSpec::new(rates.clone(), *seed)?),
            MaskFile::Scheme { multipliers, per, seed } => {
                apply_mask(data, &MaskSpec::new(rates_from_multipliers(multipliers, *per)?, *seed)?)
            }
        }
    }

    /// Same mask with a different seed; explicit masks are returned unchanged.
    pub fn reseeded(&self, new_seed: u64) -> Self {
        let mut out = self.clone();
        match &mut out {
            MaskFile::Presented { .. } => {}
            MaskFile::Rates { seed, .. } | MaskFile::Scheme { seed, .. } => *seed = new_seed,
        }
        out
    }
}

/// Either form a manifest can describe.
#[derive(Debug, Clone, PartialEq)]
pub enum LoadedDataset {
    Complete(MultiViewDataset),
    Masked(IncompleteDataset),
}

impl LoadedDataset {
    pub fn into_incomplete(self) -> IncompleteDataset {
        match self {
            LoadedDataset::Complete(d) => d.to_incomplete(),
            LoadedDataset::Masked(d) => d,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> UimcError + '_ {
    move |source| UimcError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn malformed(what: &'static str, path: &Path, detail: impl ToString) -> UimcError {
    UimcError::Malformed {
        what,
        path: path.to_path_buf(),
        detail: detail.to_string(),
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(what: &'static str, path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| malformed(what, path, e))
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("serializable value");
    fs::write(path, text + "\n").map_err(io_err(path))
}

/// Reads a headerless CSV of instances (rows) × features (columns) and
/// returns the transposed `features × instances` matrix. A first row that does
/// not parse as numbers is treated as a header and skipped.
pub fn read_view_csv(path: &Path) -> Result<DMatrix<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| malformed("view csv", path, e))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| malformed("view csv", path, e))?;
        let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if line == 0 => continue,
            Err(e) => return Err(malformed("view csv", path, format!("row {}: {e}", line + 1))),
        }
    }
    let d = rows.first().map_or(0, Vec::len);
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != d) {
        return Err(malformed(
            "view csv",
            path,
            format!("row {} has {} fields, expected {d}", i + 1, r.len()),
        ));
    }
    Ok(DMatrix::from_fn(d, rows.len(), |i, j| rows[j][i]))
}

/// Writes a `features × instances` matrix as CSV, one row per instance.
/// Values use the shortest representation that round-trips exactly.
pub fn write_view_csv(view: &DMatrix<f64>, path: &Path) -> Result<()> {
    let mut out = String::new();
    for j in 0..view.ncols() {
        let row: Vec<String> = view.column(j).iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(io_err(path))
}

/// Reads one integer label per line and densifies them to `0..k`.
pub fn read_labels(path: &Path) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let raw: Vec<i64> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .enumerate()
        .map(|(i, l)| {
            l.parse::<i64>()
                .map_err(|e| malformed("labels file", path, format!("line {}: {e}", i + 1)))
        })
        .collect::<Result<_>>()?;
    Ok(densify_labels(&raw))
}

pub fn write_labels(labels: &[usize], path: &Path) -> Result<()> {
    let mut out = String::with_capacity(labels.len() * 3);
    for l in labels {
        out.push_str(&l.to_string());
        out.push('\n');
    }
    fs::write(path, out).map_err(io_err(path))
}

/// Loads whatever a manifest describes.
pub fn load_manifest(path: &Path) -> Result<LoadedDataset> {
    let manifest: Manifest = read_json("manifest", path)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let views = manifest
        .views
        .iter()
        .map(|p| read_view_csv(&resolve(base, p)))
        .collect::<Result<Vec<_>>>()?;
    let labels = manifest
        .labels
        .as_ref()
        .map(|p| read_labels(&resolve(base, p)))
        .transpose()?;
    match (&manifest.mask, manifest.m) {
        (None, _) => {
            if let Some(m) = manifest.m {
                if views.iter().any(|v| v.ncols() != m) {
                    return Err(malformed("manifest", path, "view row count differs from m"));
                }
            }
            MultiViewDataset::new(views, labels, manifest.c)
                .map(LoadedDataset::Complete)
                .map_err(|e| malformed("manifest", path, e))
        }
        (Some(mask_path), Some(m)) => {
            let mask_path = resolve(base, mask_path);
            let presented = match read_json::<MaskFile>("mask file", &mask_path)? {
                MaskFile::Presented { presented } => presented,
                _ => {
                    return Err(malformed(
                        "mask file",
                        &mask_path,
                        "a masked manifest needs explicit presented indices",
                    ))
                }
            };
            if presented.len() != views.len() {
                return Err(malformed(
                    "manifest",
                    path,
                    format!("{} views but {} presented lists", views.len(), presented.len()),
                ));
            }
            let indicators = presented
                .iter()
                .map(|p| build_indicator(p, m))
                .collect::<Result<Vec<_>>>()
                .map_err(|e| malformed("mask file", &mask_path, e))?;
            // a view with no presented rows reads back as 0 × 0
            let views = views
                .into_iter()
                .zip(&indicators)
                .map(|(v, ind)| {
                    if ind.k() == 0 && v.nrows() == 0 {
                        DMatrix::zeros(1, 0)
                    } else {
                        v
                    }
                })
                .collect();
            IncompleteDataset::new(views, indicators, manifest.c, labels)
                .map(LoadedDataset::Masked)
                .map_err(|e| malformed("manifest", path, e))
        }
        (Some(_), None) => Err(malformed("manifest", path, "\"mask\" requires \"m\"")),
    }
}

/// Loads a complete dataset; masked manifests are rejected.
pub fn load_dataset(path: &Path) -> Result<MultiViewDataset> {
    match load_manifest(path)? {
        LoadedDataset::Complete(d) => Ok(d),
        LoadedDataset::Masked(_) => Err(malformed(
            "manifest",
            path,
            "expected a complete dataset, found a masked one",
        )),
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

/// Writes `manifest.json`, one CSV per view and `labels.txt` into `dir`.
pub fn save_dataset(data: &MultiViewDataset, dir: &Path) -> Result<PathBuf> {
    ensure_dir(dir)?;
    let mut views = Vec::new();
    for (v, view) in data.views().iter().enumerate() {
        let name = PathBuf::from(format!("view{v}.csv"));
        write_view_csv(view, &dir.join(&name))?;
        views.push(name);
    }
    let labels = match data.labels() {
        Some(l) => {
            write_labels(l, &dir.join("labels.txt"))?;
            Some(PathBuf::from("labels.txt"))
        }
        None => None,
    };
    let manifest = Manifest {
        views,
        labels,
        c: data.c(),
        m: None,
        mask: None,
    };
    let path = dir.join("manifest.json");
    write_json(&manifest, &path)?;
    Ok(path)
}

/// Writes a masked dataset: compacted view CSVs, `mask.json` with the
/// presented indices, labels and a manifest tying them together.
pub fn save_incomplete(data: &IncompleteDataset, dir: &Path) -> Result<PathBuf> {
    ensure_dir(dir)?;
    let mut views = Vec::new();
    for (v, view) in data.views().iter().enumerate() {
        let name = PathBuf::from(format!("view{v}.csv"));
        write_view_csv(view, &dir.join(&name))?;
        views.push(name);
    }
    let mask = MaskFile::Presented {
        presented: data.indicators().iter().map(|i| i.presented().to_vec()).collect(),
    };
    write_json(&mask, &dir.join("mask.json"))?;
    let labels = match data.labels() {
        Some(l) => {
            write_labels(l, &dir.join("labels.txt"))?;
            Some(PathBuf::from("labels.txt"))
        }
        None => None,
    };
    let manifest = Manifest {
        views,
        labels,
        c: data.c(),
        m: Some(data.m()),
        mask: Some(PathBuf::from("mask.json")),
    };
    let path = dir.join("manifest.json");
    write_json(&manifest, &path)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, body: &str) {
        fs::write(dir.join(name), body).unwrap();
    }

    #[test]
    fn parses_two_views_of_three_instances() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "a.csv", "1,2\n3,4\n5,6\n");
        write(dir.path(), "b.csv", "x\n0.5\n-1e-3\n7\n");
        write(dir.path(), "l.txt", "10\n20\n10\n");
        write(
            dir.path(),
            "m.json",
            r#"{"views": ["a.csv", "b.csv"], "labels": "l.txt", "c": 2}"#,
        );
        let d = load_dataset(&dir.path().join("m.json")).unwrap();
        assert_eq!(d.m(), 3);
        assert_eq!(d.n_views(), 2);
        assert_eq!(d.views()[0], DMatrix::from_row_slice(2, 3, &[1., 3., 5., 2., 4., 6.]));
        assert_eq!(d.views()[1].as_slice(), &[0.5, -1e-3, 7.0]);
        assert_eq!(d.labels().unwrap(), &[0, 1, 0]);
    }

    #[test]
    fn rejects_ragged_views() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "a.csv", "1\n2\n3\n");
        write(dir.path(), "b.csv", "1\n2\n3\n4\n");
        write(
            dir.path(),
            "m.json",
            r#"{"views": ["a.csv", "b.csv"], "labels": null, "c": 2}"#,
        );
        assert!(load_dataset(&dir.path().join("m.json")).is_err());
    }

    #[test]
    fn rejects_label_count_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "a.csv", "1\n2\n3\n");
        write(dir.path(), "l.txt", "0\n1\n");
        write(
            dir.path(),
            "m.json",
            r#"{"views": ["a.csv"], "labels": "l.txt", "c": 2}"#,
        );
        assert!(load_dataset(&dir.path().join("m.json")).is_err());
    }

    #[test]
    fn rejects_malformed_manifest() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "m.json", r#"{"views": "a.csv"}"#);
        assert!(matches!(
            load_manifest(&dir.path().join("m.json")),
            Err(UimcError::Malformed { .. })
        ));
    }

    #[test]
    fn masked_round_trip() {
        let views = vec![
            DMatrix::from_fn(2, 10, |i, j| (i as f64 + 0.1) * (j as f64 - 3.3)),
            DMatrix::from_fn(3, 10, |i, j| 1.0 / (1.0 + i as f64 + j as f64)),
        ];
        let labels = (0..10).map(|j| j % 2).collect();
        let data = MultiViewDataset::new(views, Some(labels), 2).unwrap();
        let inc = apply_mask(&data, &MaskSpec::new(vec![0.3, 1.0], 4).unwrap()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = save_incomplete(&inc, dir.path()).unwrap();
        let back = load_manifest(&path).unwrap().into_incomplete();
        assert_eq!(back.indicators(), inc.indicators());
        assert_eq!(back.views()[0], inc.views()[0]);
        assert_eq!(back.labels(), inc.labels());
        assert_eq!(back.classifications(), inc.classifications());
    }

    #[test]
    fn complete_round_trip_is_lossless() {
        let views = vec![DMatrix::from_fn(2, 4, |i, j| (i as f64 * 0.1 + j as f64).sin())];
        let data = MultiViewDataset::new(views, Some(vec![0, 1, 1, 0]), 2).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = save_dataset(&data, dir.path()).unwrap();
        assert_eq!(load_dataset(&path).unwrap(), data);
    }

    #[test]
    fn mask_file_forms() {
        let p: MaskFile = serde_json::from_str(r#"{"presented": [[0, 2]]}"#).unwrap();
        assert!(matches!(p, MaskFile::Presented { .. }));
        let r: MaskFile = serde_json::from_str(r#"{"rates": [0.1], "seed": 3}"#).unwrap();
        assert_eq!(
            r.reseeded(9),
            MaskFile::Rates {
                rates: vec![0.1],
                seed: 9
            }
        );
        let s: MaskFile = serde_json::from_str(r#"{"multipliers": [1.8], "per": 0.1, "seed": 3}"#).unwrap();
        assert!(matches!(s, MaskFile::Scheme { .. }));
    }
}
