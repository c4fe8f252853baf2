//! Canonical dataset layout, loading and anomaly-free exclusion.
//!
//! ```text
//! <root>/manifest.json
//! <root>/curves/<id>.csv      header "index,value,label"
//! ```

mod curve;
mod import;
mod manifest;

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

pub use curve::{format_value, parse_curve_csv, write_curve_csv, CURVE_HEADER};
pub use import::{import_generic_csv, ColumnMap};
pub use manifest::{parse_manifest, CurveEntry, DatasetManifest, DefaultSplit};

use crate::series::{split_series, SeriesError, SplitSpec, TimeSeries};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("no manifest.json in {0}")]
    MissingManifest(PathBuf),
    #[error("invalid manifest: {0}")]
    Manifest(String),
    #[error("{file}: row {row}: {message}")]
    Parse {
        file: String,
        row: usize,
        message: String,
    },
    #[error("{file}{}: {message}", row.map(|r| format!(": row {r}")).unwrap_or_default())]
    InvariantViolation {
        file: String,
        row: Option<usize>,
        message: String,
    },
    #[error("curve '{id}': {source}")]
    Series {
        id: String,
        #[source]
        source: SeriesError,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl DatasetError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        DatasetError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// A loaded dataset: its manifest and one validated series per curve, in
/// manifest order.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub manifest: DatasetManifest,
    pub series: Vec<TimeSeries>,
}

impl Dataset {
    pub fn name(&self) -> &str {
        &self.manifest.name
    }

    pub fn get(&self, id: &str) -> Option<&TimeSeries> {
        self.series.iter().find(|s| s.id() == id)
    }
}

fn resolve_split(
    manifest: &DatasetManifest,
    entry: &CurveEntry,
    len: usize,
) -> Result<SplitSpec, SeriesError> {
    match (entry.train_end, entry.valid_end, manifest.default_split) {
        (Some(train_end), Some(valid_end), _) => SplitSpec::predefined(train_end, valid_end, len),
        (_, _, DefaultSplit::Ratio(ratio)) => split_series(len, ratio),
        // parse_manifest guarantees explicit boundaries under Predefined.
        (_, _, DefaultSplit::Predefined) => Err(SeriesError::InvalidSplit {
            train_end: 0,
            valid_end: 0,
            len,
        }),
    }
}

/// Builds a series from canonical curve text and its manifest entry.
pub fn series_from_text(
    manifest: &DatasetManifest,
    entry: &CurveEntry,
    text: &str,
) -> Result<TimeSeries, DatasetError> {
    let (values, labels) = parse_curve_csv(text, &entry.file)?;
    let series_err = |source| DatasetError::Series {
        id: entry.id.clone(),
        source,
    };
    let split = resolve_split(manifest, entry, values.len()).map_err(series_err)?;
    TimeSeries::new(entry.id.clone(), values, labels, split).map_err(series_err)
}

pub fn load_dataset(root: impl AsRef<Path>) -> Result<Dataset, DatasetError> {
    let root = root.as_ref();
    let manifest_path = root.join("manifest.json");
    if !manifest_path.is_file() {
        return Err(DatasetError::MissingManifest(root.to_path_buf()));
    }
    let text = fs::read_to_string(&manifest_path).map_err(|e| DatasetError::io(&manifest_path, e))?;
    let manifest = parse_manifest(&text)?;
    let series = manifest
        .curves
        .par_iter()
        .map(|entry| {
            let path = root.join(&entry.file);
            let text = fs::read_to_string(&path).map_err(|e| DatasetError::io(&path, e))?;
            series_from_text(&manifest, entry, &text)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Dataset { manifest, series })
}

/// Writes `dataset` in the canonical layout. Loading the result reproduces
/// `dataset` exactly.
pub fn write_dataset(root: impl AsRef<Path>, dataset: &Dataset) -> Result<(), DatasetError> {
    let root = root.as_ref();
    for entry in &dataset.manifest.curves {
        let series = dataset.get(&entry.id).ok_or_else(|| {
            DatasetError::Manifest(format!("curve '{}' has no series data", entry.id))
        })?;
        let path = root.join(&entry.file);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| DatasetError::io(parent, e))?;
        }
        fs::write(&path, write_curve_csv(series.values(), series.labels()))
            .map_err(|e| DatasetError::io(&path, e))?;
    }
    fs::create_dir_all(root).map_err(|e| DatasetError::io(root, e))?;
    let path = root.join("manifest.json");
    fs::write(&path, dataset.manifest.to_json()).map_err(|e| DatasetError::io(&path, e))
}

/// Drops every series whose test region holds no anomaly. Returns the kept
/// series and the ids of the excluded ones.
pub fn filter_anomaly_free(series: Vec<TimeSeries>) -> (Vec<TimeSeries>, Vec<String>) {
    let mut excluded = Vec::new();
    let kept = series
        .into_iter()
        .filter(|s| {
            let keep = s.test_labels().contains(&1);
            if !keep {
                excluded.push(s.id().to_string());
            }
            keep
        })
        .collect();
    (kept, excluded)
}

/// Reads a CSV export, converts it with [`import_generic_csv`] and writes the
/// canonical file to `output`.
pub fn import_generic_csv_file(
    input: impl AsRef<Path>,
    output: impl AsRef<Path>,
    columns: &ColumnMap,
) -> Result<(), DatasetError> {
    let input = input.as_ref();
    let text = fs::read_to_string(input).map_err(|e| DatasetError::io(input, e))?;
    let canonical = import_generic_csv(&text, columns, &input.display().to_string())?;
    let output = output.as_ref();
    fs::write(output, canonical).map_err(|e| DatasetError::io(output, e))
}
