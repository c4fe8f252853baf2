use serde::{Deserialize, Serialize};

use super::DatasetError;
use crate::series::DEFAULT_RATIO;

/// How curves without explicit boundaries are split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefaultSplit {
    Ratio([u32; 3]),
    Predefined,
}

impl Default for DefaultSplit {
    fn default() -> Self {
        DefaultSplit::Ratio(DEFAULT_RATIO)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveEntry {
    pub id: String,
    /// Path relative to the dataset root, normally `curves/<id>.csv`.
    pub file: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_end: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub valid_end: Option<usize>,
}

impl CurveEntry {
    pub fn new(id: impl Into<String>) -> Self {
        let id = id.into();
        Self {
            file: format!("curves/{id}.csv"),
            id,
            train_end: None,
            valid_end: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub name: String,
    #[serde(default)]
    pub default_split: DefaultSplit,
    /// Latency limit used by k-delay criteria on this dataset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_delay: Option<usize>,
    pub curves: Vec<CurveEntry>,
}

impl DatasetManifest {
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("manifest serialization is infallible");
        out.push('\n');
        out
    }
}

/// Parses and checks a `manifest.json` document.
pub fn parse_manifest(text: &str) -> Result<DatasetManifest, DatasetError> {
    let manifest: DatasetManifest =
        serde_json::from_str(text).map_err(|e| DatasetError::Manifest(e.to_string()))?;
    if manifest.name.is_empty() {
        return Err(DatasetError::Manifest("dataset name is empty".into()));
    }
    if let DefaultSplit::Ratio(r) = manifest.default_split {
        if r.contains(&0) {
            return Err(DatasetError::Manifest(format!(
                "every split ratio part must be positive, got {r:?}"
            )));
        }
    }
    let mut seen = std::collections::HashSet::new();
    for curve in &manifest.curves {
        if curve.id.is_empty() || curve.id.contains(['/', '\\']) || curve.id == "." || curve.id == ".." {
            return Err(DatasetError::Manifest(format!("invalid curve id '{}'", curve.id)));
        }
        if !seen.insert(curve.id.as_str()) {
            return Err(DatasetError::Manifest(format!("duplicate curve id '{}'", curve.id)));
        }
        if curve.train_end.is_some() != curve.valid_end.is_some() {
            return Err(DatasetError::Manifest(format!(
                "curve '{}' must give both train_end and valid_end or neither",
                curve.id
            )));
        }
        if manifest.default_split == DefaultSplit::Predefined && curve.train_end.is_none() {
            return Err(DatasetError::Manifest(format!(
                "curve '{}' needs train_end/valid_end under a predefined split",
                curve.id
            )));
        }
    }
    Ok(manifest)
}
