//! Labeled univariate series and the small set of conversions every other
//! module relies on.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeriesError {
    #[error("series is empty")]
    Empty,
    #[error("values and labels differ in length ({values} vs {labels})")]
    LabelLengthMismatch { values: usize, labels: usize },
    #[error("non-finite value at index {index}")]
    NonFiniteValue { index: usize },
    #[error("label {label} at index {index} is not 0 or 1")]
    InvalidLabel { index: usize, label: u8 },
    #[error("series of length {len} is too short to split into non-empty regions")]
    SeriesTooShort { len: usize },
    #[error("invalid split: train_end={train_end}, valid_end={valid_end}, length={len}")]
    InvalidSplit {
        train_end: usize,
        valid_end: usize,
        len: usize,
    },
    #[error("score length mismatch for '{series_id}': expected {expected}, got {actual}")]
    LengthMismatch {
        series_id: String,
        expected: usize,
        actual: usize,
    },
    #[error("non-finite score for '{series_id}' at test offset {index}")]
    NonFiniteScore { series_id: String, index: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitSource {
    Ratio,
    Predefined,
}

/// Exclusive boundaries of the train and validation regions. The test region
/// is `[valid_end, n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_end: usize,
    pub valid_end: usize,
    pub source: SplitSource,
}

impl SplitSpec {
    /// Checks `0 < train_end <= valid_end < len`.
    pub fn predefined(train_end: usize, valid_end: usize, len: usize) -> Result<Self, SeriesError> {
        if train_end == 0 || train_end > valid_end || valid_end >= len {
            return Err(SeriesError::InvalidSplit {
                train_end,
                valid_end,
                len,
            });
        }
        Ok(Self {
            train_end,
            valid_end,
            source: SplitSource::Predefined,
        })
    }

    pub fn test_len(&self, len: usize) -> usize {
        len - self.valid_end
    }
}

/// Maximal run of anomalous timestamps, both ends inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AnomalySegment {
    pub start: usize,
    pub end: usize,
}

impl AnomalySegment {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, index: usize) -> bool {
        self.start <= index && index <= self.end
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    id: String,
    values: Vec<f64>,
    labels: Vec<u8>,
    split: SplitSpec,
}

impl TimeSeries {
    /// Builds a series, validating every invariant. Use [`split_series`] to
    /// derive a ratio split.
    pub fn new(
        id: impl Into<String>,
        values: Vec<f64>,
        labels: Vec<u8>,
        split: SplitSpec,
    ) -> Result<Self, SeriesError> {
        if values.is_empty() {
            return Err(SeriesError::Empty);
        }
        if values.len() != labels.len() {
            return Err(SeriesError::LabelLengthMismatch {
                values: values.len(),
                labels: labels.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(SeriesError::NonFiniteValue { index });
        }
        if let Some(index) = labels.iter().position(|&l| l > 1) {
            return Err(SeriesError::InvalidLabel {
                index,
                label: labels[index],
            });
        }
        let len = values.len();
        if split.train_end == 0 || split.train_end > split.valid_end || split.valid_end >= len {
            return Err(SeriesError::InvalidSplit {
                train_end: split.train_end,
                valid_end: split.valid_end,
                len,
            });
        }
        Ok(Self {
            id: id.into(),
            values,
            labels,
            split,
        })
    }

    /// Builds a series with the default 4:1:5 ratio split.
    pub fn with_ratio_split(
        id: impl Into<String>,
        values: Vec<f64>,
        labels: Vec<u8>,
    ) -> Result<Self, SeriesError> {
        let split = split_series(values.len(), DEFAULT_RATIO)?;
        Self::new(id, values, labels, split)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn split(&self) -> SplitSpec {
        self.split
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn train_values(&self) -> &[f64] {
        &self.values[..self.split.train_end]
    }

    /// Everything before the test region (train + validation).
    pub fn history_values(&self) -> &[f64] {
        &self.values[..self.split.valid_end]
    }

    pub fn test_values(&self) -> &[f64] {
        &self.values[self.split.valid_end..]
    }

    pub fn test_labels(&self) -> &[u8] {
        &self.labels[self.split.valid_end..]
    }

    pub fn test_len(&self) -> usize {
        self.split.test_len(self.len())
    }
}

/// Anomaly scores aligned one-to-one with a series' test region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSeries {
    pub series_id: String,
    pub scores: Vec<f64>,
}

impl ScoreSeries {
    pub fn new(series_id: impl Into<String>, scores: Vec<f64>) -> Self {
        Self {
            series_id: series_id.into(),
            scores,
        }
    }
}

pub const DEFAULT_RATIO: [u32; 3] = [4, 1, 5];

/// Maximal runs of 1s, sorted by start.
pub fn extract_segments(labels: &[u8]) -> Vec<AnomalySegment> {
    let mut segments = Vec::new();
    let mut open: Option<usize> = None;
    for (i, &label) in labels.iter().enumerate() {
        match (label != 0, open) {
            (true, None) => open = Some(i),
            (false, Some(start)) => {
                segments.push(AnomalySegment::new(start, i - 1));
                open = None;
            }
            _ => {}
        }
    }
    if let Some(start) = open {
        segments.push(AnomalySegment::new(start, labels.len() - 1));
    }
    segments
}

/// Inverse of [`extract_segments`]. Segments past `len` are clipped.
pub fn segments_to_mask(segments: &[AnomalySegment], len: usize) -> Vec<u8> {
    let mut mask = vec![0u8; len];
    for seg in segments {
        if seg.start >= len {
            continue;
        }
        mask[seg.start..=seg.end.min(len - 1)].fill(1);
    }
    mask
}

/// Floor-based ratio split. With the default `[4, 1, 5]` ratio this gives
/// `train_end = floor(0.4 n)` and `valid_end = floor(0.5 n)`.
pub fn split_series(len: usize, ratio: [u32; 3]) -> Result<SplitSpec, SeriesError> {
    let total: u64 = ratio.iter().map(|&r| u64::from(r)).sum();
    if total == 0 {
        return Err(SeriesError::SeriesTooShort { len });
    }
    let n = len as u64;
    let train_end = (n * u64::from(ratio[0]) / total) as usize;
    let valid_end = (n * u64::from(ratio[0] + ratio[1]) / total) as usize;
    if train_end == 0 || valid_end == train_end || valid_end >= len {
        return Err(SeriesError::SeriesTooShort { len });
    }
    Ok(SplitSpec {
        train_end,
        valid_end,
        source: SplitSource::Ratio,
    })
}

/// Scores must match the test region length and be finite.
pub fn validate_scores(scores: &ScoreSeries, series: &TimeSeries) -> Result<(), SeriesError> {
    let expected = series.test_len();
    if scores.scores.len() != expected {
        return Err(SeriesError::LengthMismatch {
            series_id: series.id().to_string(),
            expected,
            actual: scores.scores.len(),
        });
    }
    if let Some(index) = scores.scores.iter().position(|s| !s.is_finite()) {
        return Err(SeriesError::NonFiniteScore {
            series_id: series.id().to_string(),
            index,
        });
    }
    Ok(())
}
