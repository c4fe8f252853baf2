//! Adapters from arbitrary labeled CSV exports to the canonical curve file.

use serde::{Deserialize, Serialize};

use super::curve::write_curve_csv;
use super::DatasetError;

/// Names of the source columns holding the value and the label. Any other
/// column (timestamps, ids) is ignored; row order is preserved.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMap {
    pub value: String,
    pub label: String,
}

impl Default for ColumnMap {
    fn default() -> Self {
        Self {
            value: "value".into(),
            label: "label".into(),
        }
    }
}

fn parse_label(raw: &str) -> Option<u8> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "0" | "0.0" | "false" => Some(0),
        "1" | "1.0" | "true" => Some(1),
        _ => None,
    }
}

/// Converts CSV text with a header row into canonical curve text.
/// Importing canonical text again yields the same text.
pub fn import_generic_csv(text: &str, columns: &ColumnMap, file: &str) -> Result<String, DatasetError> {
    let err = |row: usize, message: String| DatasetError::Parse {
        file: file.to_string(),
        row,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| err(0, e.to_string()))?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim_start_matches('\u{feff}') == name)
            .ok_or_else(|| err(0, format!("missing column '{name}'")))
    };
    let value_col = find(&columns.value)?;
    let label_col = find(&columns.label)?;

    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| err(row, e.to_string()))?;
        let raw_value = record
            .get(value_col)
            .ok_or_else(|| err(row, "missing value field".into()))?;
        let value: f64 = raw_value
            .parse()
            .map_err(|_| err(row, format!("invalid value '{raw_value}'")))?;
        if !value.is_finite() {
            return Err(DatasetError::InvariantViolation {
                file: file.to_string(),
                row: Some(row),
                message: format!("non-finite value {value}"),
            });
        }
        let raw_label = record
            .get(label_col)
            .ok_or_else(|| err(row, "missing label field".into()))?;
        let label = parse_label(raw_label).ok_or_else(|| err(row, format!("invalid label '{raw_label}'")))?;
        values.push(value);
        labels.push(label);
    }
    if values.is_empty() {
        return Err(err(0, "no data rows".into()));
    }
    Ok(write_curve_csv(&values, &labels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::curve::parse_curve_csv;

    #[test]
    fn two_column_file() {
        let out = import_generic_csv("value,label\n1.5,0\n2,1\n", &ColumnMap::default(), "f").unwrap();
        assert_eq!(out, "index,value,label\n0,1.5,0\n1,2,1\n");
        let (v, l) = parse_curve_csv(&out, "f").unwrap();
        assert_eq!((v, l), (vec![1.5, 2.0], vec![0, 1]));
    }

    #[test]
    fn reorders_named_columns() {
        let map = ColumnMap {
            value: "value".into(),
            label: "is_anomaly".into(),
        };
        let out = import_generic_csv(
            "timestamp,value,is_anomaly\n1600000000,0.25,False\n1600000060,9.5,True\n",
            &map,
            "f",
        )
        .unwrap();
        assert_eq!(out, "index,value,label\n0,0.25,0\n1,9.5,1\n");
    }

    #[test]
    fn idempotent() {
        let once = import_generic_csv("value,label\n1.50,0\n-0.0,1\n1e3,0\n", &ColumnMap::default(), "f").unwrap();
        let twice = import_generic_csv(&once, &ColumnMap::default(), "f").unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn missing_label_column() {
        assert!(matches!(
            import_generic_csv("timestamp,value\n1,2\n", &ColumnMap::default(), "f"),
            Err(DatasetError::Parse { row: 0, .. })
        ));
        assert!(import_generic_csv("value,label\n1,maybe\n", &ColumnMap::default(), "f").is_err());
        assert!(import_generic_csv("value,label\n", &ColumnMap::default(), "f").is_err());
    }
}
