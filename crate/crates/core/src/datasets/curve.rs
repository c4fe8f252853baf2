//! Canonical per-curve CSV: header `index,value,label`, 0-based consecutive
//! indices, decimal values, labels in `{0,1}`, LF line endings.

use std::fmt::Write as _;

use super::DatasetError;

pub const CURVE_HEADER: &str = "index,value,label";

/// Shortest round-trip decimal text for a finite value.
pub fn format_value(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn write_curve_csv(values: &[f64], labels: &[u8]) -> String {
    let mut out = String::with_capacity(values.len() * 16 + 20);
    out.push_str(CURVE_HEADER);
    out.push('\n');
    for (i, (v, l)) in values.iter().zip(labels).enumerate() {
        let _ = writeln!(out, "{i},{},{l}", format_value(*v));
    }
    out
}

/// Parses a canonical curve file. Row numbers in errors count data rows
/// from 1 (row `r` carries index `r - 1`).
pub fn parse_curve_csv(text: &str, file: &str) -> Result<(Vec<f64>, Vec<u8>), DatasetError> {
    let parse_err = |row: usize, message: String| DatasetError::Parse {
        file: file.to_string(),
        row,
        message,
    };
    let mut lines = text.split('\n');
    let header = lines.next().unwrap_or("").trim_end_matches('\r');
    if header.trim_start_matches('\u{feff}') != CURVE_HEADER {
        return Err(parse_err(0, format!("expected header '{CURVE_HEADER}', found '{header}'")));
    }
    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut finished = false;
    for (i, line) in lines.enumerate() {
        let row = i + 1;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            finished = true;
            continue;
        }
        if finished {
            return Err(parse_err(row, "blank line inside data".into()));
        }
        let mut fields = line.split(',');
        let (Some(index), Some(value), Some(label), None) =
            (fields.next(), fields.next(), fields.next(), fields.next())
        else {
            return Err(parse_err(row, format!("expected 3 fields, found '{line}'")));
        };
        let index: usize = index
            .parse()
            .map_err(|_| parse_err(row, format!("invalid index '{index}'")))?;
        if index != row - 1 {
            return Err(parse_err(row, format!("index {index} out of sequence, expected {}", row - 1)));
        }
        let value: f64 = value
            .parse()
            .map_err(|_| parse_err(row, format!("invalid value '{value}'")))?;
        if !value.is_finite() {
            return Err(DatasetError::InvariantViolation {
                file: file.to_string(),
                row: Some(row),
                message: format!("non-finite value {value}"),
            });
        }
        let label = match label {
            "0" => 0,
            "1" => 1,
            other if other.parse::<i64>().is_ok() => {
                return Err(DatasetError::InvariantViolation {
                    file: file.to_string(),
                    row: Some(row),
                    message: format!("label {other} is not 0 or 1"),
                })
            }
            other => return Err(parse_err(row, format!("invalid label '{other}'"))),
        };
        values.push(value);
        labels.push(label);
    }
    if values.is_empty() {
        return Err(DatasetError::InvariantViolation {
            file: file.to_string(),
            row: None,
            message: "curve has no rows".into(),
        });
    }
    Ok((values, labels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_canonical_text() {
        let (v, l) = parse_curve_csv("index,value,label\n0,1.5,0\n1,-2,1\n", "c").unwrap();
        assert_eq!(v, vec![1.5, -2.0]);
        assert_eq!(l, vec![0, 1]);
        let (v, _) = parse_curve_csv("index,value,label\r\n0,3,0\r\n", "c").unwrap();
        assert_eq!(v, vec![3.0]);
    }

    #[test]
    fn reports_row_numbers() {
        let mut text = String::from("index,value,label\n");
        for i in 0..20 {
            let label = if i == 16 { 2 } else { 0 };
            text.push_str(&format!("{i},0.5,{label}\n"));
        }
        match parse_curve_csv(&text, "c") {
            Err(DatasetError::InvariantViolation { row: Some(17), .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_curve_csv("index,value,label\n0,NaN,0\n", "c"),
            Err(DatasetError::InvariantViolation { row: Some(1), .. })
        ));
        assert!(matches!(
            parse_curve_csv("index,value,label\n0,1,0\n2,1,0\n", "c"),
            Err(DatasetError::Parse { row: 2, .. })
        ));
        assert!(matches!(
            parse_curve_csv("value,label\n1,0\n", "c"),
            Err(DatasetError::Parse { row: 0, .. })
        ));
        assert!(matches!(
            parse_curve_csv("index,value,label\n0,x,0\n", "c"),
            Err(DatasetError::Parse { row: 1, .. })
        ));
        assert!(parse_curve_csv("index,value,label\n", "c").is_err());
        assert!(parse_curve_csv("index,value,label\n0,1,0\n\n1,1,0\n", "c").is_err());
    }

    proptest! {
        #[test]
        fn write_then_parse_is_identity(
            rows in proptest::collection::vec((proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO, 0u8..=1), 1..50)
        ) {
            let (values, labels): (Vec<f64>, Vec<u8>) = rows.into_iter().unzip();
            let text = write_curve_csv(&values, &labels);
            let (v, l) = parse_curve_csv(&text, "p").unwrap();
            prop_assert_eq!(v.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), values.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
            prop_assert_eq!(l, labels);
        }
    }
}
