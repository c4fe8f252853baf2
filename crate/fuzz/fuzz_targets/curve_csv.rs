#![no_main]

use libfuzzer_sys::fuzz_target;
use tsadbench_core::datasets::{parse_curve_csv, write_curve_csv};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok((values, labels)) = parse_curve_csv(text, "fuzz.csv") {
            assert_eq!(values.len(), labels.len());
            let again = parse_curve_csv(&write_curve_csv(&values, &labels), "fuzz.csv").unwrap();
            assert_eq!(again.1, labels);
            assert!(again.0.iter().zip(&values).all(|(a, b)| a.to_bits() == b.to_bits()));
        }
    }
});
