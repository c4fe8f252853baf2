#![no_main]

use libfuzzer_sys::fuzz_target;
use tsadbench_core::datasets::{import_generic_csv, ColumnMap};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let columns = ColumnMap::default();
        if let Ok(canonical) = import_generic_csv(text, &columns, "fuzz.csv") {
            assert_eq!(import_generic_csv(&canonical, &columns, "fuzz.csv").unwrap(), canonical);
        }
    }
});
