#![no_main]

use libfuzzer_sys::fuzz_target;
use tsadbench_core::bench::CriterionSpec;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(spec) = text.parse::<CriterionSpec>() {
            assert_eq!(spec.to_string().parse::<CriterionSpec>().unwrap(), spec);
        }
    }
});
