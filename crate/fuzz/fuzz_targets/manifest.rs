#![no_main]

use libfuzzer_sys::fuzz_target;
use tsadbench_core::datasets::parse_manifest;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(m) = parse_manifest(text) {
            let again = serde_json::to_string(&m).unwrap();
            assert_eq!(parse_manifest(&again).unwrap(), m);
        }
    }
});
