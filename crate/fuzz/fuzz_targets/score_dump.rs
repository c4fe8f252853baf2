#![no_main]

use libfuzzer_sys::fuzz_target;
use tsadbench_core::bench::{parse_score_dump, write_score_dump};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok((first, scores)) = parse_score_dump(text, "fuzz") {
            let (f2, s2) = parse_score_dump(&write_score_dump(first, &scores), "fuzz").unwrap();
            assert_eq!(f2, first);
            assert!(s2.iter().zip(&scores).all(|(a, b)| a.to_bits() == b.to_bits()));
        }
    }
});
