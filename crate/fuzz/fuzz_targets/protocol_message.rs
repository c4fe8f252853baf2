#![no_main]

use libfuzzer_sys::fuzz_target;
use tsadbench_core::external::protocol::{decode_reply, decode_request};

fuzz_target!(|data: &[u8]| {
    if let Ok(line) = std::str::from_utf8(data) {
        let _ = decode_reply(line);
        let _ = decode_request(line);
    }
});
