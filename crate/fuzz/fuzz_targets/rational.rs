#![no_main]

use libfuzzer_sys::fuzz_target;
use pitchforge::rat::{fmt_rat, parse_rat};

fuzz_target!(|data: &[u8]| {
    let raw = String::from_utf8_lossy(data);
    if let Ok(r) = parse_rat(&raw) {
        assert_eq!(parse_rat(&fmt_rat(&r)).unwrap(), r);
    }
});
