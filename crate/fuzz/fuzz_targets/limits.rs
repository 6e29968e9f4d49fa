#![no_main]

use libfuzzer_sys::fuzz_target;
use pitchforge::limits::Limits;

fuzz_target!(|data: &[u8]| {
    let raw = String::from_utf8_lossy(data);
    if let Ok(l) = Limits::default().parse_overrides(&raw) {
        assert!(l.hypercube <= 64);
    }
});
