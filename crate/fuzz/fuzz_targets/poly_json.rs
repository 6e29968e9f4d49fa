#![no_main]

use libfuzzer_sys::fuzz_target;
use pitchforge::json::{parse_poly, poly_to_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(p) = parse_poly(text) {
        let again = parse_poly(&poly_to_json(&p)).expect("written polynomial parses");
        assert_eq!(again, p);
    }
});
