#![no_main]

use libfuzzer_sys::fuzz_target;
use pitchforge::json::{inequality_to_json, parse_inequality};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(ineq) = parse_inequality(text) {
        let _ = ineq.pitch();
        let again =
            parse_inequality(&inequality_to_json(&ineq)).expect("written inequality parses");
        assert_eq!(again, ineq);
    }
});
