#![no_main]

use libfuzzer_sys::fuzz_target;
use pitchforge::json::{instance_to_json, parse_instance};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(inst) = parse_instance(text) {
        let again = parse_instance(&instance_to_json(&inst)).expect("written instance parses");
        assert_eq!(again, inst);
    }
});
