#![no_main]

use libfuzzer_sys::fuzz_target;
use pitchforge::textspec::parse_gen_spec;

fuzz_target!(|data: &[u8]| {
    let raw = String::from_utf8_lossy(data);
    if let Ok(inst) = parse_gen_spec(&raw, 7) {
        // generators are deterministic in the seed
        assert_eq!(parse_gen_spec(&raw, 7).unwrap(), inst);
    }
});
