#![no_main]

use libfuzzer_sys::fuzz_target;
use pitchforge::json::parse_delta;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(d) = parse_delta(text) {
        let written = serde_json::to_string(&d).unwrap();
        assert_eq!(parse_delta(&written).unwrap(), d);
        // expansion is exponential in the ground set; only small ones
        if d.vars().len() <= 10 {
            let n = d.vars().max_index().map_or(0, |i| i + 1);
            let e = d.expand(n).unwrap();
            assert_eq!(&e * &e, e);
        }
    }
});
