#![no_main]

use libfuzzer_sys::fuzz_target;
use pitchforge::textspec::{parse_inequality_arg, parse_objective};

fuzz_target!(|data: &[u8]| {
    let Some((&first, rest)) = data.split_first() else {
        return;
    };
    let n = (first % 9) as usize;
    let raw = String::from_utf8_lossy(rest);
    if let Ok(ineq) = parse_inequality_arg(&raw, n) {
        assert_eq!(ineq.nvars(), n);
        let _ = ineq.pitch();
    }
    if let Ok(c) = parse_objective(&raw, n) {
        assert_eq!(c.len(), n);
    }
});
