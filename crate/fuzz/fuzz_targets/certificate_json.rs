#![no_main]

use libfuzzer_sys::fuzz_target;
use pitchforge::certify::verify_certificate;
use pitchforge::json::{certificate_to_json, parse_certificate};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(cert) = parse_certificate(text, None) else {
        return;
    };
    let again =
        parse_certificate(&certificate_to_json(&cert), None).expect("written certificate parses");
    assert_eq!(again, cert);
    if cert.nvars() <= 8 && cert.terms.len() <= 256 {
        let report = verify_certificate(&cert);
        assert_eq!(report.valid, report.issues.is_empty());
    }
});
