#![no_main]

use getzler::harness::Report;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    if let Ok(r) = Report::from_json(src) {
        let again = Report::from_json(&r.to_json()).expect("round trip");
        assert_eq!(again, r);
    }
});
