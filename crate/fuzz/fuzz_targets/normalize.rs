#![no_main]

use libfuzzer_sys::fuzz_target;
use reviewfix::codenorm::{debug_report, normalize};

fuzz_target!(|src: &str| {
    let once = normalize(src);
    if once.parse_ok {
        assert_eq!(normalize(&once.canonical_text).canonical_text, once.canonical_text);
    }
    let _ = debug_report(src);
});
