#![no_main]

use libfuzzer_sys::fuzz_target;
use reviewfix::codenorm::ecm;

// Input is candidate and reference separated by the first NUL.
fuzz_target!(|data: &str| {
    let (a, b) = data.split_once('\0').unwrap_or((data, ""));
    assert_eq!(ecm(a, b), ecm(b, a));
    let _ = ecm(a, a);
});
