#![no_main]

use libfuzzer_sys::fuzz_target;
use reviewfix::backend::parse_store;

fuzz_target!(|text: &str| {
    let _ = parse_store(text);
});
