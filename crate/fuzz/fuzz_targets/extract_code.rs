#![no_main]

use libfuzzer_sys::fuzz_target;
use reviewfix::evaluator::extract_code;

fuzz_target!(|raw: &str| {
    let code = extract_code(raw);
    assert!(code.len() <= raw.len());
});
