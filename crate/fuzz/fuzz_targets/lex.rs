#![no_main]

use libfuzzer_sys::fuzz_target;
use reviewfix::java::tokenize;

fuzz_target!(|src: &str| {
    let tokens = tokenize(src);
    let mut end = 0;
    for t in &tokens {
        assert!(t.span.start >= end && t.span.end > t.span.start && t.span.end <= src.len());
        end = t.span.end;
        let _ = t.text(src);
    }
});
