#![no_main]

use libfuzzer_sys::fuzz_target;
use reviewfix::corpus::{parse_corpus, Source};

fuzz_target!(|text: &str| {
    for source in [Source::RD, Source::PD] {
        if let Ok(c) = parse_corpus(text, source, "fuzz") {
            let again = parse_corpus(&c.to_jsonl(), source, "fuzz").expect("saved corpus reloads");
            assert_eq!(again.instances, c.instances);
        }
    }
});
