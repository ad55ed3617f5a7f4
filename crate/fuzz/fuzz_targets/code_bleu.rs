#![no_main]

use libfuzzer_sys::fuzz_target;
use reviewfix::codebleu::{code_bleu, Weights};

// Input is candidate and reference separated by the first NUL.
fuzz_target!(|data: &str| {
    let (cand, reference) = data.split_once('\0').unwrap_or((data, data));
    if let Ok(s) = code_bleu(cand, reference, Weights::default(), 4) {
        assert!((0.0..=1.0).contains(&s.total), "{s:?}");
    }
});
