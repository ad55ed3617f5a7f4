#![no_main]

use libfuzzer_sys::fuzz_target;
use reviewfix::backend::parse_chat_response;

fuzz_target!(|body: &str| {
    let _ = parse_chat_response(body);
});
