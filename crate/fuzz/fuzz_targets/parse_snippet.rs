#![no_main]

use libfuzzer_sys::fuzz_target;
use reviewfix::java::parse_snippet;

fuzz_target!(|src: &str| {
    let tree = parse_snippet(src);
    for id in tree.preorder() {
        let n = tree.node(id);
        assert!(n.span.end <= src.len());
    }
    let _ = tree.dump();
});
