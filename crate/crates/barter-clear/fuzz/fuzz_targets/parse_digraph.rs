#![no_main]

use libfuzzer_sys::fuzz_target;

use barter_clear::reduction::{parse_digraph, serialize_digraph};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(digraph) = parse_digraph(text) {
        let canonical = serialize_digraph(&digraph);
        assert_eq!(parse_digraph(&canonical).unwrap(), digraph);
    }
});
