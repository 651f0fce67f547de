#![no_main]

use libfuzzer_sys::fuzz_target;

use barter_clear::clearing::parse_solution;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(doc) = parse_solution(text) {
        let json = serde_json::to_string(&doc).unwrap();
        let back = parse_solution(&json).unwrap();
        assert_eq!(back, doc);
    }
});
