#![no_main]

use libfuzzer_sys::fuzz_target;

use barter_clear::instance::{parse_duals, serialize_duals};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(duals) = parse_duals(text) {
        // JSON carries no non-finite numbers, so serialization cannot fail.
        let canonical = serialize_duals(&duals).unwrap();
        assert_eq!(parse_duals(&canonical).unwrap(), duals);
    }
});
