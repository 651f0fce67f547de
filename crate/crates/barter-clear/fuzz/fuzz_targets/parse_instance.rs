#![no_main]

use libfuzzer_sys::fuzz_target;

use barter_clear::instance::{parse_instance, serialize_instance};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(instance) = parse_instance(text) {
        // Anything that parses validated, so the canonical form must
        // serialize and round-trip to an equal instance.
        let canonical = serialize_instance(&instance).unwrap();
        let back = parse_instance(&canonical).unwrap();
        assert_eq!(back, instance);
        assert_eq!(serialize_instance(&back).unwrap(), canonical);
    }
});
