#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(field) = sgnn::field::ScalarField::parse_csv(data) {
        assert!(field.values().iter().all(|v| v.is_finite()));
    }
});
