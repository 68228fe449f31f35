#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok((features, count, dim)) = sgnn::data::parse_idx_images(data) {
        assert_eq!(features.len(), count * dim);
        assert!(features.iter().all(|v| (0.0..=1.0).contains(v)));
    }
});
