#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = sgnn::data::parse_dataset_csv(data, None);
    if let Ok(ds) = sgnn::data::parse_dataset_csv(data, Some("label")) {
        if let Some(labels) = ds.labels() {
            assert!(labels.iter().all(|&l| (l as usize) < ds.classes().len()));
        }
    }
});
