#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    // must reject or accept without panicking; accepted graphs must satisfy
    // the structural invariants the validator enforces
    if let Ok(g) = sgnn::graph::ProximityGraph::parse(data) {
        let n = g.node_count();
        for i in 0..n {
            for &nb in g.out_neighbors(i) {
                assert!(nb < n && nb != i);
            }
        }
    }
});
