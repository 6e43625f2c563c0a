#![no_main]
//! Transport-map parser: accepted maps must round-trip and must apply as
//! monotone functions within every group.

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(map) = fairgroups::io::read_transport_from_slice(data) {
        let json = fairgroups::io::transport_to_json(&map).expect("serialize");
        let back = fairgroups::io::read_transport_from_slice(json.as_bytes()).expect("round trip");
        assert_eq!(map, back);
        for group in 0..map.k() {
            let mut prev = f64::NEG_INFINITY;
            for step in 0..=8 {
                let s = step as f64 / 8.0;
                let out = map.apply(s, group).expect("apply in range");
                assert!((0.0..=1.0).contains(&out));
                assert!(out >= prev, "transport not monotone in group {group}");
                prev = out;
            }
        }
    }
});
