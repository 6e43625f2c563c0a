#![no_main]
//! Partition artifact parser: no panics on arbitrary bytes; accepted
//! partitions re-serialize to a byte-stable form that parses back equal.

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(partition) = fairgroups::io::read_partition_from_slice(data) {
        let json = fairgroups::io::partition_to_json(&partition).expect("serialize");
        let back = fairgroups::io::read_partition_from_slice(json.as_bytes()).expect("round trip");
        assert_eq!(partition, back);
        assert_eq!(
            json,
            fairgroups::io::partition_to_json(&back).expect("serialize")
        );
    }
});
