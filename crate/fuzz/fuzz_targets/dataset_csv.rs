#![no_main]
//! Dataset CSV parser: arbitrary bytes must parse or fail cleanly, and
//! anything that parses must survive a write/read round trip unchanged.

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(dataset) = fairgroups::io::read_dataset_from_reader(data) {
        let mut bytes = Vec::new();
        fairgroups::io::write_dataset_to_writer(&dataset, &mut bytes)
            .expect("writing a parsed dataset cannot fail");
        let back = fairgroups::io::read_dataset_from_reader(bytes.as_slice())
            .expect("rereading our own output cannot fail");
        assert_eq!(dataset, back);
    }
});
