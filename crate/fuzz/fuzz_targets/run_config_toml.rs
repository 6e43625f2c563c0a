#![no_main]
//! Run-configuration parser: reject unknown keys without panicking, and
//! keep accepted configurations stable through a TOML round trip.

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(config) = fairgroups::io::RunConfig::from_toml_str(text) {
        let toml = config.to_toml_string().expect("serialize");
        let back = fairgroups::io::RunConfig::from_toml_str(&toml).expect("round trip");
        assert_eq!(config, back);
    }
});
