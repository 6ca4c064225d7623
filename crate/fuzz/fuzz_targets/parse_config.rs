#![no_main]

use capbayes::harness::parse_config;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = parse_config(text, &[]) {
            let round = cfg.to_json();
            parse_config(&round, &[]).expect("serialized config parses again");
        }
    }
});
