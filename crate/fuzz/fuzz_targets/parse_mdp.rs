#![no_main]

use capbayes::mdp::TabularMdp;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(m) = TabularMdp::from_json(text) {
            let round = TabularMdp::from_json(&m.to_json()).expect("round trip");
            assert_eq!(round, m);
        }
    }
});
