#![no_main]

use capbayes::harness::{parse_config, parse_override};
use libfuzzer_sys::fuzz_target;

const BASE: &str = r#"{
  "kind": "bandit-regret",
  "environment": {"bandit": {"reward": "bernoulli", "n_arms": 3, "prior": {"alpha": 1, "beta": 1}}},
  "agents": [{"name": "ts", "kind": "ts"}, {"name": "blasts", "kind": "blasts", "beta": 100}],
  "seeds": [0],
  "horizon": 10
}"#;

// Each input line is one `key=value` override.
fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let overrides: Result<Vec<_>, _> = text.lines().map(parse_override).collect();
        if let Ok(overrides) = overrides {
            let _ = parse_config(BASE, &overrides);
        }
    }
});
