//! Replays the checked-in fuzz corpus through the same entry points and
//! assertions as the fuzz targets, so regressions show up in `cargo test`.

use std::fs;
use std::path::PathBuf;

use capbayes::harness::{parse_config, parse_override};
use capbayes::mdp::TabularMdp;

fn corpus(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut files: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    assert!(!files.is_empty(), "empty corpus for {target}");
    files
        .into_iter()
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read_to_string(&p).unwrap()))
        .collect()
}

#[test]
fn parse_config_corpus() {
    let mut accepted = 0;
    for (name, text) in corpus("parse_config") {
        if let Ok(cfg) = parse_config(&text, &[]) {
            let again = parse_config(&cfg.to_json(), &[]).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(again, cfg, "{name}");
            accepted += 1;
        }
    }
    assert!(accepted > 0);
}

#[test]
fn parse_mdp_corpus() {
    let mut outcomes = Vec::new();
    for (name, text) in corpus("parse_mdp") {
        let parsed = TabularMdp::from_json(&text);
        if let Ok(m) = &parsed {
            assert_eq!(&TabularMdp::from_json(&m.to_json()).unwrap(), m, "{name}");
        }
        outcomes.push((name, parsed.is_ok()));
    }
    assert!(outcomes.iter().any(|o| o.1) && outcomes.iter().any(|o| !o.1), "{outcomes:?}");
}

#[test]
fn apply_override_corpus() {
    let base = r#"{
      "kind": "bandit-regret",
      "environment": {"bandit": {"reward": "bernoulli", "n_arms": 3, "prior": {"alpha": 1, "beta": 1}}},
      "agents": [{"name": "ts", "kind": "ts"}, {"name": "blasts", "kind": "blasts", "beta": 100}],
      "seeds": [0],
      "horizon": 10
    }"#;
    for (_, text) in corpus("apply_override") {
        let overrides: Result<Vec<_>, _> = text.lines().map(parse_override).collect();
        if let Ok(overrides) = overrides {
            let _ = parse_config(base, &overrides);
        }
    }
}
