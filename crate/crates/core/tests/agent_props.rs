use capbayes::agents::{sts_select, ts_select};
use capbayes::bandit::BeliefState;
use capbayes::info::total_variation;
use capbayes::rng::stream;

#[test]
fn satisficing_at_zero_epsilon_matches_thompson() {
    let b = BeliefState::from_beta(&[(3.0, 2.0), (2.0, 2.0), (5.0, 4.0), (1.0, 1.0)]).unwrap();
    let n = 100_000;
    let mut ts = vec![0.0; 4];
    let mut sts = vec![0.0; 4];
    let mut r1 = stream(11, 0);
    let mut r2 = stream(11, 1);
    for _ in 0..n {
        ts[ts_select(&b, &mut r1).unwrap()] += 1.0 / n as f64;
        sts[sts_select(&b, 0.0, &mut r2).unwrap()] += 1.0 / n as f64;
    }
    assert!(total_variation(&ts, &sts) <= 0.01, "{ts:?} vs {sts:?}");
}
