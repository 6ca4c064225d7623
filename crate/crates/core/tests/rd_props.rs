use capbayes::info::DiscreteDist;
use capbayes::rd::{blahut_arimoto, BaConfig, BlahutArimoto, DistortionMatrix, EmpiricalSource};
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct Problem {
    weights: Vec<f64>,
    k: usize,
    d: Vec<f64>,
}

impl Problem {
    fn source(&self) -> EmpiricalSource<()> {
        EmpiricalSource::with_weights(vec![(); self.weights.len()], DiscreteDist::new(self.weights.clone()).unwrap()).unwrap()
    }

    fn matrix(&self) -> DistortionMatrix {
        DistortionMatrix::new(self.weights.len(), self.k, self.d.clone()).unwrap()
    }

    /// `I(X; Y) + beta E[d]` of the channel with rows `rows`, computed directly.
    fn lagrangian(&self, rows: &[&[f64]], beta: f64) -> f64 {
        let mut q = vec![0.0; self.k];
        for (w, row) in self.weights.iter().zip(rows) {
            for (acc, p) in q.iter_mut().zip(row.iter()) {
                *acc += w * p;
            }
        }
        let mut total = 0.0;
        for (z, (w, row)) in self.weights.iter().zip(rows).enumerate() {
            for (a, &p) in row.iter().enumerate() {
                if p > 0.0 {
                    total += w * p * ((p / q[a]).ln() + beta * self.d[z * self.k + a]);
                }
            }
        }
        total
    }
}

fn problem(max_z: usize, max_k: usize) -> impl Strategy<Value = Problem> {
    (1..=max_z, 1..=max_k).prop_flat_map(|(z, k)| {
        (prop::collection::vec(0.05f64..1.0, z), prop::collection::vec(0.0f64..1.0, z * k)).prop_map(move |(w, d)| {
            let t: f64 = w.iter().sum();
            Problem {
                weights: w.iter().map(|x| x / t).collect(),
                k,
                d,
            }
        })
    })
}

/// Points of the probability simplex in `k` dimensions on a grid of `steps` divisions.
fn simplex_grid(k: usize, steps: usize) -> Vec<Vec<f64>> {
    fn rec(k: usize, left: usize, steps: usize, prefix: &mut Vec<f64>, out: &mut Vec<Vec<f64>>) {
        if k == 1 {
            prefix.push(left as f64 / steps as f64);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for i in 0..=left {
            prefix.push(i as f64 / steps as f64);
            rec(k - 1, left - i, steps, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, steps, steps, &mut Vec::new(), &mut out);
    out
}

/// Smallest Lagrangian over a 0.01 grid. Every channel row is enumerated when
/// that is affordable; otherwise the grid runs over output marginals `r`, using
/// `min_δ Σ_z w_z [KL(δ_z ‖ r) + β d_z·δ_z] = −Σ_z w_z ln Σ_k r_k e^{−β d_zk}`
/// and `I = min_r Σ_z w_z KL(δ_z ‖ r)`.
fn grid_lagrangian(p: &Problem, beta: f64) -> f64 {
    let rows = simplex_grid(p.k, 100);
    let z = p.weights.len();
    if rows.len().pow(z as u32) <= 2_000_000 {
        let mut idx = vec![0usize; z];
        let mut best = f64::INFINITY;
        loop {
            let chosen: Vec<&[f64]> = idx.iter().map(|&i| rows[i].as_slice()).collect();
            best = best.min(p.lagrangian(&chosen, beta));
            let mut pos = 0;
            while pos < z {
                idx[pos] += 1;
                if idx[pos] < rows.len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
            if pos == z {
                return best;
            }
        }
    }
    rows.iter()
        .map(|r| {
            -p.weights
                .iter()
                .enumerate()
                .map(|(zi, w)| {
                    let s: f64 = r.iter().enumerate().map(|(a, ra)| ra * (-beta * p.d[zi * p.k + a]).exp()).sum();
                    w * s.ln()
                })
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn lagrangian_never_increases_across_iterations(p in problem(12, 6), beta in 0.0f64..50.0) {
        let (src, dm) = (p.source(), p.matrix());
        let mut ba = BlahutArimoto::new(&src, &dm, beta).unwrap();
        let mut prev = ba.objective();
        for _ in 0..60 {
            ba.step().unwrap();
            let now = ba.objective();
            prop_assert!(now <= prev + 1e-10, "{now} > {prev}");
            prev = now;
        }
    }

    #[test]
    fn larger_beta_trades_rate_for_distortion(p in problem(10, 5), b1 in 1.0f64..30.0, ratio in 1.0f64..4.0) {
        let (src, dm) = (p.source(), p.matrix());
        let lo = blahut_arimoto(&src, &dm, b1, &BaConfig::precise()).unwrap();
        let hi = blahut_arimoto(&src, &dm, b1 * ratio, &BaConfig::precise()).unwrap();
        prop_assert!(lo.distortion >= hi.distortion - 1e-8);
        prop_assert!(lo.rate <= hi.rate + 1e-8);
    }

    #[test]
    fn rate_is_bounded_by_log_alphabet_sizes(p in problem(12, 6), beta in prop_oneof![0.0f64..1e3, Just(f64::INFINITY)]) {
        let sol = blahut_arimoto(&p.source(), &p.matrix(), beta, &BaConfig::default()).unwrap();
        let bound = (p.weights.len() as f64).ln().min((p.k as f64).ln());
        prop_assert!(sol.rate <= bound + 1e-9);
    }

    #[test]
    fn solver_is_at_least_as_good_as_grid_search(p in problem(3, 3), beta in 0.1f64..20.0) {
        // Fixed iteration count: with one source the rate is 0 throughout, so the
        // rate-change stopping rule would halt before the marginal moves.
        let cfg = BaConfig { max_iters: 100_000, tol: 0.0 };
        let sol = blahut_arimoto(&p.source(), &p.matrix(), beta, &cfg).unwrap();
        let rows: Vec<&[f64]> = (0..sol.channel.rows()).map(|z| sol.channel.row(z)).collect();
        let solver = p.lagrangian(&rows, beta);
        let grid = grid_lagrangian(&p, beta);
        prop_assert!(solver <= grid + 1e-5, "solver {solver} vs grid {grid}");
        prop_assert!(grid <= solver + 0.05, "grid {grid} far above solver {solver}");
    }
}
