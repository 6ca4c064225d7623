//! Blahut-Arimoto rate-distortion solver over an empirical source.
//!
//! The source is a finite set of `Z` samples with weights `w_z`; the output
//! alphabet has `K` symbols and `d[z][k]` is the distortion of emitting `k`
//! for sample `z`. For a multiplier `beta` the solver minimises the Lagrangian
//! `I(Z; K) + beta · E[d]` by alternating
//!
//! ```text
//! q(k)      = Σ_z w_z δ(k | z)
//! δ'(k | z) ∝ q(k) exp(−beta · d[z][k])
//! ```
//!
//! starting from uniform rows. `beta = +∞` is the pure distortion-minimising
//! limit: each row keeps only its distortion minimisers, weighted by `q`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::DiscreteDist;

/// `Z` samples with weights; the samples themselves are opaque to the solver.
#[derive(Debug, Clone)]
pub struct EmpiricalSource<S> {
    samples: Vec<S>,
    weights: DiscreteDist,
}

impl<S> EmpiricalSource<S> {
    /// Uniform weights `1/Z`.
    pub fn uniform(samples: Vec<S>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::validation("empirical source needs at least one sample"));
        }
        let weights = DiscreteDist::uniform(samples.len())?;
        Ok(Self { samples, weights })
    }

    pub fn with_weights(samples: Vec<S>, weights: DiscreteDist) -> Result<Self> {
        if samples.len() != weights.len() {
            return Err(Error::Dimension {
                context: "source weights",
                expected: samples.len(),
                actual: weights.len(),
            });
        }
        Ok(Self { samples, weights })
    }

    pub fn samples(&self) -> &[S] {
        &self.samples
    }

    pub fn weights(&self) -> &DiscreteDist {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

impl EmpiricalSource<()> {
    /// A source described only by its weights.
    pub fn from_weights(weights: DiscreteDist) -> Self {
        Self {
            samples: vec![(); weights.len()],
            weights,
        }
    }
}

/// Row-major `Z × K` matrix of non-negative, finite distortions.
#[derive(Debug, Clone, PartialEq)]
pub struct DistortionMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DistortionMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::validation("distortion matrix must be non-empty"));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension {
                context: "distortion matrix",
                expected: rows * cols,
                actual: data.len(),
            });
        }
        if let Some(bad) = data.iter().find(|d| !d.is_finite() || **d < 0.0) {
            return Err(Error::validation(format!(
                "distortions must be finite and non-negative, found {bad}"
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for z in 0..rows {
            for k in 0..cols {
                data.push(f(z, k));
            }
        }
        Self::new(rows, cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, z: usize, k: usize) -> f64 {
        self.data[z * self.cols + k]
    }

    pub fn row(&self, z: usize) -> &[f64] {
        &self.data[z * self.cols..(z + 1) * self.cols]
    }
}

/// Row-stochastic `Z × K` conditional `δ(k | z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Channel {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols || rows == 0 || cols == 0 {
            return Err(Error::Dimension {
                context: "channel",
                expected: rows * cols,
                actual: data.len(),
            });
        }
        let mut data = data;
        for row in data.chunks_mut(cols) {
            let d = DiscreteDist::new(row.to_vec())?;
            row.copy_from_slice(d.probs());
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::Dimension {
                context: "channel row",
                expected: cols,
                actual: r.len(),
            });
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn uniform(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, vec![1.0 / cols as f64; rows * cols])
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self::new(n, n, data)
    }

    /// Deterministic channel sending row `z` to `outputs[z]`.
    pub fn deterministic(outputs: &[usize], cols: usize) -> Result<Self> {
        let mut data = vec![0.0; outputs.len() * cols];
        for (z, &k) in outputs.iter().enumerate() {
            if k >= cols {
                return Err(Error::IndexOutOfRange {
                    what: "channel outputs",
                    index: k,
                    len: cols,
                });
            }
            data[z * cols + k] = 1.0;
        }
        Self::new(outputs.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, z: usize, k: usize) -> f64 {
        self.data[z * self.cols + k]
    }

    pub fn row(&self, z: usize) -> &[f64] {
        &self.data[z * self.cols..(z + 1) * self.cols]
    }

    /// Samples an output index from row `z` given a uniform draw `u ∈ [0, 1)`.
    pub fn sample_row(&self, z: usize, u: f64) -> usize {
        let row = self.row(z);
        let mut acc = 0.0;
        let mut last = 0;
        for (k, &p) in row.iter().enumerate() {
            if p > 0.0 {
                acc += p;
                last = k;
                if u < acc {
                    return k;
                }
            }
        }
        last
    }
}

/// Iteration controls. The solver stops once the channel rate moves by less
/// than `tol` nats between iterations, or after `max_iters`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaConfig {
    #[serde(default = "BaConfig::default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "BaConfig::default_tol")]
    pub tol: f64,
}

impl BaConfig {
    fn default_max_iters() -> usize {
        200
    }

    fn default_tol() -> f64 {
        1e-9
    }

    /// Settings for tracing curves to high accuracy.
    pub fn precise() -> Self {
        Self {
            max_iters: 100_000,
            tol: 1e-13,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::validation("max_iters must be at least 1"));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::validation("tol must be non-negative"));
        }
        Ok(())
    }
}

impl Default for BaConfig {
    fn default() -> Self {
        Self {
            max_iters: Self::default_max_iters(),
            tol: Self::default_tol(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BaSolution {
    pub channel: Channel,
    pub rate: f64,
    pub distortion: f64,
    pub iters: usize,
    pub converged: bool,
}

impl BaSolution {
    pub fn objective(&self, beta: f64) -> f64 {
        lagrangian(self.rate, self.distortion, beta)
    }
}

/// `rate + beta · distortion`, with the `beta = ∞` limit ordered by distortion.
pub fn lagrangian(rate: f64, distortion: f64, beta: f64) -> f64 {
    if beta.is_infinite() {
        if distortion == 0.0 {
            rate
        } else {
            f64::INFINITY
        }
    } else {
        rate + beta * distortion
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateDistortionPoint {
    pub beta: f64,
    pub rate: f64,
    pub distortion: f64,
    pub iters: usize,
}

/// Step-by-step Blahut-Arimoto state. [`blahut_arimoto`] drives it to
/// convergence; tests use it directly to inspect every iterate.
#[derive(Debug, Clone)]
pub struct BlahutArimoto<'a> {
    weights: &'a [f64],
    dm: &'a DistortionMatrix,
    beta: f64,
    /// `exp(−beta (d[z][k] − min_k d[z][k]))`, or the argmin indicator for `beta = ∞`.
    kernel: Vec<f64>,
    row_min: Vec<f64>,
    delta: Vec<f64>,
    q: Vec<f64>,
    rate: f64,
    distortion: f64,
    iters: usize,
}

impl<'a> BlahutArimoto<'a> {
    pub fn new<S>(src: &'a EmpiricalSource<S>, dm: &'a DistortionMatrix, beta: f64) -> Result<Self> {
        Self::with_weights(src.weights().probs(), dm, beta)
    }

    pub(crate) fn with_weights(weights: &'a [f64], dm: &'a DistortionMatrix, beta: f64) -> Result<Self> {
        if dm.rows() != weights.len() {
            return Err(Error::Dimension {
                context: "distortion rows vs source samples",
                expected: weights.len(),
                actual: dm.rows(),
            });
        }
        if beta.is_nan() || beta < 0.0 {
            return Err(Error::validation(format!("beta must be non-negative, got {beta}")));
        }
        let (z_count, k_count) = (dm.rows(), dm.cols());
        let mut kernel = vec![0.0; z_count * k_count];
        let mut row_min = vec![0.0; z_count];
        for z in 0..z_count {
            let row = dm.row(z);
            let m = row.iter().copied().fold(f64::INFINITY, f64::min);
            row_min[z] = m;
            let out = &mut kernel[z * k_count..(z + 1) * k_count];
            for (o, &d) in out.iter_mut().zip(row) {
                *o = if beta.is_infinite() {
                    if d == m {
                        1.0
                    } else {
                        0.0
                    }
                } else if beta == 0.0 {
                    1.0
                } else {
                    (-beta * (d - m)).exp()
                };
            }
        }
        let delta = vec![1.0 / k_count as f64; z_count * k_count];
        let q = vec![1.0 / k_count as f64; k_count];
        let distortion = weights
            .iter()
            .enumerate()
            .map(|(z, w)| w * dm.row(z).iter().sum::<f64>() / k_count as f64)
            .sum();
        Ok(Self {
            weights,
            dm,
            beta,
            kernel,
            row_min,
            delta,
            q,
            rate: 0.0,
            distortion,
            iters: 0,
        })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn distortion(&self) -> f64 {
        self.distortion
    }

    pub fn objective(&self) -> f64 {
        lagrangian(self.rate, self.distortion, self.beta)
    }

    pub fn iters(&self) -> usize {
        self.iters
    }

    /// Current output marginal `q(k)`.
    pub fn marginal(&self) -> &[f64] {
        &self.q
    }

    /// One update `δ ← normalize(q ⊙ exp(−beta d))`, then `q ← marginal(δ)`.
    /// Returns the new `(rate, distortion)`.
    pub fn step(&mut self) -> Result<(f64, f64)> {
        let k_count = self.dm.cols();
        let beta = self.beta;
        let mut cross = 0.0; // Σ_z w_z Σ_k δ' ln(δ'/q)
        let mut distortion = 0.0;
        let mut next_q = vec![0.0; k_count];
        let mut exact_rate = beta.is_infinite();

        for (z, &w) in self.weights.iter().enumerate() {
            let kern = &self.kernel[z * k_count..(z + 1) * k_count];
            let drow = self.dm.row(z);
            let out = &mut self.delta[z * k_count..(z + 1) * k_count];
            let mut sum = 0.0;
            for ((o, &kv), &qk) in out.iter_mut().zip(kern).zip(&self.q) {
                *o = qk * kv;
                sum += *o;
            }
            let row_min = self.row_min[z];
            if sum.is_normal() {
                let inv = 1.0 / sum;
                let mut excess = 0.0;
                let mut row_d = 0.0;
                for ((o, &d), acc) in out.iter_mut().zip(drow).zip(next_q.iter_mut()) {
                    *o *= inv;
                    *acc += w * *o;
                    row_d += *o * d;
                    excess += *o * (d - row_min);
                }
                distortion += w * row_d;
                if beta.is_finite() {
                    cross += w * (-beta * excess - sum.ln());
                }
                continue;
            }
            let ln_norm;
            if beta.is_infinite() {
                // Every minimiser of this row lost its marginal mass; fall back to uniform.
                let n = kern.iter().filter(|&&k| k > 0.0).count() as f64;
                for (o, &kv) in out.iter_mut().zip(kern) {
                    *o = if kv > 0.0 { 1.0 / n } else { 0.0 };
                }
                exact_rate = true;
                ln_norm = 0.0;
            } else {
                ln_norm = log_space_row(out, &self.q, drow, beta, self.row_min[z]);
            }
            let mut excess = 0.0;
            let mut row_d = 0.0;
            for ((&p, &d), acc) in out.iter().zip(drow).zip(next_q.iter_mut()) {
                *acc += w * p;
                row_d += p * d;
                excess += p * (d - row_min);
            }
            distortion += w * row_d;
            if beta.is_finite() {
                cross += w * (-beta * excess - ln_norm);
            }
        }
        if !distortion.is_finite() {
            return Err(Error::Numeric("non-finite distortion in Blahut-Arimoto step".into()));
        }

        let rate = if exact_rate {
            rate_of(self.weights, &self.delta, &next_q, k_count)
        } else {
            // I(δ') = Σ w δ' ln(δ'/q) − D_KL(q' ‖ q)
            let kl: f64 = next_q
                .iter()
                .zip(&self.q)
                .filter(|(&a, _)| a > 0.0)
                .map(|(&a, &b)| a * (a / b).ln())
                .sum();
            (cross - kl).max(0.0)
        };
        if !rate.is_finite() {
            return Err(Error::Numeric("non-finite rate in Blahut-Arimoto step".into()));
        }
        self.q = next_q;
        self.rate = rate;
        self.distortion = distortion;
        self.iters += 1;
        Ok((rate, distortion))
    }

    /// Iterates until the rate changes by less than `cfg.tol` or `cfg.max_iters` is hit.
    pub fn run(mut self, cfg: &BaConfig) -> Result<BaSolution> {
        cfg.validate()?;
        let mut converged = false;
        let mut prev = self.rate;
        while self.iters < cfg.max_iters {
            let (rate, _) = self.step()?;
            if (rate - prev).abs() < cfg.tol {
                converged = true;
                break;
            }
            prev = rate;
        }
        Ok(self.finish(converged))
    }

    fn finish(self, converged: bool) -> BaSolution {
        let k_count = self.dm.cols();
        let rate = rate_of(self.weights, &self.delta, &self.q, k_count);
        BaSolution {
            channel: Channel {
                rows: self.dm.rows(),
                cols: k_count,
                data: self.delta,
            },
            rate,
            distortion: self.distortion,
            iters: self.iters,
            converged,
        }
    }
}

/// Recomputes a row as `softmax(ln q − beta d)` over the support of `q`.
/// Returns `ln Σ_k q(k) exp(−beta (d_k − shift))`.
fn log_space_row(out: &mut [f64], q: &[f64], drow: &[f64], beta: f64, row_min: f64) -> f64 {
    let shift = q
        .iter()
        .zip(drow)
        .filter(|(&qk, _)| qk > 0.0)
        .map(|(_, &d)| d)
        .fold(f64::INFINITY, f64::min);
    let mut max_logit = f64::NEG_INFINITY;
    for ((o, &qk), &d) in out.iter_mut().zip(q).zip(drow) {
        *o = if qk > 0.0 {
            qk.ln() - beta * (d - shift)
        } else {
            f64::NEG_INFINITY
        };
        max_logit = max_logit.max(*o);
    }
    let mut sum = 0.0;
    for o in out.iter_mut() {
        *o = (*o - max_logit).exp();
        sum += *o;
    }
    out.iter_mut().for_each(|o| *o /= sum);
    // The caller measures excess against the row minimum, so fold the shift back in.
    max_logit + sum.ln() - beta * (shift - row_min)
}

fn rate_of(weights: &[f64], delta: &[f64], q: &[f64], k_count: usize) -> f64 {
    let mut rate = 0.0;
    for (w, row) in weights.iter().zip(delta.chunks(k_count)) {
        let mut r = 0.0;
        for (&p, &qk) in row.iter().zip(q) {
            // qk underflows to 0 only when every w·p does; such terms carry no mass.
            if p > 0.0 && qk > 0.0 {
                r += p * (p / qk).ln();
            }
        }
        rate += w * r;
    }
    rate.max(0.0)
}

/// Runs Blahut-Arimoto from uniform rows and returns the converged channel.
pub fn blahut_arimoto<S>(
    src: &EmpiricalSource<S>,
    dm: &DistortionMatrix,
    beta: f64,
    cfg: &BaConfig,
) -> Result<BaSolution> {
    BlahutArimoto::new(src, dm, beta)?.run(cfg)
}

fn check_channel<S>(src: &EmpiricalSource<S>, ch: &Channel) -> Result<()> {
    if ch.rows() != src.len() {
        return Err(Error::Dimension {
            context: "channel rows vs source samples",
            expected: src.len(),
            actual: ch.rows(),
        });
    }
    Ok(())
}

/// `q(k) = Σ_z w_z δ(k | z)`.
pub fn marginal_action_distribution<S>(src: &EmpiricalSource<S>, ch: &Channel) -> Result<DiscreteDist> {
    check_channel(src, ch)?;
    let mut q = vec![0.0; ch.cols()];
    for (z, w) in src.weights().probs().iter().enumerate() {
        for (acc, p) in q.iter_mut().zip(ch.row(z)) {
            *acc += w * p;
        }
    }
    DiscreteDist::new(q)
}

/// Mutual information between source sample and channel output.
pub fn channel_rate<S>(src: &EmpiricalSource<S>, ch: &Channel) -> Result<f64> {
    let q = marginal_action_distribution(src, ch)?;
    Ok(rate_of(src.weights().probs(), &ch.data, q.probs(), ch.cols()))
}

/// `Σ_z Σ_k w_z δ(k | z) d[z][k]`.
pub fn channel_distortion<S>(src: &EmpiricalSource<S>, ch: &Channel, dm: &DistortionMatrix) -> Result<f64> {
    check_channel(src, ch)?;
    if dm.rows() != ch.rows() || dm.cols() != ch.cols() {
        return Err(Error::Dimension {
            context: "distortion matrix vs channel",
            expected: ch.rows() * ch.cols(),
            actual: dm.rows() * dm.cols(),
        });
    }
    Ok(src
        .weights()
        .probs()
        .iter()
        .enumerate()
        .map(|(z, w)| w * ch.row(z).iter().zip(dm.row(z)).map(|(p, d)| p * d).sum::<f64>())
        .sum())
}

/// One converged point per multiplier. Grid points are solved independently.
pub fn rd_curve<S: Sync>(
    src: &EmpiricalSource<S>,
    dm: &DistortionMatrix,
    beta_grid: &[f64],
    cfg: &BaConfig,
) -> Result<Vec<RateDistortionPoint>> {
    if beta_grid.is_empty() {
        return Err(Error::validation("beta grid is empty"));
    }
    if beta_grid.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::validation("beta grid must be sorted ascending"));
    }
    beta_grid
        .par_iter()
        .map(|&beta| {
            let sol = blahut_arimoto(src, dm, beta, cfg)?;
            Ok(RateDistortionPoint {
                beta,
                rate: sol.rate,
                distortion: sol.distortion,
                iters: sol.iters,
            })
        })
        .collect()
}

pub const CURVE_CSV_HEADER: &str = "beta,rate_nats,distortion,iters";

/// Writes `beta,rate_nats,distortion,iters`, one row per grid point.
pub fn write_curve_csv<W: Write>(mut out: W, points: &[RateDistortionPoint]) -> Result<()> {
    writeln!(out, "{CURVE_CSV_HEADER}")?;
    for p in points {
        writeln!(out, "{},{},{},{}", p.beta, p.rate, p.distortion, p.iters)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn src(w: &[f64]) -> EmpiricalSource<()> {
        EmpiricalSource::from_weights(DiscreteDist::new(w.to_vec()).unwrap())
    }

    fn hamming(n: usize) -> DistortionMatrix {
        DistortionMatrix::from_fn(n, n, |z, k| if z == k { 0.0 } else { 1.0 }).unwrap()
    }

    #[test]
    fn zero_beta_gives_marginal_rows_and_zero_rate() {
        let s = src(&[0.2, 0.5, 0.3]);
        let dm = DistortionMatrix::from_fn(3, 4, |z, k| ((z * 7 + k * 3) % 5) as f64).unwrap();
        let sol = blahut_arimoto(&s, &dm, 0.0, &BaConfig::default()).unwrap();
        assert!(sol.rate.abs() < 1e-15);
        for z in 1..3 {
            assert_eq!(sol.channel.row(z), sol.channel.row(0));
        }
    }

    #[test]
    fn huge_beta_picks_row_argmin() {
        let s = src(&[0.25, 0.25, 0.5]);
        let dm =
            DistortionMatrix::new(3, 3, vec![0.3, 0.1, 0.9, 0.5, 0.6, 0.2, 0.0, 0.4, 0.8]).unwrap();
        let sol = blahut_arimoto(&s, &dm, 1e9, &BaConfig::default()).unwrap();
        for (z, k) in [(0, 1), (1, 2), (2, 0)] {
            assert!((sol.channel.get(z, k) - 1.0).abs() < 1e-12, "row {z}");
        }
        let expected = 0.25 * 0.1 + 0.25 * 0.2;
        assert!((sol.distortion - expected).abs() < 1e-12);
        let inf = blahut_arimoto(&s, &dm, f64::INFINITY, &BaConfig::default()).unwrap();
        assert_eq!(inf.channel, sol.channel);
    }

    #[test]
    fn infinite_beta_splits_ties_to_minimise_rate() {
        // Both rows are indifferent between outputs 0 and 1; the rate-minimising
        // distortion-free channel sends both to the same output.
        let s = src(&[0.5, 0.5]);
        let dm = DistortionMatrix::new(2, 3, vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0]).unwrap();
        let sol = blahut_arimoto(&s, &dm, f64::INFINITY, &BaConfig::default()).unwrap();
        assert_eq!(sol.distortion, 0.0);
        assert!(sol.rate < 1e-12);
    }

    #[test]
    fn rate_examples() {
        let s = src(&[0.25; 4]);
        assert!(channel_rate(&s, &Channel::uniform(4, 3).unwrap()).unwrap().abs() < 1e-15);
        let r = channel_rate(&s, &Channel::identity(4).unwrap()).unwrap();
        assert!((r - 4f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn rate_skips_outputs_whose_marginal_underflowed() {
        let weights = [1e-10, 1.0 - 1e-10];
        let delta = [1.0 - 1e-315, 1e-315, 1.0, 0.0];
        let q = [1.0, 0.0];
        assert!(rate_of(&weights, &delta, &q, 2).is_finite());
    }

    #[test]
    fn distortion_examples() {
        let s = src(&[0.5, 0.5]);
        let zero = DistortionMatrix::new(2, 2, vec![0.0; 4]).unwrap();
        let u = Channel::uniform(2, 2).unwrap();
        assert_eq!(channel_distortion(&s, &u, &zero).unwrap(), 0.0);
        let dm = DistortionMatrix::new(2, 2, vec![0.0, 1.0, 0.0, 1.0]).unwrap();
        assert!((channel_distortion(&s, &u, &dm).unwrap() - 0.5).abs() < 1e-15);
        let dm = DistortionMatrix::new(2, 2, vec![0.4, 0.1, 0.3, 0.7]).unwrap();
        let argmin = Channel::deterministic(&[1, 0], 2).unwrap();
        assert!((channel_distortion(&s, &argmin, &dm).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn marginal_examples() {
        let s = src(&[0.9, 0.1]);
        let m = marginal_action_distribution(&s, &Channel::identity(2).unwrap()).unwrap();
        assert!((m.probs()[0] - 0.9).abs() < 1e-15);
        let m = marginal_action_distribution(&s, &Channel::uniform(2, 4).unwrap()).unwrap();
        assert!(m.probs().iter().all(|p| (p - 0.25).abs() < 1e-15));
    }

    #[test]
    fn dimension_errors() {
        let s = src(&[0.5, 0.5]);
        let dm = DistortionMatrix::new(3, 2, vec![0.0; 6]).unwrap();
        assert!(matches!(
            blahut_arimoto(&s, &dm, 1.0, &BaConfig::default()),
            Err(Error::Dimension { .. })
        ));
        let ch = Channel::uniform(3, 2).unwrap();
        assert!(channel_rate(&s, &ch).is_err());
        assert!(DistortionMatrix::new(1, 2, vec![0.0, -1.0]).is_err());
        assert!(DistortionMatrix::new(1, 2, vec![0.0, f64::NAN]).is_err());
        assert!(blahut_arimoto(&s, &hamming(2), -1.0, &BaConfig::default()).is_err());
    }

    #[test]
    fn single_zero_beta_curve_point() {
        let s = src(&[0.7, 0.3]);
        let pts = rd_curve(&s, &hamming(2), &[0.0], &BaConfig::default()).unwrap();
        assert_eq!(pts.len(), 1);
        assert!(pts[0].rate.abs() < 1e-15);
        // uniform output marginal at beta = 0 → distortion 0.5
        assert!((pts[0].distortion - 0.5).abs() < 1e-12);
        assert!(rd_curve(&s, &hamming(2), &[], &BaConfig::default()).is_err());
        assert!(rd_curve(&s, &hamming(2), &[2.0, 1.0], &BaConfig::default()).is_err());
    }

    #[test]
    fn curve_csv_layout() {
        let pts = [RateDistortionPoint {
            beta: 1.5,
            rate: 0.25,
            distortion: 0.125,
            iters: 7,
        }];
        let mut buf = Vec::new();
        write_curve_csv(&mut buf, &pts).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "beta,rate_nats,distortion,iters\n1.5,0.25,0.125,7\n"
        );
    }

    #[test]
    fn extreme_beta_uses_log_space_without_nan() {
        // beta * d far beyond exp's range on every non-minimal entry.
        let s = src(&[0.5, 0.5]);
        let dm = DistortionMatrix::new(2, 2, vec![0.0, 5.0, 5.0, 0.0]).unwrap();
        let sol = blahut_arimoto(&s, &dm, 1e6, &BaConfig::default()).unwrap();
        assert!((sol.rate - 2f64.ln()).abs() < 1e-12);
        assert_eq!(sol.distortion, 0.0);
    }

    #[test]
    fn log_space_row_agrees_with_kernel_path() {
        let q = [0.2, 0.5, 0.3];
        let d = [0.4, 0.1, 0.7];
        let beta = 3.0;
        let row_min = 0.1;
        let mut out = [0.0; 3];
        let ln_norm = log_space_row(&mut out, &q, &d, beta, row_min);
        let weights: Vec<f64> = q
            .iter()
            .zip(&d)
            .map(|(qk, dk)| qk * (-beta * (dk - row_min)).exp())
            .collect();
        let total: f64 = weights.iter().sum();
        for (o, w) in out.iter().zip(&weights) {
            assert!((o - w / total).abs() < 1e-15);
        }
        assert!((ln_norm - total.ln()).abs() < 1e-14);

        // Output 1 carries no marginal mass, so the shift moves off the row minimum.
        let q = [0.6, 0.0, 0.4];
        let ln_norm = log_space_row(&mut out, &q, &d, beta, row_min);
        let total: f64 = q
            .iter()
            .zip(&d)
            .map(|(qk, dk)| qk * (-beta * (dk - row_min)).exp())
            .sum();
        assert_eq!(out[1], 0.0);
        assert!((ln_norm - total.ln()).abs() < 1e-14);
    }

    #[test]
    fn sample_row_respects_support() {
        let ch = Channel::from_rows(&[vec![0.0, 0.25, 0.75]]).unwrap();
        assert_eq!(ch.sample_row(0, 0.0), 1);
        assert_eq!(ch.sample_row(0, 0.3), 2);
        assert_eq!(ch.sample_row(0, 0.999_999), 2);
    }
}
