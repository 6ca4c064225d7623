//! Information-theoretic primitives over finite discrete distributions.
//!
//! Everything is in nats. Zero-probability terms are skipped, which gives the
//! usual `0 ln 0 = 0` convention.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the total mass of a distribution.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// A probability vector over a finite support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct DiscreteDist {
    probs: Vec<f64>,
}

impl DiscreteDist {
    /// Validates `probs`. Inputs whose sum is within [`NORMALIZATION_TOL`] of one
    /// are renormalized exactly; anything further off is rejected.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        let probs = normalized(probs, "distribution")?;
        Ok(Self { probs })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::validation("uniform distribution over an empty support"));
        }
        Ok(Self {
            probs: vec![1.0 / n as f64; n],
        })
    }

    pub fn point_mass(n: usize, at: usize) -> Result<Self> {
        if at >= n {
            return Err(Error::IndexOutOfRange {
                what: "outcomes",
                index: at,
                len: n,
            });
        }
        let mut probs = vec![0.0; n];
        probs[at] = 1.0;
        Ok(Self { probs })
    }

    /// Empirical distribution of non-negative counts (or weights).
    pub fn from_counts(counts: &[f64]) -> Result<Self> {
        let total: f64 = counts.iter().sum();
        if counts.iter().any(|c| !c.is_finite() || *c < 0.0) || total <= 0.0 {
            return Err(Error::validation("counts must be non-negative with a positive total"));
        }
        Ok(Self {
            probs: counts.iter().map(|c| c / total).collect(),
        })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.probs
    }
}

impl TryFrom<Vec<f64>> for DiscreteDist {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        DiscreteDist::new(v)
    }
}

impl From<DiscreteDist> for Vec<f64> {
    fn from(d: DiscreteDist) -> Self {
        d.probs
    }
}

/// Joint distribution over `(X, Y)` stored row-major, rows indexed by `X`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDist {
    rows: usize,
    cols: usize,
    probs: Vec<f64>,
}

impl JointDist {
    pub fn new(rows: usize, cols: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != rows * cols {
            return Err(Error::Dimension {
                context: "joint distribution",
                expected: rows * cols,
                actual: probs.len(),
            });
        }
        let probs = normalized(probs, "joint distribution")?;
        Ok(Self { rows, cols, probs })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != m) {
            return Err(Error::Dimension {
                context: "joint distribution row",
                expected: m,
                actual: bad.len(),
            });
        }
        Self::new(n, m, rows.concat())
    }

    /// Joint of an input distribution pushed through a row-stochastic channel.
    pub fn from_channel(input: &DiscreteDist, channel: &[Vec<f64>]) -> Result<Self> {
        if channel.len() != input.len() {
            return Err(Error::Dimension {
                context: "channel rows",
                expected: input.len(),
                actual: channel.len(),
            });
        }
        let cols = channel.first().map_or(0, Vec::len);
        let mut probs = Vec::with_capacity(input.len() * cols);
        for (w, row) in input.probs().iter().zip(channel) {
            if row.len() != cols {
                return Err(Error::Dimension {
                    context: "channel row",
                    expected: cols,
                    actual: row.len(),
                });
            }
            probs.extend(row.iter().map(|p| w * p));
        }
        Self::new(input.len(), cols, probs)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.probs[x * self.cols + y]
    }

    pub fn marginal_x(&self) -> DiscreteDist {
        let probs = self
            .probs
            .chunks(self.cols.max(1))
            .map(|r| r.iter().sum())
            .collect();
        DiscreteDist { probs }
    }

    pub fn marginal_y(&self) -> DiscreteDist {
        let mut probs = vec![0.0; self.cols];
        for row in self.probs.chunks(self.cols.max(1)) {
            for (acc, p) in probs.iter_mut().zip(row) {
                *acc += p;
            }
        }
        DiscreteDist { probs }
    }
}

fn normalized(mut probs: Vec<f64>, what: &str) -> Result<Vec<f64>> {
    if probs.is_empty() {
        return Err(Error::validation(format!("{what} has empty support")));
    }
    if let Some((i, p)) = probs
        .iter()
        .enumerate()
        .find(|(_, p)| !p.is_finite() || **p < 0.0)
    {
        return Err(Error::validation(format!(
            "{what} entry {i} is {p}; probabilities must be finite and non-negative"
        )));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::validation(format!(
            "{what} sums to {total}, not 1 (tolerance {NORMALIZATION_TOL})"
        )));
    }
    if total != 1.0 {
        probs.iter_mut().for_each(|p| *p /= total);
    }
    Ok(probs)
}

/// Shannon entropy `-Σ p ln p`.
pub fn entropy(d: &DiscreteDist) -> f64 {
    entropy_of(d.probs())
}

/// Entropy of a slice assumed to be a valid probability vector.
pub(crate) fn entropy_of(probs: &[f64]) -> f64 {
    let h: f64 = probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum();
    h.max(0.0)
}

/// `D_KL(p ‖ q) = Σ p ln(p/q)` over the support of `p`.
pub fn kl_divergence(p: &DiscreteDist, q: &DiscreteDist) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::Dimension {
            context: "kl_divergence",
            expected: p.len(),
            actual: q.len(),
        });
    }
    let mut kl = 0.0;
    for (i, (&pi, &qi)) in p.probs().iter().zip(q.probs()).enumerate() {
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return Err(Error::AbsoluteContinuity { index: i, p: pi });
        }
        kl += pi * (pi / qi).ln();
    }
    Ok(kl.max(0.0))
}

/// `I(X;Y) = D_KL(p(X,Y) ‖ p(X)p(Y))`.
pub fn mutual_information(j: &JointDist) -> f64 {
    let px = j.marginal_x();
    let py = j.marginal_y();
    let mut mi = 0.0;
    for x in 0..j.rows() {
        for y in 0..j.cols() {
            let pxy = j.get(x, y);
            if pxy > 0.0 {
                mi += pxy * (pxy / (px.probs()[x] * py.probs()[y])).ln();
            }
        }
    }
    mi.max(0.0)
}

/// `H(X | Y)` computed by direct summation over the joint.
pub fn conditional_entropy_x_given_y(j: &JointDist) -> f64 {
    let py = j.marginal_y();
    let mut h = 0.0;
    for x in 0..j.rows() {
        for y in 0..j.cols() {
            let pxy = j.get(x, y);
            if pxy > 0.0 {
                h -= pxy * (pxy / py.probs()[y]).ln();
            }
        }
    }
    h.max(0.0)
}

/// Total-variation distance `½ Σ |p − q|` between equal-length probability slices.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    debug_assert_eq!(p.len(), q.len());
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}
