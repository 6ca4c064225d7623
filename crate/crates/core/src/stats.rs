//! Small summary statistics used for multi-seed aggregation and trend checks.

use rand::Rng;

use crate::error::{Error, Result};

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Standard error of the mean using the unbiased sample variance; 0 for a
/// single observation.
pub fn standard_error(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}

/// Pointwise mean and standard error across equal-length series.
pub fn pointwise_mean_stderr(series: &[&[f64]]) -> Result<(Vec<f64>, Vec<f64>)> {
    let first = series
        .first()
        .ok_or_else(|| Error::validation("no series to aggregate"))?;
    let len = first.len();
    if let Some(bad) = series.iter().find(|s| s.len() != len) {
        return Err(Error::Dimension {
            context: "series length",
            expected: len,
            actual: bad.len(),
        });
    }
    let mut means = Vec::with_capacity(len);
    let mut errs = Vec::with_capacity(len);
    let mut column = vec![0.0; series.len()];
    for t in 0..len {
        for (c, s) in column.iter_mut().zip(series) {
            *c = s[t];
        }
        means.push(mean(&column));
        errs.push(standard_error(&column));
    }
    Ok((means, errs))
}

/// Ranks starting at 1, ties sharing their average rank.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// Spearman rank correlation; `None` when either input is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<Option<f64>> {
    if x.len() != y.len() {
        return Err(Error::Dimension {
            context: "spearman inputs",
            expected: x.len(),
            actual: y.len(),
        });
    }
    if x.len() < 2 {
        return Ok(None);
    }
    Ok(pearson(&average_ranks(x), &average_ranks(y)))
}

/// Percentile-bootstrap quantile of `stat` over resamples of `units`.
///
/// Each resample draws `units.len()` units with replacement; resamples on
/// which `stat` is undefined are skipped.
pub fn bootstrap_quantile<T, R: Rng + ?Sized>(
    units: &[T],
    resamples: usize,
    q: f64,
    rng: &mut R,
    mut stat: impl FnMut(&[&T]) -> Option<f64>,
) -> Result<f64> {
    if units.is_empty() || resamples == 0 {
        return Err(Error::validation("bootstrap needs units and at least one resample"));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::validation("quantile must lie in [0, 1]"));
    }
    let mut values = Vec::with_capacity(resamples);
    let mut pick: Vec<&T> = Vec::with_capacity(units.len());
    for _ in 0..resamples {
        pick.clear();
        for _ in 0..units.len() {
            pick.push(&units[rng.random_range(0..units.len())]);
        }
        if let Some(v) = stat(&pick) {
            values.push(v);
        }
    }
    if values.is_empty() {
        return Err(Error::Numeric("statistic undefined on every resample".into()));
    }
    values.sort_by(f64::total_cmp);
    let pos = (q * (values.len() - 1) as f64).round() as usize;
    Ok(values[pos])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn aggregation_examples() {
        let (m, e) = pointwise_mean_stderr(&[&[1.0, 2.0, 3.0]]).unwrap();
        assert_eq!(m, vec![1.0, 2.0, 3.0]);
        assert_eq!(e, vec![0.0; 3]);
        let (m, e) = pointwise_mean_stderr(&[&[4.0], &[4.0]]).unwrap();
        assert_eq!((m[0], e[0]), (4.0, 0.0));
        let (m, e) = pointwise_mean_stderr(&[&[0.0], &[2.0]]).unwrap();
        assert_eq!(m[0], 1.0);
        assert!((e[0] - 1.0).abs() < 1e-15);
        assert!(pointwise_mean_stderr(&[&[0.0], &[2.0, 1.0]]).is_err());
        assert!(pointwise_mean_stderr(&[]).is_err());
    }

    #[test]
    fn ranks_and_spearman() {
        assert_eq!(average_ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(spearman(&x, &[10.0, 20.0, 25.0, 100.0]).unwrap(), Some(1.0));
        assert_eq!(spearman(&x, &[4.0, 3.0, 2.0, 1.0]).unwrap(), Some(-1.0));
        assert_eq!(spearman(&x, &[1.0; 4]).unwrap(), None);
        assert!(spearman(&x, &[1.0]).is_err());
    }

    #[test]
    fn bootstrap_of_constant_units() {
        let units = vec![2.0; 10];
        let q = bootstrap_quantile(&units, 200, 0.95, &mut stream(0, 0), |s| {
            Some(s.iter().copied().sum::<f64>() / s.len() as f64)
        })
        .unwrap();
        assert_eq!(q, 2.0);
    }
}
