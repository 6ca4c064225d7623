//! CSV tables and the JSON run manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{ExperimentConfig, Override};
use super::{aggregate_seeds, MetricSeries, RunOutput, SeedFailure};
use crate::error::{Error, Result};

pub const CODE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// Everything needed to reproduce a run. Deliberately free of timestamps and
/// host details so that reruns are byte-identical.
#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub version: &'static str,
    pub kind: &'static str,
    pub config: &'a ExperimentConfig,
    pub overrides: Vec<&'a str>,
    pub seeds: &'a [u64],
    pub outputs: Vec<String>,
    pub failed_seeds: &'a [SeedFailure],
}

fn series_csv(series: &[MetricSeries], value_column: &str) -> String {
    let mut s = format!("seed,t,agent,{value_column}\n");
    for m in series {
        for (i, v) in m.values.iter().enumerate() {
            writeln!(s, "{},{},{},{}", m.seed, i + 1, m.agent, v).unwrap();
        }
    }
    s
}

fn aggregate_csv(series: &[MetricSeries]) -> Result<String> {
    let mut s = String::from("t,agent,mean,stderr\n");
    for agg in aggregate_seeds(series)? {
        for (i, (m, e)) in agg.mean.iter().zip(&agg.stderr).enumerate() {
            writeln!(s, "{},{},{},{}", i + 1, agg.agent, m, e).unwrap();
        }
    }
    Ok(s)
}

/// The CSV tables of `out`, as `(file name, contents)` pairs.
pub fn tables(out: &RunOutput) -> Result<Vec<(String, String)>> {
    let mut files = Vec::new();
    if !out.regret.is_empty() {
        files.push(("regret.csv".to_string(), series_csv(&out.regret, "cum_regret")));
        files.push(("regret_agg.csv".to_string(), aggregate_csv(&out.regret)?));
    }
    if !out.rate.is_empty() {
        files.push(("rate.csv".to_string(), series_csv(&out.rate, "rate_nats")));
        files.push(("rate_agg.csv".to_string(), aggregate_csv(&out.rate)?));
    }
    if !out.rd_curve.is_empty() {
        let mut s = String::from("agent,param,rate_nats,distortion\n");
        for r in &out.rd_curve {
            writeln!(s, "{},{},{},{}", r.agent, r.param, r.rate_nats, r.distortion).unwrap();
        }
        files.push(("rd_curve.csv".to_string(), s));
    }
    if !out.marginals.is_empty() {
        let mut s = String::from("lambda,arm,prob,ts_prob\n");
        for r in &out.marginals {
            writeln!(s, "{},{},{},{}", r.lambda, r.arm, r.prob, r.ts_prob).unwrap();
        }
        files.push(("marginal.csv".to_string(), s));
    }
    Ok(files)
}

/// Writes the tables and `manifest.json` into `dir`, creating it if needed.
/// Returns the written paths.
pub fn write_outputs(
    dir: &Path,
    cfg: &ExperimentConfig,
    overrides: &[Override],
    out: &RunOutput,
) -> Result<Vec<PathBuf>> {
    let io = |what: &str, p: &Path, e: std::io::Error| Error::Io(format!("{what} {}: {e}", p.display()));
    fs::create_dir_all(dir).map_err(|e| io("cannot create output directory", dir, e))?;
    let files = tables(out)?;
    let manifest = Manifest {
        version: CODE_VERSION,
        kind: cfg.kind.as_str(),
        config: cfg,
        overrides: overrides.iter().map(|o| o.raw.as_str()).collect(),
        seeds: &cfg.seeds,
        outputs: files.iter().map(|(n, _)| n.clone()).collect(),
        failed_seeds: &out.failures,
    };
    let mut written = Vec::with_capacity(files.len() + 1);
    for (name, contents) in files {
        let p = dir.join(name);
        fs::write(&p, contents).map_err(|e| io("cannot write", &p, e))?;
        written.push(p);
    }
    let p = dir.join("manifest.json");
    let mut json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Io(e.to_string()))?;
    json.push('\n');
    fs::write(&p, json).map_err(|e| io("cannot write", &p, e))?;
    written.push(p);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_layout() {
        let s = vec![MetricSeries {
            seed: 7,
            agent: "ts".into(),
            values: vec![0.5, 1.25],
        }];
        assert_eq!(series_csv(&s, "cum_regret"), "seed,t,agent,cum_regret\n7,1,ts,0.5\n7,2,ts,1.25\n");
        assert_eq!(aggregate_csv(&s).unwrap(), "t,agent,mean,stderr\n1,ts,0.5,0\n2,ts,1.25,0\n");
    }
}
