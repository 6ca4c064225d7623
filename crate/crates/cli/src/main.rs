use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use capbayes::harness::{
    parse_config, parse_override, run_experiment, write_outputs, ExperimentConfig, ExperimentKind, Override,
    CODE_VERSION,
};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "capbayes", about = "Capacity-limited Bayesian decision-making experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run any experiment kind described by a config file.
    Run(RunArgs),
    /// Trace BLASTS and STS rate-distortion points (`rd-curve` configs only).
    RdCurve(RunArgs),
    /// BLASTS marginal action probabilities over λ (`marginal-sweep` configs only).
    MarginalSweep(RunArgs),
    /// Parse and validate a config without running it.
    ValidateConfig(ConfigArgs),
    /// Print the code version.
    Version,
}

#[derive(Args)]
struct ConfigArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Override a config field, e.g. `--set agents[1].beta=100`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Shorthand for `--set seeds=[0, 1, ..., N-1]`.
    #[arg(long, value_name = "N")]
    seeds: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Output directory for CSV tables and manifest.json.
    #[arg(long)]
    out: PathBuf,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl Failure {
    fn report(self) -> ExitCode {
        match self {
            Failure::Config(m) => {
                eprintln!("error: {m}");
                ExitCode::from(2)
            }
            Failure::Runtime(m) => {
                eprintln!("error: {m}");
                ExitCode::from(1)
            }
        }
    }
}

fn load(args: &ConfigArgs) -> Result<(ExperimentConfig, Vec<Override>), Failure> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| Failure::Config(format!("cannot read config {}: {e}", args.config.display())))?;
    let mut overrides = args
        .overrides
        .iter()
        .map(|raw| parse_override(raw))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Failure::Config(e.to_string()))?;
    if let Some(n) = args.seeds {
        let seeds: Vec<String> = (0..n).map(|s| s.to_string()).collect();
        overrides.push(parse_override(&format!("seeds=[{}]", seeds.join(","))).map_err(|e| Failure::Config(e.to_string()))?);
    }
    let cfg = parse_config(&text, &overrides).map_err(|e| Failure::Config(e.to_string()))?;
    Ok((cfg, overrides))
}

fn prepare_out(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir)
        .map_err(|e| Failure::Runtime(format!("cannot create output directory {}: {e}", dir.display())))?;
    let probe = dir.join(".capbayes-write-check");
    fs::write(&probe, b"")
        .and_then(|_| fs::remove_file(&probe))
        .map_err(|e| Failure::Runtime(format!("output directory {} is not writable: {e}", dir.display())))
}

fn run(args: &RunArgs, required: Option<ExperimentKind>) -> Result<(), Failure> {
    let (cfg, overrides) = load(&args.config)?;
    if let Some(kind) = required {
        if cfg.kind != kind {
            return Err(Failure::Config(format!(
                "config {} has kind `{}`, this subcommand needs `{}`",
                args.config.config.display(),
                cfg.kind.as_str(),
                kind.as_str()
            )));
        }
    }
    prepare_out(&args.out)?;
    let out = run_experiment(&cfg).map_err(|e| Failure::Runtime(e.to_string()))?;
    let written = write_outputs(&args.out, &cfg, &overrides, &out).map_err(|e| Failure::Runtime(e.to_string()))?;
    for p in &written {
        println!("{}", p.display());
    }
    if !out.failures.is_empty() {
        let seeds: Vec<String> = out.failures.iter().map(|f| format!("seed {}: {}", f.seed, f.error)).collect();
        return Err(Failure::Runtime(format!("{} seed(s) failed: {}", seeds.len(), seeds.join("; "))));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => run(a, None),
        Command::RdCurve(a) => run(a, Some(ExperimentKind::RdCurve)),
        Command::MarginalSweep(a) => run(a, Some(ExperimentKind::MarginalSweep)),
        Command::ValidateConfig(a) => load(a).map(|_| println!("OK")),
        Command::Version => {
            println!("{CODE_VERSION}");
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.report(),
    }
}
