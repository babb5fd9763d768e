use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::Context;
use clap::{Parser, Subcommand};

use eeot_cli::config::{parse_config, ExperimentConfig};
use eeot_cli::experiment::{analyze_text, bounds_text, run_sweep, simulate_text};

/// Ordered-transmission distributed detection laboratory: analytic error
/// probabilities, transmission-savings bounds, and Monte Carlo sweeps under
/// data-falsification attacks.
#[derive(Debug, Parser)]
#[command(name = "eeot", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Path to a flat `key = value` config file (defaults apply without it).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output path; overrides `output_path` from the config file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Master seed; overrides `seed` from the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Monte Carlo trial count; overrides `trials` from the config file.
    #[arg(long, global = true)]
    trials: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Analytic detection performance (pf, pd, pm, pe) at one point.
    Analyze,
    /// Savings lower bounds per slack and the transmission upper bounds.
    Bounds,
    /// Monte Carlo estimates at one point.
    Simulate,
    /// Full sweep over one parameter, CSV output.
    Sweep,
}

fn load_config(cli: &Cli) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            parse_config(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = cli.trials {
        cfg.trials = trials;
    }
    if let Some(out) = &cli.out {
        cfg.output_path = Some(out.clone());
    }
    Ok(cfg)
}

/// Opens the output sink up front so an unwritable path fails before any
/// computation starts.
fn open_output(cfg: &ExperimentConfig) -> anyhow::Result<Box<dyn Write>> {
    match &cfg.output_path {
        Some(path) => {
            let file = fs::File::create(path)
                .with_context(|| format!("creating output file {}", path.display()))?;
            Ok(Box::new(BufWriter::new(file)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout()))),
    }
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let cfg = load_config(&cli)?;
    for warning in &cfg.warnings {
        eprintln!("warning: {warning}");
    }

    let mut out = open_output(&cfg)?;
    match cli.command {
        Command::Analyze => out.write_all(analyze_text(&cfg)?.as_bytes())?,
        Command::Bounds => out.write_all(bounds_text(&cfg)?.as_bytes())?,
        Command::Simulate => out.write_all(simulate_text(&cfg)?.as_bytes())?,
        Command::Sweep => run_sweep(&cfg, &mut out)?,
    }
    out.flush()?;
    Ok(())
}
