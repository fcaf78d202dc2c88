use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use tdqmc::config::{parse_alpha, Mode, RunConfig};
use tdqmc::runner;

/// Time-dependent quantum Monte Carlo for the one-dimensional two-electron
/// soft-core atom, with an exact grid solver for reference.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    /// ground_state | alpha_scan | realtime | oracle
    #[arg(long)]
    mode: Option<Mode>,

    /// Key = value configuration file; CLI flags override it.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Master seed; every random stream derives from it.
    #[arg(long)]
    seed: Option<u64>,

    /// Walkers per electron.
    #[arg(long)]
    walkers: Option<usize>,

    /// Kernel-width scale, or 'mean_field'.
    #[arg(long, value_parser = parse_alpha)]
    alpha: Option<tdqmc::kde::Alpha>,

    /// Comma-separated kernel-width scales for scan mode.
    #[arg(long)]
    alphas: Option<String>,

    /// Publication-scale ensembles and grids.
    #[arg(long)]
    paper_scale: bool,

    /// Worker threads (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,

    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Also write SVG/PNG plots.
    #[arg(long)]
    plots: bool,
}

fn build_config(cli: Cli) -> Result<RunConfig, tdqmc::Error> {
    let mut cfg = RunConfig::default();
    if cli.paper_scale {
        cfg.apply_paper_scale();
    }
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)?;
        cfg.apply_text(&text)?;
    }
    if let Some(mode) = cli.mode {
        cfg.mode = mode;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(walkers) = cli.walkers {
        cfg.walkers = walkers;
    }
    if let Some(alpha) = cli.alpha {
        cfg.alpha = alpha;
    }
    if let Some(alphas) = &cli.alphas {
        cfg.alphas = alphas
            .split(',')
            .map(|s| parse_alpha(s.trim()))
            .collect::<Result<_, _>>()
            .map_err(|e| tdqmc::Error::Config(vec![e]))?;
    }
    if let Some(workers) = cli.workers {
        cfg.workers = workers;
    }
    if let Some(out) = cli.out {
        cfg.out = out;
    }
    if cli.plots {
        cfg.plots = true;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match build_config(cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error ({}): {e}", e.category());
            return ExitCode::from(2);
        }
    };
    match runner::run(&cfg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error ({}): {e}", e.category());
            ExitCode::FAILURE
        }
    }
}
