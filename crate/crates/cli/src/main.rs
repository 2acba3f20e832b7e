use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use conflict_cli::{
    cmd_analyze, cmd_baseline, cmd_run, cmd_sweep, load_config, AnalyzeOptions, BaselineSource,
    Loaded, Overrides,
};

#[derive(Parser)]
#[command(name = "conflict", version, about = "Hawk-dove games on learned visit networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run config, sweep config or manifest.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Replaces the config seed (the base seed for sweeps).
    #[arg(long)]
    seed: Option<u64>,
    /// Replaces the snapshot interval.
    #[arg(long)]
    snapshot_every: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation.
    Run(Common),
    /// Run a parameter sweep; re-running into the same directory resumes it.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Worker threads (default: all cores).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Degree histograms, time series and trajectory of a run directory.
    Analyze {
        /// Run output directory.
        #[arg(long)]
        run: PathBuf,
        /// Where to write results (default: <run>/analysis).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the matched Erdős–Rényi degree histogram.
        #[arg(long)]
        baseline: bool,
        #[arg(long, default_value_t = 30)]
        baseline_samples: usize,
        /// Seed of the baseline sampler (default: the run seed).
        #[arg(long)]
        seed: Option<u64>,
        /// Binary tie threshold multiple c.
        #[arg(long, default_value_t = 2.0)]
        tie_c: f64,
        /// Bin width of the expected-visitor histogram.
        #[arg(long, default_value_t = 1.0)]
        bin_width: f64,
    },
    /// Erdős–Rényi degree histogram, explicit or density-matched to a run.
    Baseline {
        #[arg(long, conflicts_with = "run", requires = "p")]
        n: Option<usize>,
        #[arg(long, requires = "n")]
        p: Option<f64>,
        /// Match node count and density to this run directory.
        #[arg(long)]
        run: Option<PathBuf>,
        #[arg(long, default_value_t = 2.0)]
        tie_c: f64,
        #[arg(long, default_value_t = 30)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load(common: &Common) -> Result<Loaded> {
    let mut loaded = load_config(&common.config)?;
    loaded.apply(Overrides { seed: common.seed, snapshot_every: common.snapshot_every })?;
    Ok(loaded)
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(common) => {
            let Loaded::Run(settings) = load(&common)? else {
                bail!("{} is a sweep config; use `conflict sweep`", common.config.display());
            };
            let report = cmd_run(&settings, &common.out)?;
            println!("label {} ({} snapshots) -> {}", report.label, report.snapshots, common.out.display());
        }
        Command::Sweep { common, workers } => {
            let Loaded::Sweep(spec) = load(&common)? else {
                bail!("{} is a run config; use `conflict run`", common.config.display());
            };
            let report = cmd_sweep(&spec, &common.out, workers)?;
            println!(
                "{} jobs ({} resumed) over {} points -> {}",
                report.jobs,
                report.resumed,
                report.result.rows.len(),
                common.out.display()
            );
        }
        Command::Analyze { run, out, baseline, baseline_samples, seed, tie_c, bin_width } => {
            let opts = AnalyzeOptions { out, tie_c, bin_width, baseline, baseline_samples, seed };
            let report = cmd_analyze(&run, &opts)?;
            println!(
                "label {} trajectory {} heavy_tail {}",
                report.final_label, report.trajectory, report.heavy_tail
            );
        }
        Command::Baseline { n, p, run, tie_c, samples, seed, out } => {
            let source = match (n, p, run) {
                (Some(n), Some(p), None) => BaselineSource::Explicit { n, p },
                (None, None, Some(dir)) => BaselineSource::Run { dir, tie_c },
                _ => bail!("give either --n and --p, or --run"),
            };
            let h = cmd_baseline(&source, samples, seed, &out)?;
            println!("mean degree {} -> {}", h.mean_degree(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
