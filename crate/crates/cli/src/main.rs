use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use pais_cli::commands;
use pais_cli::parse_config;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "pais",
    version,
    about = "Parallel adaptive importance sampling experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured sampler and write samples, diagnostics and a summary.
    Run(Common),
    /// Sweep the proposal scale over the configured grid.
    Tune(Common),
    /// Time the resamplers and measure their moment errors.
    BenchResamplers(Common),
    /// Write a synthetic data set for the configured target.
    GenerateData {
        #[command(flatten)]
        common: Common,
        /// Noise-free model output.
        #[arg(long)]
        zero_noise: bool,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Used when the config has no `seed`.
    #[arg(long, env = "PAIS_SEED")]
    seed: Option<u64>,
    /// Output directory; defaults to `outputs.dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to one per core.
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let (common, zero_noise) = match &cli.command {
        Command::Run(c) | Command::Tune(c) | Command::BenchResamplers(c) => (c, false),
        Command::GenerateData { common, zero_noise } => (common, *zero_noise),
    };
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    let spec = parse_config(&common.config)?;
    // clap already folds PAIS_SEED into the flag, flag first.
    let seed = spec.resolve_seed(common.seed, None);
    let dir = common
        .out
        .clone()
        .unwrap_or_else(|| spec.outputs.dir.clone());
    match cli.command {
        Command::Run(_) => {
            for s in commands::cmd_run(&spec, seed, &dir)? {
                println!(
                    "seed {}: burn-in {:?}, mean ESS {:?}, L2 error {:?}",
                    s.seed, s.burn_in, s.mean_ess, s.l2_error
                );
            }
        }
        Command::Tune(_) => {
            let t = commands::cmd_tune(&spec, seed, &dir)?;
            println!("beta* = {}", t.beta_star);
        }
        Command::BenchResamplers(_) => {
            commands::cmd_bench_resamplers(&spec, seed, &dir)?;
        }
        Command::GenerateData { .. } => {
            let (path, _) = commands::cmd_generate_data(&spec, seed, !zero_noise, &dir)?;
            println!("{}", path.display());
        }
    }
    Ok(())
}
