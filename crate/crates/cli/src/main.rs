//! `smchanest`: run the channel-estimation experiments and write CSVs.

mod commands;
mod config;
mod figures;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "smchanest", version, about = "Set-membership channel estimation experiments")]
struct Cli {
    /// Worker threads for Monte Carlo trials (default: all cores).
    #[arg(long, global = true, env = "SMCHANEST_THREADS", value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,
    /// Print the figure to subcommand and config mapping.
    #[arg(long)]
    list_figures: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Trial-averaged learning curves.
    Curve(RunArgs),
    /// Steady-state MSE over an SNR grid.
    MseVsSnr(RunArgs),
    /// Bit error rate over an SNR grid.
    Ber(RunArgs),
    /// Analytical against simulated update probability and excess MSE.
    ValidateAnalysis(RunArgs),
    /// Multiplication counts per iteration; needs no config.
    Complexity(ComplexityArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory for `<name>.csv` and `<name>.meta`.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config trial count.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    trials: Option<u64>,
}

#[derive(Args)]
struct ComplexityArgs {
    #[arg(long)]
    out: PathBuf,
    /// Largest channel size M = N.
    #[arg(long, default_value_t = 30, value_parser = clap::value_parser!(u64).range(1..=1000))]
    max_size: u64,
}

fn load(args: &RunArgs) -> Result<config::Experiment, String> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| format!("{}: {e}", args.config.display()))?;
    let mut exp = config::parse_config(&text).map_err(|e| format!("{}: {e}", args.config.display()))?;
    if let Some(seed) = args.seed {
        exp.scenario.seed = seed;
    }
    if let Some(trials) = args.trials {
        exp.scenario.trials = trials as usize;
    }
    Ok(exp)
}

fn dispatch(command: Command) -> Result<commands::Written, String> {
    let run =
        |args: &RunArgs,
         f: fn(&config::Experiment, &std::path::Path) -> Result<commands::Written, commands::CommandError>| {
            let exp = load(args)?;
            f(&exp, &args.out).map_err(|e| e.to_string())
        };
    match command {
        Command::Curve(a) => run(&a, commands::curve),
        Command::MseVsSnr(a) => run(&a, commands::mse_vs_snr),
        Command::Ber(a) => run(&a, commands::ber),
        Command::ValidateAnalysis(a) => run(&a, commands::validate_analysis),
        Command::Complexity(a) => commands::complexity(&a.out, a.max_size as usize).map_err(|e| e.to_string()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.list_figures {
        print!("{}", figures::render());
        return ExitCode::SUCCESS;
    }
    let Some(command) = cli.command else {
        use clap::CommandFactory;
        eprintln!("{}", Cli::command().render_usage());
        eprintln!("a subcommand or --list-figures is required; see --help");
        return ExitCode::from(2);
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        pool = pool.num_threads(n as usize);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return ExitCode::FAILURE;
        }
    };
    match pool.install(|| dispatch(command)) {
        Ok((csv, meta)) => {
            println!("wrote {}", csv.display());
            println!("wrote {}", meta.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
