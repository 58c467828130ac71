use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use privtrack::experts::LossMatrix;
use privtrack::harness::{
    audit_dir, run_batch, AdversaryConfig, AggregateReport, LearnerId, RunConfig,
};
use privtrack::learners::{ProbeMode, RegEpsilon};
use privtrack::Error;

#[derive(Parser)]
#[command(
    name = "privtrack",
    version,
    about = "Private tracking of the best expert"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the trials described by a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run a learner against a stored loss matrix.
    Replay(ReplayArgs),
    /// Check the privacy ledgers of a finished run.
    Audit {
        /// Directory written by `run` or `replay`.
        #[arg(long)]
        trace: PathBuf,
    },
}

#[derive(Args)]
struct ReplayArgs {
    /// CSV with one row per round and one column per expert.
    #[arg(long)]
    losses: PathBuf,
    #[arg(long, value_parser = parse_learner)]
    learner: LearnerId,
    #[arg(long, default_value_t = 0)]
    switches: usize,
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long, value_enum, default_value = "exact")]
    probe: ProbeArg,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also record the regret of every prefix.
    #[arg(long)]
    per_round_oracle: bool,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ProbeArg {
    Exact,
    Geometric,
}

fn parse_learner(s: &str) -> Result<LearnerId, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn replay_config(args: ReplayArgs) -> privtrack::Result<RunConfig> {
    let m = LossMatrix::load_csv(&args.losses)
        .map_err(|e| Error::Config(format!("{}: {e}", args.losses.display())))?;
    let losses = std::fs::canonicalize(&args.losses)?;
    let mut config = RunConfig::new(
        m.rounds(),
        m.experts(),
        args.switches,
        args.learner,
        AdversaryConfig::Replay { losses },
    );
    config.epsilon = args.epsilon;
    config.beta = args.beta;
    config.eta = args.eta;
    config.probe = match args.probe {
        ProbeArg::Exact => ProbeMode::Exact,
        ProbeArg::Geometric => ProbeMode::Geometric,
    };
    config.reg_epsilon = RegEpsilon::Full;
    config.trials = args.trials;
    config.seed = args.seed;
    config.output_dir = args.output;
    config.per_round_oracle = args.per_round_oracle;
    config.validate()?;
    Ok(config)
}

fn summarize(config: &RunConfig, report: &AggregateReport) {
    println!(
        "{} vs {}: mean dynamic regret {:.4} ± {:.4} over {} trial(s), mean restarts {:.2}",
        config.learner,
        config.adversary.kind(),
        report.mean_regret,
        report.std_error,
        report.trials.len(),
        report.mean_restarts
    );
    println!("output: {}", config.resolved_output_dir().display());
}

fn run(cli: Cli) -> privtrack::Result<bool> {
    match cli.command {
        Command::Run { config, output } => {
            let mut config = RunConfig::load(&config)?;
            if output.is_some() {
                config.output_dir = output;
            }
            let report = run_batch(&config)?;
            summarize(&config, &report);
            Ok(true)
        }
        Command::Replay(args) => {
            let config = replay_config(args)?;
            let report = run_batch(&config)?;
            summarize(&config, &report);
            Ok(true)
        }
        Command::Audit { trace } => {
            let audit = audit_dir(&trace)?;
            let json = serde_json::to_string_pretty(&audit)?;
            std::fs::write(trace.join("audit.json"), &json)?;
            println!("{json}");
            Ok(audit.passed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("privtrack: audit failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("privtrack: {e}");
            ExitCode::from(match e {
                Error::Config(_) | Error::InvalidArgument(_) => 2,
                Error::ResourceCap { .. } => 3,
                _ => 1,
            })
        }
    }
}
