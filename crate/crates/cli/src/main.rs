use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fleet_cli::commands::{bench, campaign, run, shape};
use fleet_cli::{App, Baseline, CliError, MissionConfig, Outcome, Overrides};

#[derive(Parser)]
#[command(name = "fleetsim", version, about = "Simulate learning UAV swarms and their edge cluster")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand)]
enum Command {
    /// Search the reward (crop) or pruning thresholds (camera) on training data.
    Shape,
    /// Fly one mission, or answer one day of tracking queries.
    Run,
    /// Fly successive missions with online model updates.
    Campaign,
    /// Matched-seed comparison suite.
    Bench,
}

#[derive(Args)]
struct Flags {
    /// JSON config; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    seeds: Option<usize>,
    #[arg(long, global = true)]
    agents: Option<usize>,
    #[arg(long, global = true)]
    missions: Option<usize>,
    #[arg(long, global = true, overrides_with = "no_online")]
    online: bool,
    #[arg(long, global = true, overrides_with = "online")]
    no_online: bool,
    #[arg(long, global = true, value_enum)]
    baseline: Option<Baseline>,
    #[arg(long, global = true, value_enum)]
    app: Option<App>,
    #[arg(long, global = true, overrides_with = "no_cluster")]
    cluster: bool,
    #[arg(long, global = true, overrides_with = "cluster")]
    no_cluster: bool,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

fn toggle(on: bool, off: bool) -> Option<bool> {
    match (on, off) {
        (true, _) => Some(true),
        (_, true) => Some(false),
        _ => None,
    }
}

impl Flags {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            seeds: self.seeds,
            agents: self.agents,
            missions: self.missions,
            online: toggle(self.online, self.no_online),
            baseline: self.baseline,
            app: self.app,
            cluster: toggle(self.cluster, self.no_cluster),
            out: self.out.clone(),
        }
    }
}

fn execute(cli: &Cli) -> Result<(Outcome, PathBuf), CliError> {
    let mut cfg = match &cli.flags.config {
        Some(path) => MissionConfig::load(path)?,
        None => MissionConfig::default(),
    };
    cfg.apply(&cli.flags.overrides());
    cfg.validate()?;
    let pool = fleet_cli::setup::thread_pool()?;
    let outcome = match cli.command {
        Command::Shape => shape::run(&cfg)?,
        Command::Run => run::run(&cfg)?,
        Command::Campaign => campaign::run(&cfg)?,
        Command::Bench => bench::run(&cfg, &pool)?,
    };
    outcome.outputs.write_to(&cfg.out)?;
    Ok((outcome, cfg.out))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok((outcome, out)) => {
            println!("{}", outcome.summary);
            let names: Vec<&str> = outcome.outputs.names().collect();
            println!("wrote {} to {}", names.join(", "), out.display());
            if outcome.goals_met {
                ExitCode::SUCCESS
            } else {
                eprintln!("goals unmet");
                CliError::GoalsUnmet(outcome.summary).exit_code()
            }
        }
        Err(e) => {
            eprintln!("fleetsim: {e}");
            e.exit_code()
        }
    }
}
