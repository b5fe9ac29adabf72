//! `stram` command-line front end.
//!
//! Exit codes: 0 success, 1 internal failure, 2 input error, 3 solver limit
//! (artifacts of the best incumbent are still written), 4 infeasible or unbounded.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "stram", version, about = "Strategic freight transport model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load and check an instance directory.
    Validate(ValidateArgs),
    /// Solve the two-stage mean-CVaR program.
    Solve(RunArgs),
    /// Value of the stochastic solution.
    Vss(VssArgs),
    /// Re-solve with every carbon price scaled by each factor.
    Sensitivity(SensitivityArgs),
    /// Single-period model with horizon-wide investments.
    Static(StaticArgs),
    /// Generate the path set.
    Paths(PathsArgs),
    /// Write the assembled program in MPS format.
    ExportMps(RunArgs),
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Also write validation.json here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PathsArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Scenario settings replacing the instance's scenarios.json.
    #[arg(long)]
    scenarios: Option<PathBuf>,
}

#[derive(Args, Clone)]
pub struct RunArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Weight of the CVaR term.
    #[arg(long, default_value_t = 0.2)]
    pub lambda: f64,
    /// CVaR confidence level.
    #[arg(long, default_value_t = 0.8)]
    pub gamma: f64,
    /// Relative optimality gap.
    #[arg(long, default_value_t = 0.005)]
    pub gap: f64,
    /// Wall-clock limit per solve in seconds.
    #[arg(long)]
    pub time_limit: Option<f64>,
    /// `builtin`, or `external:<command>` with `{mps}` and `{solution}` placeholders.
    #[arg(long, default_value = "builtin")]
    pub solver: String,
    /// Scenario settings replacing the instance's scenarios.json.
    #[arg(long)]
    pub scenarios: Option<PathBuf>,
    /// Use a precomputed paths.csv instead of generating paths.
    #[arg(long)]
    pub paths: Option<PathBuf>,
    /// Copy first-stage variables per scenario and link them by equality rows.
    #[arg(long)]
    pub explicit_nonanticipativity: bool,
}

#[derive(Args)]
struct VssArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Fix only the expected value investments, not the first-stage operations.
    #[arg(long)]
    investments_only: bool,
}

#[derive(Args)]
struct SensitivityArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Carbon price factors.
    #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
    factors: Vec<f64>,
}

#[derive(Args)]
struct StaticArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Period year to optimise; defaults to the last period.
    #[arg(long)]
    year: Option<i32>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Validate(a) => commands::validate(&a.instance, a.out.as_deref()),
        Command::Solve(a) => commands::solve(&a),
        Command::Vss(a) => commands::vss(&a.run, a.investments_only),
        Command::Sensitivity(a) => commands::sensitivity(&a.run, &a.factors),
        Command::Static(a) => commands::static_model(&a.run, a.year),
        Command::Paths(a) => commands::paths(&a.instance, &a.out, a.scenarios.as_deref()),
        Command::ExportMps(a) => commands::export_mps(&a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            let code = commands::exit_code_of(&e);
            eprintln!("error: {e:#}");
            ExitCode::from(code as u8)
        }
    }
}
