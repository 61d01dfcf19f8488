//! Exit codes: 0 success, 1 failed verdict (validation or certificate),
//! 2 unusable input, 3 solver non-convergence.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mree::config::Config;
use mree_cli::report::{render, Format};
use mree_cli::run::{run_command, Command};

#[derive(Parser)]
#[command(
    name = "mree",
    version,
    about = "Walrasian and maximin equilibria for exchange economies with differential information"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    knobs: Knobs,
}

#[derive(Args)]
struct Knobs {
    /// Market clearing tolerance (sup norm of excess demand).
    #[arg(long, global = true)]
    tol_clear: Option<f64>,
    /// Budget feasibility tolerance.
    #[arg(long, global = true)]
    tol_budget: Option<f64>,
    /// Preference comparison tolerance.
    #[arg(long, global = true)]
    tol_pref: Option<f64>,
    /// Price indistinguishability tolerance for information revelation.
    #[arg(long, global = true)]
    tol_price: Option<f64>,
    /// Maximum tolerated deviation improvement in the certificate.
    #[arg(long, global = true)]
    tol_dev: Option<f64>,
    /// Grid step for set sampling.
    #[arg(long, global = true)]
    resolution: Option<f64>,
    /// Budget-frontier divisions in the deviation search.
    #[arg(long, global = true)]
    grid_n: Option<usize>,
    /// Iteration budget per solver phase.
    #[arg(long, global = true)]
    max_iter: Option<usize>,
    /// Seed for sampled fallbacks and high-dimensional directions.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Use worker threads for independent states and searches.
    #[arg(long, global = true, value_parser = parse_switch, value_name = "on|off")]
    parallel: Option<bool>,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse an economy spec and run the assumption checks.
    Validate { spec: PathBuf },
    /// Clear every state market.
    Solve { spec: PathBuf },
    /// Compute and certify a maximin rational expectations equilibrium.
    Ree {
        spec: PathBuf,
        /// Write the equilibrium file here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-certify an equilibrium file against an economy spec.
    Verify {
        #[arg(long)]
        economy: PathBuf,
        #[arg(long)]
        equilibrium: PathBuf,
    },
    /// Sample the aggregate preferred set in one state.
    AggregateSet {
        spec: PathBuf,
        #[arg(long)]
        state: String,
        /// Comma-separated price; defaults to the solved clearing price.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        price: Option<Vec<f64>>,
    },
    /// Hausdorff distances of aggregate sets along a shrinking price path.
    ProbeContinuity {
        spec: PathBuf,
        #[arg(long)]
        state: String,
        /// Comma-separated base price; defaults to the solved clearing price.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        price: Option<Vec<f64>>,
        /// Comma-separated perturbation direction, scaled by 2^-n.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        direction: Vec<f64>,
        /// Number of probe prices.
        #[arg(long, default_value_t = 12)]
        steps: usize,
    },
}

fn parse_switch(raw: &str) -> Result<bool, String> {
    match raw {
        "on" | "true" => Ok(true),
        "off" | "false" => Ok(false),
        other => Err(format!("expected on or off, got \"{other}\"")),
    }
}

fn build_config(k: &Knobs) -> Config {
    let mut cfg = Config::default();
    if let Some(v) = k.tol_clear {
        cfg.tol_clear = v;
    }
    if let Some(v) = k.tol_budget {
        cfg.tol_budget = v;
    }
    if let Some(v) = k.tol_pref {
        cfg.tol_pref = v;
    }
    if let Some(v) = k.tol_price {
        cfg.tol_price = v;
    }
    if let Some(v) = k.tol_dev {
        cfg.tol_dev = v;
    }
    if let Some(v) = k.resolution {
        cfg.resolution = v;
    }
    if let Some(v) = k.grid_n {
        cfg.grid_n = v;
    }
    if let Some(v) = k.max_iter {
        cfg.max_iter = v;
    }
    if let Some(v) = k.seed {
        cfg.seed = v;
    }
    if let Some(v) = k.parallel {
        cfg.parallel = v;
    }
    cfg
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = build_config(&cli.knobs);
    let format = match cli.knobs.format {
        FormatArg::Json => Format::Json,
        FormatArg::Text => Format::Text,
    };
    let command = match cli.command {
        Cmd::Validate { spec } => Command::Validate { spec },
        Cmd::Solve { spec } => Command::Solve { spec },
        Cmd::Ree { spec, out } => Command::Ree { spec, out },
        Cmd::Verify {
            economy,
            equilibrium,
        } => Command::Verify {
            economy,
            equilibrium,
        },
        Cmd::AggregateSet { spec, state, price } => Command::AggregateSet { spec, state, price },
        Cmd::ProbeContinuity {
            spec,
            state,
            price,
            direction,
            steps,
        } => Command::ProbeContinuity {
            spec,
            state,
            price,
            direction,
            steps,
        },
    };
    match run_command(&command, &cfg) {
        Ok(report) => {
            print!("{}", render(&report, format));
            if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
