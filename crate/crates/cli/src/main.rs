use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use starframe_cli::commands::{self, CmdError, EXIT_CONFIG, EXIT_FAILED, EXIT_OK, PROPERTIES};
use starframe_cli::config::{parse_orders, RunConfig};

#[derive(Parser)]
#[command(
    name = "starframe",
    version,
    about = "Frame-split time-ordered exponentials"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path (default `<command>.csv`)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of grid points
    #[arg(long)]
    grid: Option<usize>,
    /// Orders such as `0,1,2` or `0..=12`
    #[arg(long)]
    orders: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Matrix identity residuals and order fits
    Identities(Common),
    /// Truncation error against order for each frame
    Figure1 {
        #[command(flatten)]
        common: Common,
        /// Also write an SVG plot next to the CSV
        #[arg(long)]
        svg: bool,
    },
    /// End-to-end property checks
    Verify {
        #[command(flatten)]
        common: Common,
        /// Print the property names and exit
        #[arg(long)]
        list: bool,
    },
}

fn configure(common: &Common) -> Result<RunConfig, CmdError> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p).map_err(|e| CmdError(e.0))?,
        None => RunConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(n) = common.grid {
        cfg.n_grid = n;
    }
    if let Some(o) = &common.orders {
        cfg.orders = parse_orders(o).map_err(|e| CmdError(e.0))?;
    }
    cfg.validate().map_err(|e| CmdError(e.0))?;
    Ok(cfg)
}

fn output(common: &Common, cfg: &RunConfig, name: &str) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| cfg.output_path.clone())
        .unwrap_or_else(|| PathBuf::from(format!("{name}.csv")))
}

fn init_threads() -> Result<(), CmdError> {
    let Ok(v) = std::env::var("STARFRAME_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| {
        CmdError(format!(
            "STARFRAME_THREADS: expected a non-negative integer (got `{v}`)"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n.max(1))
        .build_global()?;
    Ok(())
}

type Runner = fn(&RunConfig, &Path) -> Result<bool, CmdError>;

fn run(cli: Cli) -> Result<bool, CmdError> {
    init_threads()?;
    let (common, name, runner): (&Common, &str, Runner) = match &cli.command {
        Command::Identities(c) => (c, "identities", commands::cmd_identities),
        Command::Figure1 { common, .. } => (common, "figure1", commands::cmd_figure1),
        Command::Verify { list: true, .. } => {
            for p in PROPERTIES {
                println!("{p}");
            }
            return Ok(true);
        }
        Command::Verify { common, .. } => (common, "verify", commands::cmd_verify),
    };
    let mut cfg = configure(common)?;
    if let Command::Figure1 { svg: true, .. } = cli.command {
        cfg.emit_svg = true;
    }
    let out = output(common, &cfg, name);
    runner(&cfg, &out)
}

fn main() -> ExitCode {
    let code = match run(Cli::parse()) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_FAILED,
        Err(e) => {
            eprintln!("error: {}", e.0);
            EXIT_CONFIG
        }
    };
    ExitCode::from(code as u8)
}
