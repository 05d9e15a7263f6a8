//! The `ecfr` command-line front end.

pub mod commands;
pub mod config;
pub mod csv;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};

pub use commands::{cmd_coupling, cmd_curves, cmd_table};
pub use config::ExperimentConfig;

#[derive(Debug, Parser)]
#[command(
    name = "ecfr",
    version,
    about = "Edgeworth and Cornish-Fisher approximations of a standardized sample mean, with monotone rearrangement"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Truth, expansion and rearranged curves, one CSV per sample size and domain
    Curves(Flags),
    /// Lp error tables cdf_errors.csv and quantile_errors.csv
    Table(Flags),
    /// Monte Carlo coupling moments, coupling.csv
    Coupling(Flags),
    /// Print the effective configuration
    Config(Flags),
}

#[derive(Debug, Args)]
struct Flags {
    /// Config file of `key = value` lines; flags override it
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// gamma:SHAPE:SCALE or lognormal:MU:SIGMA
    #[arg(long)]
    population: Option<String>,
    /// Sample sizes, comma separated
    #[arg(long, value_name = "N,..")]
    n: Option<String>,
    /// Expansion orders (1, 2, 3), comma separated
    #[arg(long, value_name = "J,..")]
    order: Option<String>,
    /// Distribution-domain interval LO:HI
    #[arg(long, value_name = "LO:HI", allow_hyphen_values = true)]
    cdf_interval: Option<String>,
    /// Quantile-domain interval LO:HI inside (0, 1)
    #[arg(long, value_name = "LO:HI")]
    q_interval: Option<String>,
    /// Mesh nodes per interval
    #[arg(long, value_name = "M")]
    mesh: Option<String>,
    /// uniform, normal, file:PATH or none
    #[arg(long)]
    weight: Option<String>,
    /// Skewness:excess-kurtosis used by the expansions, or `population`
    #[arg(long, value_name = "L:K", allow_hyphen_values = true)]
    cumulants: Option<String>,
    /// Monte Carlo draws
    #[arg(long)]
    draws: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    out: Option<String>,
}

impl Flags {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            cfg.apply_text(&text, &path.display().to_string())?;
        }
        let flags = [
            ("population", &self.population),
            ("n", &self.n),
            ("order", &self.order),
            ("cdf-interval", &self.cdf_interval),
            ("q-interval", &self.q_interval),
            ("mesh", &self.mesh),
            ("weight", &self.weight),
            ("cumulants", &self.cumulants),
            ("draws", &self.draws),
            ("seed", &self.seed),
            ("out", &self.out),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        Ok(cfg)
    }
}

fn dispatch(command: Command) -> Result<()> {
    let (flags, run): (Flags, fn(&ExperimentConfig) -> Result<Vec<PathBuf>>) = match command {
        Command::Curves(f) => (f, cmd_curves),
        Command::Table(f) => (f, cmd_table),
        Command::Coupling(f) => (f, cmd_coupling),
        Command::Config(f) => {
            print!("{}", f.resolve()?.to_text());
            return Ok(());
        }
    };
    for path in run(&flags.resolve()?)? {
        println!("{}", path.display());
    }
    Ok(())
}

/// Parses `args`, runs the subcommand and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("ecfr: {e}");
            e.exit_code()
        }
    }
}
