use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hypergrowth_core::{Breakpoint, SeriesKind, YearWindow};

#[derive(Debug, Parser)]
#[command(
    name = "hypergrowth",
    version,
    about = "Fit hyperbolic growth models to long-run GDP and population data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one series (single hyperbola or two segments)
    Fit(RunArgs),
    /// Compose GDP and population fits into a GDP/cap trajectory
    Ratio(RunArgs),
    /// Stagnation, takeoff and divergence checks
    Diagnose(RunArgs),
    /// Write PREFIX.csv and PREFIX.json for plotting
    Report(RunArgs),
    /// Turn a horizontal Maddison sheet (exported to CSV) into tidy rows
    Convert(ConvertArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Tidy CSV (region,kind,year,value). Defaults to maddison_excerpt.csv in $HYPERGROWTH_DATA
    #[arg(long)]
    pub input: Option<PathBuf>,

    /// Separate file holding the population series
    #[arg(long)]
    pub pop_input: Option<PathBuf>,

    #[arg(long)]
    pub region: Option<String>,

    /// population, gdp or gdp_per_capita
    #[arg(long)]
    pub kind: Option<SeriesKind>,

    /// Fit window LO:HI (overrides the region setting)
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<YearWindow>,

    /// auto or a year; enables a two-segment fit
    #[arg(long)]
    pub breakpoint: Option<Breakpoint>,

    #[arg(long)]
    pub bridge_width: Option<f64>,

    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(["1", "3"]))]
    pub bridge_degree: Option<String>,

    /// Relative deviation that counts as leaving the trend
    #[arg(long, default_value_t = 0.10)]
    pub threshold: f64,

    /// Consecutive observations needed to call a divergence
    #[arg(long, default_value_t = 3)]
    pub persistence: usize,

    /// Trend counts as flat below this k*span/a
    #[arg(long, default_value_t = 0.05)]
    pub flatness: f64,

    /// Takeoff candidate year; repeatable (default 1750 and 1900)
    #[arg(long = "candidate", allow_hyphen_values = true)]
    pub candidates: Vec<f64>,

    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Output file (report: file prefix)
    #[arg(long)]
    pub output: Option<PathBuf>,

    /// Region settings TOML; the bundled settings are used otherwise
    #[arg(long)]
    pub regions_config: Option<PathBuf>,

    /// ratio: one summary row per region segment
    #[arg(long)]
    pub all_regions: bool,

    /// fit: polish the reciprocal fit on relative residuals
    #[arg(long)]
    pub refine: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ConvertArgs {
    #[arg(long)]
    pub input: PathBuf,

    /// population or gdp
    #[arg(long)]
    pub kind: SeriesKind,

    /// Multiply every value (1e-3 turns thousands into millions)
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,

    #[arg(long)]
    pub output: Option<PathBuf>,
}
