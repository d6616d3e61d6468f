//! `gwdiv`: outage, end-to-end and switching experiments for two-gateway
//! feeder-link diversity.

mod commands;
mod error;
mod output;
mod scenario;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gwdiv_core::switching::SchemeKind;

use crate::error::CliError;
use crate::scenario::Overrides;

#[derive(Parser)]
#[command(
    name = "gwdiv",
    version,
    about = "Gateway diversity experiments for Q/V-band feeder links"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Uplink outage probability along a sweep.
    Outage(OutageArgs),
    /// End-to-end (uplink + downlink, transparent payload) outage.
    E2e(E2eArgs),
    /// Switching probability and rate versus the switching threshold.
    Switching(SwitchingArgs),
    /// Clear-sky SNR from link-budget entries.
    Budget(BudgetArgs),
    /// Print the resolved scenario, optionally checking analytic against simulated outage.
    Validate(ValidateArgs),
}

/// Flags shared by every experiment. Values given here take precedence over
/// the scenario file, which takes precedence over built-in defaults.
#[derive(Args, Clone)]
pub struct Common {
    /// Scenario file path, or a name looked up in $GWDIV_SCENARIO_DIR and
    /// then among the built-in scenarios (default, paper_tables).
    #[arg(long, default_value = "default")]
    pub scenario: String,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Simulated slots per sweep point.
    #[arg(long)]
    pub slots: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub burn_in: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Omit the generation-time header line so output is byte-reproducible.
    #[arg(long)]
    pub no_timestamp: bool,
    #[arg(long, allow_hyphen_values = true)]
    pub cs_ul_db: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub cs_dl_db: Option<f64>,
    /// Outage threshold, dB.
    #[arg(long, allow_hyphen_values = true)]
    pub threshold_db: Option<f64>,
    /// Switching threshold, dB.
    #[arg(long, allow_hyphen_values = true)]
    pub theta_db: Option<f64>,
    /// Gateway separation; sets the fade correlation from distance.
    #[arg(long)]
    pub distance_km: Option<f64>,
    /// Fade correlation, overriding any distance.
    #[arg(long)]
    pub rho: Option<f64>,
}

impl Common {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            cs_snr_ul_db: self.cs_ul_db,
            cs_snr_dl_db: self.cs_dl_db,
            outage_thresh_db: self.threshold_db,
            switch_thresh_db: self.theta_db,
            separation_km: self.distance_km,
            rho: self.rho,
        }
    }
}

/// Sweep points: either `--from/--to/--step` or an explicit `--values` list.
#[derive(Args, Clone, Default)]
pub struct Range {
    #[arg(long, allow_hyphen_values = true, requires_all = ["to", "step"], conflicts_with = "values")]
    pub from: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires = "from")]
    pub to: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires = "from")]
    pub step: Option<f64>,
    /// Comma-separated sweep values.
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
    pub values: Option<Vec<f64>>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AxisArg {
    /// Uplink margin, clear-sky SNR minus outage threshold (dB).
    Margin,
    /// Uplink clear-sky SNR (dB).
    CsSnr,
    /// Gateway separation (km).
    Distance,
    /// Switching threshold (dB).
    Theta,
    /// Fade correlation coefficient.
    Rho,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Analytic,
    Mc,
    Both,
}

impl MethodArg {
    pub fn analytic(self) -> bool {
        self != Self::Mc
    }

    pub fn mc(self) -> bool {
        self != Self::Analytic
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Analytic => "analytic",
            Self::Mc => "mc",
            Self::Both => "both",
        }
    }
}

fn parse_scheme(s: &str) -> Result<SchemeKind, String> {
    s.parse().map_err(|e: gwdiv_core::Error| e.to_string())
}

#[derive(Args)]
pub struct OutageArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub range: Range,
    /// Comma-separated list of mssc, ssc, sc, single, mrc (mrc is simulation only).
    #[arg(long = "scheme", visible_alias = "schemes", value_delimiter = ',', default_value = "sc", value_parser = parse_scheme)]
    pub schemes: Vec<SchemeKind>,
    #[arg(long, value_enum, default_value_t = MethodArg::Both)]
    pub method: MethodArg,
    #[arg(long, value_enum, conflicts_with = "theta_sweep")]
    pub axis: Option<AxisArg>,
    /// Shorthand for `--axis theta`.
    #[arg(long)]
    pub theta_sweep: bool,
}

#[derive(Args)]
pub struct E2eArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub range: Range,
    #[arg(long, value_delimiter = ',', default_value = "single,mssc", value_parser = parse_scheme)]
    pub schemes: Vec<SchemeKind>,
    /// Repeat the sweep at each gateway separation (km), overriding --distance-km.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["distance_km", "rho"])]
    pub distances: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value_t = MethodArg::Both)]
    pub method: MethodArg,
    /// Defaults to the uplink clear-sky SNR.
    #[arg(long, value_enum)]
    pub axis: Option<AxisArg>,
}

#[derive(Args)]
pub struct SwitchingArgs {
    #[command(flatten)]
    pub common: Common,
    /// Switching thresholds, dB.
    #[command(flatten)]
    pub range: Range,
    #[arg(long, value_enum, default_value_t = MethodArg::Both)]
    pub method: MethodArg,
    /// Slot duration in seconds, for the switching rate.
    #[arg(long)]
    pub slot_seconds: Option<f64>,
}

#[derive(Args)]
pub struct BudgetArgs {
    /// Scenario whose [budget] blocks are evaluated when no entry flags are given.
    #[arg(long, default_value = "paper_tables")]
    pub scenario: String,
    #[arg(long, allow_hyphen_values = true, requires_all = ["fsl_db", "gt_dbk", "bandwidth_hz"])]
    pub eirp_dbw: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires = "eirp_dbw")]
    pub fsl_db: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires = "eirp_dbw")]
    pub gt_dbk: Option<f64>,
    #[arg(long, requires = "eirp_dbw")]
    pub bandwidth_hz: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub no_timestamp: bool,
}

#[derive(Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Compare analytic outage with simulation for the single, SC and MSSC schemes.
    #[arg(long)]
    pub check: bool,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Outage(a) => commands::outage(&a),
        Command::E2e(a) => commands::e2e(&a),
        Command::Switching(a) => commands::switching(&a),
        Command::Budget(a) => commands::budget(&a),
        Command::Validate(a) => commands::validate(&a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gwdiv: {e}");
            e.exit_code()
        }
    }
}
