mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

/// Event-impact analytics over location-based check-in data.
#[derive(Debug, Parser)]
#[command(name = "eventpulse", version)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by every subcommand; each overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Flat JSON run configuration.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output directory (the corpus directory for `synth`).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_name = "FILE")]
    pub checkins: Option<PathBuf>,
    #[arg(long, global = true, value_name = "FILE")]
    pub venues: Option<PathBuf>,
    #[arg(long, global = true, value_name = "FILE")]
    pub social: Option<PathBuf>,
    #[arg(long, global = true, value_name = "FILE")]
    pub taxonomy: Option<PathBuf>,
    /// Event window start, RFC 3339.
    #[arg(long, global = true, value_name = "TIME")]
    pub event_start: Option<String>,
    #[arg(long, global = true, value_name = "TIME")]
    pub event_end: Option<String>,
    /// Hotspot venue id (repeatable).
    #[arg(long = "hotspot", global = true, value_name = "ID")]
    pub hotspots: Vec<String>,
    /// Neighborhood radius in metres.
    #[arg(long, global = true, value_name = "M")]
    pub radius: Option<f64>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Generate a synthetic city with a planted event effect.
    Synth {
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        n_venues: Option<usize>,
        #[arg(long)]
        n_users: Option<usize>,
        #[arg(long)]
        daily_rate: Option<f64>,
        /// Full generator parameters as JSON; flags override it.
        #[arg(long, value_name = "FILE")]
        params: Option<PathBuf>,
    },
    /// Load and cross-check the corpus files.
    Validate,
    /// Per-venue feature table.
    Features {
        /// Every venue instead of the prediction space.
        #[arg(long)]
        all: bool,
    },
    /// Abnormal returns and labels over the prediction space.
    Label,
    /// Single-feature ranking evaluation.
    RankEval,
    /// Leave-one-out evaluation of the classifiers.
    Crossval {
        /// gnb, rf, svm or all.
        #[arg(long, default_value = "all")]
        model: String,
        /// G, M, GM or all.
        #[arg(long, default_value = "all")]
        set: String,
    },
    /// Consecutive-period popularity rank correlation by hotspot distance.
    Kendall {
        /// Root category to rank (defaults to the focus root).
        #[arg(long)]
        root: Option<String>,
        #[arg(long)]
        period_days: Option<i64>,
        /// Finite bin upper bounds in metres, comma separated.
        #[arg(long, value_delimiter = ',')]
        bins: Option<Vec<f64>>,
    },
    /// Check-in share per root category before and during the event.
    Popshare,
    /// Change in transition flows around a root category.
    Flows {
        #[arg(long)]
        root: Option<String>,
    },
    /// Venues whose names match the hotspot patterns.
    Hotspots {
        /// Name pattern (repeatable).
        #[arg(long = "pattern")]
        patterns: Vec<String>,
    },
    /// Full Jensen inter-type coefficient table.
    Jensen,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Synth { .. } => "synth",
            Command::Validate => "validate",
            Command::Features { .. } => "features",
            Command::Label => "label",
            Command::RankEval => "rank-eval",
            Command::Crossval { .. } => "crossval",
            Command::Kendall { .. } => "kendall",
            Command::Popshare => "popshare",
            Command::Flows { .. } => "flows",
            Command::Hotspots { .. } => "hotspots",
            Command::Jensen => "jensen",
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
