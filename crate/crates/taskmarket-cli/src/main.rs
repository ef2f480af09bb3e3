//! `taskmarket`: command-line front end for the task-assignment model,
//! its measurement layer, the classifier pipeline, and the panel tools.
//!
//! Exit codes: 0 success, 1 runtime or assertion failure, 2 usage or
//! configuration error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands {
    pub mod classify;
    pub mod metrics;
    pub mod panel;
    pub mod prop1;
    pub mod sweep;
}
mod config;
mod output;
mod svg;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable inputs, malformed configuration.
    Usage(String),
    /// The computation itself failed or a verification did not pass.
    Runtime(String),
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError::Usage(message.into())
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        CliError::Runtime(message.into())
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "taskmarket",
    version,
    about = "Task-assignment model of hiring structure: sweeps, verification, \
             classification, measurement, and synthetic panel estimation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep digital capability and write sweep.csv + sweep.svg.
    Sweep {
        /// JSON run configuration with `economy` and `sweep` sections.
        #[arg(long)]
        config: PathBuf,
        /// Output directory (defaults to the config's output_dir or `.`).
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Monte Carlo verification that cutoffs fall as capability rises;
    /// writes prop1_report.csv and exits nonzero on any failure.
    VerifyProp1 {
        /// Number of random model instances to draw.
        #[arg(long, default_value_t = 200)]
        draws: usize,
        /// RNG seed; falls back to TASKMARKET_SEED, then 0.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Classify job titles via the scripted external stage with keyword
    /// fallback; writes title,category_code,category_name,method.
    Classify {
        /// Input titles: text file (one per line) or CSV with a `title`
        /// column.
        #[arg(long)]
        input: PathBuf,
        /// Scripted responses, one line per batch. Missing file means
        /// every batch falls back to keywords.
        #[arg(long)]
        stub: Option<PathBuf>,
        /// Keyword lexicon JSON (defaults to the built-in lexicon).
        #[arg(long)]
        lexicon: Option<PathBuf>,
        /// Output CSV path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        batch_size: Option<usize>,
        #[arg(long)]
        concurrency: Option<usize>,
        /// Optional run configuration carrying a `classifier` section.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Measurement utilities over CSV files.
    Metrics {
        #[command(subcommand)]
        op: MetricsOp,
    },
    /// Synthetic panels: generation and estimation.
    Panel {
        #[command(subcommand)]
        op: PanelOp,
    },
}

#[derive(Subcommand)]
enum MetricsOp {
    /// Append task scores computed from per-occupation count columns
    /// (phys, aux, tech, prof, mgmt).
    TaskScore {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Optional run configuration carrying a `metrics.weights` table.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Append the Herfindahl-Hirschman index of the listed share columns.
    Hhi {
        #[arg(long)]
        input: PathBuf,
        /// Comma-separated share column names.
        #[arg(long)]
        columns: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Append a percentile-clamped copy of a column.
    Winsorize {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        column: String,
        #[arg(long)]
        p_lo: Option<f64>,
        #[arg(long)]
        p_hi: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Append the leave-one-out group mean of a column.
    LooMean {
        #[arg(long)]
        input: PathBuf,
        /// Comma-separated grouping columns (e.g. city,year).
        #[arg(long)]
        group: String,
        /// Unit identifier column (e.g. firm).
        #[arg(long)]
        unit: String,
        #[arg(long)]
        value: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Append a lagged copy of a column keyed by unit and period.
    Lag {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        unit: String,
        #[arg(long)]
        period: String,
        #[arg(long)]
        value: String,
        #[arg(long, default_value_t = 1)]
        lag: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum PanelOp {
    /// Generate panel.csv and manifest.json from the config's economy and
    /// `panel.synth` sections.
    Generate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Estimate the config's `panel.estimations` against a panel CSV and
    /// write results.csv.
    Estimate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        panel: PathBuf,
        /// Output CSV path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn resolve_seed(flag: Option<u64>) -> u64 {
    flag.or_else(|| {
        std::env::var("TASKMARKET_SEED")
            .ok()
            .and_then(|s| s.trim().parse().ok())
    })
    .unwrap_or(0)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Sweep { config, out_dir } => commands::sweep::run(&config, out_dir),
        Command::VerifyProp1 {
            draws,
            seed,
            out_dir,
        } => commands::prop1::run(draws, resolve_seed(seed), out_dir.as_deref()),
        Command::Classify {
            input,
            stub,
            lexicon,
            out,
            batch_size,
            concurrency,
            config,
        } => commands::classify::run(
            &input,
            stub.as_deref(),
            lexicon.as_deref(),
            out.as_deref(),
            batch_size,
            concurrency,
            config.as_deref(),
        ),
        Command::Metrics { op } => match op {
            MetricsOp::TaskScore { input, out, config } => {
                commands::metrics::task_score_cmd(&input, out.as_deref(), config.as_deref())
            }
            MetricsOp::Hhi {
                input,
                columns,
                out,
            } => commands::metrics::hhi_cmd(&input, &columns, out.as_deref()),
            MetricsOp::Winsorize {
                input,
                column,
                p_lo,
                p_hi,
                out,
                config,
            } => commands::metrics::winsorize_cmd(
                &input,
                &column,
                p_lo,
                p_hi,
                out.as_deref(),
                config.as_deref(),
            ),
            MetricsOp::LooMean {
                input,
                group,
                unit,
                value,
                out,
            } => commands::metrics::loo_mean_cmd(&input, &group, &unit, &value, out.as_deref()),
            MetricsOp::Lag {
                input,
                unit,
                period,
                value,
                lag,
                out,
            } => commands::metrics::lag_cmd(&input, &unit, &period, &value, lag, out.as_deref()),
        },
        Command::Panel { op } => match op {
            PanelOp::Generate { config, out_dir } => commands::panel::generate(&config, out_dir),
            PanelOp::Estimate { config, panel, out } => {
                commands::panel::estimate(&config, &panel, out)
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(error.exit_code())
        }
    }
}
