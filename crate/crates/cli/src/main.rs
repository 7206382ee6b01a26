mod commands;
mod render;
mod selector;

use std::path::PathBuf;
use std::process::ExitCode;

use bellscope_core::search::{SearchBasis, StartMode};
use bellscope_core::Statistics;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands::CliError;

#[derive(Parser, Debug)]
#[command(name = "bellscope", version, about = "Linear-optics Bell-state measurement analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    TextTable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    NumberResolving,
    Threshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Stats {
    Boson,
    Fermion,
}

impl From<Stats> for Statistics {
    fn from(s: Stats) -> Self {
        match s {
            Stats::Boson => Statistics::Boson,
            Stats::Fermion => Statistics::Fermion,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Basis {
    Cyclic,
    Hyper,
}

impl From<Basis> for SearchBasis {
    fn from(b: Basis) -> Self {
        match b {
            Basis::Cyclic => SearchBasis::Cyclic,
            Basis::Hyper => SearchBasis::Hyper,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Start {
    Identity,
    Haar,
    Alternate,
}

impl From<Start> for StartMode {
    fn from(s: Start) -> Self {
        match s {
            Start::Identity => StartMode::Identity,
            Start::Haar => StartMode::Haar,
            Start::Alternate => StartMode::Alternate,
        }
    }
}

#[derive(Args, Debug)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Closed-form limits for an n-photon, D-level system.
    Limits {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Partition a state set by the click patterns a circuit produces.
    Analyze {
        #[arg(long)]
        circuit: PathBuf,
        /// bell:n,D | hyper64 | hyper15 | hyper:LABEL,LABEL,...
        #[arg(long)]
        states: String,
        #[arg(long, value_enum, default_value = "number-resolving")]
        model: Model,
        /// Probability above which a pattern belongs to a support.
        #[arg(long)]
        tol: Option<f64>,
        /// Also write the state x pattern coincidence table as CSV.
        #[arg(long)]
        coincidence_csv: Option<PathBuf>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// G1/G2 classification of a circuit or a seeded Haar unitary.
    ClassifyGroup {
        #[arg(long, conflicts_with = "haar_seed")]
        circuit: Option<PathBuf>,
        #[arg(long, requires_all = ["n", "d"])]
        haar_seed: Option<u64>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long, value_enum)]
        statistics: Option<Stats>,
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Pairwise LL criterion against disjoint supports for every state pair.
    LlCheck {
        #[arg(long)]
        circuit: PathBuf,
        /// Defaults to the Bell states of the circuit's (n, D).
        #[arg(long)]
        states: Option<String>,
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Hill-climb over unitaries for the largest class count.
    Search {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, value_enum, default_value = "boson")]
        statistics: Stats,
        #[arg(long, default_value_t = 500)]
        budget: usize,
        #[arg(long, default_value_t = 1)]
        restarts: usize,
        #[arg(long, default_value_t = 0.3)]
        step_scale: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        target: Option<usize>,
        #[arg(long, value_enum, default_value = "cyclic")]
        basis: Basis,
        #[arg(long, value_enum, default_value = "alternate")]
        start: Start,
        /// Write the best unitary as a circuit file with provenance.
        #[arg(long)]
        circuit_out: Option<PathBuf>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Class-count histogram of seeded Haar unitaries, checking the G1 bound.
    Audit {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, value_enum, default_value = "boson")]
        statistics: Stats,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Recompute a reference scenario and compare it with its golden file.
    Reproduce {
        /// table1 | fig1 | fig4 | hom | all
        scenario: String,
        #[arg(long, default_value = "golden")]
        golden_dir: PathBuf,
        /// Rewrite the golden files (refused on a dirty working tree).
        #[arg(long)]
        regenerate: bool,
    },
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("BELLSCOPE_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Usage(format!("BELLSCOPE_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let msg = e.to_string();
            let line = msg
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ");
            eprintln!("error[E_USAGE]: {line}");
            return ExitCode::from(2);
        }
    };
    let outcome = configure_threads().and_then(|()| commands::run(cli.command));
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (code, status) = e.code();
            eprintln!("error[{code}]: {}", e.message().replace('\n', " "));
            ExitCode::from(status)
        }
    }
}
