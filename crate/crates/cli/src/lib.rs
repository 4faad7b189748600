//! Command-line pipeline over synthetic frame directories.
//!
//! A dataset is a directory of `frame_NNNN/` folders, each holding
//! `depth.pfm`, `cloud.ply`, `scan.csv`, `poses.txt`, `map.ply`,
//! `corrupted.ply` and `camera.txt`.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
}

impl From<plrefine::Error> for CliError {
    fn from(e: plrefine::Error) -> Self {
        Self::Data(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Data(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 1,
            Self::Data(_) => 2,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "plrefine", version, about = "Laser-constrained pseudo-LiDAR refinement")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset.
    Synth(Common),
    /// Rasterize the laser band of every frame into mask.pfm.
    Mask(Common),
    /// Train a refinement model on the corrupted clouds of a dataset.
    RefineTrain(Common),
    /// Refine the corrupted clouds of a dataset with a trained model.
    RefineApply(Common),
    /// Compare corrupted and refined clouds against the local maps.
    Eval(Common),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// key=value run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Dataset directory.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output directory; created if missing.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Overrides the command's seed: scene_seed for synth, seed for
    /// refine-train, emd_seed for eval.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of frames to synthesize or process.
    #[arg(long)]
    pub frames: Option<usize>,
    /// Model file for refine-apply.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Directory of refined clouds for eval.
    #[arg(long)]
    pub refined: Option<PathBuf>,
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: &Command) -> CliResult<()> {
    match command {
        Command::Synth(c) => commands::cmd_synth(c),
        Command::Mask(c) => commands::cmd_mask(c),
        Command::RefineTrain(c) => commands::cmd_refine_train(c),
        Command::RefineApply(c) => commands::cmd_refine_apply(c),
        Command::Eval(c) => commands::cmd_eval(c),
    }
}
