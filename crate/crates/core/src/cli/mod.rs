//! The `hypergroup` command-line driver.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error
//! (I/O, parsing, integrity, lookups, checkpoint and dimension mismatches),
//! 3 numeric failure.

pub mod commands;
pub mod manifest;

pub use manifest::{RunConfig, RunManifest};

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "hypergroup", version, about = "Hierarchical GNN group recommendation")]
pub struct Cli {
    /// Worker threads for training and evaluation (0 = all cores).
    #[arg(long, global = true, env = "HYPERGROUP_THREADS", default_value_t = 0)]
    pub threads: usize,
    /// Run every data-parallel loop on the calling thread.
    #[arg(long, global = true)]
    pub sequential: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Split a dataset, train a model and write its checkpoint.
    Train(TrainArgs),
    /// Evaluate a checkpoint under the full-ranking protocol.
    Eval(EvalArgs),
    /// Rank items for an ad-hoc group of known users.
    Recommend(RecommendArgs),
    /// Write a synthetic dataset.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Run config JSON (`{"model": ..., "train": ..., "split": ...}`); defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_parser = ["full", "s", "h", "sh", "u"])]
    pub variant: Option<String>,
    #[arg(long, value_parser = ["two-stage", "joint", "group-only", "user-only"])]
    pub strategy: Option<String>,
    /// Overrides every seed in the run config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Checkpoint holding a `node_features` tensor to use as frozen input features.
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// Record wall-clock seconds per epoch (outputs are then not byte-reproducible).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Dataset directory; defaults to the one recorded in the training manifest.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Comma-separated cutoffs.
    #[arg(long, default_value = "5,10", value_delimiter = ',')]
    pub topn: Vec<usize>,
    #[arg(long, default_value = "groups", value_parser = ["groups", "users"])]
    pub target: String,
    #[arg(long, default_value = "test", value_parser = ["train", "val", "test"])]
    pub split: String,
    /// Add group-size and item-activity strata.
    #[arg(long)]
    pub strata: bool,
    /// Drop each entity's other training positives from its candidates.
    #[arg(long)]
    pub exclude_train: bool,
    /// Also report the popularity baseline.
    #[arg(long)]
    pub pop: bool,
    /// Neighbor-sampling seed for inference (defaults to the checkpoint seed).
    #[arg(long)]
    pub eval_seed: Option<u64>,
    /// Directory for `eval_report.json` and a manifest.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the JSON report instead of the table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct RecommendArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Comma-separated raw user IDs.
    #[arg(long, value_delimiter = ',', required = true)]
    pub members: Vec<String>,
    #[arg(long, default_value_t = 10)]
    pub topn: usize,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub eval_seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// SynthConfig JSON; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Maps an error to the process exit status.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) => EXIT_USAGE,
        Error::Numeric(_) => EXIT_NUMERIC,
        _ => EXIT_DATA,
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit status. Normal output goes to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    match commands::execute(cli, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}
