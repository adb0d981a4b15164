//! One module per subcommand.

pub mod algebra;
pub mod analysis;
pub mod diagnose;
pub mod evolve;
pub mod fields;
pub mod gps;
pub mod trace;

use std::path::PathBuf;

use qvlab_core::Error;

use crate::config::{LoadedScenario, Scenario};
use crate::error::CliError;

/// Everything a subcommand needs from the command line.
pub struct Context {
    pub loaded: LoadedScenario,
    pub out: PathBuf,
    pub seed: Option<u64>,
}

impl Context {
    pub fn scenario(&self) -> &Scenario {
        &self.loaded.scenario
    }

    /// Where snapshots are read from: `snapshots` in the config, else the output directory.
    pub fn snapshot_dir(&self) -> PathBuf {
        match &self.scenario().snapshots {
            Some(p) if p.is_relative() => self
                .loaded
                .path
                .parent()
                .map(|b| b.join(p))
                .unwrap_or_else(|| p.clone()),
            Some(p) => p.clone(),
            None => self.out.clone(),
        }
    }
}

/// Library errors caused by the scenario's parameters or inputs exit with 2,
/// the rest with 1.
pub fn core_error(context: &str) -> impl FnOnce(Error) -> CliError + '_ {
    move |e| {
        let msg = format!("{context}: {e}");
        match e {
            Error::InvalidGrid(_)
            | Error::ShapeMismatch { .. }
            | Error::GridMismatch
            | Error::InvalidParameter(_)
            | Error::NonSolvable { .. }
            | Error::Cfl { .. }
            | Error::InsufficientSnapshots { .. }
            | Error::UnequalSpacing { .. }
            | Error::Header(_)
            | Error::SnapshotShape(_) => CliError::Config(msg),
            _ => CliError::Runtime(msg),
        }
    }
}
