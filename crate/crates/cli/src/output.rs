//! Output directory handling, JSON writing, manifests and snapshot series.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use qvlab_core::diagnostics::ResidualReport;
use qvlab_core::fields::read_snapshot;
use qvlab_core::Grid;

use crate::config::LoadedScenario;
use crate::error::{config, runtime, CliError};
use crate::presets::State;

pub const SNAPSHOT_PREFIX: &str = "snap_";
pub const SNAPSHOT_EXT: &str = "qfs";

pub fn snapshot_name(index: usize) -> String {
    format!("{SNAPSHOT_PREFIX}{index:05}.{SNAPSHOT_EXT}")
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(runtime("serializing JSON"))?;
    s.push('\n');
    fs::write(path, s).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

#[derive(Serialize)]
pub struct Versions {
    pub qvlab: &'static str,
    pub qvlab_core: &'static str,
}

#[derive(Serialize)]
pub struct OutputFile {
    pub file: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,
}

/// Traceability record written by every command.
#[derive(Serialize)]
pub struct Manifest {
    pub command: &'static str,
    pub scenario: String,
    pub config_path: String,
    pub config_sha256: String,
    pub versions: Versions,
    pub seed: Option<u64>,
    pub threads: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equation: Option<&'static str>,
    pub outputs: Vec<OutputFile>,
    /// Wall-clock seconds per phase, plus `total`.
    pub timings: BTreeMap<String, f64>,
}

/// Collects phase timings for a manifest.
pub struct Timer {
    start: Instant,
    phase: Instant,
    timings: BTreeMap<String, f64>,
}

impl Timer {
    pub fn new() -> Self {
        let now = Instant::now();
        Timer {
            start: now,
            phase: now,
            timings: BTreeMap::new(),
        }
    }

    pub fn lap(&mut self, name: &str) {
        let now = Instant::now();
        self.timings.insert(name.to_string(), (now - self.phase).as_secs_f64());
        self.phase = now;
    }

    pub fn finish(mut self) -> BTreeMap<String, f64> {
        self.timings.insert("total".into(), self.start.elapsed().as_secs_f64());
        self.timings
    }
}

impl Manifest {
    pub fn new(command: &'static str, loaded: &LoadedScenario, seed: Option<u64>) -> Self {
        Manifest {
            command,
            scenario: loaded.scenario.name.clone(),
            config_path: loaded.path.display().to_string(),
            config_sha256: loaded.sha256.clone(),
            versions: Versions {
                qvlab: env!("CARGO_PKG_VERSION"),
                qvlab_core: qvlab_core::VERSION,
            },
            seed,
            threads: rayon::current_num_threads(),
            equation: None,
            outputs: Vec::new(),
            timings: BTreeMap::new(),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf, CliError> {
        let path = dir.join(format!("manifest_{}.json", self.command));
        write_json(&path, self)?;
        Ok(path)
    }
}

/// Snapshots `snap_*.qfs` of one kind on the config grid, in file order.
pub fn load_series(dir: &Path, grid: &Grid) -> Result<Vec<(f64, State)>, CliError> {
    let entries = fs::read_dir(dir)
        .map_err(|e| CliError::Config(format!("snapshot directory {}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().is_some_and(|x| x == SNAPSHOT_EXT)
                && p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.starts_with(SNAPSHOT_PREFIX))
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::Config(format!("no {SNAPSHOT_PREFIX}*.{SNAPSHOT_EXT} files in {}", dir.display())));
    }
    let mut out: Vec<(f64, State)> = Vec::with_capacity(files.len());
    for path in &files {
        let snap = read_snapshot(path).map_err(config(&path.display().to_string()))?;
        if &snap.grid != grid {
            return Err(CliError::Config(format!(
                "{}: snapshot grid n={:?} length={:?} does not match the config grid n={:?} length={:?}",
                path.display(),
                &snap.grid.n()[..snap.grid.dim()],
                &snap.grid.length()[..snap.grid.dim()],
                &grid.n()[..grid.dim()],
                &grid.length()[..grid.dim()],
            )));
        }
        let time = snap.time;
        let state = State::from_snapshot(snap)?;
        if let Some((_, first)) = out.first() {
            if first.equation() != state.equation() {
                return Err(CliError::Config(format!(
                    "{}: mixes {} and {} snapshots",
                    dir.display(),
                    first.equation(),
                    state.equation()
                )));
            }
        }
        out.push((time, state));
    }
    Ok(out)
}

/// Writes a report's last-frame residual per grid point as `x[,y,z],residual`.
pub fn write_profile(path: &Path, grid: &Grid, report: &ResidualReport) -> Result<bool, CliError> {
    let Some(values) = &report.per_point else {
        return Ok(false);
    };
    let axes = ["x", "y", "z"];
    let mut s = String::new();
    s.push_str(&axes[..grid.dim()].join(","));
    s.push_str(",residual\n");
    for (idx, v) in values.iter().enumerate() {
        let r = grid.coords(idx);
        for x in &r[..grid.dim()] {
            s.push_str(&format!("{x},"));
        }
        s.push_str(&format!("{v}\n"));
    }
    fs::write(path, s).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
    Ok(true)
}
