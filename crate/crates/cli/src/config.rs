//! Scenario files: one strict JSON document per run.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use sha2::{Digest, Sha256};

use qvlab_core::decomposition::PhysicalConstants;
use qvlab_core::evolvers::{EvolutionParams, Splitting};
use qvlab_core::trajectories::Interpolation;
use qvlab_core::{make_grid, Grid};

use crate::error::CliError;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub grid: GridSpec,
    #[serde(default)]
    pub constants: ConstantsSpec,
    pub initial: Option<InitialSpec>,
    #[serde(default)]
    pub gauge: GaugeSpec,
    pub evolution: Option<EvolutionSpec>,
    #[serde(default)]
    pub diagnostics: Vec<DiagnosticKind>,
    /// Write per-point residual CSVs next to the diagnostic reports.
    #[serde(default)]
    pub profiles: bool,
    /// Directory holding the snapshots to analyse; defaults to the output directory.
    pub snapshots: Option<PathBuf>,
    pub trace: Option<TraceSpec>,
    pub gps: Option<GpsSpec>,
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    pub n: Vec<usize>,
    pub length: Vec<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConstantsSpec {
    #[default]
    Natural,
    Physical {
        hbar: f64,
        m: f64,
        q: f64,
        c: f64,
        #[serde(default = "one")]
        eps0: f64,
    },
}

fn one() -> f64 {
    1.0
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    /// `amplitude exp(i k.r)` with integer mode numbers per axis.
    PlaneWave {
        mode: Vec<i64>,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// Unit-norm Gaussian packet with wavevector `momentum`.
    Gaussian {
        sigma: f64,
        center: Option<Vec<f64>>,
        momentum: Option<Vec<f64>>,
    },
    /// Harmonic-oscillator ground state for `U = m omega^2 |r - center|^2 / 2`.
    HoGround { omega: f64, center: Option<Vec<f64>> },
    /// Gaussian envelope times the `sigma_x = +1` spinor.
    SpinorUpX {
        sigma: f64,
        center: Option<Vec<f64>>,
        momentum: Option<Vec<f64>>,
    },
    /// Positive-energy Dirac plane wave.
    DiracPlaneWave {
        mode: Vec<i64>,
        #[serde(default = "default_true")]
        spin_up: bool,
    },
    /// A `.qfs` file; one, two or four components select the equation.
    Custom { path: PathBuf },
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaugeSpec {
    #[serde(default)]
    pub u: PotentialSpec,
    #[serde(default)]
    pub a: VectorPotentialSpec,
    #[serde(default)]
    pub chi: ChiMode,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    #[default]
    None,
    Harmonic { omega: f64, center: Option<Vec<f64>> },
    /// `U = slope . (r - center of box)`.
    Linear { slope: Vec<f64> },
    /// `amplitude cos(k.r)` with integer mode numbers.
    Cosine { amplitude: f64, mode: Vec<i64> },
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum VectorPotentialSpec {
    #[default]
    None,
    Uniform { value: [f64; 3] },
    /// Uniform `B` along z in the Landau gauge `A = (0, B (x - x_c), 0)`.
    Landau { b: f64 },
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ChiMode {
    /// `div A_psi = 0`.
    #[default]
    Coulomb,
    /// `div A_psi = -(kappa / c^2) dV/dt`, from the snapshot series.
    Lorentz,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionSpec {
    pub dt: f64,
    pub steps: usize,
    pub snapshot_stride: usize,
    #[serde(default)]
    pub splitting: Splitting,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    Continuity,
    HamiltonJacobi,
    LorentzGauge,
    SelfConsistency,
    FourCurrentDivergence,
}

impl DiagnosticKind {
    pub fn name(self) -> &'static str {
        match self {
            DiagnosticKind::Continuity => "continuity",
            DiagnosticKind::HamiltonJacobi => "hamilton_jacobi",
            DiagnosticKind::LorentzGauge => "lorentz_gauge",
            DiagnosticKind::SelfConsistency => "self_consistency",
            DiagnosticKind::FourCurrentDivergence => "four_current_divergence",
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum TraceMethod {
    Flow,
    Force,
    Both,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceSpec {
    pub samples: usize,
    pub dt: f64,
    /// Defaults to the number of steps that fits in the snapshot series.
    pub steps: Option<usize>,
    pub method: TraceMethod,
    #[serde(default)]
    pub interpolation: Interpolation,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GpsSpec {
    pub order: usize,
    pub times: Vec<f64>,
    /// Position and its first `order - 1` time derivatives.
    pub initial: Vec<f64>,
}

/// A parsed scenario together with the hash of the bytes it came from.
pub struct LoadedScenario {
    pub scenario: Scenario,
    pub sha256: String,
    pub path: PathBuf,
}

pub fn load(path: &Path) -> Result<LoadedScenario, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let sha256 = hex::encode(Sha256::digest(&bytes));
    let mut de = serde_json::Deserializer::from_slice(&bytes);
    let scenario: Scenario = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let field = e.path().to_string();
        CliError::Config(format!("invalid config at `{field}`: {}", e.inner()))
    })?;
    de.end()
        .map_err(|e| CliError::Config(format!("trailing content in config: {e}")))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut scenario = scenario;
    if let Some(InitialSpec::Custom { path: p }) = &mut scenario.initial {
        if p.is_relative() {
            *p = base.join(&*p);
        }
    }
    Ok(LoadedScenario {
        scenario,
        sha256,
        path: path.to_path_buf(),
    })
}

fn check_axes<T>(field: &str, v: &[T], dim: usize) -> Result<(), CliError> {
    if v.len() != dim {
        return Err(CliError::Config(format!(
            "`{field}` needs {dim} entries (one per axis), got {}",
            v.len()
        )));
    }
    Ok(())
}

fn positive(field: &str, x: f64) -> Result<(), CliError> {
    if !(x.is_finite() && x > 0.0) {
        return Err(CliError::Config(format!("`{field}` must be positive and finite, got {x}")));
    }
    Ok(())
}

impl Scenario {
    pub fn grid(&self) -> Result<Grid, CliError> {
        let g = &self.grid;
        check_axes("grid.n", &g.n, g.dim)?;
        check_axes("grid.length", &g.length, g.dim)?;
        make_grid(g.dim, &g.n, &g.length).map_err(|e| CliError::Config(format!("`grid`: {e}")))
    }

    pub fn constants(&self) -> Result<PhysicalConstants, CliError> {
        match &self.constants {
            ConstantsSpec::Natural => Ok(PhysicalConstants::natural()),
            ConstantsSpec::Physical { hbar, m, q, c, eps0 } => PhysicalConstants::physical(*hbar, *m, *q, *c, *eps0)
                .map_err(|e| CliError::Config(format!("`constants`: {e}"))),
        }
    }

    pub fn evolution(&self) -> Result<EvolutionParams, CliError> {
        let e = self
            .evolution
            .as_ref()
            .ok_or_else(|| CliError::Config("`evolution` is required for this command".into()))?;
        positive("evolution.dt", e.dt)?;
        if e.steps == 0 {
            return Err(CliError::Config("`evolution.steps` must be at least 1".into()));
        }
        if e.snapshot_stride == 0 {
            return Err(CliError::Config("`evolution.snapshot_stride` must be at least 1".into()));
        }
        let mut p = EvolutionParams::new(e.dt, e.steps, e.snapshot_stride);
        p.splitting = e.splitting;
        Ok(p)
    }

    /// Checks preset parameters against the grid before any work starts.
    pub fn validate(&self) -> Result<(), CliError> {
        let grid = self.grid()?;
        self.constants()?;
        let dim = grid.dim();
        let min_len = grid.length()[..dim].iter().cloned().fold(f64::INFINITY, f64::min);
        let packet = |sigma: f64, center: &Option<Vec<f64>>, momentum: &Option<Vec<f64>>| -> Result<(), CliError> {
            positive("initial.sigma", sigma)?;
            if 8.0 * sigma > min_len {
                return Err(CliError::Config(format!(
                    "`initial.sigma` = {sigma} is too wide for the box (need 8 sigma <= {min_len})"
                )));
            }
            if let Some(c) = center {
                check_axes("initial.center", c, dim)?;
            }
            if let Some(k) = momentum {
                check_axes("initial.momentum", k, dim)?;
            }
            Ok(())
        };
        match &self.initial {
            None => {}
            Some(InitialSpec::PlaneWave { mode, amplitude }) => {
                check_axes("initial.mode", mode, dim)?;
                positive("initial.amplitude", *amplitude)?;
            }
            Some(InitialSpec::Gaussian { sigma, center, momentum })
            | Some(InitialSpec::SpinorUpX { sigma, center, momentum }) => packet(*sigma, center, momentum)?,
            Some(InitialSpec::HoGround { omega, center }) => {
                positive("initial.omega", *omega)?;
                if let Some(c) = center {
                    check_axes("initial.center", c, dim)?;
                }
            }
            Some(InitialSpec::DiracPlaneWave { mode, .. }) => check_axes("initial.mode", mode, dim)?,
            Some(InitialSpec::Custom { path }) => {
                if !path.is_file() {
                    return Err(CliError::Config(format!(
                        "`initial.path`: snapshot {} does not exist",
                        path.display()
                    )));
                }
            }
        }
        match &self.gauge.u {
            PotentialSpec::None => {}
            PotentialSpec::Harmonic { omega, center } => {
                positive("gauge.u.omega", *omega)?;
                if let Some(c) = center {
                    check_axes("gauge.u.center", c, dim)?;
                }
            }
            PotentialSpec::Linear { slope } => check_axes("gauge.u.slope", slope, dim)?,
            PotentialSpec::Cosine { mode, .. } => check_axes("gauge.u.mode", mode, dim)?,
        }
        if let VectorPotentialSpec::Landau { .. } = self.gauge.a {
            if dim < 2 {
                return Err(CliError::Config("`gauge.a`: the landau preset needs dim >= 2".into()));
            }
        }
        if let Some(t) = &self.trace {
            positive("trace.dt", t.dt)?;
            if t.samples == 0 {
                return Err(CliError::Config("`trace.samples` must be at least 1".into()));
            }
        }
        if let Some(g) = &self.gps {
            if g.order == 0 || g.order > 64 {
                return Err(CliError::Config(format!("`gps.order` must be in 1..=64, got {}", g.order)));
            }
            check_axes("gps.initial", &g.initial, g.order)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<Scenario, String> {
        let mut de = serde_json::Deserializer::from_str(s);
        serde_path_to_error::deserialize(&mut de).map_err(|e| format!("{} {}", e.path(), e.inner()))
    }

    const BASE: &str = r#""name": "t", "grid": {"dim": 1, "n": [64], "length": [20.0]}"#;

    #[test]
    fn minimal_config_uses_defaults() {
        let s = parse(&format!("{{{BASE}}}")).unwrap();
        assert!(matches!(s.constants, ConstantsSpec::Natural));
        assert!(matches!(s.gauge.u, PotentialSpec::None));
        assert_eq!(s.gauge.chi, ChiMode::Coulomb);
        assert!(s.diagnostics.is_empty());
        s.validate().unwrap();
    }

    #[test]
    fn unknown_keys_and_presets_name_the_field() {
        let e = parse(&format!(r#"{{{BASE}, "grdi": 1}}"#)).unwrap_err();
        assert!(e.contains("grdi"), "{e}");
        let e = parse(&format!(r#"{{{BASE}, "initial": {{"preset": "gaussain", "sigma": 1.0}}}}"#)).unwrap_err();
        assert!(e.starts_with("initial"), "{e}");
        let e = parse(&format!(r#"{{{BASE}, "initial": {{"preset": "gaussian", "sigma": 1.0, "sigm": 2}}}}"#))
            .unwrap_err();
        assert!(e.contains("sigm"), "{e}");
    }

    #[test]
    fn validation_rejects_bad_parameters() {
        let s = parse(&format!(r#"{{{BASE}, "initial": {{"preset": "gaussian", "sigma": 5.0}}}}"#)).unwrap();
        assert!(matches!(s.validate(), Err(CliError::Config(_))));
        let s = parse(&format!(r#"{{{BASE}, "initial": {{"preset": "plane_wave", "mode": [1, 2]}}}}"#)).unwrap();
        assert!(matches!(s.validate(), Err(CliError::Config(_))));
        let s = parse(&format!(r#"{{{BASE}, "gauge": {{"a": {{"preset": "landau", "b": 1.0}}}}}}"#)).unwrap();
        assert!(matches!(s.validate(), Err(CliError::Config(_))));
        let s = parse(&format!(r#"{{{BASE}, "initial": {{"preset": "custom", "path": "/nonexistent.qfs"}}}}"#))
            .unwrap();
        assert!(matches!(s.validate(), Err(CliError::Config(_))));
    }
}
