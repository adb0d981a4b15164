//! Initial states and external potentials named in scenario files.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;

use qvlab_core::decomposition::{GaugeConfiguration, PhysicalConstants};
use qvlab_core::evolvers::{positive_energy_spinor, FourPotential};
use qvlab_core::fields::{
    read_snapshot, write_snapshot, BispinorField, ComplexScalarField, MultiComponent, ScalarField, Snapshot,
    SpinorField, VectorField,
};
use qvlab_core::lattice::MAX_DIM;
use qvlab_core::Grid;

use crate::config::{InitialSpec, PotentialSpec, Scenario, VectorPotentialSpec};
use crate::error::{config, runtime, CliError};

/// A wave function of any of the supported kinds.
#[derive(Clone, Debug)]
pub enum State {
    Scalar(ComplexScalarField),
    Spinor(SpinorField),
    Bispinor(BispinorField),
}

impl State {
    pub fn equation(&self) -> &'static str {
        match self {
            State::Scalar(_) => "schrodinger",
            State::Spinor(_) => "pauli",
            State::Bispinor(_) => "dirac",
        }
    }

    pub fn density(&self) -> Vec<f64> {
        match self {
            State::Scalar(p) => p.density(),
            State::Spinor(p) => p.density(),
            State::Bispinor(p) => p.density(),
        }
    }

    pub fn write(&self, time: f64, path: &Path) -> Result<(), CliError> {
        let ctx = "writing snapshot";
        match self {
            State::Scalar(p) => write_snapshot(p, time, path).map_err(runtime(ctx)),
            State::Spinor(p) => write_snapshot(p, time, path).map_err(runtime(ctx)),
            State::Bispinor(p) => write_snapshot(p, time, path).map_err(runtime(ctx)),
        }
    }

    pub fn from_snapshot(snap: Snapshot) -> Result<State, CliError> {
        let ctx = "snapshot";
        match snap.components.len() {
            1 => Ok(State::Scalar(snap.into_scalar().map_err(config(ctx))?)),
            2 => Ok(State::Spinor(snap.into_spinor().map_err(config(ctx))?)),
            4 => Ok(State::Bispinor(snap.into_bispinor().map_err(config(ctx))?)),
            n => Err(CliError::Config(format!(
                "snapshot has {n} components; expected 1, 2 or 4"
            ))),
        }
    }
}

fn wavevector(grid: &Grid, mode: &[i64]) -> [f64; 3] {
    let l = grid.length();
    let mut k = [0.0; 3];
    for (a, m) in mode.iter().enumerate() {
        k[a] = 2.0 * PI * *m as f64 / l[a];
    }
    k
}

fn point(grid: &Grid, center: &Option<Vec<f64>>) -> [f64; MAX_DIM] {
    let mut c = grid.center();
    if let Some(v) = center {
        c[..v.len()].copy_from_slice(v);
    }
    c
}

fn offset(r: [f64; MAX_DIM], c: [f64; MAX_DIM], dim: usize) -> [f64; MAX_DIM] {
    let mut d = [0.0; MAX_DIM];
    for a in 0..dim {
        d[a] = r[a] - c[a];
    }
    d
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn gaussian(grid: &Grid, sigma: f64, center: &Option<Vec<f64>>, momentum: &Option<Vec<f64>>) -> ComplexScalarField {
    let dim = grid.dim();
    let c = point(grid, center);
    let mut k = [0.0; 3];
    if let Some(m) = momentum {
        k[..m.len()].copy_from_slice(m);
    }
    let norm = (2.0 * PI * sigma * sigma).powf(-(dim as f64) / 4.0);
    ComplexScalarField::from_fn(grid, |r| {
        let d = offset(r, c, dim);
        Complex64::from_polar(norm * (-dot(d, d) / (4.0 * sigma * sigma)).exp(), dot(k, d))
    })
}

/// Builds the initial state; a custom snapshot must match `grid`.
pub fn initial_state(spec: &InitialSpec, grid: &Grid, consts: &PhysicalConstants) -> Result<State, CliError> {
    let dim = grid.dim();
    Ok(match spec {
        InitialSpec::PlaneWave { mode, amplitude } => {
            let k = wavevector(grid, mode);
            State::Scalar(ComplexScalarField::from_fn(grid, |r| Complex64::from_polar(*amplitude, dot(k, r))))
        }
        InitialSpec::Gaussian { sigma, center, momentum } => State::Scalar(gaussian(grid, *sigma, center, momentum)),
        InitialSpec::HoGround { omega, center } => {
            let c = point(grid, center);
            let w = consts.m * omega / consts.hbar;
            let norm = (w / PI).powf(dim as f64 / 4.0);
            State::Scalar(ComplexScalarField::from_fn(grid, |r| {
                let d = offset(r, c, dim);
                Complex64::new(norm * (-0.5 * w * dot(d, d)).exp(), 0.0)
            }))
        }
        InitialSpec::SpinorUpX { sigma, center, momentum } => {
            let g = gaussian(grid, *sigma, center, momentum);
            let half = g.values().iter().map(|z| z / 2f64.sqrt()).collect::<Vec<_>>();
            State::Spinor(SpinorField::new(grid, [half.clone(), half]).map_err(runtime("spinor preset"))?)
        }
        InitialSpec::DiracPlaneWave { mode, spin_up } => {
            let k = wavevector(grid, mode);
            let u = positive_energy_spinor(k, consts, *spin_up);
            State::Bispinor(BispinorField::from_fn(grid, |r| {
                let e = Complex64::from_polar(1.0, dot(k, r));
                u.map(|s| s * e)
            }))
        }
        InitialSpec::Custom { path } => {
            let snap = read_snapshot(path).map_err(config("`initial.path`"))?;
            if &snap.grid != grid {
                return Err(CliError::Config(format!(
                    "`initial.path`: snapshot grid {:?} does not match the config grid {:?}",
                    &snap.grid.n()[..snap.grid.dim()],
                    &grid.n()[..dim]
                )));
            }
            State::from_snapshot(snap)?
        }
    })
}

pub fn potential(spec: &PotentialSpec, grid: &Grid, consts: &PhysicalConstants) -> Result<ScalarField, CliError> {
    let dim = grid.dim();
    Ok(match spec {
        PotentialSpec::None => ScalarField::zeros(grid),
        PotentialSpec::Harmonic { omega, center } => {
            let c = point(grid, center);
            let s = 0.5 * consts.m * omega * omega;
            ScalarField::from_fn(grid, |r| {
                let d = offset(r, c, dim);
                s * dot(d, d)
            })
        }
        PotentialSpec::Linear { slope } => {
            let mut s = [0.0; 3];
            s[..slope.len()].copy_from_slice(slope);
            ScalarField::from_periodic_and_slope(grid, vec![0.0; grid.len()], s).map_err(config("`gauge.u`"))?
        }
        PotentialSpec::Cosine { amplitude, mode } => {
            let k = wavevector(grid, mode);
            ScalarField::from_fn(grid, |r| amplitude * dot(k, r).cos())
        }
    })
}

pub fn vector_potential(spec: &VectorPotentialSpec, grid: &Grid) -> Result<VectorField, CliError> {
    Ok(match spec {
        VectorPotentialSpec::None => VectorField::zeros(grid),
        VectorPotentialSpec::Uniform { value } => VectorField::uniform(grid, *value),
        VectorPotentialSpec::Landau { b } => {
            let mut affine = [[0.0; 3]; 3];
            affine[1][0] = *b;
            let z = vec![0.0; grid.len()];
            VectorField::from_periodic_and_affine(grid, [z.clone(), z.clone(), z], affine).map_err(config("`gauge.a`"))?
        }
    })
}

/// External potentials `U` and `A` of the scenario with `A_Q = 0`.
pub fn gauge(scenario: &Scenario, grid: &Grid, consts: &PhysicalConstants) -> Result<GaugeConfiguration, CliError> {
    let u = potential(&scenario.gauge.u, grid, consts)?;
    let a = vector_potential(&scenario.gauge.a, grid)?;
    GaugeConfiguration::classical(a, u).map_err(config("`gauge`"))
}

/// Four-potential `(U / (q c), A)` seen by the Dirac equation.
pub fn four_potential(gauge: &GaugeConfiguration, consts: &PhysicalConstants) -> Result<FourPotential, CliError> {
    let grid = gauge.grid();
    let phi: Vec<f64> = gauge.u.values().iter().map(|u| u / consts.q).collect();
    let a = &gauge.a_classical;
    FourPotential::from_phi_and_a(grid, &phi, [a.component(0), a.component(1), a.component(2)], consts.c)
        .map_err(config("`gauge`"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use qvlab_core::make_grid;

    #[test]
    fn packets_have_unit_norm() {
        let g = make_grid(2, &[64, 64], &[16.0, 16.0]).unwrap();
        let consts = PhysicalConstants::natural();
        let dv = g.cell_volume();
        for spec in [
            InitialSpec::Gaussian { sigma: 1.2, center: None, momentum: Some(vec![0.5, -1.0]) },
            InitialSpec::HoGround { omega: 1.5, center: Some(vec![7.0, 9.0]) },
            InitialSpec::SpinorUpX { sigma: 1.0, center: None, momentum: None },
        ] {
            let s = initial_state(&spec, &g, &consts).unwrap();
            let norm: f64 = s.density().iter().sum::<f64>() * dv;
            assert!((norm - 1.0).abs() < 1e-10, "{spec:?} {norm}");
        }
        let s = initial_state(&InitialSpec::SpinorUpX { sigma: 1.0, center: None, momentum: None }, &g, &consts).unwrap();
        let State::Spinor(p) = s else { panic!() };
        assert!((p.spin_expectation()[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn plane_waves_are_periodic_and_uniform() {
        let g = make_grid(1, &[16], &[3.0]).unwrap();
        let consts = PhysicalConstants::natural();
        let s = initial_state(&InitialSpec::PlaneWave { mode: vec![2], amplitude: 0.5 }, &g, &consts).unwrap();
        assert!(s.density().iter().all(|f| (f - 0.25).abs() < 1e-14));
        let d = initial_state(&InitialSpec::DiracPlaneWave { mode: vec![-1], spin_up: false }, &g, &consts).unwrap();
        assert_eq!(d.equation(), "dirac");
        assert!(d.density().iter().all(|f| (f - 1.0).abs() < 1e-14));
    }

    #[test]
    fn potentials_match_their_formulas() {
        let g = make_grid(2, &[8, 8], &[4.0, 4.0]).unwrap();
        let consts = PhysicalConstants::physical(1.0, 2.0, 1.0, 1.0, 1.0).unwrap();
        let u = potential(&PotentialSpec::Harmonic { omega: 0.5, center: None }, &g, &consts).unwrap();
        let idx = g.index([0, 4, 0]);
        assert!((u.values()[idx] - 0.5 * 2.0 * 0.25 * 4.0).abs() < 1e-14);
        let lin = potential(&PotentialSpec::Linear { slope: vec![0.3, 0.0] }, &g, &consts).unwrap();
        assert_eq!(lin.slope(), [0.3, 0.0, 0.0]);
        let a = vector_potential(&VectorPotentialSpec::Landau { b: 0.7 }, &g).unwrap();
        let b = a.curl().unwrap();
        assert!(b.component(2).iter().all(|x| (x - 0.7).abs() < 1e-13));
    }
}
