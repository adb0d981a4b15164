//! Split-step Fourier integrator for the Ψ-equation
//! `i hbar dPsi/dt = (1/2m)(p - qA)^2 Psi + U Psi`.
//!
//! The Hamiltonian is split into a pointwise potential part
//! `U + q^2 |A|^2 / 2m`, the cross term `-(q/2m)(A.p + p.A)`, and the
//! kinetic part `p^2/2m`, which is exact in transform space. A uniform
//! vector potential is folded into the kinetic phase instead, which makes
//! the step exact up to the potential splitting.

use num_complex::Complex64;

use super::{run_series, EvolutionParams, Series, Splitting};
use crate::decomposition::{GaugeConfiguration, PhysicalConstants};
use crate::error::{Error, Result};
use crate::fields::{ComplexScalarField, VectorField};
use crate::lattice::Grid;

/// Largest generator norm per Taylor substep of the cross term.
const CROSS_SUBSTEP_NORM: f64 = 0.5;
const TAYLOR_TOL: f64 = 1e-17;

/// Cross-term data for one axis `j`.
#[derive(Clone)]
struct AxisCross {
    axis: usize,
    /// Full `A_j` at grid points.
    a: Vec<f64>,
    /// `A_j` minus its affine dependence on `x_j`; periodic along axis `j`.
    a_periodic_along: Vec<f64>,
    /// `J_jj (x_j - c_j)`.
    a_ramp: Vec<f64>,
    /// `J_jj`.
    slope: f64,
    /// Bound on `|A_j| k_max`, used to pick Taylor substeps.
    scale: f64,
}

/// Precomputed operators for repeated steps with a fixed gauge and `dt`.
#[derive(Clone)]
pub struct SchrodingerStepper {
    grid: Grid,
    dt: f64,
    splitting: Splitting,
    consts: PhysicalConstants,
    /// `-beta (U - gamma^2 |A|^2 / (4 alpha beta))`; multiply by the substep for the phase.
    potential_rate: Vec<f64>,
    /// Kinetic phase rate per mode, `alpha (k - gamma A / 2 alpha)^2`.
    kinetic_rate: Vec<f64>,
    cross: Vec<AxisCross>,
    kinetic: bool,
}

impl SchrodingerStepper {
    pub fn new(
        gauge: &GaugeConfiguration,
        consts: &PhysicalConstants,
        dt: f64,
        splitting: Splitting,
    ) -> Result<Self> {
        if !dt.is_finite() || dt == 0.0 {
            return Err(Error::InvalidParameter(format!("dt must be finite and nonzero, got {dt}")));
        }
        let grid = gauge.grid().clone();
        let a = &gauge.a_psi;
        let uniform = uniform_value(a);
        let (alpha, beta, gamma) = (consts.alpha, consts.beta, consts.gamma);

        let u = gauge.u.values();
        let umax = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if (dt * umax * beta).abs() > 0.5 {
            log::warn!(
                "dt * max|U| / hbar = {:.3} exceeds 0.5; potential phase is poorly resolved",
                (dt * umax * beta).abs()
            );
        }

        let shift = uniform.map_or([0.0; 3], |a0| a0.map(|x| gamma * x / (2.0 * alpha)));
        let kinetic_rate = (0..grid.len())
            .map(|idx| {
                let k = grid.wavevector(idx);
                let s: f64 = (0..3)
                    .map(|j| {
                        let kj = if j < grid.dim() { k[j] } else { 0.0 };
                        (kj - shift[j]).powi(2)
                    })
                    .sum();
                alpha * s
            })
            .collect();

        let (potential_rate, cross) = if uniform.is_some() {
            (u.iter().map(|x| -beta * x).collect(), Vec::new())
        } else {
            let a2 = a.norm_squared();
            let w = gamma * gamma / (4.0 * alpha * beta);
            let rate = u.iter().zip(&a2).map(|(ui, ai)| -beta * (ui - w * ai)).collect();
            (rate, build_cross(&grid, a)?)
        };

        Ok(SchrodingerStepper {
            grid,
            dt,
            splitting,
            consts: *consts,
            potential_rate,
            kinetic_rate,
            cross,
            kinetic: true,
        })
    }

    /// Drops the kinetic and cross terms, leaving only the potential phase.
    pub fn without_kinetic(mut self) -> Self {
        self.kinetic = false;
        self
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Same operators with the sign of `dt` flipped.
    pub fn reversed(&self) -> Self {
        let mut out = self.clone();
        out.dt = -self.dt;
        out
    }

    fn potential(&self, psi: &mut [Complex64], tau: f64) {
        for (z, r) in psi.iter_mut().zip(&self.potential_rate) {
            if *r != 0.0 {
                *z *= Complex64::from_polar(1.0, r * tau);
            }
        }
    }

    fn kinetic_step(&self, psi: &mut [Complex64], tau: f64) {
        self.grid
            .apply_multiplier(psi, |idx| Complex64::from_polar(1.0, self.kinetic_rate[idx] * tau));
    }

    /// `G_j psi = -(gamma/2)(A_j d_j psi + d_j(A_j psi))`.
    fn cross_generator(&self, c: &AxisCross, psi: &[Complex64]) -> Vec<Complex64> {
        let g = self.consts.gamma;
        let d = self.grid.derivative(psi, c.axis).expect("shape checked");
        let prod: Vec<Complex64> = psi.iter().zip(&c.a_periodic_along).map(|(z, a)| z * a).collect();
        let dprod = self.grid.derivative(&prod, c.axis).expect("shape checked");
        (0..psi.len())
            .map(|i| {
                let ramp_term = if c.slope != 0.0 {
                    d[i] * c.a_ramp[i] + psi[i] * c.slope
                } else {
                    Complex64::default()
                };
                (d[i] * c.a[i] + dprod[i] + ramp_term) * (-0.5 * g)
            })
            .collect()
    }

    /// `exp(tau G_j)` by a converged Taylor series, substepped for convergence.
    fn cross_step(&self, c: &AxisCross, psi: &mut Vec<Complex64>, tau: f64) {
        let bound = (self.consts.gamma * tau).abs() * c.scale;
        let substeps = ((bound / CROSS_SUBSTEP_NORM).ceil() as usize).max(1);
        let h = tau / substeps as f64;
        for _ in 0..substeps {
            let norm0 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let mut term = psi.clone();
            let mut sum = psi.clone();
            for n in 1..80 {
                let next = self.cross_generator(c, &term);
                let factor = h / n as f64;
                term = next.into_iter().map(|z| z * factor).collect();
                let tn = term.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                for (s, t) in sum.iter_mut().zip(&term) {
                    *s += t;
                }
                if tn <= TAYLOR_TOL * norm0.max(f64::MIN_POSITIVE) {
                    break;
                }
            }
            *psi = sum;
        }
    }

    /// Advances `psi` by one step in place.
    pub fn step_values(&self, psi: &mut Vec<Complex64>) {
        let dt = self.dt;
        match self.splitting {
            Splitting::Strang => {
                self.potential(psi, 0.5 * dt);
                if self.kinetic {
                    for c in &self.cross {
                        self.cross_step(c, psi, 0.5 * dt);
                    }
                    self.kinetic_step(psi, dt);
                    for c in self.cross.iter().rev() {
                        self.cross_step(c, psi, 0.5 * dt);
                    }
                }
                self.potential(psi, 0.5 * dt);
            }
            Splitting::Lie => {
                self.potential(psi, dt);
                if self.kinetic {
                    for c in &self.cross {
                        self.cross_step(c, psi, dt);
                    }
                    self.kinetic_step(psi, dt);
                }
            }
        }
    }

    pub fn step(&self, psi: &ComplexScalarField) -> Result<ComplexScalarField> {
        if psi.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        let mut v = psi.values().to_vec();
        self.step_values(&mut v);
        ComplexScalarField::new(&self.grid, v)
    }
}

/// The common value of a spatially constant vector field.
fn uniform_value(a: &VectorField) -> Option<[f64; 3]> {
    if a.has_affine() {
        return None;
    }
    let mut out = [0.0; 3];
    for (i, o) in out.iter_mut().enumerate() {
        let c = a.component(i);
        let first = c[0];
        if c.iter().any(|&x| x != first) {
            return None;
        }
        *o = first;
    }
    Some(out)
}

fn build_cross(grid: &Grid, a: &VectorField) -> Result<Vec<AxisCross>> {
    let aff = a.affine();
    let center = grid.center();
    let mut out = Vec::new();
    for axis in 0..grid.dim() {
        let comp = a.component(axis);
        if comp.iter().all(|&x| x == 0.0) {
            continue;
        }
        let slope = aff[axis][axis];
        let a_ramp: Vec<f64> = (0..grid.len())
            .map(|idx| slope * (grid.coords(idx)[axis] - center[axis]))
            .collect();
        let a_periodic_along = comp.iter().zip(&a_ramp).map(|(x, r)| x - r).collect();
        let kmax = grid.wavenumbers(axis).iter().fold(0.0f64, |m, k| m.max(k.abs()));
        let amax = comp.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        out.push(AxisCross {
            axis,
            a: comp.to_vec(),
            a_periodic_along,
            a_ramp,
            slope,
            scale: 2.0 * amax * kmax + slope.abs(),
        });
    }
    Ok(out)
}

/// One step of the scalar wave equation.
pub fn schrodinger_step(
    psi: &ComplexScalarField,
    gauge: &GaugeConfiguration,
    consts: &PhysicalConstants,
    params: &EvolutionParams,
) -> Result<ComplexScalarField> {
    SchrodingerStepper::new(gauge, consts, params.dt, params.splitting)?.step(psi)
}

/// Runs `params.steps` steps and returns snapshots at the stride.
pub fn run_schrodinger(
    psi0: &ComplexScalarField,
    gauge: &GaugeConfiguration,
    consts: &PhysicalConstants,
    params: &EvolutionParams,
) -> Result<Series<ComplexScalarField>> {
    let stepper = SchrodingerStepper::new(gauge, consts, params.dt, params.splitting)?;
    if psi0.grid() != stepper.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = stepper.grid().clone();
    let series = run_series(psi0.values().to_vec(), params, |v| {
        stepper.step_values(v);
        Ok(())
    })?;
    series
        .into_iter()
        .map(|(t, v)| Ok((t, ComplexScalarField::new(&grid, v)?)))
        .collect()
}
