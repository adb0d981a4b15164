//! Leapfrog integrator for `(1/c^2) d^2 A^mu / dt^2 - Lap A^mu = mu0 J^mu`
//! with a spectral Laplacian.

use num_complex::Complex64;

use crate::decomposition::{FourCurrent, PhysicalConstants};
use crate::error::{Error, Result};
use crate::lattice::Grid;

/// Default bound on `c dt / min spacing`.
pub const STABILITY_FACTOR: f64 = 0.5;

/// Two consecutive time levels of the four-potential `A^mu = (phi/c, A)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DalembertState {
    pub time: f64,
    pub previous: [Vec<f64>; 4],
    pub current: [Vec<f64>; 4],
}

#[derive(Clone, Debug)]
pub struct DalembertSolver {
    grid: Grid,
    c: f64,
    mu0: f64,
    dt: f64,
}

impl DalembertSolver {
    /// Rejects steps with `c dt > 0.5 h_min`, and steps for which the
    /// spectral leapfrog would be unstable (`c dt k_max >= 2`).
    pub fn new(grid: &Grid, consts: &PhysicalConstants, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        let cdt = consts.c * dt;
        let limit = STABILITY_FACTOR * grid.min_spacing();
        if cdt > limit {
            return Err(Error::Cfl { cdt, limit });
        }
        let kmax = (0..grid.len()).map(|i| grid.k_squared(i)).fold(0.0, f64::max).sqrt();
        if cdt * kmax >= 2.0 {
            return Err(Error::Cfl { cdt, limit: 2.0 / kmax });
        }
        Ok(DalembertSolver {
            grid: grid.clone(),
            c: consts.c,
            mu0: consts.mu0(),
            dt,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn check(&self, fields: &[Vec<f64>; 4]) -> Result<()> {
        for f in fields {
            self.grid.check_len(f.len())?;
        }
        Ok(())
    }

    fn check_source(&self, j: Option<&FourCurrent>) -> Result<()> {
        if let Some(j) = j {
            if j.grid != self.grid {
                return Err(Error::GridMismatch);
            }
        }
        Ok(())
    }

    /// `c^2 (Lap A + mu0 J)`.
    fn acceleration(&self, a: &[f64], j: Option<&[f64]>) -> Vec<f64> {
        let mut lap: Vec<Complex64> = a.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.grid
            .apply_multiplier(&mut lap, |idx| Complex64::new(-self.grid.k_squared(idx), 0.0));
        let c2 = self.c * self.c;
        lap.iter()
            .enumerate()
            .map(|(i, l)| c2 * (l.re + j.map_or(0.0, |j| self.mu0 * j[i])))
            .collect()
    }

    /// Builds the first two levels from `A(0)` and `dA/dt(0)` with a Taylor start.
    pub fn start(
        &self,
        a0: [Vec<f64>; 4],
        adot0: [Vec<f64>; 4],
        j0: Option<&FourCurrent>,
    ) -> Result<DalembertState> {
        self.check(&a0)?;
        self.check(&adot0)?;
        self.check_source(j0)?;
        let dt = self.dt;
        let current: [Vec<f64>; 4] = std::array::from_fn(|mu| {
            let acc = self.acceleration(&a0[mu], j0.map(|j| j.components[mu].as_slice()));
            a0[mu]
                .iter()
                .zip(&adot0[mu])
                .zip(&acc)
                .map(|((a, v), ac)| a + dt * v + 0.5 * dt * dt * ac)
                .collect()
        });
        Ok(DalembertState {
            time: dt,
            previous: a0,
            current,
        })
    }

    /// One leapfrog step with source `J^mu` at the current time.
    pub fn step(&self, state: &DalembertState, j: Option<&FourCurrent>) -> Result<DalembertState> {
        self.check(&state.current)?;
        self.check_source(j)?;
        let dt2 = self.dt * self.dt;
        let next: [Vec<f64>; 4] = std::array::from_fn(|mu| {
            let acc = self.acceleration(&state.current[mu], j.map(|j| j.components[mu].as_slice()));
            state.current[mu]
                .iter()
                .zip(&state.previous[mu])
                .zip(&acc)
                .map(|((a, p), ac)| 2.0 * a - p + dt2 * ac)
                .collect()
        });
        Ok(DalembertState {
            time: state.time + self.dt,
            previous: state.current.clone(),
            current: next,
        })
    }

    /// Discrete wave energy `sum (|dA/dt|^2 / c^2 + |grad A|^2) dV / 2` at the half step.
    pub fn energy(&self, state: &DalembertState) -> Result<f64> {
        let mut e = 0.0;
        for mu in 0..4 {
            let v: Vec<f64> = state.current[mu]
                .iter()
                .zip(&state.previous[mu])
                .map(|(a, p)| (a - p) / self.dt)
                .collect();
            let mid: Vec<f64> = state.current[mu]
                .iter()
                .zip(&state.previous[mu])
                .map(|(a, p)| 0.5 * (a + p))
                .collect();
            let grads = self.grid.gradient_real(&mid)?;
            e += v.iter().map(|x| x * x).sum::<f64>() / (self.c * self.c);
            e += grads.iter().flatten().map(|x| x * x).sum::<f64>();
        }
        Ok(0.5 * e * self.grid.cell_volume())
    }
}

/// One leapfrog step of the four-potential.
pub fn dalembert_step(
    state: &DalembertState,
    j: Option<&FourCurrent>,
    grid: &Grid,
    consts: &PhysicalConstants,
    dt: f64,
) -> Result<DalembertState> {
    DalembertSolver::new(grid, consts, dt)?.step(state, j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::make_grid;
    use std::f64::consts::PI;

    fn zeros(g: &Grid) -> [Vec<f64>; 4] {
        std::array::from_fn(|_| vec![0.0; g.len()])
    }

    #[test]
    fn standing_wave_over_one_period() {
        let consts = PhysicalConstants::natural();
        let g = make_grid(1, &[32], &[2.0 * PI]).unwrap();
        let k = 1.0;
        let period = 2.0 * PI / (consts.c * k);
        let steps = 6400;
        let dt = period / steps as f64;
        let solver = DalembertSolver::new(&g, &consts, dt).unwrap();
        let mut a0 = zeros(&g);
        a0[2] = (0..g.len()).map(|i| (k * g.coords(i)[0]).sin()).collect();
        let mut s = solver.start(a0, zeros(&g), None).unwrap();
        let mut worst = 0.0f64;
        for n in 2..=steps {
            s = solver.step(&s, None).unwrap();
            let t = n as f64 * dt;
            for i in 0..g.len() {
                let exact = (k * g.coords(i)[0]).sin() * (consts.c * k * t).cos();
                worst = worst.max((s.current[2][i] - exact).abs());
            }
        }
        assert!(worst <= 1e-6, "worst {worst}");
    }

    #[test]
    fn uniform_source_grows_quadratically() {
        let consts = PhysicalConstants::physical(1.0, 1.0, 1.0, 2.0, 0.5).unwrap();
        let g = make_grid(2, &[8, 8], &[1.0, 1.0]).unwrap();
        let dt = 0.01;
        let j0 = 0.7;
        let mut comps: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; g.len()]);
        comps[1] = vec![j0; g.len()];
        let j = FourCurrent { grid: g.clone(), components: comps };
        let solver = DalembertSolver::new(&g, &consts, dt).unwrap();
        let mut s = solver.start(zeros(&g), zeros(&g), Some(&j)).unwrap();
        for _ in 1..50 {
            s = solver.step(&s, Some(&j)).unwrap();
        }
        let t = s.time;
        let expect = consts.mu0() * j0 * consts.c * consts.c * t * t / 2.0;
        assert!(s.current[1].iter().all(|&x| (x - expect).abs() < 1e-12 * expect.max(1.0)));
    }

    #[test]
    fn zero_data_stays_zero_and_cfl_is_enforced() {
        let consts = PhysicalConstants::natural();
        let g = make_grid(1, &[16], &[1.0]).unwrap();
        let solver = DalembertSolver::new(&g, &consts, 0.01).unwrap();
        let mut s = solver.start(zeros(&g), zeros(&g), None).unwrap();
        for _ in 0..10 {
            s = solver.step(&s, None).unwrap();
        }
        assert!(s.current.iter().flatten().all(|&x| x == 0.0));
        assert!(matches!(DalembertSolver::new(&g, &consts, 0.1), Err(Error::Cfl { .. })));
    }

    #[test]
    fn energy_is_bounded_without_source() {
        let consts = PhysicalConstants::natural();
        let g = make_grid(2, &[16, 16], &[2.0 * PI, 2.0 * PI]).unwrap();
        let solver = DalembertSolver::new(&g, &consts, 0.05).unwrap();
        let mut a0 = zeros(&g);
        a0[0] = (0..g.len())
            .map(|i| {
                let r = g.coords(i);
                (r[0]).sin() * (2.0 * r[1]).cos() + 0.3 * (3.0 * r[1]).sin()
            })
            .collect();
        let mut s = solver.start(a0, zeros(&g), None).unwrap();
        let e0 = solver.energy(&s).unwrap();
        for _ in 0..2000 {
            s = solver.step(&s, None).unwrap();
            let e = solver.energy(&s).unwrap();
            assert!((e - e0).abs() < 0.05 * e0);
        }
    }
}
