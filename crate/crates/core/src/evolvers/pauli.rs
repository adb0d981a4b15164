//! Pauli equation: the scalar split step applied to each spinor component,
//! wrapped in half-step spin rotations `exp(-i (gamma tau / 2) sigma . B)`
//! with `B = curl A`.

use num_complex::Complex64;

use super::{run_series, EvolutionParams, SchrodingerStepper, Series, Splitting};
use crate::decomposition::{GaugeConfiguration, PhysicalConstants};
use crate::error::{Error, Result};
use crate::fields::SpinorField;
use crate::lattice::Grid;

#[derive(Clone)]
pub struct PauliStepper {
    scalar: SchrodingerStepper,
    /// `B` at each point, or `None` when it vanishes everywhere.
    b: Option<[Vec<f64>; 3]>,
    gamma: f64,
    dt: f64,
    splitting: Splitting,
}

impl PauliStepper {
    pub fn new(
        gauge: &GaugeConfiguration,
        consts: &PhysicalConstants,
        dt: f64,
        splitting: Splitting,
    ) -> Result<Self> {
        let scalar = SchrodingerStepper::new(gauge, consts, dt, splitting)?;
        let curl = gauge.a_psi.curl()?;
        let b = if curl.max_abs() == 0.0 {
            None
        } else {
            Some(curl.components().clone())
        };
        Ok(PauliStepper {
            scalar,
            b,
            gamma: consts.gamma,
            dt,
            splitting,
        })
    }

    /// Freezes the spatial dynamics, leaving only the spin rotation.
    pub fn without_kinetic(mut self) -> Self {
        self.scalar = self.scalar.without_kinetic();
        self
    }

    pub fn grid(&self) -> &Grid {
        self.scalar.grid()
    }

    /// `psi <- exp(-i (gamma tau / 2) sigma . B) psi` pointwise.
    fn rotate(&self, comps: &mut [Vec<Complex64>; 2], tau: f64) {
        let Some(b) = &self.b else { return };
        let [up, down] = comps;
        for idx in 0..up.len() {
            let bv = [b[0][idx], b[1][idx], b[2][idx]];
            let bn = (bv[0] * bv[0] + bv[1] * bv[1] + bv[2] * bv[2]).sqrt();
            if bn == 0.0 {
                continue;
            }
            let theta = 0.5 * self.gamma * tau * bn;
            let (s, c) = theta.sin_cos();
            let n = bv.map(|x| x / bn);
            // cos(theta) I - i sin(theta) sigma . n
            let m00 = Complex64::new(c, -s * n[2]);
            let m01 = Complex64::new(0.0, -s) * Complex64::new(n[0], -n[1]);
            let m10 = Complex64::new(0.0, -s) * Complex64::new(n[0], n[1]);
            let m11 = Complex64::new(c, s * n[2]);
            let (a, d) = (up[idx], down[idx]);
            up[idx] = m00 * a + m01 * d;
            down[idx] = m10 * a + m11 * d;
        }
    }

    pub fn step_values(&self, comps: &mut [Vec<Complex64>; 2]) {
        match self.splitting {
            Splitting::Strang => {
                self.rotate(comps, 0.5 * self.dt);
                for c in comps.iter_mut() {
                    self.scalar.step_values(c);
                }
                self.rotate(comps, 0.5 * self.dt);
            }
            Splitting::Lie => {
                self.rotate(comps, self.dt);
                for c in comps.iter_mut() {
                    self.scalar.step_values(c);
                }
            }
        }
    }

    pub fn step(&self, psi: &SpinorField) -> Result<SpinorField> {
        if psi.grid() != self.grid() {
            return Err(Error::GridMismatch);
        }
        let mut comps = [psi.component(0).to_vec(), psi.component(1).to_vec()];
        self.step_values(&mut comps);
        SpinorField::new(self.grid(), comps)
    }
}

pub fn pauli_step(
    psi: &SpinorField,
    gauge: &GaugeConfiguration,
    consts: &PhysicalConstants,
    params: &EvolutionParams,
) -> Result<SpinorField> {
    PauliStepper::new(gauge, consts, params.dt, params.splitting)?.step(psi)
}

pub fn run_pauli(
    psi0: &SpinorField,
    gauge: &GaugeConfiguration,
    consts: &PhysicalConstants,
    params: &EvolutionParams,
) -> Result<Series<SpinorField>> {
    let stepper = PauliStepper::new(gauge, consts, params.dt, params.splitting)?;
    run_pauli_with(&stepper, psi0, params)
}

/// Runs a prepared stepper; `params.dt` must match the stepper's.
pub fn run_pauli_with(
    stepper: &PauliStepper,
    psi0: &SpinorField,
    params: &EvolutionParams,
) -> Result<Series<SpinorField>> {
    if psi0.grid() != stepper.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = stepper.grid().clone();
    let init = [psi0.component(0).to_vec(), psi0.component(1).to_vec()];
    let series = run_series(init, params, |c| {
        stepper.step_values(c);
        Ok(())
    })?;
    series
        .into_iter()
        .map(|(t, c)| Ok((t, SpinorField::new(&grid, c)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{ComplexScalarField, ScalarField, VectorField};
    use crate::lattice::make_grid;

    fn landau(g: &Grid, b: f64) -> GaugeConfiguration {
        let mut aff = [[0.0; 3]; 3];
        aff[1][0] = b;
        let z = vec![0.0; g.len()];
        let a = VectorField::from_periodic_and_affine(g, [z.clone(), z.clone(), z], aff).unwrap();
        GaugeConfiguration::classical(a, ScalarField::zeros(g)).unwrap()
    }

    #[test]
    fn zero_b_reduces_to_scalar_steps() {
        let consts = PhysicalConstants::natural();
        let g = make_grid(1, &[64], &[20.0]).unwrap();
        let gauge = GaugeConfiguration::classical(
            VectorField::zeros(&g),
            ScalarField::from_fn(&g, |r| 0.1 * (r[0] * 0.3).cos()),
        )
        .unwrap();
        let a = ComplexScalarField::from_fn(&g, |r| Complex64::from_polar((-(r[0] - 10.0).powi(2)).exp(), r[0]));
        let b = ComplexScalarField::from_fn(&g, |r| Complex64::new((-(r[0] - 8.0).powi(2)).exp(), 0.0));
        let sp = SpinorField::new(&g, [a.values().to_vec(), b.values().to_vec()]).unwrap();
        let params = EvolutionParams::new(1e-2, 1, 1);
        let out = pauli_step(&sp, &gauge, &consts, &params).unwrap();
        let sa = super::super::schrodinger_step(&a, &gauge, &consts, &params).unwrap();
        let sb = super::super::schrodinger_step(&b, &gauge, &consts, &params).unwrap();
        assert_eq!(out.component(0), sa.values());
        assert_eq!(out.component(1), sb.values());
    }

    #[test]
    fn frozen_spin_precesses_at_larmor_frequency() {
        let consts = PhysicalConstants::physical(1.0, 1.3, 0.7, 1.0, 1.0).unwrap();
        let g = make_grid(2, &[8, 8], &[4.0, 4.0]).unwrap();
        let bz = 0.9;
        let gauge = landau(&g, bz);
        let s = 1.0 / (g.volume() * 2.0).sqrt();
        let sp = SpinorField::from_fn(&g, |_| [Complex64::new(s, 0.0), Complex64::new(s, 0.0)]);
        let dt = 0.01;
        let stepper = PauliStepper::new(&gauge, &consts, dt, Splitting::Strang).unwrap().without_kinetic();
        let mut comps = [sp.component(0).to_vec(), sp.component(1).to_vec()];
        for n in 1..=200 {
            stepper.step_values(&mut comps);
            let f = SpinorField::new(&g, comps.clone()).unwrap();
            let t = n as f64 * dt;
            let sx = f.spin_expectation()[0];
            assert!((sx - (consts.q * bz * t / consts.m).cos()).abs() < 1e-12, "t={t} sx={sx}");
        }
    }

    #[test]
    fn eigenspinor_only_gains_phase() {
        let consts = PhysicalConstants::natural();
        let g = make_grid(2, &[8, 8], &[4.0, 4.0]).unwrap();
        let gauge = landau(&g, 1.5);
        let sp = SpinorField::from_fn(&g, |_| [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
        let stepper = PauliStepper::new(&gauge, &consts, 0.05, Splitting::Strang).unwrap().without_kinetic();
        let out = stepper.step(&sp).unwrap();
        assert!(out.component(0).iter().all(|z| (z.norm() - 1.0).abs() < 1e-14));
        assert!(out.component(1).iter().all(|z| z.norm() < 1e-14));
    }
}
