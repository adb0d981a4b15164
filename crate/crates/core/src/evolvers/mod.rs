//! Time integrators: split-step Fourier for the Schrödinger, Pauli and
//! Dirac equations, leapfrog for the d'Alembert equation, and the Taylor
//! evolution matrix of generalized phase space.

mod dalembert;
mod dirac;
mod gps;
mod pauli;
mod schrodinger;

pub use dalembert::{dalembert_step, DalembertSolver, DalembertState};
pub use dirac::{
    dirac_energy, dirac_step, free_hamiltonian, interaction_propagator, positive_energy_spinor,
    run_dirac, DiracStepper, FourPotential,
};
pub use gps::{gps_apply, gps_matrix, TaylorEvolutionMatrix};
pub use pauli::{pauli_step, run_pauli, run_pauli_with, PauliStepper};
pub use schrodinger::{run_schrodinger, schrodinger_step, SchrodingerStepper};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Operator splitting order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Splitting {
    /// First order: potential, cross term, kinetic.
    Lie,
    /// Second order, symmetric.
    #[default]
    Strang,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolutionParams {
    pub dt: f64,
    pub steps: usize,
    pub snapshot_stride: usize,
    pub splitting: Splitting,
}

impl EvolutionParams {
    pub fn new(dt: f64, steps: usize, snapshot_stride: usize) -> Self {
        EvolutionParams {
            dt,
            steps,
            snapshot_stride,
            splitting: Splitting::Strang,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::InvalidParameter("snapshot_stride must be at least 1".into()));
        }
        Ok(())
    }

    /// Step indices at which snapshots are kept: 0, stride, 2 stride, ..., and the last step.
    pub fn snapshot_steps(&self) -> Vec<usize> {
        let mut out: Vec<usize> = (0..=self.steps).step_by(self.snapshot_stride.max(1)).collect();
        if out.last() != Some(&self.steps) {
            out.push(self.steps);
        }
        out
    }
}

/// A field sampled at increasing times.
pub type Series<T> = Vec<(f64, T)>;

/// Folds `step` over `params.steps`, keeping snapshots at the stride.
pub(crate) fn run_series<T: Clone>(
    initial: T,
    params: &EvolutionParams,
    mut step: impl FnMut(&mut T) -> Result<()>,
) -> Result<Series<T>> {
    params.validate()?;
    let keep = params.snapshot_steps();
    let mut out = Vec::with_capacity(keep.len());
    let mut state = initial;
    let mut next = 0;
    for n in 0..=params.steps {
        if next < keep.len() && keep[next] == n {
            out.push((n as f64 * params.dt, state.clone()));
            next += 1;
        }
        if n < params.steps {
            step(&mut state)?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_counting() {
        let p = EvolutionParams::new(1e-3, 1000, 100);
        assert_eq!(p.snapshot_steps().len(), 11);
        let p = EvolutionParams::new(1e-3, 10, 3);
        assert_eq!(p.snapshot_steps(), vec![0, 3, 6, 9, 10]);
        assert!(EvolutionParams::new(0.0, 1, 1).validate().is_err());
        assert!(EvolutionParams::new(1.0, 1, 0).validate().is_err());
    }

    #[test]
    fn series_times() {
        let p = EvolutionParams::new(0.5, 4, 2);
        let s = run_series(0u32, &p, |x| {
            *x += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(s, vec![(0.0, 0), (1.0, 2), (2.0, 4)]);
    }
}
