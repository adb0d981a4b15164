//! Residual evaluators for the continuity, Hamilton-Jacobi, gauge and
//! field equations on stored snapshot series.
//!
//! Time derivatives are centered second-order differences over equally
//! spaced snapshots, so every residual carries an `O(dt^2)` floor.

mod continuity;
mod em;
mod quantum;

pub use continuity::{continuity_residual, four_current_divergence, FlowSnapshot};
pub use em::{
    em_fields, em_fields_static, four_potential_fields, gauge_residual_samples, gauge_residuals,
    maxwell_residuals, self_consistency_residual, EMFields, FieldFamily, MaxwellSnapshot,
    PotentialSnapshot,
};
pub use quantum::{
    hamilton_jacobi_residual, hamilton_jacobi_series, phase_time_derivative, quantum_potential,
    QuantumPotential,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Grid;

/// Norms of one residual over the unmasked grid and the stored times.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub name: String,
    /// Root mean over times of the spatial `L2` norm `sqrt(sum r^2 dV)`.
    pub l2: f64,
    pub linf: f64,
    /// Fraction of grid points excluded by the node mask, averaged over times.
    pub mask_fraction: f64,
    /// Number of residual samples that entered the norms.
    pub n_points: usize,
    /// Snapshot spacing used for time derivatives, if any.
    pub dt: Option<f64>,
    /// Residual at the last evaluated time (masked points zero).
    #[serde(skip)]
    pub per_point: Option<Vec<f64>>,
}

pub(crate) struct Accumulator {
    name: String,
    cell_volume: f64,
    dt: Option<f64>,
    sum_sq: f64,
    frames: usize,
    linf: f64,
    masked: usize,
    total: usize,
    n_points: usize,
    last: Vec<f64>,
}

impl Accumulator {
    pub(crate) fn new(name: &str, grid: &Grid, dt: Option<f64>) -> Self {
        Accumulator {
            name: name.to_string(),
            cell_volume: grid.cell_volume(),
            dt,
            sum_sq: 0.0,
            frames: 0,
            linf: 0.0,
            masked: 0,
            total: 0,
            n_points: 0,
            last: Vec::new(),
        }
    }

    pub(crate) fn add(&mut self, r: &[f64], mask: Option<&[bool]>) {
        let mut sq = 0.0;
        let mut last = Vec::with_capacity(r.len());
        for (idx, &x) in r.iter().enumerate() {
            let ok = mask.is_none_or(|m| m[idx]);
            if ok {
                sq += x * x;
                self.linf = self.linf.max(x.abs());
                self.n_points += 1;
                last.push(x);
            } else {
                self.masked += 1;
                last.push(0.0);
            }
        }
        self.sum_sq += sq * self.cell_volume;
        self.frames += 1;
        self.total += r.len();
        self.last = last;
    }

    pub(crate) fn finish(self) -> ResidualReport {
        let frames = self.frames.max(1) as f64;
        ResidualReport {
            name: self.name,
            l2: (self.sum_sq / frames).sqrt(),
            linf: self.linf,
            mask_fraction: if self.total == 0 {
                0.0
            } else {
                self.masked as f64 / self.total as f64
            },
            n_points: self.n_points,
            dt: self.dt,
            per_point: Some(self.last),
        }
    }
}

/// Relative tolerance on snapshot spacing.
const SPACING_TOL: f64 = 1e-9;

/// Common spacing of `times`, which must hold at least `required` entries.
pub(crate) fn uniform_spacing(times: &[f64], required: usize) -> Result<f64> {
    if times.len() < required {
        return Err(Error::InsufficientSnapshots {
            required,
            actual: times.len(),
        });
    }
    let dt = times[1] - times[0];
    if !(dt > 0.0) {
        return Err(Error::UnequalSpacing { index: 1 });
    }
    for (i, w) in times.windows(2).enumerate() {
        if ((w[1] - w[0]) - dt).abs() > SPACING_TOL * dt {
            return Err(Error::UnequalSpacing { index: i + 1 });
        }
    }
    Ok(dt)
}

/// Centered difference `(next - prev) / (2 dt)`.
pub(crate) fn centered(prev: &[f64], next: &[f64], dt: f64) -> Vec<f64> {
    prev.iter().zip(next).map(|(a, b)| (b - a) / (2.0 * dt)).collect()
}

/// Second-order time derivative of sample `i` of a series, one-sided at the ends.
pub(crate) fn time_derivative(series: &[&[f64]], i: usize, dt: f64) -> Vec<f64> {
    let n = series.len();
    if i == 0 {
        let (a, b, c) = (series[0], series[1], series[2]);
        (0..a.len())
            .map(|k| (-3.0 * a[k] + 4.0 * b[k] - c[k]) / (2.0 * dt))
            .collect()
    } else if i == n - 1 {
        let (a, b, c) = (series[n - 3], series[n - 2], series[n - 1]);
        (0..a.len())
            .map(|k| (a[k] - 4.0 * b[k] + 3.0 * c[k]) / (2.0 * dt))
            .collect()
    } else {
        centered(series[i - 1], series[i + 1], dt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::make_grid;

    #[test]
    fn spacing_checks() {
        assert!(matches!(
            uniform_spacing(&[0.0, 1.0], 3),
            Err(Error::InsufficientSnapshots { required: 3, actual: 2 })
        ));
        assert!(matches!(
            uniform_spacing(&[0.0, 1.0, 2.5], 3),
            Err(Error::UnequalSpacing { index: 2 })
        ));
        assert!(uniform_spacing(&[1.0, 1.0, 1.0], 3).is_err());
        assert_eq!(uniform_spacing(&[0.0, 0.1, 0.2, 0.30000000000000004], 3).unwrap(), 0.1);
    }

    #[test]
    fn derivatives_exact_on_quadratics() {
        let dt = 0.25;
        let vals: Vec<Vec<f64>> = (0..5).map(|n| vec![(n as f64 * dt).powi(2)]).collect();
        let refs: Vec<&[f64]> = vals.iter().map(|v| v.as_slice()).collect();
        for i in 0..5 {
            let d = time_derivative(&refs, i, dt)[0];
            assert!((d - 2.0 * i as f64 * dt).abs() < 1e-13);
        }
    }

    #[test]
    fn accumulator_norms() {
        let g = make_grid(1, &[4], &[2.0]).unwrap();
        let mut acc = Accumulator::new("x", &g, Some(0.5));
        acc.add(&[1.0, -2.0, 0.0, 9.0], Some(&[true, true, true, false]));
        acc.add(&[1.0, 1.0, 1.0, 1.0], None);
        let r = acc.finish();
        assert_eq!(r.linf, 2.0);
        assert!((r.l2 - ((5.0 * 0.5 + 4.0 * 0.5) / 2.0f64).sqrt()).abs() < 1e-15);
        assert_eq!(r.mask_fraction, 1.0 / 8.0);
        assert_eq!(r.n_points, 7);
        let json = serde_json::to_value(&r).unwrap();
        let keys: Vec<&String> = json.as_object().unwrap().keys().collect();
        assert_eq!(keys.len(), 6);
    }
}
