//! Quantities derived from a snapshot series that several commands share.

use qvlab_core::decomposition::{
    current_bispinor, helmholtz_split, recompose, velocity, GaugeConfiguration, PhysicalConstants,
};
use qvlab_core::diagnostics::{quantum_potential, FlowSnapshot, PotentialSnapshot, ResidualReport};
use qvlab_core::fields::{ComplexScalarField, MultiComponent, VectorField, NODE_EPSILON};

use super::core_error;
use crate::config::ChiMode;
use crate::error::CliError;
use crate::presets::State;

/// The scalar wave functions of a series, or a config error naming `what`.
pub fn scalar_series<'a>(
    series: &'a [(f64, State)],
    what: &str,
) -> Result<Vec<(f64, &'a ComplexScalarField)>, CliError> {
    series
        .iter()
        .map(|(t, s)| match s {
            State::Scalar(p) => Ok((*t, p)),
            other => Err(CliError::Config(format!(
                "{what} needs a schrodinger series, the snapshots hold {}",
                other.equation()
            ))),
        })
        .collect()
}

/// Density and probability current at every snapshot.
pub fn flows(
    series: &[(f64, State)],
    gauge: &GaugeConfiguration,
    consts: &PhysicalConstants,
) -> Result<Vec<FlowSnapshot>, CliError> {
    let ctx = "probability current";
    series
        .iter()
        .map(|(t, s)| match s {
            State::Scalar(p) => FlowSnapshot::scalar(*t, p, gauge, consts).map_err(core_error(ctx)),
            State::Spinor(p) => FlowSnapshot::spinor(*t, p, gauge, consts).map_err(core_error(ctx)),
            State::Bispinor(p) => {
                let j = current_bispinor(p, consts.c);
                let f: Vec<f64> = j.components[0].iter().map(|x| x / consts.c).collect();
                let spatial = j.spatial().map_err(core_error(ctx))?;
                FlowSnapshot::new(*t, f, spatial).map_err(core_error(ctx))
            }
        })
        .collect()
}

/// Potentials with the quantum vortex part `A_Q` recovered from the flow.
pub struct VortexSeries {
    pub snapshots: Vec<PotentialSnapshot>,
    /// `max |recompose(split(v)) - v|` per snapshot.
    pub helmholtz_error: Vec<f64>,
    /// `max |A_Q|` per snapshot.
    pub a_quantum_max: Vec<f64>,
}

fn rate(values: &[Vec<f64>], i: usize, dt: f64) -> Vec<f64> {
    let n = values.len();
    let (a, b, w) = if i == 0 {
        (1, 0, 1.0)
    } else if i == n - 1 {
        (n - 1, n - 2, 1.0)
    } else {
        (i + 1, i - 1, 2.0)
    };
    values[a].iter().zip(&values[b]).map(|(x, y)| (x - y) / (w * dt)).collect()
}

/// Splits `v - gamma A` into `-alpha grad Phi + gamma A_Q` at every
/// snapshot, with `div A_Q = chi - div A` and `chi` from `mode`.
///
/// Masked points of `v` are set to zero before the split. In Lorentz mode
/// `chi = -(kappa / c^2) dV/dt` uses centered differences of `V = U + Q`
/// (one-sided at the ends) and its mean is projected out.
pub fn vortex_series(
    series: &[(f64, &ComplexScalarField)],
    gauge: &GaugeConfiguration,
    consts: &PhysicalConstants,
    mode: ChiMode,
) -> Result<VortexSeries, CliError> {
    let grid = gauge.grid();
    let ctx = "vortex potential";
    let quantum: Vec<_> = series
        .iter()
        .map(|(_, p)| quantum_potential(p, consts).map_err(core_error(ctx)))
        .collect::<Result<_, _>>()?;
    let chis: Vec<Vec<f64>> = match mode {
        ChiMode::Coulomb => vec![vec![0.0; grid.len()]; series.len()],
        ChiMode::Lorentz => {
            if series.len() < 2 {
                return Err(CliError::Config("lorentz chi mode needs at least two snapshots".into()));
            }
            let dt = series[1].0 - series[0].0;
            let v: Vec<Vec<f64>> = quantum
                .iter()
                .map(|q| gauge.u.values().iter().zip(&q.values).map(|(u, q)| u + q).collect())
                .collect();
            let s = -consts.kappa() / (consts.c * consts.c);
            (0..series.len())
                .map(|i| rate(&v, i, dt).into_iter().map(|x| s * x).collect())
                .collect()
        }
    };
    let div_a = gauge.a_classical.divergence().map_err(core_error(ctx))?;
    let mut out = VortexSeries {
        snapshots: Vec::with_capacity(series.len()),
        helmholtz_error: Vec::with_capacity(series.len()),
        a_quantum_max: Vec::with_capacity(series.len()),
    };
    for (i, ((t, psi), q)) in series.iter().zip(quantum).enumerate() {
        let f = psi.density();
        let j = qvlab_core::decomposition::current_scalar(psi, gauge, consts).map_err(core_error(ctx))?;
        let (v, mask) = velocity(&j, &f, NODE_EPSILON).map_err(core_error(ctx))?;
        let kinetic: [Vec<f64>; 3] = std::array::from_fn(|k| {
            let a = gauge.a_classical.component(k);
            v.component(k)
                .iter()
                .zip(a)
                .zip(&mask)
                .map(|((vk, ak), &ok)| if ok { vk - consts.gamma * ak } else { 0.0 })
                .collect()
        });
        let kinetic = VectorField::new(grid, kinetic).map_err(core_error(ctx))?;
        let target: Vec<f64> = chis[i].iter().zip(&div_a).map(|(c, d)| c - d).collect();
        let (phi, a_q) = helmholtz_split(&kinetic, &target, consts, true).map_err(core_error(ctx))?;
        let back = recompose(&phi, &a_q, consts).map_err(core_error(ctx))?;
        out.helmholtz_error
            .push(back.sub(&kinetic).map_err(core_error(ctx))?.max_abs());
        out.a_quantum_max.push(a_q.max_abs());
        let g = GaugeConfiguration::split(gauge.a_classical.clone(), a_q, gauge.u.clone())
            .and_then(|g| g.with_chi(chis[i].clone()))
            .map_err(core_error(ctx))?;
        out.snapshots.push(PotentialSnapshot {
            time: *t,
            gauge: g,
            quantum: q,
        });
    }
    Ok(out)
}

/// Pools per-snapshot reports of one residual into a single report.
pub fn pool(name: &str, reports: &[ResidualReport], dt: Option<f64>) -> ResidualReport {
    let frames = reports.len().max(1) as f64;
    ResidualReport {
        name: name.to_string(),
        l2: (reports.iter().map(|r| r.l2 * r.l2).sum::<f64>() / frames).sqrt(),
        linf: reports.iter().map(|r| r.linf).fold(0.0, f64::max),
        mask_fraction: reports.iter().map(|r| r.mask_fraction).sum::<f64>() / frames,
        n_points: reports.iter().map(|r| r.n_points).sum(),
        dt,
        per_point: reports.last().and_then(|r| r.per_point.clone()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use qvlab_core::fields::ScalarField;
    use qvlab_core::make_grid;
    use std::f64::consts::PI;

    #[test]
    fn plane_wave_winding_is_a_uniform_quantum_potential() {
        // The phase winds around the torus, so its flow has no periodic potential.
        let g = make_grid(2, &[16, 16], &[2.0 * PI, 2.0 * PI]).unwrap();
        let consts = PhysicalConstants::natural();
        let gauge = GaugeConfiguration::classical(VectorField::uniform(&g, [0.3, 0.0, 0.0]), ScalarField::zeros(&g))
            .unwrap();
        let psi = ComplexScalarField::from_fn(&g, |r| Complex64::from_polar(1.0, 2.0 * r[0] - r[1]));
        let s: Vec<(f64, &ComplexScalarField)> = vec![(0.0, &psi), (0.1, &psi)];
        let v = vortex_series(&s, &gauge, &consts, ChiMode::Coulomb).unwrap();
        // v - gamma A = k = (2, -1) and gamma = -1.
        let expect = [-2.0, 1.0, 0.0];
        for snap in &v.snapshots {
            for k in 0..3 {
                assert!(snap.gauge.a_quantum.component(k).iter().all(|a| (a - expect[k]).abs() < 1e-12));
            }
        }
        assert!(v.helmholtz_error.iter().all(|e| *e < 1e-12));
    }

    #[test]
    fn vortex_phase_puts_circulation_into_a_quantum() {
        // A phase winding around the box centre cannot be a pure gradient.
        let g = make_grid(2, &[32, 32], &[10.0, 10.0]).unwrap();
        let consts = PhysicalConstants::natural();
        let gauge = GaugeConfiguration::zero(&g);
        let psi = ComplexScalarField::from_fn(&g, |r| {
            let (x, y) = (r[0] - 5.0, r[1] - 5.0);
            let rho2 = x * x + y * y;
            Complex64::new(x, y) * (-rho2 / 4.0).exp()
        });
        let s = vec![(0.0, &psi), (0.1, &psi)];
        let v = vortex_series(&s, &gauge, &consts, ChiMode::Coulomb).unwrap();
        assert!(v.a_quantum_max[0] > 0.1);
    }

    #[test]
    fn pooled_norms() {
        let r = |l2: f64, linf: f64| ResidualReport {
            name: "x".into(),
            l2,
            linf,
            mask_fraction: 0.0,
            n_points: 4,
            dt: None,
            per_point: None,
        };
        let p = pool("y", &[r(3.0, 1.0), r(4.0, 2.0)], Some(0.1));
        assert!((p.l2 - (12.5f64).sqrt()).abs() < 1e-15);
        assert_eq!(p.linf, 2.0);
        assert_eq!(p.n_points, 8);
    }
}
