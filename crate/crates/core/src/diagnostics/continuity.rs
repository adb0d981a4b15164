//! Probability conservation: `df/dt + div J = 0` and `d_mu J^mu = 0`.

use super::{centered, uniform_spacing, Accumulator, ResidualReport};
use crate::decomposition::{current_scalar, current_spinor, FourCurrent, GaugeConfiguration, PhysicalConstants};
use crate::error::{Error, Result};
use crate::fields::{ComplexScalarField, MultiComponent, SpinorField, VectorField};

/// Density and current at one time.
#[derive(Clone, Debug)]
pub struct FlowSnapshot {
    pub time: f64,
    pub f: Vec<f64>,
    pub j: VectorField,
}

impl FlowSnapshot {
    pub fn new(time: f64, f: Vec<f64>, j: VectorField) -> Result<Self> {
        j.grid().check_len(f.len())?;
        Ok(FlowSnapshot { time, f, j })
    }

    pub fn scalar(
        time: f64,
        psi: &ComplexScalarField,
        gauge: &GaugeConfiguration,
        consts: &PhysicalConstants,
    ) -> Result<Self> {
        Ok(FlowSnapshot {
            time,
            f: psi.density(),
            j: current_scalar(psi, gauge, consts)?,
        })
    }

    pub fn spinor(
        time: f64,
        psi: &SpinorField,
        gauge: &GaugeConfiguration,
        consts: &PhysicalConstants,
    ) -> Result<Self> {
        Ok(FlowSnapshot {
            time,
            f: psi.density(),
            j: current_spinor(psi, gauge, consts)?,
        })
    }
}

/// `r = df/dt + div J` at every interior snapshot.
pub fn continuity_residual(series: &[FlowSnapshot]) -> Result<ResidualReport> {
    let times: Vec<f64> = series.iter().map(|s| s.time).collect();
    let dt = uniform_spacing(&times, 3)?;
    let grid = series[0].j.grid();
    if series.iter().any(|s| s.j.grid() != grid) {
        return Err(Error::GridMismatch);
    }
    let mut acc = Accumulator::new("continuity", grid, Some(dt));
    for i in 1..series.len() - 1 {
        let mut r = centered(&series[i - 1].f, &series[i + 1].f, dt);
        for (x, d) in r.iter_mut().zip(series[i].j.divergence()?) {
            *x += d;
        }
        acc.add(&r, None);
    }
    Ok(acc.finish())
}

/// `r = (1/c) dJ^0/dt + d_k J^k` at every interior snapshot.
pub fn four_current_divergence(series: &[(f64, FourCurrent)], c: f64) -> Result<ResidualReport> {
    let times: Vec<f64> = series.iter().map(|s| s.0).collect();
    let dt = uniform_spacing(&times, 3)?;
    let grid = &series[0].1.grid;
    if series.iter().any(|s| &s.1.grid != grid) {
        return Err(Error::GridMismatch);
    }
    let mut acc = Accumulator::new("four_current_divergence", grid, Some(dt));
    for i in 1..series.len() - 1 {
        let mut r = centered(&series[i - 1].1.components[0], &series[i + 1].1.components[0], dt * c);
        let cur = &series[i].1.components;
        let div = grid.divergence_real([&cur[1], &cur[2], &cur[3]])?;
        for (x, d) in r.iter_mut().zip(div) {
            *x += d;
        }
        acc.add(&r, None);
    }
    Ok(acc.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolvers::{run_schrodinger, EvolutionParams};
    use crate::fields::ScalarField;
    use crate::lattice::make_grid;
    use num_complex::Complex64;

    fn gaussian_run(dt: f64, steps: usize) -> Vec<FlowSnapshot> {
        let g = make_grid(1, &[128], &[30.0]).unwrap();
        let consts = PhysicalConstants::natural();
        let gauge = GaugeConfiguration::zero(&g);
        let psi = ComplexScalarField::from_fn(&g, |r| {
            let x = r[0] - 15.0;
            Complex64::from_polar((-x * x / 2.0).exp(), 0.8 * x)
        });
        let series = run_schrodinger(&psi, &gauge, &consts, &EvolutionParams::new(dt, steps, 1)).unwrap();
        series
            .iter()
            .map(|(t, p)| FlowSnapshot::scalar(*t, p, &gauge, &consts).unwrap())
            .collect()
    }

    #[test]
    fn stationary_state_has_zero_residual() {
        let g = make_grid(2, &[8, 8], &[1.0, 2.0]).unwrap();
        let f = ScalarField::from_fn(&g, |r| 1.0 + r[0].sin()).values().to_vec();
        let s: Vec<FlowSnapshot> = (0..4)
            .map(|n| FlowSnapshot::new(n as f64 * 0.1, f.clone(), VectorField::zeros(&g)).unwrap())
            .collect();
        let r = continuity_residual(&s).unwrap();
        assert_eq!(r.linf, 0.0);
        assert_eq!(r.n_points, 2 * 64);
    }

    #[test]
    fn free_packet_conserves_and_corruption_shows() {
        let clean = gaussian_run(1e-3, 20);
        let r = continuity_residual(&clean).unwrap();
        assert!(r.l2 < 1e-5, "{r:?}");
        let bad: Vec<FlowSnapshot> = clean
            .iter()
            .map(|s| FlowSnapshot::new(s.time, s.f.clone(), s.j.scaled(2.0)).unwrap())
            .collect();
        let rb = continuity_residual(&bad).unwrap();
        assert!(rb.l2 > 10.0 * r.l2);
    }

    #[test]
    fn residual_is_second_order_in_dt() {
        let coarse = continuity_residual(&gaussian_run(4e-2, 10)).unwrap();
        let fine = continuity_residual(&gaussian_run(2e-2, 20)).unwrap();
        let ratio = coarse.l2 / fine.l2;
        assert!(ratio > 3.5 && ratio < 4.5, "ratio {ratio}");
    }

    #[test]
    fn rejects_bad_series() {
        let s = gaussian_run(1e-3, 1);
        assert!(matches!(continuity_residual(&s), Err(Error::InsufficientSnapshots { .. })));
        let mut s = gaussian_run(1e-3, 3);
        s[2].time += 1e-4;
        assert!(matches!(continuity_residual(&s), Err(Error::UnequalSpacing { .. })));
    }

    #[test]
    fn static_four_current_gives_spatial_divergence() {
        let g = make_grid(1, &[16], &[6.0]).unwrap();
        let jx = ScalarField::from_fn(&g, |r| (r[0] * std::f64::consts::PI / 3.0).sin()).values().to_vec();
        let cur = FourCurrent {
            grid: g.clone(),
            components: [vec![1.0; 16], jx.clone(), vec![0.0; 16], vec![0.0; 16]],
        };
        let s: Vec<(f64, FourCurrent)> = (0..3).map(|n| (n as f64, cur.clone())).collect();
        let r = four_current_divergence(&s, 3.0).unwrap();
        let div = g.derivative_real(&jx, 0).unwrap();
        let expect = div.iter().map(|x| x.abs()).fold(0.0, f64::max);
        assert!((r.linf - expect).abs() < 1e-13);
    }
}
