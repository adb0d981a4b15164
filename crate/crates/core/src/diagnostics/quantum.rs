//! Quantum potential and the Hamilton-Jacobi residual.
//!
//! `Delta|Psi| / |Psi|` is evaluated from derivatives of `Psi` itself,
//! `Re(Psi* Lap Psi) / f + |grad phi|^2`, which stays smooth through
//! nodes of `Psi` and accurate in exponentially small tails where
//! differentiating `|Psi|` or `f` directly would lose digits.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{uniform_spacing, Accumulator, ResidualReport};
use crate::decomposition::{current_scalar, GaugeConfiguration, PhysicalConstants};
use crate::error::{Error, Result};
use crate::fields::{node_mask, ComplexScalarField, MultiComponent, NODE_EPSILON};
use crate::lattice::Grid;

/// `Q = (alpha/beta) Delta|Psi| / |Psi|` with its gradient and the node mask.
///
/// Masked points carry zero.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumPotential {
    pub values: Vec<f64>,
    pub gradient: [Vec<f64>; 3],
    pub mask: Vec<bool>,
}

impl QuantumPotential {
    pub fn zero(grid: &Grid) -> Self {
        let n = grid.len();
        QuantumPotential {
            values: vec![0.0; n],
            gradient: std::array::from_fn(|_| vec![0.0; n]),
            mask: vec![true; n],
        }
    }
}

struct Derivatives {
    d1: Vec<Vec<Complex64>>,
    /// `d2[a][b]` for `a <= b`, filled symmetrically.
    d2: Vec<Vec<Vec<Complex64>>>,
    lap: Vec<Complex64>,
    grad_lap: Vec<Vec<Complex64>>,
}

fn derivatives(grid: &Grid, psi: &[Complex64]) -> Derivatives {
    let spec = grid.forward(psi);
    let apply = |sym: &dyn Fn(usize) -> Complex64| -> Vec<Complex64> {
        let mut d: Vec<Complex64> = spec.iter().enumerate().map(|(i, v)| v * sym(i)).collect();
        grid.inverse_in_place(&mut d);
        d
    };
    let dim = grid.dim();
    let d1 = (0..dim).map(|a| apply(&|i| grid.derivative_symbol(a, i))).collect();
    let mut d2 = vec![vec![Vec::new(); dim]; dim];
    for a in 0..dim {
        for b in a..dim {
            let d = if a == b {
                apply(&|i| {
                    let k = grid.wavevector(i)[a];
                    Complex64::new(-k * k, 0.0)
                })
            } else {
                apply(&|i| grid.derivative_symbol(a, i) * grid.derivative_symbol(b, i))
            };
            d2[b][a] = d.clone();
            d2[a][b] = d;
        }
    }
    let lap = apply(&|i| Complex64::new(-grid.k_squared(i), 0.0));
    let grad_lap = (0..dim)
        .map(|a| apply(&|i| grid.derivative_symbol(a, i) * -grid.k_squared(i)))
        .collect();
    Derivatives { d1, d2, lap, grad_lap }
}

/// Quantum potential of a scalar wave function on its unmasked set.
pub fn quantum_potential(psi: &ComplexScalarField, consts: &PhysicalConstants) -> Result<QuantumPotential> {
    let grid = psi.grid();
    let f = psi.density();
    let mask = node_mask(&f, NODE_EPSILON)?;
    let p = psi.values();
    let d = derivatives(grid, p);
    let dim = grid.dim();
    let scale = consts.alpha / consts.beta;
    let n = grid.len();
    let mut values = vec![0.0; n];
    let mut gradient: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; n]);
    for idx in 0..n {
        if !mask[idx] {
            continue;
        }
        let z = p[idx];
        let fi = f[idx];
        // g_j = Psi* d_j Psi: Re g_j = d_j f / 2, Im g_j = f d_j phi.
        let g: Vec<Complex64> = (0..dim).map(|j| z.conj() * d.d1[j][idx]).collect();
        let pl = z.conj() * d.lap[idx];
        let phase_sq: f64 = g.iter().map(|gj| gj.im * gj.im).sum::<f64>() / (fi * fi);
        values[idx] = scale * (pl.re / fi + phase_sq);
        for i in 0..dim {
            let dpl = d.d1[i][idx].conj() * d.lap[idx] + z.conj() * d.grad_lap[i][idx];
            let dfi = 2.0 * g[i].re;
            let mut s = dpl.re / fi - pl.re * dfi / (fi * fi);
            for (j, gj) in g.iter().enumerate() {
                let dg = d.d1[i][idx].conj() * d.d1[j][idx] + z.conj() * d.d2[i][j][idx];
                s += 2.0 * gj.im * dg.im / (fi * fi);
            }
            s -= 2.0 * phase_sq * dfi / fi;
            gradient[i][idx] = scale * s;
        }
    }
    Ok(QuantumPotential { values, gradient, mask })
}

/// Phase increment `arg(b a*)` per point, which is branch-free while `|increment| < pi`.
fn increment(a: &[Complex64], b: &[Complex64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| (y * x.conj()).arg()).collect()
}

/// Centered `d phi / dt` at the middle of three consecutive snapshots.
///
/// Fails with [`Error::BranchJump`] where the two one-step increments differ
/// by more than `pi/2` on `mask`: the phase has wrapped within a step and
/// no branch is chosen on the caller's behalf.
pub fn phase_time_derivative(
    prev: &ComplexScalarField,
    mid: &ComplexScalarField,
    next: &ComplexScalarField,
    dt: f64,
    mask: &[bool],
) -> Result<Vec<f64>> {
    if prev.grid() != mid.grid() || next.grid() != mid.grid() {
        return Err(Error::GridMismatch);
    }
    mid.grid().check_len(mask.len())?;
    let lo = increment(prev.values(), mid.values());
    let hi = increment(mid.values(), next.values());
    let jumps: Vec<usize> = (0..mask.len())
        .filter(|&i| mask[i] && (hi[i] - lo[i]).abs() > 0.5 * PI)
        .collect();
    if let Some(&first) = jumps.first() {
        return Err(Error::BranchJump {
            count: jumps.len(),
            first,
        });
    }
    Ok(lo.iter().zip(&hi).map(|(a, b)| (a + b) / (2.0 * dt)).collect())
}

fn hj_samples(
    psi: &ComplexScalarField,
    gauge: &GaugeConfiguration,
    consts: &PhysicalConstants,
    dphi_dt: &[f64],
) -> Result<(Vec<f64>, Vec<bool>)> {
    let grid = psi.grid();
    if gauge.grid() != grid {
        return Err(Error::GridMismatch);
    }
    grid.check_len(dphi_dt.len())?;
    let q = quantum_potential(psi, consts)?;
    let f = psi.density();
    let j = current_scalar(psi, gauge, consts)?;
    let u = gauge.u.values();
    let (a, b) = (consts.alpha, consts.beta);
    let r = (0..grid.len())
        .map(|idx| {
            if !q.mask[idx] {
                return 0.0;
            }
            let v2: f64 = j.at(idx).iter().map(|x| (x / f[idx]).powi(2)).sum();
            -dphi_dt[idx] / b + v2 / (4.0 * a * b) - u[idx] - q.values[idx]
        })
        .collect();
    Ok((r, q.mask))
}

/// `r = -(1/beta) d phi/dt + |<v>|^2 / (4 alpha beta) - U - Q` for a supplied `d phi/dt`.
pub fn hamilton_jacobi_residual(
    psi: &ComplexScalarField,
    gauge: &GaugeConfiguration,
    consts: &PhysicalConstants,
    dphi_dt: &[f64],
) -> Result<ResidualReport> {
    let (r, mask) = hj_samples(psi, gauge, consts, dphi_dt)?;
    let mut acc = Accumulator::new("hamilton_jacobi", psi.grid(), None);
    acc.add(&r, Some(&mask));
    Ok(acc.finish())
}

/// Hamilton-Jacobi residual at every interior snapshot of a static-gauge run.
pub fn hamilton_jacobi_series(
    series: &[(f64, ComplexScalarField)],
    gauge: &GaugeConfiguration,
    consts: &PhysicalConstants,
) -> Result<ResidualReport> {
    let times: Vec<f64> = series.iter().map(|s| s.0).collect();
    let dt = uniform_spacing(&times, 3)?;
    let grid = series[0].1.grid();
    let mut acc = Accumulator::new("hamilton_jacobi", grid, Some(dt));
    for i in 1..series.len() - 1 {
        let psi = &series[i].1;
        let mut mask = node_mask(&psi.density(), NODE_EPSILON)?;
        for other in [&series[i - 1].1, &series[i + 1].1] {
            for (m, o) in mask.iter_mut().zip(node_mask(&other.density(), NODE_EPSILON)?) {
                *m &= o;
            }
        }
        let dphi = phase_time_derivative(&series[i - 1].1, psi, &series[i + 1].1, dt, &mask)?;
        let (r, qmask) = hj_samples(psi, gauge, consts, &dphi)?;
        for (m, q) in mask.iter_mut().zip(qmask) {
            *m &= q;
        }
        acc.add(&r, Some(&mask));
    }
    Ok(acc.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::ScalarField;
    use crate::lattice::make_grid;
    use proptest::prelude::*;

    fn ho_ground(g: &Grid, m: f64, omega: f64, hbar: f64, t: f64) -> ComplexScalarField {
        let c = g.center();
        ComplexScalarField::from_fn(g, |r| {
            let x = r[0] - c[0];
            Complex64::from_polar((-m * omega * x * x / (2.0 * hbar)).exp(), -0.5 * omega * t)
        })
    }

    #[test]
    fn constant_modulus_has_no_quantum_potential() {
        let g = make_grid(2, &[16, 8], &[4.0, 3.0]).unwrap();
        let k = [2.0 * PI / 4.0, 4.0 * PI / 3.0];
        let psi = ComplexScalarField::from_fn(&g, |r| Complex64::from_polar(0.7, k[0] * r[0] - k[1] * r[1]));
        let q = quantum_potential(&psi, &PhysicalConstants::natural()).unwrap();
        assert!(q.values.iter().all(|x| x.abs() < 1e-12));
        assert!(q.gradient.iter().flatten().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn harmonic_oscillator_ground_state() {
        let (hbar, m, omega) = (1.3, 0.7, 1.1);
        let consts = PhysicalConstants::physical(hbar, m, 1.0, 1.0, 1.0).unwrap();
        let g = make_grid(1, &[256], &[40.0]).unwrap();
        let psi = ho_ground(&g, m, omega, hbar, 0.0);
        let q = quantum_potential(&psi, &consts).unwrap();
        let c = g.center()[0];
        for idx in (0..g.len()).filter(|&i| q.mask[i]) {
            let x = g.coords(idx)[0] - c;
            let expect = -0.5 * m * omega * omega * x * x + 0.5 * hbar * omega;
            assert!((q.values[idx] - expect).abs() < 1e-8, "x={x} q={}", q.values[idx]);
            assert!((q.gradient[0][idx] + m * omega * omega * x).abs() < 1e-7, "x={x}");
        }
    }

    #[test]
    fn cosine_envelope_is_constant_between_nodes() {
        let consts = PhysicalConstants::physical(1.0, 2.0, 1.0, 1.0, 1.0).unwrap();
        let g = make_grid(1, &[64], &[2.0 * PI]).unwrap();
        let k = 3.0;
        let psi = ComplexScalarField::from_fn(&g, |r| Complex64::from_polar((k * r[0]).cos(), 0.0) * Complex64::new(0.0, 1.0));
        let q = quantum_potential(&psi, &consts).unwrap();
        let f = psi.density();
        for idx in (0..g.len()).filter(|&i| f[i] > 1e-4) {
            assert!((q.values[idx] - k * k / 4.0).abs() < 1e-9);
        }
    }

    #[test]
    fn gradient_matches_spectral_derivative_of_values() {
        let consts = PhysicalConstants::natural();
        let g = make_grid(2, &[64, 64], &[2.0 * PI, 2.0 * PI]).unwrap();
        let psi = ComplexScalarField::from_fn(&g, |r| {
            Complex64::new(4.0 + 0.5 * r[0].sin() * r[1].cos(), 0.3 * (2.0 * r[1]).sin())
        });
        let q = quantum_potential(&psi, &consts).unwrap();
        for axis in 0..2 {
            let d = g.derivative_real(&q.values, axis).unwrap();
            for idx in 0..g.len() {
                assert!((d[idx] - q.gradient[axis][idx]).abs() < 1e-9, "{} {}", d[idx], q.gradient[axis][idx]);
            }
        }
    }

    proptest! {
        #[test]
        fn invariant_under_constant_rescaling(re in -3.0..3.0f64, im in -3.0..3.0f64) {
            prop_assume!(re.hypot(im) > 1e-2);
            let consts = PhysicalConstants::natural();
            let g = make_grid(1, &[32], &[2.0 * PI]).unwrap();
            let psi = ComplexScalarField::from_fn(&g, |r| Complex64::new(1.5 + r[0].cos(), r[0].sin()));
            let a = quantum_potential(&psi, &consts).unwrap();
            let b = quantum_potential(&psi.scaled(Complex64::new(re, im)), &consts).unwrap();
            for (x, y) in a.values.iter().zip(&b.values) {
                prop_assert!((x - y).abs() < 1e-10);
            }
        }
    }

    fn harmonic_gauge(g: &Grid, m: f64, omega: f64) -> GaugeConfiguration {
        let c = g.center()[0];
        let u = ScalarField::from_fn(g, |r| 0.5 * m * omega * omega * (r[0] - c).powi(2));
        GaugeConfiguration::classical(crate::fields::VectorField::zeros(g), u).unwrap()
    }

    #[test]
    fn stationary_hamilton_jacobi() {
        let (hbar, m, omega) = (1.0, 1.0, 1.0);
        let consts = PhysicalConstants::physical(hbar, m, 1.0, 1.0, 1.0).unwrap();
        let g = make_grid(1, &[256], &[40.0]).unwrap();
        let gauge = harmonic_gauge(&g, m, omega);
        let series: Vec<(f64, ComplexScalarField)> = (0..5)
            .map(|n| {
                let t = n as f64 * 0.01;
                (t, ho_ground(&g, m, omega, hbar, t))
            })
            .collect();
        let r = hamilton_jacobi_series(&series, &gauge, &consts).unwrap();
        assert!(r.linf < 1e-8, "{r:?}");
        assert!(r.mask_fraction > 0.0);
    }

    #[test]
    fn plane_wave_dispersion_and_negative_control() {
        let consts = PhysicalConstants::natural();
        let g = make_grid(1, &[32], &[2.0 * PI]).unwrap();
        let gauge = GaugeConfiguration::zero(&g);
        let k = 3.0;
        let wave = |omega: f64, t: f64| ComplexScalarField::from_fn(&g, |r| Complex64::from_polar(1.0, k * r[0] - omega * t));
        let omega = k * k / 2.0;
        let dphi = vec![-omega; g.len()];
        let r = hamilton_jacobi_residual(&wave(omega, 0.3), &gauge, &consts, &dphi).unwrap();
        assert!(r.linf < 1e-12);
        let dphi = vec![-1.1 * omega; g.len()];
        let r = hamilton_jacobi_residual(&wave(omega, 0.3), &gauge, &consts, &dphi).unwrap();
        assert!((r.linf - 0.1 * omega).abs() < 1e-12);
    }

    #[test]
    fn phase_wrap_is_reported() {
        let g = make_grid(1, &[8], &[1.0]).unwrap();
        let at = |phi: f64| ComplexScalarField::from_fn(&g, |_| Complex64::from_polar(1.0, phi));
        let mask = vec![true; 8];
        let d = phase_time_derivative(&at(0.0), &at(0.5), &at(1.0), 0.1, &mask).unwrap();
        assert!((d[0] - 5.0).abs() < 1e-12);
        let e = phase_time_derivative(&at(0.0), &at(3.0), &at(6.2), 0.1, &mask);
        assert!(matches!(e, Err(Error::BranchJump { count: 8, first: 0 })));
    }
}
