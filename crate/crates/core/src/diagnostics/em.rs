//! Fields built from the vortex potential and `V = U + Q`, the gauge
//! conditions, the self-consistency condition and the field equations.

use super::{centered, time_derivative, uniform_spacing, Accumulator, QuantumPotential, ResidualReport};
use crate::decomposition::{GaugeConfiguration, PhysicalConstants};
use crate::error::{Error, Result};
use crate::fields::{ComplexScalarField, VectorField};
use crate::lattice::Grid;

/// Potentials at one time: the gauge configuration and the quantum potential.
#[derive(Clone, Debug)]
pub struct PotentialSnapshot {
    pub time: f64,
    pub gauge: GaugeConfiguration,
    pub quantum: QuantumPotential,
}

impl PotentialSnapshot {
    /// Classical limit: `Q = 0`.
    pub fn classical(time: f64, gauge: GaugeConfiguration) -> Self {
        let quantum = QuantumPotential::zero(gauge.grid());
        PotentialSnapshot { time, gauge, quantum }
    }

    pub fn from_psi(
        time: f64,
        gauge: GaugeConfiguration,
        psi: &ComplexScalarField,
        consts: &PhysicalConstants,
    ) -> Result<Self> {
        if psi.grid() != gauge.grid() {
            return Err(Error::GridMismatch);
        }
        let quantum = super::quantum_potential(psi, consts)?;
        Ok(PotentialSnapshot { time, gauge, quantum })
    }

    pub fn grid(&self) -> &Grid {
        self.gauge.grid()
    }

    /// `V = U + Q`.
    pub fn v(&self) -> Vec<f64> {
        self.gauge
            .u
            .values()
            .iter()
            .zip(&self.quantum.values)
            .map(|(u, q)| u + q)
            .collect()
    }
}

/// Which split of the fields to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldFamily {
    Total,
    Classical,
    Quantum,
}

/// `E_psi = -dA_psi/dt - kappa grad V`, `B_psi = curl A_psi`, with
/// `kappa = 2 alpha beta / gamma`, and their classical and quantum parts.
#[derive(Clone, Debug)]
pub struct EMFields {
    pub e_psi: VectorField,
    pub b_psi: VectorField,
    pub e_classical: VectorField,
    pub e_quantum: VectorField,
    pub b_classical: VectorField,
    pub b_quantum: VectorField,
    /// Node mask of the quantum potential; quantum fields are zero where it is false.
    pub mask: Vec<bool>,
}

impl EMFields {
    pub fn family(&self, family: FieldFamily) -> (&VectorField, &VectorField) {
        match family {
            FieldFamily::Total => (&self.e_psi, &self.b_psi),
            FieldFamily::Classical => (&self.e_classical, &self.b_classical),
            FieldFamily::Quantum => (&self.e_quantum, &self.b_quantum),
        }
    }

    /// Largest violation of `E_psi = E + E_Q` and `B_psi = B + B_Q`.
    pub fn split_error(&self) -> Result<f64> {
        let e = self.e_psi.sub(&self.e_classical)?.sub(&self.e_quantum)?.max_abs();
        let b = self.b_psi.sub(&self.b_classical)?.sub(&self.b_quantum)?.max_abs();
        Ok(e.max(b))
    }
}

fn quantum_gradient(grid: &Grid, q: &QuantumPotential) -> Result<VectorField> {
    VectorField::new(grid, q.gradient.clone())
}

fn assemble(
    snap: &PotentialSnapshot,
    da: [&VectorField; 2],
    consts: &PhysicalConstants,
) -> Result<EMFields> {
    let kappa = consts.kappa();
    let g = &snap.gauge;
    let grad_u = g.u.gradient()?;
    let grad_q = quantum_gradient(snap.grid(), &snap.quantum)?;
    let e_classical = da[0].combine(&grad_u, -1.0, -kappa)?;
    let e_quantum = da[1].combine(&grad_q, -1.0, -kappa)?;
    let e_psi = e_classical.add(&e_quantum)?;
    let b_classical = g.a_classical.curl()?;
    let b_quantum = g.a_quantum.curl()?;
    let b_psi = g.a_psi.curl()?;
    Ok(EMFields {
        e_psi,
        b_psi,
        e_classical,
        e_quantum,
        b_classical,
        b_quantum,
        mask: snap.quantum.mask.clone(),
    })
}

/// Fields of a snapshot whose vector potentials do not depend on time.
pub fn em_fields_static(snap: &PotentialSnapshot, consts: &PhysicalConstants) -> Result<EMFields> {
    let zero = VectorField::zeros(snap.grid());
    assemble(snap, [&zero, &zero], consts)
}

fn check_series(series: &[PotentialSnapshot]) -> Result<f64> {
    let times: Vec<f64> = series.iter().map(|s| s.time).collect();
    let dt = uniform_spacing(&times, 3)?;
    let grid = series[0].grid();
    if series.iter().any(|s| s.grid() != grid) {
        return Err(Error::GridMismatch);
    }
    Ok(dt)
}

/// `dA/dt` at snapshot `i` (one-sided at the ends), affine parts included.
fn potential_rate(series: &[VectorField], i: usize, dt: f64) -> Result<VectorField> {
    let grid = series[0].grid();
    let comps: [Vec<f64>; 3] = std::array::from_fn(|c| {
        let s: Vec<&[f64]> = series.iter().map(|a| a.component(c)).collect();
        time_derivative(&s, i, dt)
    });
    let mut affine = [[0.0; 3]; 3];
    for (r, row) in affine.iter_mut().enumerate() {
        for (c, slot) in row.iter_mut().enumerate() {
            let s: Vec<[f64; 1]> = series.iter().map(|a| [a.affine()[r][c]]).collect();
            let refs: Vec<&[f64]> = s.iter().map(|x| x.as_slice()).collect();
            *slot = time_derivative(&refs, i, dt)[0];
        }
    }
    let center = grid.center();
    let periodic: [Vec<f64>; 3] = std::array::from_fn(|c| {
        comps[c]
            .iter()
            .enumerate()
            .map(|(idx, v)| {
                let r = grid.coords(idx);
                v - (0..3).map(|j| affine[c][j] * (r[j] - center[j])).sum::<f64>()
            })
            .collect()
    });
    VectorField::from_periodic_and_affine(grid, periodic, affine)
}

/// Fields at every snapshot of a series (at least three, equally spaced).
pub fn em_fields(series: &[PotentialSnapshot], consts: &PhysicalConstants) -> Result<Vec<(f64, EMFields)>> {
    let dt = check_series(series)?;
    let ac: Vec<VectorField> = series.iter().map(|s| s.gauge.a_classical.clone()).collect();
    let aq: Vec<VectorField> = series.iter().map(|s| s.gauge.a_quantum.clone()).collect();
    (0..series.len())
        .map(|i| {
            let dc = potential_rate(&ac, i, dt)?;
            let dq = potential_rate(&aq, i, dt)?;
            Ok((series[i].time, assemble(&series[i], [&dc, &dq], consts)?))
        })
        .collect()
}

/// Pointwise `[r_psi, r_L, r_Q]` at each interior snapshot:
/// `r_psi = div A_psi + (kappa/c^2) dV/dt`, `r_L = div A + (kappa/c^2) dU/dt`,
/// `r_Q = div A_Q + (kappa/c^2) dQ/dt`.
pub fn gauge_residual_samples(
    series: &[PotentialSnapshot],
    consts: &PhysicalConstants,
) -> Result<Vec<[Vec<f64>; 3]>> {
    let dt = check_series(series)?;
    let s = consts.kappa() / (consts.c * consts.c);
    let with_rate = |div: Vec<f64>, rate: Vec<f64>| -> Vec<f64> {
        div.iter().zip(rate).map(|(d, r)| d + s * r).collect()
    };
    (1..series.len() - 1)
        .map(|i| {
            let (p, n, cur) = (&series[i - 1], &series[i + 1], &series[i].gauge);
            let r_psi = with_rate(cur.a_psi.divergence()?, centered(&p.v(), &n.v(), dt));
            let r_l = with_rate(
                cur.a_classical.divergence()?,
                centered(p.gauge.u.values(), n.gauge.u.values(), dt),
            );
            let r_q = with_rate(
                cur.a_quantum.divergence()?,
                centered(&p.quantum.values, &n.quantum.values, dt),
            );
            Ok([r_psi, r_l, r_q])
        })
        .collect()
}

/// Reports for the vortex-potential, classical and quantum Lorentz gauges.
pub fn gauge_residuals(series: &[PotentialSnapshot], consts: &PhysicalConstants) -> Result<[ResidualReport; 3]> {
    let samples = gauge_residual_samples(series, consts)?;
    let dt = series[1].time - series[0].time;
    let grid = series[0].grid();
    let mut acc = ["lorentz_psi", "lorentz_classical", "lorentz_quantum"].map(|n| Accumulator::new(n, grid, Some(dt)));
    for (k, frame) in samples.iter().enumerate() {
        let i = k + 1;
        let mask: Vec<bool> = (0..grid.len())
            .map(|idx| (i - 1..=i + 1).all(|t| series[t].quantum.mask[idx]))
            .collect();
        acc[0].add(&frame[0], Some(&mask));
        acc[1].add(&frame[1], None);
        acc[2].add(&frame[2], Some(&mask));
    }
    Ok(acc.map(Accumulator::finish))
}

/// `r = eps0 div E_psi - q f`; measured, never enforced.
pub fn self_consistency_residual(
    e_psi: &VectorField,
    f: &[f64],
    consts: &PhysicalConstants,
) -> Result<ResidualReport> {
    let grid = e_psi.grid();
    grid.check_len(f.len())?;
    let r: Vec<f64> = e_psi
        .divergence()?
        .iter()
        .zip(f)
        .map(|(d, fi)| consts.eps0 * d - consts.q * fi)
        .collect();
    let mut acc = Accumulator::new("self_consistency", grid, None);
    acc.add(&r, None);
    Ok(acc.finish())
}

/// Fields and sources at one time for the field-equation residuals.
#[derive(Clone, Debug)]
pub struct MaxwellSnapshot {
    pub time: f64,
    pub e: VectorField,
    pub b: VectorField,
    pub rho: Vec<f64>,
    pub j: VectorField,
}

fn magnitude(v: &[Vec<f64>; 3]) -> Vec<f64> {
    (0..v[0].len())
        .map(|i| (v[0][i] * v[0][i] + v[1][i] * v[1][i] + v[2][i] * v[2][i]).sqrt())
        .collect()
}

/// Residual reports `[gauss, no_monopole, faraday, ampere]` with
/// `D = eps0 E` and `mu0 H = B`:
/// `div D - rho`, `div B`, `|curl E + dB/dt|`, `|curl H - dD/dt - J|`.
pub fn maxwell_residuals(series: &[MaxwellSnapshot], consts: &PhysicalConstants) -> Result<[ResidualReport; 4]> {
    let times: Vec<f64> = series.iter().map(|s| s.time).collect();
    let dt = uniform_spacing(&times, 3)?;
    let grid = series[0].e.grid();
    for s in series {
        if s.e.grid() != grid || s.b.grid() != grid || s.j.grid() != grid {
            return Err(Error::GridMismatch);
        }
        grid.check_len(s.rho.len())?;
    }
    let (eps0, mu0) = (consts.eps0, consts.mu0());
    let mut acc = ["gauss", "no_monopole", "faraday", "ampere"].map(|n| Accumulator::new(n, grid, Some(dt)));
    for i in 1..series.len() - 1 {
        let (p, s, n) = (&series[i - 1], &series[i], &series[i + 1]);
        let gauss: Vec<f64> = s.e.divergence()?.iter().zip(&s.rho).map(|(d, r)| eps0 * d - r).collect();
        acc[0].add(&gauss, None);
        acc[1].add(&s.b.divergence()?, None);
        let curl_e = s.e.curl()?;
        let curl_b = s.b.curl()?;
        let faraday: [Vec<f64>; 3] = std::array::from_fn(|c| {
            let db = centered(p.b.component(c), n.b.component(c), dt);
            curl_e.component(c).iter().zip(db).map(|(x, y)| x + y).collect()
        });
        acc[2].add(&magnitude(&faraday), None);
        let ampere: [Vec<f64>; 3] = std::array::from_fn(|c| {
            let de = centered(p.e.component(c), n.e.component(c), dt);
            curl_b
                .component(c)
                .iter()
                .zip(de)
                .zip(s.j.component(c))
                .map(|((h, d), j)| h / mu0 - eps0 * d - j)
                .collect()
        });
        acc[3].add(&magnitude(&ampere), None);
    }
    Ok(acc.map(Accumulator::finish))
}

/// `E = -dA/dt - grad(c A^0)`, `B = curl A` from a series of contravariant
/// four-potentials (at least three, equally spaced), at the interior
/// snapshots where `dA/dt` is centered.
pub fn four_potential_fields(
    grid: &Grid,
    series: &[(f64, [Vec<f64>; 4])],
    c: f64,
) -> Result<Vec<(f64, VectorField, VectorField)>> {
    let times: Vec<f64> = series.iter().map(|s| s.0).collect();
    let dt = uniform_spacing(&times, 3)?;
    for (_, a) in series {
        for comp in a {
            grid.check_len(comp.len())?;
        }
    }
    (1..series.len() - 1)
        .map(|i| {
            let a = &series[i].1;
            let phi: Vec<f64> = a[0].iter().map(|x| c * x).collect();
            let grad = grid.gradient_real(&phi)?;
            let e: [Vec<f64>; 3] = std::array::from_fn(|k| {
                let s: Vec<&[f64]> = series.iter().map(|(_, a)| a[k + 1].as_slice()).collect();
                centered(s[i - 1], s[i + 1], dt)
                    .iter()
                    .enumerate()
                    .map(|(idx, d)| -d - grad.get(k).map_or(0.0, |g| g[idx]))
                    .collect()
            });
            let b = grid.curl_real([&a[1], &a[2], &a[3]])?;
            Ok((series[i].0, VectorField::new(grid, e)?, VectorField::new(grid, b)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::ScalarField;
    use crate::lattice::make_grid;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn landau(g: &Grid, b: f64) -> VectorField {
        let mut aff = [[0.0; 3]; 3];
        aff[1][0] = b;
        let z = vec![0.0; g.len()];
        VectorField::from_periodic_and_affine(g, [z.clone(), z.clone(), z], aff).unwrap()
    }

    #[test]
    fn linear_potential_gives_uniform_field() {
        let consts = PhysicalConstants::physical(1.0, 2.0, 0.5, 1.0, 1.0).unwrap();
        let g = make_grid(2, &[16, 16], &[5.0, 5.0]).unwrap();
        let u = ScalarField::from_periodic_and_slope(&g, vec![0.0; g.len()], [0.3, 0.0, 0.0]).unwrap();
        let gauge = GaugeConfiguration::classical(landau(&g, 0.7), u).unwrap();
        let em = em_fields_static(&PotentialSnapshot::classical(0.0, gauge), &consts).unwrap();
        for idx in 0..g.len() {
            assert!((em.e_psi.at(idx)[0] + 0.3 / consts.q).abs() < 1e-13);
            assert!((em.b_psi.at(idx)[2] - 0.7).abs() < 1e-13);
        }
        assert!(em.split_error().unwrap() < 1e-15);
        let zero = em_fields_static(&PotentialSnapshot::classical(0.0, GaugeConfiguration::zero(&g)), &consts).unwrap();
        assert_eq!(zero.e_psi.max_abs() + zero.b_psi.max_abs(), 0.0);
    }

    fn random_series(g: &Grid, seed: u64) -> Vec<PotentialSnapshot> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut r = || g.random_band_limited_real(&mut rng);
        let a0 = [r(), r(), r()];
        let a1 = [r(), r(), r()];
        let q0 = r();
        let q1 = r();
        let u0 = r();
        let u1 = r();
        (0..4)
            .map(|n| {
                let t = 0.1 * n as f64;
                let mix = |x: &[f64], y: &[f64]| -> Vec<f64> { x.iter().zip(y).map(|(a, b)| a + t.sin() * b).collect() };
                let ac = VectorField::new(g, std::array::from_fn(|k| mix(&a0[k], &a1[k]))).unwrap();
                let aq = VectorField::new(g, std::array::from_fn(|k| mix(&a1[k], &a0[k]))).unwrap();
                let u = ScalarField::new(g, mix(&u0, &u1)).unwrap();
                let gauge = GaugeConfiguration::split(ac, aq, u).unwrap();
                let mut snap = PotentialSnapshot::classical(t, gauge);
                snap.quantum.values = mix(&q0, &q1);
                snap
            })
            .collect()
    }

    #[test]
    fn gauge_split_identity() {
        let consts = PhysicalConstants::physical(1.0, 1.5, -0.8, 2.0, 1.0).unwrap();
        for (dim, n) in [(2, [16, 16, 1]), (3, [8, 8, 8])] {
            let g = make_grid(dim, &n[..dim], &vec![3.0; dim]).unwrap();
            for seed in 0..5 {
                let s = random_series(&g, seed);
                for [rp, rl, rq] in gauge_residual_samples(&s, &consts).unwrap() {
                    for idx in 0..g.len() {
                        assert!((rp[idx] - rl[idx] - rq[idx]).abs() <= 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn static_gauge_residuals_are_divergences() {
        let consts = PhysicalConstants::natural();
        let g = make_grid(1, &[16], &[2.0 * PI]).unwrap();
        let a = VectorField::from_fn(&g, |r| [r[0].sin(), 0.0, 0.0]);
        let gauge = GaugeConfiguration::classical(a.clone(), ScalarField::zeros(&g)).unwrap();
        let s: Vec<PotentialSnapshot> = (0..3).map(|n| PotentialSnapshot::classical(n as f64, gauge.clone())).collect();
        let [rp, rl, rq] = gauge_residuals(&s, &consts).unwrap();
        let div = a.divergence().unwrap();
        let expect = div.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!((rp.linf - expect).abs() < 1e-14);
        assert!((rl.linf - expect).abs() < 1e-14);
        assert_eq!(rq.linf, 0.0);
    }

    #[test]
    fn constructed_lorentz_gauge() {
        let consts = PhysicalConstants::physical(1.0, 1.0, 2.0, 1.5, 1.0).unwrap();
        let g = make_grid(1, &[32], &[2.0 * PI]).unwrap();
        let (u0, omega, k) = (0.4, 1.3, 2.0);
        let dt = 1e-4;
        let s: Vec<PotentialSnapshot> = (0..5)
            .map(|n| {
                let t = 1.0 + n as f64 * dt;
                let u = ScalarField::from_fn(&g, |r| u0 * (k * r[0]).sin() * (omega * t).sin());
                let amp = u0 * omega / (consts.q * consts.c * consts.c * k);
                let a = VectorField::from_fn(&g, |r| [amp * (k * r[0]).cos() * (omega * t).cos(), 0.0, 0.0]);
                PotentialSnapshot::classical(t, GaugeConfiguration::classical(a, u).unwrap())
            })
            .collect();
        let [rp, _, _] = gauge_residuals(&s, &consts).unwrap();
        assert!(rp.linf < 1e-8, "{rp:?}");
    }

    #[test]
    fn em_fields_are_linear() {
        let consts = PhysicalConstants::physical(1.0, 1.5, -0.8, 2.0, 1.0).unwrap();
        let g = make_grid(2, &[16, 16], &[3.0, 3.0]).unwrap();
        let s1 = random_series(&g, 11);
        let s2 = random_series(&g, 12);
        let sum: Vec<PotentialSnapshot> = s1
            .iter()
            .zip(&s2)
            .map(|(a, b)| {
                let gauge = GaugeConfiguration::split(
                    a.gauge.a_classical.add(&b.gauge.a_classical).unwrap(),
                    a.gauge.a_quantum.add(&b.gauge.a_quantum).unwrap(),
                    a.gauge.u.add(&b.gauge.u).unwrap(),
                )
                .unwrap();
                let mut s = PotentialSnapshot::classical(a.time, gauge);
                s.quantum.gradient = std::array::from_fn(|k| {
                    a.quantum.gradient[k].iter().zip(&b.quantum.gradient[k]).map(|(x, y)| x + y).collect()
                });
                s
            })
            .collect();
        let f1 = em_fields(&s1, &consts).unwrap();
        let f2 = em_fields(&s2, &consts).unwrap();
        let fs = em_fields(&sum, &consts).unwrap();
        for ((a, b), c) in f1.iter().zip(&f2).zip(&fs) {
            let e = a.1.e_psi.add(&b.1.e_psi).unwrap().sub(&c.1.e_psi).unwrap().max_abs();
            let bb = a.1.b_psi.add(&b.1.b_psi).unwrap().sub(&c.1.b_psi).unwrap().max_abs();
            assert!(e < 1e-12 && bb < 1e-12);
            assert!(c.1.split_error().unwrap() < 1e-13);
        }
        assert!(em_fields(&s1[..2], &consts).is_err());
    }

    #[test]
    fn self_consistency_with_spectral_poisson_field() {
        let consts = PhysicalConstants::physical(1.0, 1.0, 0.7, 1.0, 2.0).unwrap();
        let g = make_grid(2, &[32, 32], &[2.0 * PI, 2.0 * PI]).unwrap();
        let f = ScalarField::from_fn(&g, |r| (r[0].cos() + (2.0 * r[1]).sin()).powi(2) * 0.1);
        let mean = f.values().iter().sum::<f64>() / g.len() as f64;
        let fz: Vec<f64> = f.values().iter().map(|x| x - mean).collect();
        // E = grad Phi with Lap Phi = q f / eps0.
        let mut phi = crate::lattice::to_complex(&fz);
        g.apply_multiplier(&mut phi, |idx| {
            let k2 = g.k_squared(idx);
            num_complex::Complex64::new(if k2 == 0.0 { 0.0 } else { -consts.q / (consts.eps0 * k2) }, 0.0)
        });
        let phi = ScalarField::new(&g, crate::lattice::real_part(&phi)).unwrap();
        let e = phi.gradient().unwrap();
        let r = self_consistency_residual(&e, &fz, &consts).unwrap();
        assert!(r.linf < 1e-10, "{r:?}");
        let zero = self_consistency_residual(&VectorField::zeros(&g), &vec![0.0; g.len()], &consts).unwrap();
        assert_eq!(zero.linf, 0.0);
    }

    fn plane_wave(g: &Grid, consts: &PhysicalConstants, k: f64, e0: f64, t: f64) -> MaxwellSnapshot {
        let c = consts.c;
        let e = VectorField::from_fn(g, |r| [0.0, e0 * (k * r[0] - c * k * t).cos(), 0.0]);
        let b = VectorField::from_fn(g, |r| [0.0, 0.0, e0 / c * (k * r[0] - c * k * t).cos()]);
        MaxwellSnapshot {
            time: t,
            e,
            b,
            rho: vec![0.0; g.len()],
            j: VectorField::zeros(g),
        }
    }

    #[test]
    fn vacuum_plane_wave_and_refinement() {
        let consts = PhysicalConstants::physical(1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let g = make_grid(1, &[32], &[2.0 * PI]).unwrap();
        let run = |dt: f64| {
            let s: Vec<MaxwellSnapshot> = (0..5).map(|n| plane_wave(&g, &consts, 1.0, 1.0, 0.3 + n as f64 * dt)).collect();
            maxwell_residuals(&s, &consts).unwrap()
        };
        let coarse = run(2e-3);
        let fine = run(1e-3);
        for r in &coarse {
            assert!(r.linf < 1e-6, "{r:?}");
        }
        assert!(coarse[0].linf < 1e-13 && coarse[1].linf < 1e-13);
        for k in 2..4 {
            assert!(coarse[k].l2 / fine[k].l2 > 3.5);
        }
    }

    #[test]
    fn curl_field_has_no_divergence() {
        let g = make_grid(3, &[8, 8, 8], &[2.0, 3.0, 4.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = VectorField::new(&g, std::array::from_fn(|_| g.random_band_limited_real(&mut rng))).unwrap();
        let b = a.curl().unwrap();
        assert!(b.divergence().unwrap().iter().all(|x| x.abs() < 1e-11));
    }

    #[test]
    fn four_potential_plane_wave_fields() {
        let g = make_grid(1, &[16], &[2.0 * PI]).unwrap();
        let c = 2.0;
        let dt = 1e-3;
        let series: Vec<(f64, [Vec<f64>; 4])> = (0..3)
            .map(|n| {
                let t = n as f64 * dt;
                let ay: Vec<f64> = (0..16).map(|i| (g.coords(i)[0] - c * t).sin() / c).collect();
                (t, [vec![0.0; 16], vec![0.0; 16], ay, vec![0.0; 16]])
            })
            .collect();
        let f = four_potential_fields(&g, &series, c).unwrap();
        assert_eq!(f.len(), 1);
        let (_, e, b) = &f[0];
        for i in 0..16 {
            let x = g.coords(i)[0] - c * dt;
            assert!((e.at(i)[1] - x.cos()).abs() < 1e-5);
            assert!((b.at(i)[2] - x.cos() / c).abs() < 1e-13);
        }
    }
}
