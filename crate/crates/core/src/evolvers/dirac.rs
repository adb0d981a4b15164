//! Split-operator integrator for the Dirac equation
//! `i hbar dpsi/dt = [c alpha . (p - qA) + beta m c^2 + q phi] psi`.
//!
//! The free part is exact per Fourier mode: `H(k)^2 = E^2 I` gives
//! `exp(-i H tau / hbar) = cos(E tau / hbar) I - i sin(E tau / hbar) H / E`.
//! The interaction part is pointwise and also closed-form, since
//! `(alpha . A)^2 = |A|^2 I`.

use num_complex::Complex64;

use super::{run_series, EvolutionParams, Series, Splitting};
use crate::algebra::{dirac_alpha, dirac_gamma, Matrix4};
use crate::decomposition::PhysicalConstants;
use crate::error::{Error, Result};
use crate::fields::BispinorField;
use crate::lattice::Grid;

/// Contravariant four-potential `A^mu = (phi / c, A)` on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct FourPotential {
    pub grid: Grid,
    pub components: [Vec<f64>; 4],
}

impl FourPotential {
    pub fn zero(grid: &Grid) -> Self {
        FourPotential {
            grid: grid.clone(),
            components: std::array::from_fn(|_| vec![0.0; grid.len()]),
        }
    }

    /// From the scalar potential `phi` and the vector potential `A`.
    pub fn from_phi_and_a(grid: &Grid, phi: &[f64], a: [&[f64]; 3], c: f64) -> Result<Self> {
        grid.check_len(phi.len())?;
        for comp in a {
            grid.check_len(comp.len())?;
        }
        Ok(FourPotential {
            grid: grid.clone(),
            components: [
                phi.iter().map(|p| p / c).collect(),
                a[0].to_vec(),
                a[1].to_vec(),
                a[2].to_vec(),
            ],
        })
    }

    /// Covariant component `A_mu = g_{mu nu} A^nu`.
    pub fn covariant(&self, mu: usize) -> Vec<f64> {
        let s = if mu == 0 { 1.0 } else { -1.0 };
        self.components[mu].iter().map(|x| s * x).collect()
    }
}

#[derive(Clone)]
pub struct DiracStepper {
    grid: Grid,
    dt: f64,
    splitting: Splitting,
    consts: PhysicalConstants,
    /// Free propagator for a full step, per mode.
    free_full: Vec<Matrix4>,
    /// Free propagator for a half step (Strang) per mode.
    free_half: Vec<Matrix4>,
    potential: Option<FourPotential>,
}

/// Free Dirac Hamiltonian `c hbar alpha . k + beta m c^2` at wave vector `k`.
pub fn free_hamiltonian(k: [f64; 3], consts: &PhysicalConstants) -> Matrix4 {
    let ch = consts.c * consts.hbar;
    let mut h = dirac_gamma(0)
        .expect("index in range")
        .scale(Complex64::new(consts.m * consts.c * consts.c, 0.0));
    for (j, kj) in k.iter().enumerate() {
        if *kj != 0.0 {
            h = h + dirac_alpha(j + 1).scale(Complex64::new(ch * kj, 0.0));
        }
    }
    h
}

/// `E = sqrt(hbar^2 c^2 k^2 + m^2 c^4)`.
pub fn dirac_energy(k: [f64; 3], consts: &PhysicalConstants) -> f64 {
    let k2 = k.iter().map(|x| x * x).sum::<f64>();
    let (c, m, hbar) = (consts.c, consts.m, consts.hbar);
    (hbar * hbar * c * c * k2 + m * m * c.powi(4)).sqrt()
}

fn free_propagator(k: [f64; 3], consts: &PhysicalConstants, tau: f64) -> Matrix4 {
    let h = free_hamiltonian(k, consts);
    let e = dirac_energy(k, consts);
    if e == 0.0 {
        return Matrix4::identity() - h.scale(Complex64::new(0.0, tau / consts.hbar));
    }
    let (s, c) = (e * tau / consts.hbar).sin_cos();
    Matrix4::identity().scale(Complex64::new(c, 0.0)) + h.scale(Complex64::new(0.0, -s / e))
}

/// `exp(-i tau (q phi - q c alpha . A) / hbar)` at one point.
pub fn interaction_propagator(phi: f64, a: [f64; 3], consts: &PhysicalConstants, tau: f64) -> Matrix4 {
    let (q, c, hbar) = (consts.q, consts.c, consts.hbar);
    let an = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    let theta = q * c * an * tau / hbar;
    // sin(theta) / |A| without dividing by zero.
    let sinc = if an == 0.0 {
        q * c * tau / hbar
    } else {
        theta.sin() / an
    };
    let mut m = Matrix4::identity().scale(Complex64::new(theta.cos(), 0.0));
    for (j, aj) in a.iter().enumerate() {
        if *aj != 0.0 {
            m = m + dirac_alpha(j + 1).scale(Complex64::new(0.0, sinc * aj));
        }
    }
    m.scale(Complex64::from_polar(1.0, -q * phi * tau / hbar))
}

impl DiracStepper {
    pub fn new(
        grid: &Grid,
        potential: Option<&FourPotential>,
        consts: &PhysicalConstants,
        dt: f64,
        splitting: Splitting,
    ) -> Result<Self> {
        if !dt.is_finite() || dt == 0.0 {
            return Err(Error::InvalidParameter(format!("dt must be finite and nonzero, got {dt}")));
        }
        if let Some(p) = potential {
            if &p.grid != grid {
                return Err(Error::GridMismatch);
            }
        }
        let potential = potential.filter(|p| p.components.iter().flatten().any(|&x| x != 0.0));
        let prop = |tau: f64| -> Vec<Matrix4> {
            (0..grid.len())
                .map(|idx| free_propagator(grid.wavevector(idx), consts, tau))
                .collect()
        };
        let free_full = prop(dt);
        let free_half = if potential.is_some() && splitting == Splitting::Strang {
            prop(0.5 * dt)
        } else {
            Vec::new()
        };
        Ok(DiracStepper {
            grid: grid.clone(),
            dt,
            splitting,
            consts: *consts,
            free_full,
            free_half,
            potential: potential.cloned(),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn free(&self, comps: &mut [Vec<Complex64>; 4], props: &[Matrix4]) {
        for c in comps.iter_mut() {
            self.grid.forward_in_place(c);
        }
        for (idx, m) in props.iter().enumerate() {
            let v = m.apply(&[comps[0][idx], comps[1][idx], comps[2][idx], comps[3][idx]]);
            for (c, x) in comps.iter_mut().zip(v) {
                c[idx] = x;
            }
        }
        for c in comps.iter_mut() {
            self.grid.inverse_in_place(c);
        }
    }

    fn interaction(&self, comps: &mut [Vec<Complex64>; 4], tau: f64) {
        let Some(p) = &self.potential else { return };
        let c = self.consts.c;
        for idx in 0..self.grid.len() {
            let phi = p.components[0][idx] * c;
            let a = [p.components[1][idx], p.components[2][idx], p.components[3][idx]];
            let m = interaction_propagator(phi, a, &self.consts, tau);
            let v = m.apply(&[comps[0][idx], comps[1][idx], comps[2][idx], comps[3][idx]]);
            for (comp, x) in comps.iter_mut().zip(v) {
                comp[idx] = x;
            }
        }
    }

    pub fn step_values(&self, comps: &mut [Vec<Complex64>; 4]) {
        if self.potential.is_none() {
            self.free(comps, &self.free_full);
            return;
        }
        match self.splitting {
            Splitting::Strang => {
                self.free(comps, &self.free_half);
                self.interaction(comps, self.dt);
                self.free(comps, &self.free_half);
            }
            Splitting::Lie => {
                self.interaction(comps, self.dt);
                self.free(comps, &self.free_full);
            }
        }
    }

    pub fn step(&self, psi: &BispinorField) -> Result<BispinorField> {
        if psi.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        let mut comps: [Vec<Complex64>; 4] = std::array::from_fn(|i| psi.component(i).to_vec());
        self.step_values(&mut comps);
        BispinorField::new(&self.grid, comps)
    }
}

pub fn dirac_step(
    psi: &BispinorField,
    potential: &FourPotential,
    consts: &PhysicalConstants,
    params: &EvolutionParams,
) -> Result<BispinorField> {
    DiracStepper::new(psi.grid(), Some(potential), consts, params.dt, params.splitting)?.step(psi)
}

pub fn run_dirac(
    psi0: &BispinorField,
    potential: Option<&FourPotential>,
    consts: &PhysicalConstants,
    params: &EvolutionParams,
) -> Result<Series<BispinorField>> {
    let stepper = DiracStepper::new(psi0.grid(), potential, consts, params.dt, params.splitting)?;
    let grid = psi0.grid().clone();
    let init: [Vec<Complex64>; 4] = std::array::from_fn(|i| psi0.component(i).to_vec());
    let series = run_series(init, params, |c| {
        stepper.step_values(c);
        Ok(())
    })?;
    series
        .into_iter()
        .map(|(t, c)| Ok((t, BispinorField::new(&grid, c)?)))
        .collect()
}

/// Positive-energy eigenspinor of the free Hamiltonian at `k` (unit norm),
/// built from the spin-up or spin-down upper component.
pub fn positive_energy_spinor(k: [f64; 3], consts: &PhysicalConstants, spin_up: bool) -> [Complex64; 4] {
    let e = dirac_energy(k, consts);
    let mc2 = consts.m * consts.c * consts.c;
    let chi = if spin_up {
        [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]
    } else {
        [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]
    };
    let p = k.map(|x| consts.hbar * consts.c * x);
    let sp = crate::algebra::sigma_dot(p).apply(&chi);
    let lower = sp.map(|z| z / (e + mc2));
    let v = [chi[0], chi[1], lower[0], lower[1]];
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.map(|z| z / norm)
}
