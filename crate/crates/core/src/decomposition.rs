//! Helmholtz-type decompositions of the probability current for scalar,
//! spinor and bispinor fields, and the split of a velocity field into a
//! potential part and a vortex potential with prescribed divergence.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{
    BispinorField, ComplexScalarField, MultiComponent, ScalarField, SpinorField, VectorField,
};
use crate::lattice::Grid;

/// Decomposition constants `(alpha, beta, gamma)` together with the
/// physical constants they are realized by.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhysicalConstants {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub hbar: f64,
    pub m: f64,
    pub q: f64,
    pub c: f64,
    pub eps0: f64,
}

impl PhysicalConstants {
    /// `alpha = -hbar / 2m`, `beta = 1 / hbar`, `gamma = -q / m`.
    pub fn physical(hbar: f64, m: f64, q: f64, c: f64, eps0: f64) -> Result<Self> {
        for (name, v) in [("hbar", hbar), ("m", m), ("c", c), ("eps0", eps0)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !q.is_finite() || q == 0.0 {
            return Err(Error::InvalidParameter(format!("q must be finite and nonzero, got {q}")));
        }
        Ok(PhysicalConstants {
            alpha: -hbar / (2.0 * m),
            beta: 1.0 / hbar,
            gamma: -q / m,
            hbar,
            m,
            q,
            c,
            eps0,
        })
    }

    /// Inverse realization: `hbar = 1/beta`, `m = -1/(2 alpha beta)`, `q = gamma/(2 alpha beta)`.
    pub fn from_decomposition(alpha: f64, beta: f64, gamma: f64, c: f64, eps0: f64) -> Result<Self> {
        if beta == 0.0 || !beta.is_finite() {
            return Err(Error::InvalidParameter("beta must be finite and nonzero".into()));
        }
        if alpha * beta >= 0.0 {
            return Err(Error::InvalidParameter(
                "alpha * beta must be negative for a positive mass".into(),
            ));
        }
        let hbar = 1.0 / beta;
        let m = -1.0 / (2.0 * alpha * beta);
        let q = gamma / (2.0 * alpha * beta);
        let out = Self::physical(hbar, m, q, c, eps0)?;
        out.check_consistency(1e-12)?;
        Ok(out)
    }

    /// `hbar = m = q = c = eps0 = 1`.
    pub fn natural() -> Self {
        Self::physical(1.0, 1.0, 1.0, 1.0, 1.0).expect("unit constants are valid")
    }

    pub fn mu0(&self) -> f64 {
        1.0 / (self.eps0 * self.c * self.c)
    }

    /// `2 alpha beta / gamma`, which equals `1/q` for physical constants.
    pub fn kappa(&self) -> f64 {
        2.0 * self.alpha * self.beta / self.gamma
    }

    pub fn check_consistency(&self, tol: f64) -> Result<()> {
        let rel = |a: f64, b: f64| (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
        if rel(self.alpha, -self.hbar / (2.0 * self.m))
            && rel(self.beta, 1.0 / self.hbar)
            && rel(self.gamma, -self.q / self.m)
        {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "decomposition constants ({}, {}, {}) disagree with hbar={}, m={}, q={}",
                self.alpha, self.beta, self.gamma, self.hbar, self.m, self.q
            )))
        }
    }
}

/// Vortex potential, its classical/quantum split, and the scalar sources.
#[derive(Clone, Debug)]
pub struct GaugeConfiguration {
    pub a_psi: VectorField,
    pub a_classical: VectorField,
    pub a_quantum: VectorField,
    /// External potential energy `U`.
    pub u: ScalarField,
    /// Free gauge function, the prescribed divergence of `a_psi`.
    pub chi: Vec<f64>,
    pub phi_scalar: Option<Vec<f64>>,
}

impl GaugeConfiguration {
    pub fn zero(grid: &Grid) -> Self {
        Self::classical(VectorField::zeros(grid), ScalarField::zeros(grid))
            .expect("zero fields share a grid")
    }

    /// Only a classical potential; the quantum part vanishes.
    pub fn classical(a: VectorField, u: ScalarField) -> Result<Self> {
        let aq = VectorField::zeros(a.grid());
        Self::split(a, aq, u)
    }

    pub fn split(a_classical: VectorField, a_quantum: VectorField, u: ScalarField) -> Result<Self> {
        if a_classical.grid() != a_quantum.grid() || a_classical.grid() != u.grid() {
            return Err(Error::GridMismatch);
        }
        let a_psi = a_classical.add(&a_quantum)?;
        let chi = vec![0.0; u.grid().len()];
        Ok(GaugeConfiguration {
            a_psi,
            a_classical,
            a_quantum,
            u,
            chi,
            phi_scalar: None,
        })
    }

    pub fn with_chi(mut self, chi: Vec<f64>) -> Result<Self> {
        self.grid().check_len(chi.len())?;
        self.chi = chi;
        Ok(self)
    }

    pub fn grid(&self) -> &Grid {
        self.u.grid()
    }

    /// Largest violation of `a_psi = a_classical + a_quantum`.
    pub fn split_error(&self) -> Result<f64> {
        Ok(self
            .a_psi
            .sub(&self.a_classical)?
            .sub(&self.a_quantum)?
            .max_abs())
    }
}

fn same_grid(a: &Grid, b: &Grid) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// Current contribution of one complex component: `-2 alpha Im(psi* grad psi)`.
fn phase_current(grid: &Grid, psi: &[Complex64], alpha: f64, out: &mut [Vec<f64>; 3]) -> Result<()> {
    let grads = grid.gradient(psi)?;
    for (axis, g) in grads.iter().enumerate() {
        for ((o, d), z) in out[axis].iter_mut().zip(g).zip(psi) {
            *o += -2.0 * alpha * (z.conj() * d).im;
        }
    }
    Ok(())
}

fn multi_current(
    grid: &Grid,
    components: &[Vec<Complex64>],
    f: &[f64],
    gauge: &GaugeConfiguration,
    consts: &PhysicalConstants,
) -> Result<VectorField> {
    same_grid(grid, gauge.grid())?;
    let mut j: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; grid.len()]);
    for c in components {
        phase_current(grid, c, consts.alpha, &mut j)?;
    }
    for (axis, comp) in j.iter_mut().enumerate() {
        for ((o, fi), a) in comp.iter_mut().zip(f).zip(gauge.a_psi.component(axis)) {
            *o += consts.gamma * fi * a;
        }
    }
    VectorField::new(grid, j)
}

/// `J = i alpha (Psi* grad Psi - Psi grad Psi*) + gamma f A_psi`.
pub fn current_scalar(
    psi: &ComplexScalarField,
    gauge: &GaugeConfiguration,
    consts: &PhysicalConstants,
) -> Result<VectorField> {
    multi_current(psi.grid(), psi.components(), &psi.density(), gauge, consts)
}

/// `J = i alpha (psi^dagger grad psi - psi^T grad psi*) + gamma (psi^dagger psi) A`.
pub fn current_spinor(
    psi: &SpinorField,
    gauge: &GaugeConfiguration,
    consts: &PhysicalConstants,
) -> Result<VectorField> {
    multi_current(psi.grid(), psi.components(), &psi.density(), gauge, consts)
}

/// `<v> = J / f` on the unmasked set; masked points are zero.
pub fn velocity(j: &VectorField, f: &[f64], eps: f64) -> Result<(VectorField, Vec<bool>)> {
    let grid = j.grid();
    grid.check_len(f.len())?;
    let mask = crate::fields::node_mask(f, eps)?;
    let comps: [Vec<f64>; 3] = std::array::from_fn(|axis| {
        j.component(axis)
            .iter()
            .zip(f)
            .zip(&mask)
            .map(|((ji, fi), &ok)| if ok { ji / fi } else { 0.0 })
            .collect()
    });
    Ok((VectorField::new(grid, comps)?, mask))
}

/// Four-current `(J^0, J^1, J^2, J^3)` sampled on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct FourCurrent {
    pub grid: Grid,
    pub components: [Vec<f64>; 4],
}

impl FourCurrent {
    pub fn spatial(&self) -> Result<VectorField> {
        VectorField::new(
            &self.grid,
            [
                self.components[1].clone(),
                self.components[2].clone(),
                self.components[3].clone(),
            ],
        )
    }
}

/// Bispinor current `J^mu = c psi-bar gamma^mu psi` in component form.
pub fn current_bispinor(psi: &BispinorField, c: f64) -> FourCurrent {
    let n = psi.grid().len();
    let mut comps: [Vec<f64>; 4] = std::array::from_fn(|_| Vec::with_capacity(n));
    for idx in 0..n {
        let [p1, p2, p3, p4] = psi.at(idx);
        let j0 = p1.norm_sqr() + p2.norm_sqr() + p3.norm_sqr() + p4.norm_sqr();
        let j1 = 2.0 * (p1.conj() * p4 + p2.conj() * p3).re;
        let j2 = -2.0 * (p2.conj() * p3 - p1.conj() * p4).im;
        let j3 = 2.0 * (p1.conj() * p3 - p4.conj() * p2).re;
        for (comp, v) in comps.iter_mut().zip([j0, j1, j2, j3]) {
            comp.push(c * v);
        }
    }
    FourCurrent {
        grid: psi.grid().clone(),
        components: comps,
    }
}

/// Splits `v = -alpha grad Phi + gamma A` with `div A = chi`.
///
/// `Phi` has zero mean. A periodic box forces `mean(gamma chi) = 0`; with
/// `project_mean` the mean of `chi` is removed first, otherwise a nonzero
/// mean is rejected.
pub fn helmholtz_split(
    v: &VectorField,
    chi: &[f64],
    consts: &PhysicalConstants,
    project_mean: bool,
) -> Result<(Vec<f64>, VectorField)> {
    const SOLVABILITY_TOL: f64 = 1e-12;
    let grid = v.grid();
    grid.check_len(chi.len())?;
    if v.has_affine() {
        return Err(Error::InvalidParameter(
            "helmholtz_split needs a periodic velocity field".into(),
        ));
    }
    if consts.alpha == 0.0 || consts.gamma == 0.0 {
        return Err(Error::InvalidParameter("alpha and gamma must be nonzero".into()));
    }
    let mean_chi = chi.iter().sum::<f64>() / chi.len() as f64;
    let chi: Vec<f64> = if project_mean {
        chi.iter().map(|x| x - mean_chi).collect()
    } else {
        let defect = (consts.gamma * mean_chi).abs();
        if defect > SOLVABILITY_TOL {
            return Err(Error::NonSolvable {
                mean: defect,
                tolerance: SOLVABILITY_TOL,
            });
        }
        chi.to_vec()
    };
    let div_v = v.divergence()?;
    // alpha Lap Phi = gamma chi - div v.
    let mut phi: Vec<Complex64> = div_v
        .iter()
        .zip(&chi)
        .map(|(d, x)| Complex64::new(consts.gamma * x - d, 0.0))
        .collect();
    grid.apply_multiplier(&mut phi, |idx| {
        let k2 = grid.k_squared(idx);
        if k2 == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(-1.0 / (consts.alpha * k2), 0.0)
        }
    });
    let phi: Vec<f64> = phi.iter().map(|z| z.re).collect();
    let grad = grid.gradient_real(&phi)?;
    let a: [Vec<f64>; 3] = std::array::from_fn(|axis| {
        v.component(axis)
            .iter()
            .enumerate()
            .map(|(idx, vi)| {
                let g = grad.get(axis).map_or(0.0, |g| g[idx]);
                (vi + consts.alpha * g) / consts.gamma
            })
            .collect()
    });
    Ok((phi, VectorField::new(grid, a)?))
}

/// `-alpha grad Phi + gamma A`.
pub fn recompose(phi: &[f64], a: &VectorField, consts: &PhysicalConstants) -> Result<VectorField> {
    let grid = a.grid();
    let grad = ScalarField::new(grid, phi.to_vec())?.gradient()?;
    grad.combine(a, -consts.alpha, consts.gamma)
}
