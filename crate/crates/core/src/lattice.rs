//! Uniform periodic lattices and the derivative operators defined on them.
//!
//! Points are laid out row-major with the last axis fastest. Axes beyond
//! `dim` are carried with a single point so that every field can be treated
//! as a function of three coordinates that is constant along absent axes.
//!
//! Derivatives are spectral: forward FFT, multiply by `i k`, inverse FFT.
//! The Nyquist mode is dropped for odd-order derivatives and kept with
//! weight `-k^2` for the Laplacian. A second-order centered finite
//! difference stencil is kept for cross-validation only.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 3;

struct Plans {
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

/// A uniform periodic lattice in one to three dimensions.
#[derive(Clone)]
pub struct Grid {
    dim: usize,
    n: [usize; MAX_DIM],
    length: [f64; MAX_DIM],
    spacing: [f64; MAX_DIM],
    wavenumbers: [Vec<f64>; MAX_DIM],
    plans: Arc<Plans>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.dim)
            .field("n", &&self.n[..self.dim])
            .field("length", &&self.length[..self.dim])
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.n == other.n && self.length == other.length
    }
}

/// Builds a grid with `n[j]` points over `[0, length[j])` on each axis.
pub fn make_grid(dim: usize, n: &[usize], length: &[f64]) -> Result<Grid> {
    Grid::new(dim, n, length)
}

/// Signed mode number of FFT bin `i` on an axis of `n` points.
fn mode_number(i: usize, n: usize) -> i64 {
    if i <= (n - 1) / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

impl Grid {
    pub fn new(dim: usize, n: &[usize], length: &[f64]) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dim must be 1, 2 or 3, got {dim}")));
        }
        if n.len() != dim || length.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "expected {dim} point counts and extents, got {} and {}",
                n.len(),
                length.len()
            )));
        }
        let mut counts = [1usize; MAX_DIM];
        let mut extents = [1.0f64; MAX_DIM];
        let mut spacing = [1.0f64; MAX_DIM];
        let mut wavenumbers: [Vec<f64>; MAX_DIM] = [vec![0.0], vec![0.0], vec![0.0]];
        let mut planner = FftPlanner::<f64>::new();
        let mut forward = Vec::with_capacity(MAX_DIM);
        let mut inverse = Vec::with_capacity(MAX_DIM);
        for axis in 0..MAX_DIM {
            if axis < dim {
                let (na, la) = (n[axis], length[axis]);
                if na < 4 {
                    return Err(Error::InvalidGrid(format!(
                        "axis {axis} needs at least 4 points, got {na}"
                    )));
                }
                if !(la.is_finite() && la > 0.0) {
                    return Err(Error::InvalidGrid(format!(
                        "axis {axis} extent must be positive, got {la}"
                    )));
                }
                counts[axis] = na;
                extents[axis] = la;
                spacing[axis] = la / na as f64;
                wavenumbers[axis] = (0..na)
                    .map(|i| 2.0 * PI * mode_number(i, na) as f64 / la)
                    .collect();
            }
            forward.push(planner.plan_fft_forward(counts[axis]));
            inverse.push(planner.plan_fft_inverse(counts[axis]));
        }
        Ok(Grid {
            dim,
            n: counts,
            length: extents,
            spacing,
            wavenumbers,
            plans: Arc::new(Plans { forward, inverse }),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Points per axis; absent axes report 1.
    pub fn n(&self) -> [usize; MAX_DIM] {
        self.n
    }

    pub fn length(&self) -> [f64; MAX_DIM] {
        self.length
    }

    pub fn spacing(&self) -> [f64; MAX_DIM] {
        self.spacing
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacing[..self.dim]
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Total number of lattice points.
    pub fn len(&self) -> usize {
        self.n.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing[..self.dim].iter().product()
    }

    pub fn volume(&self) -> f64 {
        self.length[..self.dim].iter().product()
    }

    /// Wavenumber table `2 pi m / L` for `axis`, in FFT bin order.
    pub fn wavenumbers(&self, axis: usize) -> &[f64] {
        &self.wavenumbers[axis]
    }

    /// Signed mode numbers for `axis`, in FFT bin order.
    pub fn mode_numbers(&self, axis: usize) -> Vec<i64> {
        (0..self.n[axis]).map(|i| mode_number(i, self.n[axis])).collect()
    }

    fn is_nyquist(&self, axis: usize, i: usize) -> bool {
        let n = self.n[axis];
        n % 2 == 0 && n > 1 && i == n / 2
    }

    pub fn index(&self, i: [usize; MAX_DIM]) -> usize {
        (i[0] * self.n[1] + i[1]) * self.n[2] + i[2]
    }

    pub fn multi_index(&self, idx: usize) -> [usize; MAX_DIM] {
        let i2 = idx % self.n[2];
        let rest = idx / self.n[2];
        [rest / self.n[1], rest % self.n[1], i2]
    }

    /// Physical coordinates of point `idx`; absent axes are at 0.
    pub fn coords(&self, idx: usize) -> [f64; MAX_DIM] {
        let m = self.multi_index(idx);
        let mut r = [0.0; MAX_DIM];
        for axis in 0..self.dim {
            r[axis] = m[axis] as f64 * self.spacing[axis];
        }
        r
    }

    /// Box center; absent axes are at 0.
    pub fn center(&self) -> [f64; MAX_DIM] {
        let mut c = [0.0; MAX_DIM];
        for axis in 0..self.dim {
            c[axis] = 0.5 * self.length[axis];
        }
        c
    }

    /// Wave vector of FFT bin `idx`.
    pub fn wavevector(&self, idx: usize) -> [f64; MAX_DIM] {
        let m = self.multi_index(idx);
        [
            self.wavenumbers[0][m[0]],
            self.wavenumbers[1][m[1]],
            self.wavenumbers[2][m[2]],
        ]
    }

    pub fn k_squared(&self, idx: usize) -> f64 {
        let k = self.wavevector(idx);
        k[0] * k[0] + k[1] * k[1] + k[2] * k[2]
    }

    /// Wraps a position into the box along the grid axes.
    pub fn wrap(&self, r: [f64; MAX_DIM]) -> [f64; MAX_DIM] {
        let mut out = r;
        for axis in 0..self.dim {
            out[axis] = r[axis].rem_euclid(self.length[axis]);
            if out[axis] >= self.length[axis] {
                out[axis] = 0.0;
            }
        }
        out
    }

    pub fn check_len(&self, actual: usize) -> Result<()> {
        if actual == self.len() {
            Ok(())
        } else {
            Err(Error::ShapeMismatch {
                expected: self.len(),
                actual,
            })
        }
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        let total = self.len();
        for axis in 0..self.dim {
            let n = self.n[axis];
            let fft = if inverse {
                &self.plans.inverse[axis]
            } else {
                &self.plans.forward[axis]
            };
            let stride: usize = self.n[axis + 1..].iter().product();
            let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
            if stride == 1 {
                fft.process_with_scratch(data, &mut scratch);
                continue;
            }
            let outer = total / (n * stride);
            let mut line = vec![Complex64::default(); n];
            for o in 0..outer {
                for s in 0..stride {
                    let base = o * n * stride + s;
                    for (i, slot) in line.iter_mut().enumerate() {
                        *slot = data[base + i * stride];
                    }
                    fft.process_with_scratch(&mut line, &mut scratch);
                    for (i, v) in line.iter().enumerate() {
                        data[base + i * stride] = *v;
                    }
                }
            }
        }
        if inverse {
            let scale = 1.0 / total as f64;
            for v in data.iter_mut() {
                *v *= scale;
            }
        }
    }

    /// Forward FFT (unnormalized).
    pub fn forward(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut out = values.to_vec();
        self.transform(&mut out, false);
        out
    }

    /// Inverse FFT, normalized so that `inverse(forward(x)) == x`.
    pub fn inverse(&self, spectrum: &[Complex64]) -> Vec<Complex64> {
        let mut out = spectrum.to_vec();
        self.transform(&mut out, true);
        out
    }

    pub fn forward_in_place(&self, values: &mut [Complex64]) {
        self.transform(values, false);
    }

    pub fn inverse_in_place(&self, values: &mut [Complex64]) {
        self.transform(values, true);
    }

    /// Transforms, multiplies bin `idx` by `multiplier(idx)`, and transforms back.
    pub fn apply_multiplier<F>(&self, values: &mut [Complex64], multiplier: F)
    where
        F: Fn(usize) -> Complex64,
    {
        self.transform(values, false);
        for (idx, v) in values.iter_mut().enumerate() {
            *v *= multiplier(idx);
        }
        self.transform(values, true);
    }

    /// Spectral multiplier of `d/dx_axis` for bin `idx` (Nyquist dropped).
    pub fn derivative_symbol(&self, axis: usize, idx: usize) -> Complex64 {
        let m = self.multi_index(idx);
        if axis >= self.dim || self.is_nyquist(axis, m[axis]) {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, self.wavenumbers[axis][m[axis]])
        }
    }

    /// Spectral partial derivative along `axis`. Absent axes give zero.
    pub fn derivative(&self, values: &[Complex64], axis: usize) -> Result<Vec<Complex64>> {
        self.check_len(values.len())?;
        if axis >= self.dim {
            return Ok(vec![Complex64::default(); values.len()]);
        }
        let mut out = values.to_vec();
        self.apply_multiplier(&mut out, |idx| self.derivative_symbol(axis, idx));
        Ok(out)
    }

    /// Spectral gradient, one array per grid axis.
    pub fn gradient(&self, values: &[Complex64]) -> Result<Vec<Vec<Complex64>>> {
        self.check_len(values.len())?;
        let spectrum = self.forward(values);
        Ok((0..self.dim)
            .map(|axis| {
                let mut d: Vec<Complex64> = spectrum
                    .iter()
                    .enumerate()
                    .map(|(idx, v)| v * self.derivative_symbol(axis, idx))
                    .collect();
                self.transform(&mut d, true);
                d
            })
            .collect())
    }

    /// Spectral Laplacian with multiplier `-|k|^2`.
    pub fn laplacian(&self, values: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(values.len())?;
        let mut out = values.to_vec();
        self.apply_multiplier(&mut out, |idx| Complex64::new(-self.k_squared(idx), 0.0));
        Ok(out)
    }

    pub fn derivative_real(&self, values: &[f64], axis: usize) -> Result<Vec<f64>> {
        Ok(real_part(&self.derivative(&to_complex(values), axis)?))
    }

    pub fn gradient_real(&self, values: &[f64]) -> Result<Vec<Vec<f64>>> {
        Ok(self
            .gradient(&to_complex(values))?
            .iter()
            .map(|g| real_part(g))
            .collect())
    }

    pub fn laplacian_real(&self, values: &[f64]) -> Result<Vec<f64>> {
        Ok(real_part(&self.laplacian(&to_complex(values))?))
    }

    /// Spectral second derivative `d^2/dx_a dx_b` of a real field.
    pub fn second_derivative_real(&self, values: &[f64], a: usize, b: usize) -> Result<Vec<f64>> {
        self.check_len(values.len())?;
        if a >= self.dim || b >= self.dim {
            return Ok(vec![0.0; values.len()]);
        }
        let mut out = to_complex(values);
        if a == b {
            self.apply_multiplier(&mut out, |idx| {
                let k = self.wavevector(idx)[a];
                Complex64::new(-k * k, 0.0)
            });
        } else {
            self.apply_multiplier(&mut out, |idx| {
                self.derivative_symbol(a, idx) * self.derivative_symbol(b, idx)
            });
        }
        Ok(real_part(&out))
    }

    /// Divergence of a real vector field given as three component arrays.
    pub fn divergence_real(&self, components: [&[f64]; MAX_DIM]) -> Result<Vec<f64>> {
        let mut acc = vec![Complex64::default(); self.len()];
        for (axis, comp) in components.iter().enumerate().take(self.dim) {
            self.check_len(comp.len())?;
            let mut spec = to_complex(comp);
            self.transform(&mut spec, false);
            for (idx, (a, s)) in acc.iter_mut().zip(spec.iter()).enumerate() {
                *a += s * self.derivative_symbol(axis, idx);
            }
        }
        self.transform(&mut acc, true);
        Ok(real_part(&acc))
    }

    /// Curl of a real vector field; derivatives along absent axes vanish.
    pub fn curl_real(&self, components: [&[f64]; MAX_DIM]) -> Result<[Vec<f64>; MAX_DIM]> {
        let mut d = vec![vec![vec![0.0; self.len()]; MAX_DIM]; MAX_DIM];
        for (c, comp) in components.iter().enumerate() {
            self.check_len(comp.len())?;
            let grads = self.gradient_real(comp)?;
            for (axis, g) in grads.into_iter().enumerate() {
                d[c][axis] = g;
            }
        }
        let sub = |c1: usize, a1: usize, c2: usize, a2: usize| -> Vec<f64> {
            d[c1][a1]
                .iter()
                .zip(d[c2][a2].iter())
                .map(|(x, y)| x - y)
                .collect()
        };
        Ok([sub(2, 1, 1, 2), sub(0, 2, 2, 0), sub(1, 0, 0, 1)])
    }

    /// Zeroes every mode with `|m_j| >= n_j / 4` on some present axis.
    pub fn band_limit(&self, values: &mut [Complex64]) {
        self.transform(values, false);
        for (idx, v) in values.iter_mut().enumerate() {
            if !self.in_band(idx) {
                *v = Complex64::default();
            }
        }
        self.transform(values, true);
    }

    fn in_band(&self, idx: usize) -> bool {
        let m = self.multi_index(idx);
        (0..self.dim).all(|axis| {
            let mode = mode_number(m[axis], self.n[axis]).unsigned_abs() as usize;
            4 * mode < self.n[axis]
        })
    }

    /// Random real field restricted to modes below `n/4`, of order-one amplitude.
    pub fn random_band_limited_real<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut v: Vec<Complex64> = (0..self.len())
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), 0.0))
            .collect();
        self.band_limit(&mut v);
        let out = real_part(&v);
        let peak = out.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if peak > 0.0 {
            out.iter().map(|x| x / peak).collect()
        } else {
            out
        }
    }

    /// Random complex field restricted to modes below `n/4`.
    pub fn random_band_limited_complex<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Complex64> {
        let re = self.random_band_limited_real(rng);
        let im = self.random_band_limited_real(rng);
        re.into_iter()
            .zip(im)
            .map(|(a, b)| Complex64::new(a, b))
            .collect()
    }

    fn shifted(&self, idx: usize, axis: usize, offset: isize) -> usize {
        let mut m = self.multi_index(idx);
        let n = self.n[axis] as isize;
        m[axis] = (m[axis] as isize + offset).rem_euclid(n) as usize;
        self.index(m)
    }

    /// Second-order centered difference along `axis` (cross-validation only).
    pub fn fd_derivative_real(&self, values: &[f64], axis: usize) -> Result<Vec<f64>> {
        self.check_len(values.len())?;
        if axis >= self.dim {
            return Ok(vec![0.0; values.len()]);
        }
        let h = self.spacing[axis];
        Ok((0..values.len())
            .map(|idx| {
                (values[self.shifted(idx, axis, 1)] - values[self.shifted(idx, axis, -1)])
                    / (2.0 * h)
            })
            .collect())
    }

    /// Second-order centered Laplacian (cross-validation only).
    pub fn fd_laplacian_real(&self, values: &[f64]) -> Result<Vec<f64>> {
        self.check_len(values.len())?;
        let mut out = vec![0.0; values.len()];
        for axis in 0..self.dim {
            let h2 = self.spacing[axis] * self.spacing[axis];
            for (idx, o) in out.iter_mut().enumerate() {
                *o += (values[self.shifted(idx, axis, 1)] - 2.0 * values[idx]
                    + values[self.shifted(idx, axis, -1)])
                    / h2;
            }
        }
        Ok(out)
    }

    /// Fourth-order Lagrange interpolation of a periodic real field at `r`.
    ///
    /// Returns `None` when any stencil point is rejected by `valid`.
    pub fn cubic_interpolate(
        &self,
        values: &[f64],
        r: [f64; MAX_DIM],
        valid: Option<&[bool]>,
    ) -> Option<f64> {
        let mut base = [0isize; MAX_DIM];
        let mut weights = [[1.0, 0.0, 0.0, 0.0]; MAX_DIM];
        let mut taps = [1usize; MAX_DIM];
        for axis in 0..self.dim {
            let u = r[axis] / self.spacing[axis];
            let i0 = u.floor();
            let t = u - i0;
            base[axis] = i0 as isize - 1;
            weights[axis] = [
                -t * (t - 1.0) * (t - 2.0) / 6.0,
                (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
                -(t + 1.0) * t * (t - 2.0) / 2.0,
                (t + 1.0) * t * (t - 1.0) / 6.0,
            ];
            taps[axis] = 4;
        }
        let mut acc = 0.0;
        for a in 0..taps[0] {
            for b in 0..taps[1] {
                for c in 0..taps[2] {
                    let mut m = [0usize; MAX_DIM];
                    let offs = [a, b, c];
                    for axis in 0..MAX_DIM {
                        if axis < self.dim {
                            let n = self.n[axis] as isize;
                            m[axis] = (base[axis] + offs[axis] as isize).rem_euclid(n) as usize;
                        }
                    }
                    let idx = self.index(m);
                    if let Some(mask) = valid {
                        if !mask[idx] {
                            return None;
                        }
                    }
                    acc += weights[0][a] * weights[1][b] * weights[2][c] * values[idx];
                }
            }
        }
        Some(acc)
    }

    /// Index of the lattice point nearest to `r`.
    pub fn nearest_index(&self, r: [f64; MAX_DIM]) -> usize {
        let mut m = [0usize; MAX_DIM];
        for axis in 0..self.dim {
            let n = self.n[axis] as isize;
            m[axis] = ((r[axis] / self.spacing[axis]).round() as isize).rem_euclid(n) as usize;
        }
        self.index(m)
    }
}

/// Trigonometric interpolant of a periodic field, evaluated at arbitrary points.
#[derive(Clone, Debug)]
pub struct SpectralInterpolant {
    grid: Grid,
    coefficients: Vec<Complex64>,
}

impl SpectralInterpolant {
    pub fn new(grid: &Grid, values: &[Complex64]) -> Result<Self> {
        grid.check_len(values.len())?;
        let scale = 1.0 / grid.len() as f64;
        let coefficients = grid.forward(values).into_iter().map(|c| c * scale).collect();
        Ok(SpectralInterpolant {
            grid: grid.clone(),
            coefficients,
        })
    }

    pub fn from_real(grid: &Grid, values: &[f64]) -> Result<Self> {
        Self::new(grid, &to_complex(values))
    }

    fn axis_factors(&self, axis: usize, x: f64) -> Vec<Complex64> {
        let n = self.grid.n[axis];
        if axis >= self.grid.dim {
            return vec![Complex64::new(1.0, 0.0)];
        }
        (0..n)
            .map(|i| {
                let k = self.grid.wavenumbers[axis][i];
                if self.grid.is_nyquist(axis, i) {
                    Complex64::new((k * x).cos(), 0.0)
                } else {
                    Complex64::from_polar(1.0, k * x)
                }
            })
            .collect()
    }

    pub fn eval(&self, r: [f64; MAX_DIM]) -> Complex64 {
        let f0 = self.axis_factors(0, r[0]);
        let f1 = self.axis_factors(1, r[1]);
        let f2 = self.axis_factors(2, r[2]);
        let n = self.grid.n;
        let mut acc = Complex64::default();
        for (i0, e0) in f0.iter().enumerate() {
            for (i1, e1) in f1.iter().enumerate() {
                let e01 = e0 * e1;
                let row = (i0 * n[1] + i1) * n[2];
                let mut inner = Complex64::default();
                for (i2, e2) in f2.iter().enumerate() {
                    inner += self.coefficients[row + i2] * e2;
                }
                acc += e01 * inner;
            }
        }
        acc
    }
}

pub fn to_complex(values: &[f64]) -> Vec<Complex64> {
    values.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

pub fn real_part(values: &[Complex64]) -> Vec<f64> {
    values.iter().map(|z| z.re).collect()
}

pub fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn max_err(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).norm()))
    }

    #[test]
    fn unit_circle_grid() {
        let g = make_grid(1, &[8], &[2.0 * PI]).unwrap();
        assert!((g.spacing()[0] - 2.0 * PI / 8.0).abs() < 1e-15);
        let mut ks: Vec<i64> = g.mode_numbers(0);
        ks.sort();
        assert_eq!(ks, vec![-4, -3, -2, -1, 0, 1, 2, 3]);
        for (k, m) in g.wavenumbers(0).iter().zip(g.mode_numbers(0)) {
            assert!((k - m as f64).abs() < 1e-14);
        }
    }

    #[test]
    fn square_grid_spacing() {
        let g = make_grid(2, &[4, 4], &[1.0, 1.0]).unwrap();
        assert_eq!(g.spacing()[..2], [0.25, 0.25]);
        assert_eq!(g.len(), 16);
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(make_grid(1, &[0], &[1.0]).is_err());
        assert!(make_grid(1, &[3], &[1.0]).is_err());
        assert!(make_grid(4, &[8, 8, 8, 8], &[1.0; 4]).is_err());
        assert!(make_grid(1, &[8], &[-1.0]).is_err());
        assert!(make_grid(2, &[8], &[1.0]).is_err());
    }

    #[test]
    fn wavenumbers_antisymmetric_except_nyquist() {
        let g = make_grid(1, &[16], &[3.0]).unwrap();
        let k = g.wavenumbers(0);
        for i in 1..16 {
            if i == 8 {
                continue;
            }
            assert!((k[i] + k[16 - i]).abs() < 1e-12);
        }
        assert!((g.spacing()[0] * 16.0 - 3.0).abs() < 1e-15);
    }

    #[test]
    fn gradient_of_plane_wave() {
        let g = make_grid(1, &[16], &[2.0 * PI]).unwrap();
        let f: Vec<Complex64> = (0..16)
            .map(|i| Complex64::from_polar(1.0, g.coords(i)[0]))
            .collect();
        let expect: Vec<Complex64> = f.iter().map(|z| Complex64::i() * z).collect();
        let d = g.gradient(&f).unwrap();
        assert!(max_err(&d[0], &expect) <= 1e-12);
    }

    #[test]
    fn gradient_of_sin3x() {
        let g = make_grid(1, &[16], &[2.0 * PI]).unwrap();
        let f: Vec<f64> = (0..16).map(|i| (3.0 * g.coords(i)[0]).sin()).collect();
        let d = g.derivative_real(&f, 0).unwrap();
        for (i, v) in d.iter().enumerate() {
            assert!((v - 3.0 * (3.0 * g.coords(i)[0]).cos()).abs() <= 1e-12);
        }
    }

    #[test]
    fn periodized_gaussian_derivatives() {
        let l = 20.0;
        let g = make_grid(1, &[128], &[l]).unwrap();
        let xs: Vec<f64> = (0..128).map(|i| g.coords(i)[0] - l / 2.0).collect();
        let f: Vec<f64> = xs.iter().map(|x| (-x * x).exp()).collect();
        let d = g.derivative_real(&f, 0).unwrap();
        let lap = g.laplacian_real(&f).unwrap();
        for (i, x) in xs.iter().enumerate() {
            let e = (-x * x).exp();
            assert!((d[i] + 2.0 * x * e).abs() <= 1e-9);
            assert!((lap[i] - (4.0 * x * x - 2.0) * e).abs() <= 1e-8);
        }
    }

    #[test]
    fn laplacian_simple_cases() {
        let g = make_grid(1, &[32], &[2.0 * PI]).unwrap();
        let f: Vec<Complex64> = (0..32)
            .map(|i| Complex64::from_polar(1.0, 2.0 * g.coords(i)[0]))
            .collect();
        let lap = g.laplacian(&f).unwrap();
        let expect: Vec<Complex64> = f.iter().map(|z| -4.0 * z).collect();
        assert!(max_err(&lap, &expect) <= 1e-12);
        let c = vec![Complex64::new(2.5, -1.0); 32];
        assert!(max_err(&g.laplacian(&c).unwrap(), &vec![Complex64::default(); 32]) <= 1e-13);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let g = make_grid(1, &[16], &[1.0]).unwrap();
        assert!(matches!(
            g.gradient(&[Complex64::default(); 8]),
            Err(Error::ShapeMismatch { expected: 16, actual: 8 })
        ));
    }

    #[test]
    fn finite_difference_agrees_on_smooth_field() {
        let g = make_grid(1, &[512], &[2.0 * PI]).unwrap();
        let f: Vec<f64> = (0..512).map(|i| g.coords(i)[0].sin()).collect();
        let fd = g.fd_derivative_real(&f, 0).unwrap();
        let sp = g.derivative_real(&f, 0).unwrap();
        let h = g.spacing()[0];
        for (a, b) in fd.iter().zip(&sp) {
            assert!((a - b).abs() < h * h);
        }
    }

    #[test]
    fn spectral_interpolant_reproduces_band_limited_field() {
        let g = make_grid(2, &[16, 8], &[2.0 * PI, 1.0]).unwrap();
        let f = |r: [f64; 3]| (2.0 * r[0]).sin() * (2.0 * PI * r[1]).cos() + 0.5;
        let v: Vec<f64> = (0..g.len()).map(|i| f(g.coords(i))).collect();
        let s = SpectralInterpolant::from_real(&g, &v).unwrap();
        for r in [[0.3, 0.71, 0.0], [5.9, 0.05, 0.0]] {
            assert!((s.eval(r).re - f(r)).abs() < 1e-12);
        }
    }

    #[test]
    fn cubic_interpolation_is_exact_for_cubics_inside() {
        let g = make_grid(1, &[64], &[10.0]).unwrap();
        let p = |x: f64| 0.1 * x * x * x - x + 2.0;
        let v: Vec<f64> = (0..64).map(|i| p(g.coords(i)[0])).collect();
        let x = 4.321;
        let got = g.cubic_interpolate(&v, [x, 0.0, 0.0], None).unwrap();
        assert!((got - p(x)).abs() < 1e-12);
    }

    fn random_grid3(seed: u64) -> (Grid, ChaCha8Rng) {
        let g = make_grid(3, &[16, 16, 16], &[2.0 * PI, 3.0, 5.0]).unwrap();
        (g, ChaCha8Rng::seed_from_u64(seed))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]

        #[test]
        fn gradient_then_divergence_is_laplacian(seed in any::<u64>()) {
            let (g, mut rng) = random_grid3(seed);
            let f = g.random_band_limited_real(&mut rng);
            let grad = g.gradient_real(&f).unwrap();
            let div = g.divergence_real([&grad[0], &grad[1], &grad[2]]).unwrap();
            let lap = g.laplacian_real(&f).unwrap();
            let err = div.iter().zip(&lap).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            prop_assert!(err <= 1e-11, "err {err}");
        }

        #[test]
        fn divergence_of_curl_vanishes(seed in any::<u64>()) {
            let (g, mut rng) = random_grid3(seed);
            let a: Vec<Vec<f64>> = (0..3).map(|_| g.random_band_limited_real(&mut rng)).collect();
            let c = g.curl_real([&a[0], &a[1], &a[2]]).unwrap();
            let div = g.divergence_real([&c[0], &c[1], &c[2]]).unwrap();
            prop_assert!(max_abs(&div) <= 1e-11);
        }

        #[test]
        fn curl_of_gradient_vanishes(seed in any::<u64>()) {
            let (g, mut rng) = random_grid3(seed);
            let f = g.random_band_limited_real(&mut rng);
            let grad = g.gradient_real(&f).unwrap();
            let c = g.curl_real([&grad[0], &grad[1], &grad[2]]).unwrap();
            for comp in &c {
                prop_assert!(max_abs(comp) <= 1e-11);
            }
        }
    }
}
