//! Field containers sampled on a [`Grid`], density and phase extraction,
//! and the `.qfs` binary snapshot format.
//!
//! Vector fields and scalar potentials may carry a constant affine part
//! (a uniform Jacobian or slope about the box center). Their samples hold
//! the full value; derivatives treat the affine part exactly and the
//! remainder spectrally. This is what lets a uniform magnetic field or a
//! linear potential live on a periodic lattice.

use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{Grid, MAX_DIM};

/// Points with `f <= NODE_EPSILON * max f` are treated as nodes.
pub const NODE_EPSILON: f64 = 1e-8;

/// Validity mask: `true` where `f > eps * max f`.
pub fn node_mask(f: &[f64], eps: f64) -> Result<Vec<bool>> {
    let peak = f.iter().fold(0.0f64, |m, &x| m.max(x));
    if !(peak > 0.0) {
        return Err(Error::AllMasked);
    }
    let threshold = eps * peak;
    Ok(f.iter().map(|&x| x > threshold).collect())
}

pub fn mask_fraction(mask: &[bool]) -> f64 {
    if mask.is_empty() {
        return 0.0;
    }
    mask.iter().filter(|&&m| !m).count() as f64 / mask.len() as f64
}

/// A field with one or more complex components on a shared grid.
pub trait MultiComponent {
    fn grid(&self) -> &Grid;
    fn components(&self) -> &[Vec<Complex64>];

    /// `sum_i |psi_i|^2` pointwise.
    fn density(&self) -> Vec<f64> {
        let comps = self.components();
        let mut f = vec![0.0; self.grid().len()];
        for c in comps {
            for (d, z) in f.iter_mut().zip(c) {
                *d += z.norm_sqr();
            }
        }
        f
    }

    /// `sum |psi|^2 dV` over the box.
    fn norm_squared(&self) -> f64 {
        self.density().iter().sum::<f64>() * self.grid().cell_volume()
    }

    fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }
}

fn check_components(grid: &Grid, comps: &[Vec<Complex64>]) -> Result<()> {
    for c in comps {
        grid.check_len(c.len())?;
    }
    Ok(())
}

/// Complex scalar field `Psi`.
#[derive(Clone, Debug)]
pub struct ComplexScalarField {
    grid: Grid,
    values: [Vec<Complex64>; 1],
}

impl ComplexScalarField {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn new(grid: &Grid, values: Vec<Complex64>) -> Result<Self> {
        grid.check_len(values.len())?;
        Ok(ComplexScalarField {
            grid: grid.clone(),
            values: [values],
        })
    }

    pub fn from_fn<F: Fn([f64; MAX_DIM]) -> Complex64>(grid: &Grid, f: F) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.coords(i))).collect();
        ComplexScalarField {
            grid: grid.clone(),
            values: [values],
        }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values[0]
    }

    pub fn values_mut(&mut self) -> &mut Vec<Complex64> {
        &mut self.values[0]
    }

    pub fn into_values(self) -> Vec<Complex64> {
        let [v] = self.values;
        v
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        ComplexScalarField {
            grid: self.grid.clone(),
            values: [self.values[0].iter().map(|z| z * c).collect()],
        }
    }

    /// Unwrapped phase; fails if any point is a node.
    pub fn phase(&self) -> Result<Vec<f64>> {
        let (phase, mask) = self.phase_masked(NODE_EPSILON)?;
        let bad: Vec<usize> = mask
            .iter()
            .enumerate()
            .filter(|(_, &m)| !m)
            .map(|(i, _)| i)
            .collect();
        if bad.is_empty() {
            Ok(phase)
        } else {
            Err(Error::Node {
                count: bad.len(),
                first: bad.into_iter().take(8).collect(),
            })
        }
    }

    /// Unwrapped phase on the unmasked set, with the node mask.
    ///
    /// Masked points keep their wrapped argument.
    pub fn phase_masked(&self, eps: f64) -> Result<(Vec<f64>, Vec<bool>)> {
        let mask = node_mask(&self.density(), eps)?;
        let mut phase: Vec<f64> = self.values[0].iter().map(|z| z.arg()).collect();
        unwrap_phase(&self.grid, &mut phase, &mask);
        Ok((phase, mask))
    }

    /// Branch-free phase gradient `Im(Psi* grad Psi) / f`, with the node mask.
    pub fn phase_gradient(&self, eps: f64) -> Result<(Vec<Vec<f64>>, Vec<bool>)> {
        let f = self.density();
        let mask = node_mask(&f, eps)?;
        let grads = self.grid.gradient(&self.values[0])?;
        let out = grads
            .iter()
            .map(|g| {
                g.iter()
                    .zip(&self.values[0])
                    .zip(&f)
                    .zip(&mask)
                    .map(|(((d, z), &fi), &ok)| if ok { (z.conj() * d).im / fi } else { 0.0 })
                    .collect()
            })
            .collect();
        Ok((out, mask))
    }
}

impl MultiComponent for ComplexScalarField {
    fn grid(&self) -> &Grid {
        &self.grid
    }
    fn components(&self) -> &[Vec<Complex64>] {
        &self.values
    }
}

/// Line-by-line unwrapping along each axis in turn, skipping masked points.
fn unwrap_phase(grid: &Grid, phase: &mut [f64], mask: &[bool]) {
    let n = grid.n();
    let mut unwrap_line = |indices: &mut dyn Iterator<Item = usize>| {
        let mut prev: Option<usize> = None;
        for idx in indices {
            if !mask[idx] {
                continue;
            }
            if let Some(p) = prev {
                let d = phase[idx] - phase[p];
                phase[idx] -= 2.0 * PI * (d / (2.0 * PI)).round();
            }
            prev = Some(idx);
        }
    };
    unwrap_line(&mut (0..n[0]).map(|i| grid.index([i, 0, 0])));
    if grid.dim() >= 2 {
        for i0 in 0..n[0] {
            unwrap_line(&mut (0..n[1]).map(|i| grid.index([i0, i, 0])));
        }
    }
    if grid.dim() == 3 {
        for i0 in 0..n[0] {
            for i1 in 0..n[1] {
                unwrap_line(&mut (0..n[2]).map(|i| grid.index([i0, i1, i])));
            }
        }
    }
}

/// Two-component spinor field.
#[derive(Clone, Debug)]
pub struct SpinorField {
    grid: Grid,
    components: [Vec<Complex64>; 2],
}

impl SpinorField {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn new(grid: &Grid, components: [Vec<Complex64>; 2]) -> Result<Self> {
        check_components(grid, &components)?;
        Ok(SpinorField {
            grid: grid.clone(),
            components,
        })
    }

    pub fn from_fn<F: Fn([f64; MAX_DIM]) -> [Complex64; 2]>(grid: &Grid, f: F) -> Self {
        let mut comps = [Vec::with_capacity(grid.len()), Vec::with_capacity(grid.len())];
        for i in 0..grid.len() {
            let v = f(grid.coords(i));
            comps[0].push(v[0]);
            comps[1].push(v[1]);
        }
        SpinorField {
            grid: grid.clone(),
            components: comps,
        }
    }

    pub fn component(&self, i: usize) -> &[Complex64] {
        &self.components[i]
    }

    pub fn components_mut(&mut self) -> &mut [Vec<Complex64>; 2] {
        &mut self.components
    }

    /// Box-integrated expectation `<psi| sigma_k |psi>` for k = 1..3.
    pub fn spin_expectation(&self) -> [f64; 3] {
        let dv = self.grid.cell_volume();
        let mut s = [0.0; 3];
        for (a, b) in self.components[0].iter().zip(&self.components[1]) {
            let ab = a.conj() * b;
            s[0] += 2.0 * ab.re;
            s[1] += 2.0 * ab.im;
            s[2] += a.norm_sqr() - b.norm_sqr();
        }
        s.map(|x| x * dv)
    }
}

impl MultiComponent for SpinorField {
    fn grid(&self) -> &Grid {
        &self.grid
    }
    fn components(&self) -> &[Vec<Complex64>] {
        &self.components
    }
}

/// Four-component bispinor `(theta, eta)`.
#[derive(Clone, Debug)]
pub struct BispinorField {
    grid: Grid,
    components: [Vec<Complex64>; 4],
}

impl BispinorField {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn new(grid: &Grid, components: [Vec<Complex64>; 4]) -> Result<Self> {
        check_components(grid, &components)?;
        Ok(BispinorField {
            grid: grid.clone(),
            components,
        })
    }

    pub fn from_fn<F: Fn([f64; MAX_DIM]) -> [Complex64; 4]>(grid: &Grid, f: F) -> Self {
        let mut comps: [Vec<Complex64>; 4] = Default::default();
        for i in 0..grid.len() {
            let v = f(grid.coords(i));
            for (c, x) in comps.iter_mut().zip(v) {
                c.push(x);
            }
        }
        BispinorField {
            grid: grid.clone(),
            components: comps,
        }
    }

    pub fn component(&self, i: usize) -> &[Complex64] {
        &self.components[i]
    }

    pub fn components_mut(&mut self) -> &mut [Vec<Complex64>; 4] {
        &mut self.components
    }

    /// The four components at one lattice point.
    pub fn at(&self, idx: usize) -> [Complex64; 4] {
        [
            self.components[0][idx],
            self.components[1][idx],
            self.components[2][idx],
            self.components[3][idx],
        ]
    }
}

impl MultiComponent for BispinorField {
    fn grid(&self) -> &Grid {
        &self.grid
    }
    fn components(&self) -> &[Vec<Complex64>] {
        &self.components
    }
}

/// Real three-component vector field with an optional uniform Jacobian.
///
/// `affine[i][j]` is the constant `d v_i / d x_j` of the non-periodic part,
/// measured about the box center. Fields are constant along absent axes,
/// so columns for those axes must vanish.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    grid: Grid,
    components: [Vec<f64>; 3],
    affine: [[f64; 3]; 3],
}

impl VectorField {
    pub fn new(grid: &Grid, components: [Vec<f64>; 3]) -> Result<Self> {
        for c in &components {
            grid.check_len(c.len())?;
        }
        Ok(VectorField {
            grid: grid.clone(),
            components,
            affine: [[0.0; 3]; 3],
        })
    }

    /// Builds `periodic + affine * (r - center)`.
    pub fn from_periodic_and_affine(
        grid: &Grid,
        periodic: [Vec<f64>; 3],
        affine: [[f64; 3]; 3],
    ) -> Result<Self> {
        for (i, row) in affine.iter().enumerate() {
            for (j, &a) in row.iter().enumerate() {
                if j >= grid.dim() && a != 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "affine entry [{i}][{j}] refers to an absent axis"
                    )));
                }
            }
        }
        let mut components = periodic;
        for c in &components {
            grid.check_len(c.len())?;
        }
        let center = grid.center();
        for idx in 0..grid.len() {
            let r = grid.coords(idx);
            for (i, comp) in components.iter_mut().enumerate() {
                comp[idx] += (0..3).map(|j| affine[i][j] * (r[j] - center[j])).sum::<f64>();
            }
        }
        Ok(VectorField {
            grid: grid.clone(),
            components,
            affine,
        })
    }

    pub fn zeros(grid: &Grid) -> Self {
        let z = vec![0.0; grid.len()];
        VectorField {
            grid: grid.clone(),
            components: [z.clone(), z.clone(), z],
            affine: [[0.0; 3]; 3],
        }
    }

    pub fn uniform(grid: &Grid, a: [f64; 3]) -> Self {
        VectorField {
            grid: grid.clone(),
            components: a.map(|x| vec![x; grid.len()]),
            affine: [[0.0; 3]; 3],
        }
    }

    pub fn from_fn<F: Fn([f64; MAX_DIM]) -> [f64; 3]>(grid: &Grid, f: F) -> Self {
        let mut comps: [Vec<f64>; 3] = Default::default();
        for i in 0..grid.len() {
            let v = f(grid.coords(i));
            for (c, x) in comps.iter_mut().zip(v) {
                c.push(x);
            }
        }
        VectorField {
            grid: grid.clone(),
            components: comps,
            affine: [[0.0; 3]; 3],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn component(&self, i: usize) -> &[f64] {
        &self.components[i]
    }

    pub fn components(&self) -> &[Vec<f64>; 3] {
        &self.components
    }

    pub fn affine(&self) -> [[f64; 3]; 3] {
        self.affine
    }

    pub fn has_affine(&self) -> bool {
        self.affine.iter().flatten().any(|&a| a != 0.0)
    }

    pub fn at(&self, idx: usize) -> [f64; 3] {
        [
            self.components[0][idx],
            self.components[1][idx],
            self.components[2][idx],
        ]
    }

    /// Component `i` with the affine part removed.
    pub fn periodic_part(&self, i: usize) -> Vec<f64> {
        let row = self.affine[i];
        if row.iter().all(|&a| a == 0.0) {
            return self.components[i].clone();
        }
        let center = self.grid.center();
        self.components[i]
            .iter()
            .enumerate()
            .map(|(idx, v)| {
                let r = self.grid.coords(idx);
                v - (0..3).map(|j| row[j] * (r[j] - center[j])).sum::<f64>()
            })
            .collect()
    }

    /// Value at an arbitrary point given the interpolated periodic parts.
    pub fn affine_offset(&self, i: usize, r: [f64; MAX_DIM]) -> f64 {
        let center = self.grid.center();
        (0..3).map(|j| self.affine[i][j] * (r[j] - center[j])).sum()
    }

    /// `d v_i / d x_j` pointwise.
    pub fn partial(&self, i: usize, j: usize) -> Result<Vec<f64>> {
        let d = self.grid.derivative_real(&self.periodic_part(i), j)?;
        let a = self.affine[i][j];
        Ok(d.into_iter().map(|x| x + a).collect())
    }

    pub fn divergence(&self) -> Result<Vec<f64>> {
        let p: Vec<Vec<f64>> = (0..3).map(|i| self.periodic_part(i)).collect();
        let trace: f64 = (0..3).map(|i| self.affine[i][i]).sum();
        let d = self.grid.divergence_real([&p[0], &p[1], &p[2]])?;
        Ok(d.into_iter().map(|x| x + trace).collect())
    }

    pub fn curl(&self) -> Result<VectorField> {
        let p: Vec<Vec<f64>> = (0..3).map(|i| self.periodic_part(i)).collect();
        let mut c = self.grid.curl_real([&p[0], &p[1], &p[2]])?;
        let a = self.affine;
        let uniform = [a[2][1] - a[1][2], a[0][2] - a[2][0], a[1][0] - a[0][1]];
        for (comp, u) in c.iter_mut().zip(uniform) {
            if u != 0.0 {
                comp.iter_mut().for_each(|x| *x += u);
            }
        }
        VectorField::new(&self.grid, c)
    }

    /// `|v|^2` pointwise.
    pub fn norm_squared(&self) -> Vec<f64> {
        (0..self.grid.len())
            .map(|i| self.at(i).iter().map(|x| x * x).sum())
            .collect()
    }

    pub fn add(&self, other: &VectorField) -> Result<VectorField> {
        self.combine(other, 1.0, 1.0)
    }

    pub fn sub(&self, other: &VectorField) -> Result<VectorField> {
        self.combine(other, 1.0, -1.0)
    }

    pub fn scaled(&self, s: f64) -> VectorField {
        VectorField {
            grid: self.grid.clone(),
            components: self.components.clone().map(|c| c.into_iter().map(|x| x * s).collect()),
            affine: self.affine.map(|row| row.map(|x| x * s)),
        }
    }

    /// `a * self + b * other`.
    pub fn combine(&self, other: &VectorField, a: f64, b: f64) -> Result<VectorField> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let mut components: [Vec<f64>; 3] = Default::default();
        for (i, c) in components.iter_mut().enumerate() {
            *c = self.components[i]
                .iter()
                .zip(&other.components[i])
                .map(|(x, y)| a * x + b * y)
                .collect();
        }
        let mut affine = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                affine[i][j] = a * self.affine[i][j] + b * other.affine[i][j];
            }
        }
        Ok(VectorField {
            grid: self.grid.clone(),
            components,
            affine,
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.components
            .iter()
            .flatten()
            .fold(0.0f64, |m, x| m.max(x.abs()))
    }
}

/// Real scalar samples with an optional uniform slope about the box center.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
    slope: [f64; 3],
}

impl ScalarField {
    pub fn new(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        grid.check_len(values.len())?;
        Ok(ScalarField {
            grid: grid.clone(),
            values,
            slope: [0.0; 3],
        })
    }

    pub fn zeros(grid: &Grid) -> Self {
        ScalarField {
            grid: grid.clone(),
            values: vec![0.0; grid.len()],
            slope: [0.0; 3],
        }
    }

    pub fn from_fn<F: Fn([f64; MAX_DIM]) -> f64>(grid: &Grid, f: F) -> Self {
        ScalarField {
            grid: grid.clone(),
            values: (0..grid.len()).map(|i| f(grid.coords(i))).collect(),
            slope: [0.0; 3],
        }
    }

    /// `periodic + slope . (r - center)`.
    pub fn from_periodic_and_slope(grid: &Grid, periodic: Vec<f64>, slope: [f64; 3]) -> Result<Self> {
        grid.check_len(periodic.len())?;
        if slope.iter().enumerate().any(|(j, &s)| j >= grid.dim() && s != 0.0) {
            return Err(Error::InvalidParameter("slope along an absent axis".into()));
        }
        let center = grid.center();
        let values = periodic
            .into_iter()
            .enumerate()
            .map(|(idx, v)| {
                let r = grid.coords(idx);
                v + (0..3).map(|j| slope[j] * (r[j] - center[j])).sum::<f64>()
            })
            .collect();
        Ok(ScalarField {
            grid: grid.clone(),
            values,
            slope,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn slope(&self) -> [f64; 3] {
        self.slope
    }

    pub fn periodic_part(&self) -> Vec<f64> {
        if self.slope.iter().all(|&s| s == 0.0) {
            return self.values.clone();
        }
        let center = self.grid.center();
        self.values
            .iter()
            .enumerate()
            .map(|(idx, v)| {
                let r = self.grid.coords(idx);
                v - (0..3).map(|j| self.slope[j] * (r[j] - center[j])).sum::<f64>()
            })
            .collect()
    }

    pub fn gradient(&self) -> Result<VectorField> {
        let g = self.grid.gradient_real(&self.periodic_part())?;
        let mut comps: [Vec<f64>; 3] = Default::default();
        for (axis, c) in comps.iter_mut().enumerate() {
            *c = match g.get(axis) {
                Some(d) => d.iter().map(|x| x + self.slope[axis]).collect(),
                None => vec![0.0; self.grid.len()],
            };
        }
        VectorField::new(&self.grid, comps)
    }

    pub fn add(&self, other: &ScalarField) -> Result<ScalarField> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(ScalarField {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
            slope: [0, 1, 2].map(|j| self.slope[j] + other.slope[j]),
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }
}

const MAGIC: &[u8; 4] = b"QVFS";
const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 64;

/// Decoded contents of a `.qfs` file.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub grid: Grid,
    pub time: f64,
    /// `true` when samples were stored as real numbers.
    pub real: bool,
    pub components: Vec<Vec<Complex64>>,
}

impl Snapshot {
    pub fn from_field<F: MultiComponent>(field: &F, time: f64) -> Self {
        Snapshot {
            grid: field.grid().clone(),
            time,
            real: false,
            components: field.components().to_vec(),
        }
    }

    pub fn from_real(grid: &Grid, time: f64, components: &[&[f64]]) -> Result<Self> {
        let mut comps = Vec::with_capacity(components.len());
        for c in components {
            grid.check_len(c.len())?;
            comps.push(c.iter().map(|&x| Complex64::new(x, 0.0)).collect());
        }
        Ok(Snapshot {
            grid: grid.clone(),
            time,
            real: true,
            components: comps,
        })
    }

    fn expect_components(&self, count: usize) -> Result<()> {
        if self.components.len() != count {
            return Err(Error::SnapshotShape(format!(
                "expected {count} component(s), file has {}",
                self.components.len()
            )));
        }
        Ok(())
    }

    pub fn into_scalar(self) -> Result<ComplexScalarField> {
        self.expect_components(1)?;
        let grid = self.grid;
        let v = self.components.into_iter().next().unwrap_or_default();
        ComplexScalarField::new(&grid, v)
    }

    pub fn into_spinor(self) -> Result<SpinorField> {
        self.expect_components(2)?;
        let mut it = self.components.into_iter();
        let comps = [it.next().unwrap_or_default(), it.next().unwrap_or_default()];
        SpinorField::new(&self.grid, comps)
    }

    pub fn into_bispinor(self) -> Result<BispinorField> {
        self.expect_components(4)?;
        let mut it = self.components.into_iter();
        let comps: [Vec<Complex64>; 4] = std::array::from_fn(|_| it.next().unwrap_or_default());
        BispinorField::new(&self.grid, comps)
    }

    pub fn real_components(&self) -> Vec<Vec<f64>> {
        self.components
            .iter()
            .map(|c| c.iter().map(|z| z.re).collect())
            .collect()
    }

    pub fn encode(&self) -> Vec<u8> {
        let n = self.grid.n();
        let l = self.grid.length();
        let width: u32 = if self.real { 8 } else { 16 };
        let npts = self.grid.len();
        let ncomp = self.components.len();
        let mut buf = Vec::with_capacity(HEADER_LEN + npts * ncomp * width as usize);
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&VERSION.to_le_bytes());
        buf.extend_from_slice(&(self.grid.dim() as u16).to_le_bytes());
        for axis in 0..MAX_DIM {
            buf.extend_from_slice(&(n[axis] as u32).to_le_bytes());
        }
        for axis in 0..MAX_DIM {
            let ext = if axis < self.grid.dim() { l[axis] } else { 0.0 };
            buf.extend_from_slice(&ext.to_le_bytes());
        }
        buf.extend_from_slice(&(ncomp as u32).to_le_bytes());
        buf.extend_from_slice(&width.to_le_bytes());
        buf.extend_from_slice(&self.time.to_le_bytes());
        buf.extend_from_slice(&[0u8; 4]);
        debug_assert_eq!(buf.len(), HEADER_LEN);
        for idx in 0..npts {
            for c in &self.components {
                buf.extend_from_slice(&c[idx].re.to_le_bytes());
                if !self.real {
                    buf.extend_from_slice(&c[idx].im.to_le_bytes());
                }
            }
        }
        buf
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Header(format!(
                "file has {} bytes, header needs {HEADER_LEN}",
                bytes.len()
            )));
        }
        if &bytes[0..4] != MAGIC {
            return Err(Error::Header("bad magic".into()));
        }
        let u16_at = |o: usize| u16::from_le_bytes([bytes[o], bytes[o + 1]]);
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let version = u16_at(4);
        if version != VERSION {
            return Err(Error::Header(format!("unsupported version {version}")));
        }
        let dim = u16_at(6) as usize;
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::Header(format!("invalid dimension {dim}")));
        }
        let n: Vec<usize> = (0..dim).map(|a| u32_at(8 + 4 * a) as usize).collect();
        let l: Vec<f64> = (0..dim).map(|a| f64_at(20 + 8 * a)).collect();
        let ncomp = u32_at(44) as usize;
        let width = u32_at(48) as usize;
        let time = f64_at(52);
        let grid = Grid::new(dim, &n, &l).map_err(|e| Error::Header(e.to_string()))?;
        let real = match width {
            8 => true,
            16 => false,
            w => return Err(Error::Header(format!("invalid scalar width {w}"))),
        };
        let npts = grid.len();
        let expected = HEADER_LEN + npts * ncomp * width;
        if bytes.len() != expected {
            return Err(Error::SnapshotShape(format!(
                "payload is {} bytes, header implies {}",
                bytes.len() - HEADER_LEN,
                expected - HEADER_LEN
            )));
        }
        let mut components = vec![Vec::with_capacity(npts); ncomp];
        let mut o = HEADER_LEN;
        for _ in 0..npts {
            for c in components.iter_mut() {
                let re = f64_at(o);
                o += 8;
                let im = if real {
                    0.0
                } else {
                    o += 8;
                    f64_at(o - 8)
                };
                c.push(Complex64::new(re, im));
            }
        }
        Ok(Snapshot {
            grid,
            time,
            real,
            components,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        file.write_all(&self.encode()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::decode(&bytes)
    }
}

pub fn write_snapshot<F: MultiComponent>(field: &F, time: f64, path: &Path) -> Result<()> {
    Snapshot::from_field(field, time).write(path)
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    Snapshot::read(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::make_grid;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid1(n: usize, l: f64) -> Grid {
        make_grid(1, &[n], &[l]).unwrap()
    }

    #[test]
    fn density_examples() {
        let g = grid1(8, 1.0);
        let one = ComplexScalarField::new(&g, vec![Complex64::new(1.0, 0.0); 8]).unwrap();
        assert!(one.density().iter().all(|&f| f == 1.0));
        let s = 1.0 / 2f64.sqrt();
        let sp = SpinorField::from_fn(&g, |_| [Complex64::new(s, 0.0), Complex64::new(0.0, s)]);
        assert!(sp.density().iter().all(|&f| (f - 1.0).abs() < 1e-15));
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::default();
        let b = BispinorField::from_fn(&g, |_| [one, zero, zero, zero]);
        assert!(b.density().iter().all(|&f| f == 1.0));
    }

    #[test]
    fn plane_wave_phase_is_linear() {
        let g = grid1(32, 2.0 * PI);
        let psi = ComplexScalarField::from_fn(&g, |r| Complex64::from_polar(1.0, 3.0 * r[0]));
        let phi = psi.phase().unwrap();
        for (i, p) in phi.iter().enumerate() {
            assert!((p - phi[0] - 3.0 * g.coords(i)[0]).abs() < 1e-12);
        }
        let (grad, _) = psi.phase_gradient(NODE_EPSILON).unwrap();
        assert!(grad[0].iter().all(|d| (d - 3.0).abs() < 1e-12));
    }

    #[test]
    fn real_positive_field_has_zero_phase() {
        let g = grid1(16, 1.0);
        let psi = ComplexScalarField::from_fn(&g, |r| Complex64::new(2.0 + r[0].sin(), 0.0));
        assert!(psi.phase().unwrap().iter().all(|&p| p == 0.0));
    }

    #[test]
    fn modulated_gaussian_phase_slope() {
        let l = 40.0;
        let g = grid1(256, l);
        let psi = ComplexScalarField::from_fn(&g, |r| {
            let x = r[0] - l / 2.0;
            Complex64::from_polar((-x * x / 8.0).exp(), 3.0 * x)
        });
        let (phi, mask) = psi.phase_masked(NODE_EPSILON).unwrap();
        let (grad, _) = psi.phase_gradient(NODE_EPSILON).unwrap();
        let h = g.spacing()[0];
        for i in 1..255 {
            if mask[i - 1] && mask[i] && mask[i + 1] {
                let slope = (phi[i + 1] - phi[i - 1]) / (2.0 * h);
                assert!((slope - 3.0).abs() < 1e-9);
                assert!((grad[0][i] - 3.0).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn node_reported_by_strict_phase() {
        let g = grid1(16, 2.0 * PI);
        let psi = ComplexScalarField::from_fn(&g, |r| Complex64::new(r[0].sin(), 0.0));
        match psi.phase() {
            Err(Error::Node { count, first }) => {
                assert_eq!(count, 2);
                assert_eq!(first, vec![0, 8]);
            }
            other => panic!("expected node error, got {other:?}"),
        }
    }

    #[test]
    fn all_zero_field_is_all_masked() {
        let g = grid1(8, 1.0);
        assert!(matches!(node_mask(&[0.0; 8], NODE_EPSILON), Err(Error::AllMasked)));
        let psi = ComplexScalarField::new(&g, vec![Complex64::default(); 8]).unwrap();
        assert!(matches!(psi.phase(), Err(Error::AllMasked)));
    }

    #[test]
    fn snapshot_round_trip_is_bit_exact() {
        let g = make_grid(2, &[8, 4], &[1.0, 2.5]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let b = BispinorField::new(
            &g,
            std::array::from_fn(|_| g.random_band_limited_complex(&mut rng)),
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.qfs");
        write_snapshot(&b, 0.125, &path).unwrap();
        let s = read_snapshot(&path).unwrap();
        assert_eq!(s.time, 0.125);
        assert_eq!(s.grid, g);
        let back = s.into_bispinor().unwrap();
        for i in 0..4 {
            assert_eq!(back.component(i), b.component(i));
        }
    }

    #[test]
    fn truncated_snapshot_is_header_error() {
        let g = grid1(8, 1.0);
        let psi = ComplexScalarField::new(&g, vec![Complex64::new(1.0, 2.0); 8]).unwrap();
        let bytes = Snapshot::from_field(&psi, 0.0).encode();
        assert!(matches!(Snapshot::decode(&bytes[..40]), Err(Error::Header(_))));
        assert!(matches!(
            Snapshot::decode(&bytes[..bytes.len() - 3]),
            Err(Error::SnapshotShape(_))
        ));
    }

    #[test]
    fn wrong_component_count_is_shape_error() {
        let g = grid1(8, 1.0);
        let psi = ComplexScalarField::new(&g, vec![Complex64::new(1.0, 2.0); 8]).unwrap();
        let s = Snapshot::decode(&Snapshot::from_field(&psi, 0.0).encode()).unwrap();
        assert!(matches!(s.into_spinor(), Err(Error::SnapshotShape(_))));
    }

    #[test]
    fn landau_gauge_curl_is_uniform() {
        let g = make_grid(2, &[16, 16], &[4.0, 4.0]).unwrap();
        let mut aff = [[0.0; 3]; 3];
        aff[1][0] = 2.0;
        let z = vec![0.0; g.len()];
        let a = VectorField::from_periodic_and_affine(&g, [z.clone(), z.clone(), z], aff).unwrap();
        let b = a.curl().unwrap();
        assert!(b.component(2).iter().all(|&x| (x - 2.0).abs() < 1e-13));
        assert!(b.component(0).iter().all(|&x| x.abs() < 1e-13));
        assert!(a.divergence().unwrap().iter().all(|&x| x.abs() < 1e-13));
    }

    #[test]
    fn linear_potential_gradient() {
        let g = grid1(32, 10.0);
        let u = ScalarField::from_periodic_and_slope(&g, vec![0.0; 32], [0.5, 0.0, 0.0]).unwrap();
        let grad = u.gradient().unwrap();
        assert!(grad.component(0).iter().all(|&x| (x - 0.5).abs() < 1e-14));
        assert!((u.values()[16] - 0.0).abs() < 1e-14);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn current_forms_agree(seed in any::<u64>()) {
            let g = make_grid(2, &[32, 32], &[2.0 * PI, 2.0 * PI]).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            // Nodeless: exp of a band-limited complex field.
            let w = g.random_band_limited_complex(&mut rng);
            let mut v: Vec<Complex64> = w.iter().map(|z| (z * 0.5).exp()).collect();
            g.band_limit(&mut v);
            let psi = ComplexScalarField::new(&g, v).unwrap();
            let alpha = -0.5;
            let f = psi.density();
            let grads = g.gradient(psi.values()).unwrap();
            let (phase_grad, _) = psi.phase_gradient(NODE_EPSILON).unwrap();
            for axis in 0..2 {
                for idx in 0..g.len() {
                    let z = psi.values()[idx];
                    let d = grads[axis][idx];
                    let lhs = (Complex64::i() * alpha * (z.conj() * d - z * d.conj())).re;
                    let rhs = -2.0 * alpha * f[idx] * phase_grad[axis][idx];
                    prop_assert!((lhs - rhs).abs() <= 1e-9);
                }
            }
        }

        #[test]
        fn density_is_quadratic(seed in any::<u64>(), re in -3.0..3.0f64, im in -3.0..3.0f64) {
            let g = make_grid(1, &[16], &[1.0]).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let psi = ComplexScalarField::new(&g, g.random_band_limited_complex(&mut rng)).unwrap();
            let c = Complex64::new(re, im);
            let scaled = psi.scaled(c).density();
            for (a, b) in scaled.iter().zip(psi.density()) {
                prop_assert!((a - c.norm_sqr() * b).abs() <= 1e-12 * (1.0 + a.abs()));
            }
        }
    }
}
