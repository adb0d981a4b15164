//! Pilot-wave paths, integrated two ways: advection by the flow velocity
//! `dr/dt = <v>(r, t)`, and the force law `dv/dt = -gamma (E + v x B)`.
//!
//! Fields are interpolated linearly in time between snapshots and
//! spectrally or with a 4-point Lagrange stencil in space. A path that
//! enters a node region keeps its last valid velocity and is flagged.

mod sampling;

pub use sampling::{is_separable, sample_density};

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decomposition::velocity;
use crate::diagnostics::{EMFields, FieldFamily, FlowSnapshot};
use crate::error::{Error, Result};
use crate::fields::{VectorField, NODE_EPSILON};
use crate::lattice::{Grid, SpectralInterpolant, MAX_DIM};

/// Spatial interpolation between lattice points.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    /// Trigonometric interpolant; exact for band-limited periodic fields.
    #[default]
    Spectral,
    /// 4-point Lagrange stencil per axis; local and exact for cubics.
    Cubic,
}

#[derive(Clone, Debug)]
enum Component {
    Zero,
    Spectral(SpectralInterpolant),
    Cubic(Vec<f64>),
}

/// One vector field prepared for off-grid evaluation.
#[derive(Clone, Debug)]
struct VectorSampler {
    grid: Grid,
    comps: [Component; 3],
    affine: [[f64; 3]; 3],
    center: [f64; MAX_DIM],
    mask: Option<Vec<bool>>,
}

impl VectorSampler {
    fn new(field: &VectorField, mask: Option<Vec<bool>>, interpolation: Interpolation) -> Result<Self> {
        let grid = field.grid().clone();
        if let Some(m) = &mask {
            grid.check_len(m.len())?;
        }
        let mut comps = [Component::Zero, Component::Zero, Component::Zero];
        for (i, slot) in comps.iter_mut().enumerate() {
            let p = field.periodic_part(i);
            if p.iter().all(|&x| x == 0.0) {
                continue;
            }
            *slot = match interpolation {
                Interpolation::Spectral => Component::Spectral(SpectralInterpolant::from_real(&grid, &p)?),
                Interpolation::Cubic => Component::Cubic(p),
            };
        }
        Ok(VectorSampler {
            grid: grid.clone(),
            comps,
            affine: field.affine(),
            center: grid.center(),
            mask,
        })
    }

    fn eval(&self, r: [f64; MAX_DIM]) -> Option<[f64; 3]> {
        let r = self.grid.wrap(r);
        let mask = self.mask.as_deref();
        let mut stencil_checked = false;
        let mut out = [0.0; 3];
        for (i, comp) in self.comps.iter().enumerate() {
            out[i] = match comp {
                Component::Zero => 0.0,
                Component::Spectral(s) => s.eval(r).re,
                Component::Cubic(v) => {
                    stencil_checked = true;
                    self.grid.cubic_interpolate(v, r, mask)?
                }
            } + (0..3).map(|j| self.affine[i][j] * (r[j] - self.center[j])).sum::<f64>();
        }
        if let (Some(m), false) = (mask, stencil_checked) {
            if !m[self.grid.nearest_index(r)] {
                return None;
            }
        }
        Some(out)
    }
}

/// A vector field sampled at increasing times.
#[derive(Clone, Debug)]
pub struct FieldSeries {
    grid: Grid,
    times: Vec<f64>,
    samplers: Vec<VectorSampler>,
}

/// Flow velocity `<v>` over time.
pub type VelocitySeries = FieldSeries;

impl FieldSeries {
    /// Snapshots `(t, field, node mask)` with strictly increasing `t`.
    pub fn new(series: Vec<(f64, VectorField, Option<Vec<bool>>)>, interpolation: Interpolation) -> Result<Self> {
        let Some(first) = series.first() else {
            return Err(Error::InsufficientSnapshots { required: 1, actual: 0 });
        };
        let grid = first.1.grid().clone();
        for (i, w) in series.windows(2).enumerate() {
            if !(w[1].0 > w[0].0) {
                return Err(Error::UnequalSpacing { index: i + 1 });
            }
        }
        let mut times = Vec::with_capacity(series.len());
        let mut samplers = Vec::with_capacity(series.len());
        for (t, field, mask) in series {
            if field.grid() != &grid {
                return Err(Error::GridMismatch);
            }
            times.push(t);
            samplers.push(VectorSampler::new(&field, mask, interpolation)?);
        }
        Ok(FieldSeries { grid, times, samplers })
    }

    /// A time-independent field.
    pub fn constant(field: &VectorField, interpolation: Interpolation) -> Result<Self> {
        Self::new(vec![(0.0, field.clone(), None)], interpolation)
    }

    /// `<v> = J / f` at each flow snapshot, masked at nodes of `f`.
    pub fn from_flow(flows: &[FlowSnapshot], interpolation: Interpolation) -> Result<Self> {
        let series = flows
            .iter()
            .map(|s| {
                let (v, mask) = velocity(&s.j, &s.f, NODE_EPSILON)?;
                Ok((s.time, v, Some(mask)))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(series, interpolation)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn start_time(&self) -> f64 {
        self.times[0]
    }

    pub fn end_time(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    /// Value at `(r, t)`; `None` inside a node region. Clamped outside the time range.
    pub fn eval(&self, r: [f64; MAX_DIM], t: f64) -> Option<[f64; 3]> {
        let n = self.times.len();
        if n == 1 || t <= self.times[0] {
            return self.samplers[0].eval(r);
        }
        if t >= self.times[n - 1] {
            return self.samplers[n - 1].eval(r);
        }
        let j = self.times.partition_point(|&x| x <= t);
        let i = j - 1;
        let w = (t - self.times[i]) / (self.times[j] - self.times[i]);
        let a = self.samplers[i].eval(r)?;
        if w == 0.0 {
            return Some(a);
        }
        let b = self.samplers[j].eval(r)?;
        Some(std::array::from_fn(|k| (1.0 - w) * a[k] + w * b[k]))
    }
}

/// Electric and magnetic fields over time.
#[derive(Clone, Debug)]
pub struct EMSeries {
    pub e: FieldSeries,
    pub b: FieldSeries,
}

impl EMSeries {
    pub fn from_em(series: &[(f64, EMFields)], family: FieldFamily, interpolation: Interpolation) -> Result<Self> {
        let mask = |f: &EMFields| match family {
            FieldFamily::Classical => None,
            _ => Some(f.mask.clone()),
        };
        let e = series
            .iter()
            .map(|(t, f)| (*t, f.family(family).0.clone(), mask(f)))
            .collect();
        let b = series
            .iter()
            .map(|(t, f)| (*t, f.family(family).1.clone(), mask(f)))
            .collect();
        Ok(EMSeries {
            e: FieldSeries::new(e, interpolation)?,
            b: FieldSeries::new(b, interpolation)?,
        })
    }

    pub fn constant(e: &VectorField, b: &VectorField, interpolation: Interpolation) -> Result<Self> {
        if e.grid() != b.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(EMSeries {
            e: FieldSeries::constant(e, interpolation)?,
            b: FieldSeries::constant(b, interpolation)?,
        })
    }

    fn eval(&self, r: [f64; MAX_DIM], t: f64) -> Option<([f64; 3], [f64; 3])> {
        Some((self.e.eval(r, t)?, self.b.eval(r, t)?))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaskEvent {
    pub time: f64,
    pub reason: String,
}

/// A sampled trajectory. Positions are wrapped into the periodic box.
#[derive(Clone, Debug, PartialEq)]
pub struct Path {
    pub dim: usize,
    pub times: Vec<f64>,
    pub positions: Vec<[f64; 3]>,
    pub velocities: Vec<[f64; 3]>,
    /// Whether the velocity at each sample was frozen inside a node region.
    pub masked: Vec<bool>,
    pub mask_events: Vec<MaskEvent>,
}

impl Path {
    fn start(dim: usize, steps: usize) -> Self {
        Path {
            dim,
            times: Vec::with_capacity(steps + 1),
            positions: Vec::with_capacity(steps + 1),
            velocities: Vec::with_capacity(steps + 1),
            masked: Vec::with_capacity(steps + 1),
            mask_events: Vec::new(),
        }
    }

    fn push(&mut self, t: f64, r: [f64; 3], v: [f64; 3], masked: bool, reason: &str) {
        if masked && !self.masked.last().copied().unwrap_or(false) {
            self.mask_events.push(MaskEvent {
                time: t,
                reason: reason.to_string(),
            });
        }
        self.times.push(t);
        self.positions.push(r);
        self.velocities.push(v);
        self.masked.push(masked);
    }

    pub fn final_position(&self) -> [f64; 3] {
        self.positions[self.positions.len() - 1]
    }

    /// CSV with columns `t, x[, y, z], vx[, vy, vz], masked`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        const AXES: [&str; 3] = ["x", "y", "z"];
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend(AXES[..self.dim].iter().map(|a| a.to_string()));
        header.extend(AXES[..self.dim].iter().map(|a| format!("v{a}")));
        header.push("masked".into());
        w.write_record(&header)?;
        for i in 0..self.times.len() {
            let mut row = vec![self.times[i].to_string()];
            row.extend(self.positions[i][..self.dim].iter().map(|x| x.to_string()));
            row.extend(self.velocities[i][..self.dim].iter().map(|x| x.to_string()));
            row.push(u8::from(self.masked[i]).to_string());
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }
}

/// Largest minimum-image distance between matching samples of two paths.
pub fn path_deviation(a: &Path, b: &Path, grid: &Grid) -> Result<f64> {
    if a.positions.len() != b.positions.len() {
        return Err(Error::ShapeMismatch {
            expected: a.positions.len(),
            actual: b.positions.len(),
        });
    }
    Ok(a.positions
        .iter()
        .zip(&b.positions)
        .map(|(p, q)| periodic_distance(grid, *p, *q))
        .fold(0.0, f64::max))
}

/// Minimum-image distance on the periodic box.
pub fn periodic_distance(grid: &Grid, p: [f64; 3], q: [f64; 3]) -> f64 {
    let l = grid.length();
    (0..MAX_DIM)
        .map(|k| {
            let mut d = p[k] - q[k];
            if k < grid.dim() {
                d -= l[k] * (d / l[k]).round();
            }
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

fn check_step(dt: f64) -> Result<()> {
    if dt.is_finite() && dt > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")))
    }
}

fn axpy(r: [f64; 3], a: f64, v: [f64; 3]) -> [f64; 3] {
    [r[0] + a * v[0], r[1] + a * v[1], r[2] + a * v[2]]
}

fn rk4_combine(k: [[f64; 3]; 4]) -> [f64; 3] {
    std::array::from_fn(|i| (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]) / 6.0)
}

fn flow_step(series: &FieldSeries, r: [f64; 3], t: f64, dt: f64, k1: [f64; 3]) -> Option<[f64; 3]> {
    let k2 = series.eval(axpy(r, 0.5 * dt, k1), t + 0.5 * dt)?;
    let k3 = series.eval(axpy(r, 0.5 * dt, k2), t + 0.5 * dt)?;
    let k4 = series.eval(axpy(r, dt, k3), t + dt)?;
    Some(axpy(r, dt, rk4_combine([k1, k2, k3, k4])))
}

fn advect_inner(
    r0: [f64; 3],
    series: &FieldSeries,
    dt: f64,
    steps: usize,
    mut record: impl FnMut(f64, [f64; 3], [f64; 3], bool),
) {
    let grid = series.grid();
    let mut t = series.start_time();
    let mut r = grid.wrap(r0);
    let mut here = series.eval(r, t);
    let mut frozen = here.unwrap_or([0.0; 3]);
    record(t, r, frozen, here.is_none());
    for n in 1..=steps {
        let next = here.and_then(|k1| flow_step(series, r, t, dt, k1));
        r = grid.wrap(next.unwrap_or_else(|| axpy(r, dt, frozen)));
        t = series.start_time() + n as f64 * dt;
        here = series.eval(r, t);
        if let Some(v) = here {
            frozen = v;
        }
        record(t, r, frozen, here.is_none() || next.is_none());
    }
}

/// RK4 path of `dr/dt = <v>(r, t)` starting at the series' first time.
pub fn advect(r0: [f64; 3], series: &VelocitySeries, dt: f64, steps: usize) -> Result<Path> {
    check_step(dt)?;
    let mut path = Path::start(series.grid().dim(), steps);
    advect_inner(r0, series, dt, steps, |t, r, v, m| {
        path.push(t, r, v, m, "entered node region of the flow velocity")
    });
    Ok(path)
}

/// Final position of an advected sample and whether it ever froze.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Endpoint {
    pub position: [f64; 3],
    pub masked: bool,
}

/// Advects many starting points in parallel.
pub fn advect_ensemble(starts: &[[f64; 3]], series: &VelocitySeries, dt: f64, steps: usize) -> Result<Vec<Path>> {
    check_step(dt)?;
    starts.par_iter().map(|r0| advect(*r0, series, dt, steps)).collect()
}

/// Advects many starting points in parallel, keeping only the endpoints.
pub fn advect_endpoints(
    starts: &[[f64; 3]],
    series: &VelocitySeries,
    dt: f64,
    steps: usize,
) -> Result<Vec<Endpoint>> {
    check_step(dt)?;
    Ok(starts
        .par_iter()
        .map(|r0| {
            let mut end = Endpoint {
                position: *r0,
                masked: false,
            };
            advect_inner(*r0, series, dt, steps, |_, r, _, m| {
                end.position = r;
                end.masked |= m;
            });
            end
        })
        .collect())
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// RK4 path of `dr/dt = v`, `dv/dt = -gamma (E(r, t) + v x B(r, t))`.
///
/// Starts at the first time of the electric series.
pub fn force_path(
    r0: [f64; 3],
    v0: [f64; 3],
    em: &EMSeries,
    gamma: f64,
    dt: f64,
    steps: usize,
) -> Result<Path> {
    check_step(dt)?;
    let grid = em.e.grid();
    if em.b.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let accel = |r: [f64; 3], v: [f64; 3], t: f64| -> Option<[f64; 3]> {
        let (e, b) = em.eval(r, t)?;
        let vxb = cross(v, b);
        Some(std::array::from_fn(|i| -gamma * (e[i] + vxb[i])))
    };
    let t0 = em.e.start_time();
    let mut path = Path::start(grid.dim(), steps);
    let mut r = grid.wrap(r0);
    let mut v = v0;
    let reason = "entered node region of the field series";
    path.push(t0, r, v, accel(r, v, t0).is_none(), reason);
    for n in 1..=steps {
        let t = t0 + (n - 1) as f64 * dt;
        let h = 0.5 * dt;
        let step = (|| {
            let a1 = accel(r, v, t)?;
            let (r2, v2) = (axpy(r, h, v), axpy(v, h, a1));
            let a2 = accel(r2, v2, t + h)?;
            let (r3, v3) = (axpy(r, h, v2), axpy(v, h, a2));
            let a3 = accel(r3, v3, t + h)?;
            let (r4, v4) = (axpy(r, dt, v3), axpy(v, dt, a3));
            let a4 = accel(r4, v4, t + dt)?;
            Some((
                axpy(r, dt, rk4_combine([v, v2, v3, v4])),
                axpy(v, dt, rk4_combine([a1, a2, a3, a4])),
            ))
        })();
        let masked = step.is_none();
        match step {
            Some((rn, vn)) => {
                r = rn;
                v = vn;
            }
            None => r = axpy(r, dt, v),
        }
        r = grid.wrap(r);
        let t_new = t0 + n as f64 * dt;
        path.push(t_new, r, v, masked || accel(r, v, t_new).is_none(), reason);
    }
    Ok(path)
}
