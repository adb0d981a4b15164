//! Drawing ensemble starting points from a sampled density.
//!
//! Between lattice points the density is taken as piecewise linear
//! (multilinear in 2D/3D), periodically continued.

use rand::Rng;

use crate::error::{Error, Result};
use crate::lattice::{Grid, MAX_DIM};

const SEPARABILITY_TOL: f64 = 1e-10;
const MAX_REJECTION_TRIES: usize = 10_000;

fn marginals(grid: &Grid, f: &[f64]) -> Vec<Vec<f64>> {
    let n = grid.n();
    let mut out: Vec<Vec<f64>> = (0..grid.dim()).map(|a| vec![0.0; n[a]]).collect();
    for (idx, &v) in f.iter().enumerate() {
        let m = grid.multi_index(idx);
        for (a, marg) in out.iter_mut().enumerate() {
            marg[m[a]] += v;
        }
    }
    out
}

/// Whether `f` is (to roundoff) a product of one-dimensional factors.
pub fn is_separable(grid: &Grid, f: &[f64]) -> bool {
    if grid.dim() == 1 {
        return true;
    }
    let total: f64 = f.iter().sum();
    if !(total > 0.0) {
        return false;
    }
    let marg = marginals(grid, f);
    let peak = f.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    f.iter().enumerate().all(|(idx, &v)| {
        let m = grid.multi_index(idx);
        let prod: f64 = marg.iter().enumerate().map(|(a, mg)| mg[m[a]] / total).product();
        (v / total - prod).abs() <= SEPARABILITY_TOL * peak / total
    })
}

/// Inverse CDF of a periodic piecewise-linear density along one axis.
struct AxisSampler {
    h: f64,
    values: Vec<f64>,
    cumulative: Vec<f64>,
}

impl AxisSampler {
    fn new(values: Vec<f64>, h: f64) -> Self {
        let n = values.len();
        let mut cumulative = Vec::with_capacity(n);
        let mut acc = 0.0;
        for i in 0..n {
            acc += 0.5 * h * (values[i] + values[(i + 1) % n]);
            cumulative.push(acc);
        }
        AxisSampler { h, values, cumulative }
    }

    fn sample(&self, u: f64) -> f64 {
        let n = self.values.len();
        let total = self.cumulative[n - 1];
        let target = u * total;
        let cell = self.cumulative.partition_point(|&c| c <= target).min(n - 1);
        let below = if cell == 0 { 0.0 } else { self.cumulative[cell - 1] };
        let rem = target - below;
        let a = self.values[cell];
        let b = (self.values[(cell + 1) % n] - a) / self.h;
        // a s + b s^2 / 2 = rem on [0, h].
        let s = if b.abs() * self.h <= 1e-12 * a.abs().max(f64::MIN_POSITIVE) {
            rem / a
        } else {
            let disc = (a * a + 2.0 * b * rem).max(0.0);
            2.0 * rem / (a + disc.sqrt())
        };
        (cell as f64 * self.h + s.clamp(0.0, self.h)).min(self.h * n as f64)
    }
}

fn multilinear(grid: &Grid, f: &[f64], r: [f64; MAX_DIM]) -> f64 {
    let dim = grid.dim();
    let n = grid.n();
    let h = grid.spacing();
    let mut base = [0usize; MAX_DIM];
    let mut frac = [0.0; MAX_DIM];
    for a in 0..dim {
        let u = r[a] / h[a];
        let i = u.floor();
        frac[a] = u - i;
        base[a] = (i as isize).rem_euclid(n[a] as isize) as usize;
    }
    let mut acc = 0.0;
    for corner in 0..(1usize << dim) {
        let mut m = [0usize; MAX_DIM];
        let mut w = 1.0;
        for a in 0..dim {
            let up = (corner >> a) & 1 == 1;
            m[a] = if up { (base[a] + 1) % n[a] } else { base[a] };
            w *= if up { frac[a] } else { 1.0 - frac[a] };
        }
        acc += w * f[grid.index(m)];
    }
    acc
}

/// Draws `count` points distributed as `f`: inverse CDF per axis when `f`
/// is separable, rejection sampling otherwise.
pub fn sample_density<R: Rng + ?Sized>(grid: &Grid, f: &[f64], count: usize, rng: &mut R) -> Result<Vec<[f64; 3]>> {
    grid.check_len(f.len())?;
    if f.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::InvalidParameter("density must be finite and non-negative".into()));
    }
    let peak = f.iter().fold(0.0f64, |m, &x| m.max(x));
    if peak == 0.0 {
        return Err(Error::AllMasked);
    }
    let h = grid.spacing();
    let l = grid.length();
    if is_separable(grid, f) {
        let axes: Vec<AxisSampler> = marginals(grid, f)
            .into_iter()
            .enumerate()
            .map(|(a, m)| AxisSampler::new(m, h[a]))
            .collect();
        return Ok((0..count)
            .map(|_| {
                let mut r = [0.0; 3];
                for (a, s) in axes.iter().enumerate() {
                    r[a] = s.sample(rng.random::<f64>());
                }
                grid.wrap(r)
            })
            .collect());
    }
    let mut out = Vec::with_capacity(count);
    let mut tries = 0usize;
    while out.len() < count {
        tries += 1;
        if tries > MAX_REJECTION_TRIES * count.max(1) {
            return Err(Error::InvalidParameter(
                "rejection sampling did not converge; density too concentrated".into(),
            ));
        }
        let mut r = [0.0; 3];
        for a in 0..grid.dim() {
            r[a] = rng.random::<f64>() * l[a];
        }
        if rng.random::<f64>() * peak < multilinear(grid, f, r) {
            out.push(r);
        }
    }
    Ok(out)
}
