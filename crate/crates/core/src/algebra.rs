//! Pauli and Dirac matrices, the quaternion embedding, the rotation phase
//! matrix, and an executable suite of the algebraic identities the wave
//! equations rely on.
//!
//! The Dirac matrices are fixed to the Dirac-Pauli block form. Indices are
//! contravariant and the metric is `diag(+, -, -, -)`.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::lattice::Grid;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Square complex matrix of fixed size, row-major.
#[derive(Clone, Copy, PartialEq)]
pub struct Matrix<const N: usize>(pub [[Complex64; N]; N]);

pub type Matrix2 = Matrix<2>;
pub type Matrix4 = Matrix<4>;

impl<const N: usize> fmt::Debug for Matrix<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.0 {
            let cells: Vec<String> = row.iter().map(|z| format!("{:+.3e}{:+.3e}i", z.re, z.im)).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

impl<const N: usize> Matrix<N> {
    pub fn zero() -> Self {
        Matrix([[ZERO; N]; N])
    }

    pub fn identity() -> Self {
        let mut m = Self::zero();
        for i in 0..N {
            m.0[i][i] = ONE;
        }
        m
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Matrix(self.0.map(|row| row.map(|z| z * s)))
    }

    pub fn dagger(&self) -> Self {
        let mut m = Self::zero();
        for i in 0..N {
            for j in 0..N {
                m.0[i][j] = self.0[j][i].conj();
            }
        }
        m
    }

    pub fn conj(&self) -> Self {
        Matrix(self.0.map(|row| row.map(|z| z.conj())))
    }

    pub fn trace(&self) -> Complex64 {
        (0..N).map(|i| self.0[i][i]).sum()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0f64, |m, z| m.max(z.norm()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (*self - *other).max_abs()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.dagger()) <= tol
    }

    pub fn apply(&self, v: &[Complex64; N]) -> [Complex64; N] {
        std::array::from_fn(|i| (0..N).map(|j| self.0[i][j] * v[j]).sum())
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn det(&self) -> Complex64 {
        let mut a = self.0;
        let mut det = ONE;
        for col in 0..N {
            let pivot = (col..N)
                .max_by(|&x, &y| a[x][col].norm().total_cmp(&a[y][col].norm()))
                .unwrap_or(col);
            if a[pivot][col].norm() == 0.0 {
                return ZERO;
            }
            if pivot != col {
                a.swap(pivot, col);
                det = -det;
            }
            det *= a[col][col];
            for r in col + 1..N {
                let factor = a[r][col] / a[col][col];
                for c in col..N {
                    let v = a[col][c];
                    a[r][c] -= factor * v;
                }
            }
        }
        det
    }

    /// Matrix exponential by scaling and squaring of a Taylor series.
    pub fn expm(&self) -> Self {
        let norm: f64 = self.0.iter().map(|r| r.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
        let mut squarings = 0;
        let mut scale = 1.0;
        while norm * scale > 0.5 {
            scale *= 0.5;
            squarings += 1;
        }
        let a = self.scale(Complex64::new(scale, 0.0));
        let mut term = Self::identity();
        let mut sum = Self::identity();
        for k in 1..30 {
            term = (term * a).scale(Complex64::new(1.0 / k as f64, 0.0));
            sum = sum + term;
            if term.max_abs() < 1e-18 {
                break;
            }
        }
        for _ in 0..squarings {
            sum = sum * sum;
        }
        sum
    }
}

impl<const N: usize> Add for Matrix<N> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut m = self;
        for i in 0..N {
            for j in 0..N {
                m.0[i][j] += rhs.0[i][j];
            }
        }
        m
    }
}

impl<const N: usize> Sub for Matrix<N> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let mut m = self;
        for i in 0..N {
            for j in 0..N {
                m.0[i][j] -= rhs.0[i][j];
            }
        }
        m
    }
}

impl<const N: usize> Mul for Matrix<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut m = Self::zero();
        for i in 0..N {
            for k in 0..N {
                let a = self.0[i][k];
                if a == ZERO {
                    continue;
                }
                for j in 0..N {
                    m.0[i][j] += a * rhs.0[k][j];
                }
            }
        }
        m
    }
}

/// Assembles a 4x4 matrix from 2x2 blocks `[[a, b], [c, d]]`.
pub fn from_blocks(a: Matrix2, b: Matrix2, c: Matrix2, d: Matrix2) -> Matrix4 {
    let mut m = Matrix4::zero();
    for i in 0..2 {
        for j in 0..2 {
            m.0[i][j] = a.0[i][j];
            m.0[i][j + 2] = b.0[i][j];
            m.0[i + 2][j] = c.0[i][j];
            m.0[i + 2][j + 2] = d.0[i][j];
        }
    }
    m
}

/// Pauli matrix `sigma^k`, with `sigma^0` the identity.
pub fn pauli(k: usize) -> Result<Matrix2> {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    match k {
        0 => Ok(Matrix2::identity()),
        1 => Ok(Matrix([[ZERO, ONE], [ONE, ZERO]])),
        2 => Ok(Matrix([[ZERO, c(0.0, -1.0)], [c(0.0, 1.0), ZERO]])),
        3 => Ok(Matrix([[ONE, ZERO], [ZERO, c(-1.0, 0.0)]])),
        _ => Err(Error::IndexOutOfRange { index: k, bound: 4 }),
    }
}

fn sigma(k: usize) -> Matrix2 {
    pauli(k).expect("index in range")
}

/// `sigma . x = [[x3, x1 - i x2], [x1 + i x2, -x3]]`.
pub fn sigma_dot(x: [f64; 3]) -> Matrix2 {
    Matrix([
        [Complex64::new(x[2], 0.0), Complex64::new(x[0], -x[1])],
        [Complex64::new(x[0], x[1]), Complex64::new(-x[2], 0.0)],
    ])
}

/// Quaternion `a + u1 i + u2 j + u3 k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quaternion {
    pub a: f64,
    pub u: [f64; 3],
}

impl Quaternion {
    pub fn new(a: f64, u: [f64; 3]) -> Self {
        Quaternion { a, u }
    }

    /// The four basis units `1, i, j, k`.
    pub fn basis(k: usize) -> Self {
        let mut q = Quaternion::new(0.0, [0.0; 3]);
        match k {
            0 => q.a = 1.0,
            1..=3 => q.u[k - 1] = 1.0,
            _ => panic!("quaternion basis index {k} out of range"),
        }
        q
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, rhs: Quaternion) -> Quaternion {
        let (a, u) = (self.a, self.u);
        let (b, v) = (rhs.a, rhs.u);
        let dot = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
        let cross = cross(u, v);
        Quaternion {
            a: a * b - dot,
            u: std::array::from_fn(|i| a * v[i] + b * u[i] + cross[i]),
        }
    }
}

/// `a sigma^0 + u1 (i sigma^3) + u2 (i sigma^2) + u3 (i sigma^1)`.
pub fn quaternion_embed(q: Quaternion) -> Matrix2 {
    let re = |x: f64| Complex64::new(x, 0.0);
    sigma(0).scale(re(q.a))
        + sigma(3).scale(I * q.u[0])
        + sigma(2).scale(I * q.u[1])
        + sigma(1).scale(I * q.u[2])
}

/// Minkowski metric `g^{mu nu} = diag(+, -, -, -)`.
pub fn metric(mu: usize, nu: usize) -> f64 {
    match (mu, nu) {
        (0, 0) => 1.0,
        (a, b) if a == b => -1.0,
        _ => 0.0,
    }
}

/// Dirac matrix `gamma^mu` in the Dirac-Pauli representation.
pub fn dirac_gamma(mu: usize) -> Result<Matrix4> {
    let z = Matrix2::zero();
    match mu {
        0 => Ok(from_blocks(sigma(0), z, z, sigma(0).scale(-ONE))),
        1..=3 => Ok(from_blocks(z, sigma(mu), sigma(mu).scale(-ONE), z)),
        _ => Err(Error::IndexOutOfRange { index: mu, bound: 4 }),
    }
}

fn gamma(mu: usize) -> Matrix4 {
    dirac_gamma(mu).expect("index in range")
}

/// `alpha^k = gamma^0 gamma^k = [[0, sigma^k], [sigma^k, 0]]`.
pub fn dirac_alpha(k: usize) -> Matrix4 {
    gamma(0) * gamma(k)
}

/// Rotation phase matrix at the contravariant point `x^mu`:
/// `[[x^0 I, -sigma . x], [sigma . x, -x^0 I]]`.
pub fn phase_matrix(x: [f64; 4]) -> Matrix4 {
    let s = sigma_dot([x[1], x[2], x[3]]);
    let t = sigma(0).scale(Complex64::new(x[0], 0.0));
    from_blocks(t, s.scale(-ONE), s, t.scale(-ONE))
}

/// Raised-index derivative `d^mu phase_matrix` by centered differences at `x`.
pub fn phase_matrix_derivative(mu: usize, x: [f64; 4], h: f64) -> Matrix4 {
    let mut xp = x;
    let mut xm = x;
    xp[mu] += h;
    xm[mu] -= h;
    let d = (phase_matrix(xp) - phase_matrix(xm)).scale(Complex64::new(1.0 / (2.0 * h), 0.0));
    d.scale(Complex64::new(metric(mu, mu), 0.0))
}

pub fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// `(sigma . a)(sigma . b) - [I (a . b) + i sigma . (a x b)]`, as max entry error.
pub fn sigma_product_error(a: [f64; 3], b: [f64; 3]) -> f64 {
    let lhs = sigma_dot(a) * sigma_dot(b);
    let rhs = Matrix2::identity().scale(Complex64::new(dot(a, b), 0.0)) + sigma_dot(cross(a, b)).scale(I);
    lhs.max_abs_diff(&rhs)
}

/// `psi^T (sigma* . B) psi* - psi^dagger (sigma . B) psi` for one spinor.
pub fn b10_residual(psi: [Complex64; 2], b: [f64; 3]) -> Complex64 {
    let m = sigma_dot(b);
    let mc = m.conj();
    let conj = [psi[0].conj(), psi[1].conj()];
    let lhs: Complex64 = (0..2)
        .map(|i| psi[i] * (0..2).map(|j| mc.0[i][j] * conj[j]).sum::<Complex64>())
        .sum();
    let rhs: Complex64 = (0..2)
        .map(|i| conj[i] * (0..2).map(|j| m.0[i][j] * psi[j]).sum::<Complex64>())
        .sum();
    lhs - rhs
}

/// Maximum deviation between both sides of the squared Pauli kinetic
/// operator identity on a lattice:
/// `[sigma . (p - kappa A)]^2 psi = (p - kappa A)^2 psi - (kappa / beta) sigma . curl A psi`
/// with `p = -(i / beta) grad`.
///
/// Inputs should be band-limited well below `n/4` so that the cubic
/// products in `A` stay alias-free.
pub fn pauli_square_residual(
    grid: &Grid,
    psi: &[Vec<Complex64>; 2],
    a: &[Vec<f64>; 3],
    beta: f64,
    kappa: f64,
) -> Result<f64> {
    for c in psi {
        grid.check_len(c.len())?;
    }
    for c in a {
        grid.check_len(c.len())?;
    }
    let p_minus_ka = |f: &[Complex64], k: usize| -> Result<Vec<Complex64>> {
        let d = grid.derivative(f, k)?;
        Ok(d
            .iter()
            .zip(f)
            .zip(&a[k])
            .map(|((d, v), ak)| d * (-I / beta) - v * (kappa * ak))
            .collect())
    };
    // sigma . (p - kappa A) applied to a spinor.
    let apply = |s: &[Vec<Complex64>; 2]| -> Result<[Vec<Complex64>; 2]> {
        let mut out = [vec![ZERO; grid.len()], vec![ZERO; grid.len()]];
        for k in 0..3 {
            let sk = sigma(k + 1);
            let d0 = p_minus_ka(&s[0], k)?;
            let d1 = p_minus_ka(&s[1], k)?;
            for idx in 0..grid.len() {
                let v = sk.apply(&[d0[idx], d1[idx]]);
                out[0][idx] += v[0];
                out[1][idx] += v[1];
            }
        }
        Ok(out)
    };
    let lhs = apply(&apply(psi)?)?;
    let curl = grid.curl_real([&a[0], &a[1], &a[2]])?;
    let mut err = 0.0f64;
    for c in 0..2 {
        let mut sq = vec![ZERO; grid.len()];
        for k in 0..3 {
            let once = p_minus_ka(&psi[c], k)?;
            let twice = p_minus_ka(&once, k)?;
            for (s, t) in sq.iter_mut().zip(twice) {
                *s += t;
            }
        }
        for idx in 0..grid.len() {
            let b = [curl[0][idx], curl[1][idx], curl[2][idx]];
            let spin = sigma_dot(b).apply(&[psi[0][idx], psi[1][idx]]);
            let rhs = sq[idx] - spin[c] * (kappa / beta);
            err = err.max((lhs[c][idx] - rhs).norm());
        }
    }
    Ok(err)
}

/// Outcome of one identity in [`identity_suite`].
#[derive(Clone, Debug)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub max_error: f64,
    pub tolerance: f64,
    /// Offending matrix, filled in when the check fails.
    pub dump: Option<String>,
}

impl IdentityCheck {
    pub fn passed(&self) -> bool {
        self.max_error <= self.tolerance
    }
}

/// Deliberate corruption used to confirm the suite can fail.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Perturbs one entry of `gamma^2` before the anticommutator check.
    GammaEntry,
}

pub const IDENTITY_TOLERANCE: f64 = 1e-12;

pub const IDENTITY_NAMES: [&str; 9] = [
    "pauli_table",
    "sigma_dot_layout",
    "quaternion_homomorphism",
    "dirac_anticommutators",
    "gamma0_squared",
    "phase_matrix_derivative",
    "sigma_product",
    "spinor_b_cancellation",
    "pauli_square_lattice",
];

/// Runs every algebraic identity and reports its maximum error.
pub fn identity_suite(fault: Option<Fault>) -> Vec<IdentityCheck> {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut out = Vec::new();
    let mut push = |name: &'static str, err: f64, dump: Option<String>| {
        out.push(IdentityCheck {
            name,
            max_error: err,
            tolerance: IDENTITY_TOLERANCE,
            dump: if err > IDENTITY_TOLERANCE { dump } else { None },
        });
    };

    // Entry tables written out independently of `pauli`.
    let c = Complex64::new;
    let table = [
        Matrix([[c(1.0, 0.0), ZERO], [ZERO, c(1.0, 0.0)]]),
        Matrix([[ZERO, c(1.0, 0.0)], [c(1.0, 0.0), ZERO]]),
        Matrix([[ZERO, c(0.0, -1.0)], [c(0.0, 1.0), ZERO]]),
        Matrix([[c(1.0, 0.0), ZERO], [ZERO, c(-1.0, 0.0)]]),
    ];
    let err = (0..4).map(|k| sigma(k).max_abs_diff(&table[k])).fold(0.0, f64::max);
    push("pauli_table", err, None);

    let mut err = 0.0f64;
    for _ in 0..100 {
        let x: [f64; 3] = std::array::from_fn(|_| rng.random_range(-2.0..2.0));
        let s = sigma_dot(x);
        let combo = sigma(1).scale(c(x[0], 0.0)) + sigma(2).scale(c(x[1], 0.0)) + sigma(3).scale(c(x[2], 0.0));
        err = err
            .max(s.max_abs_diff(&combo))
            .max(s.trace().norm())
            .max((s.det() + dot(x, x)).norm())
            .max(s.max_abs_diff(&s.dagger()));
    }
    push("sigma_dot_layout", err, None);

    let mut err = 0.0f64;
    for a in 0..4 {
        for b in 0..4 {
            let (qa, qb) = (Quaternion::basis(a), Quaternion::basis(b));
            let e = quaternion_embed(qa * qb).max_abs_diff(&(quaternion_embed(qa) * quaternion_embed(qb)));
            err = err.max(e);
        }
    }
    push("quaternion_homomorphism", err, None);

    let mut gammas: [Matrix4; 4] = std::array::from_fn(gamma);
    if fault == Some(Fault::GammaEntry) {
        gammas[2].0[0][3] += c(1e-3, 0.0);
    }
    let mut err = 0.0f64;
    let mut worst = None;
    for mu in 0..4 {
        for nu in mu..4 {
            let anti = gammas[mu] * gammas[nu] + gammas[nu] * gammas[mu];
            let expect = Matrix4::identity().scale(c(2.0 * metric(mu, nu), 0.0));
            let e = anti.max_abs_diff(&expect);
            if e > err {
                err = e;
                worst = Some(format!("{{gamma^{mu}, gamma^{nu}}} =\n{anti:?}gamma^{mu} =\n{:?}", gammas[mu]));
            }
        }
    }
    push("dirac_anticommutators", err, worst);

    push(
        "gamma0_squared",
        (gamma(0) * gamma(0)).max_abs_diff(&Matrix4::identity()),
        None,
    );

    let mut err = 0.0f64;
    for _ in 0..20 {
        let x: [f64; 4] = std::array::from_fn(|_| rng.random_range(-3.0..3.0));
        for mu in 0..4 {
            err = err.max(phase_matrix_derivative(mu, x, 0.5).max_abs_diff(&gamma(mu)));
        }
    }
    push("phase_matrix_derivative", err, None);

    let mut err = 0.0f64;
    for _ in 0..100 {
        let a: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let b: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        err = err.max(sigma_product_error(a, b));
    }
    push("sigma_product", err, None);

    let mut err = 0.0f64;
    for _ in 0..100 {
        let psi = [
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
        ];
        let b: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        err = err.max(b10_residual(psi, b).norm());
    }
    push("spinor_b_cancellation", err, None);

    push("pauli_square_lattice", pauli_square_lattice_error(&mut rng), None);
    out
}

/// Smooth low-mode fields on a small 3D box, checked against the
/// squared-operator identity with physical-looking `beta` and `kappa`.
fn pauli_square_lattice_error(rng: &mut StdRng) -> f64 {
    use std::f64::consts::PI;
    let grid = match Grid::new(3, &[16, 16, 16], &[2.0 * PI, 2.0 * PI, 2.0 * PI]) {
        Ok(g) => g,
        Err(_) => return f64::INFINITY,
    };
    let mut modes = |amp: f64| -> Vec<f64> {
        let p: [f64; 8] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        (0..grid.len())
            .map(|i| {
                let r = grid.coords(i);
                amp * (p[0] * (r[0] + p[1]).sin()
                    + p[2] * (r[1] + p[3]).cos()
                    + p[4] * (r[2] + p[5]).sin()
                    + p[6] * (r[0] + r[1] - r[2] + p[7]).cos())
            })
            .collect()
    };
    let psi: [Vec<Complex64>; 2] = std::array::from_fn(|_| {
        let re = modes(1.0);
        let im = modes(1.0);
        re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect()
    });
    let a: [Vec<f64>; 3] = std::array::from_fn(|_| modes(0.5));
    pauli_square_residual(&grid, &psi, &a, 1.0, 0.7).unwrap_or(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn pauli_examples() {
        assert_eq!(pauli(1).unwrap(), Matrix([[ZERO, ONE], [ONE, ZERO]]));
        assert_eq!(pauli(2).unwrap(), Matrix([[ZERO, c(0.0, -1.0)], [c(0.0, 1.0), ZERO]]));
        assert_eq!(pauli(0).unwrap(), Matrix2::identity());
        assert!(matches!(pauli(4), Err(Error::IndexOutOfRange { index: 4, bound: 4 })));
        for k in 0..4 {
            assert!(pauli(k).unwrap().is_hermitian(0.0));
        }
    }

    #[test]
    fn quaternion_examples() {
        assert_eq!(quaternion_embed(Quaternion::new(1.0, [0.0; 3])), Matrix2::identity());
        assert_eq!(quaternion_embed(Quaternion::basis(1)), sigma(3).scale(I));
        // Direct 2x2 products: (i sigma3)(i sigma2) = -sigma3 sigma2.
        let i_emb = Matrix([[c(0.0, 1.0), ZERO], [ZERO, c(0.0, -1.0)]]);
        let j_emb = Matrix([[ZERO, c(1.0, 0.0)], [c(-1.0, 0.0), ZERO]]);
        let k_emb = Matrix([[ZERO, c(0.0, 1.0)], [c(0.0, 1.0), ZERO]]);
        assert_eq!(i_emb * j_emb, k_emb);
        assert_eq!(quaternion_embed(Quaternion::basis(3)), k_emb);
        assert_eq!(
            quaternion_embed(Quaternion::basis(1)) * quaternion_embed(Quaternion::basis(2)),
            quaternion_embed(Quaternion::basis(3))
        );
    }

    #[test]
    fn sigma_dot_examples() {
        assert_eq!(sigma_dot([0.0, 0.0, 1.0]), Matrix([[ONE, ZERO], [ZERO, -ONE]]));
        assert_eq!(sigma_dot([0.0; 3]), Matrix2::zero());
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma(0) * gamma(0), Matrix4::identity());
        let s1 = pauli(1).unwrap();
        let mut expect = Matrix4::zero();
        for i in 0..2 {
            for j in 0..2 {
                expect.0[i][j + 2] = s1.0[i][j];
                expect.0[i + 2][j] = -s1.0[i][j];
            }
        }
        assert_eq!(gamma(1), expect);
        assert!(dirac_gamma(4).is_err());
        for mu in 0..4 {
            for nu in 0..4 {
                let anti = gamma(mu) * gamma(nu) + gamma(nu) * gamma(mu);
                let expect = Matrix4::identity().scale(c(2.0 * metric(mu, nu), 0.0));
                assert_eq!(anti, expect);
            }
        }
    }

    #[test]
    fn phase_matrix_examples() {
        assert_eq!(phase_matrix([1.0, 0.0, 0.0, 0.0]), gamma(0));
        assert_eq!(phase_matrix([0.0; 4]), Matrix4::zero());
        for mu in 0..4 {
            let d = phase_matrix_derivative(mu, [0.3, -1.0, 2.0, 0.7], 1e-3);
            assert!(d.max_abs_diff(&gamma(mu)) < 1e-10);
        }
    }

    #[test]
    fn determinant_and_exponential() {
        let m = sigma_dot([1.0, 2.0, -0.5]);
        assert!((m.det() - c(-5.25, 0.0)).norm() < 1e-14);
        // exp(i theta sigma_z) closed form.
        let e = sigma(3).scale(c(0.0, 0.8)).expm();
        let expect = Matrix([[c(0.8f64.cos(), 0.8f64.sin()), ZERO], [ZERO, c(0.8f64.cos(), -0.8f64.sin())]]);
        assert!(e.max_abs_diff(&expect) < 1e-14);
    }

    #[test]
    fn full_suite_passes() {
        for check in identity_suite(None) {
            assert!(check.passed(), "{} failed with {:e}", check.name, check.max_error);
        }
        assert_eq!(identity_suite(None).len(), IDENTITY_NAMES.len());
    }

    #[test]
    fn fault_is_detected_with_dump() {
        let suite = identity_suite(Some(Fault::GammaEntry));
        let bad: Vec<_> = suite.iter().filter(|c| !c.passed()).collect();
        assert_eq!(bad.len(), 1);
        assert_eq!(bad[0].name, "dirac_anticommutators");
        assert!(bad[0].dump.as_ref().unwrap().contains("gamma^2"));
    }

    proptest! {
        #[test]
        fn sigma_product_identity(a in prop::array::uniform3(-5.0..5.0f64), b in prop::array::uniform3(-5.0..5.0f64)) {
            prop_assert!(sigma_product_error(a, b) <= 1e-13 * (1.0 + dot(a, a) + dot(b, b)));
        }

        #[test]
        fn sigma_dot_determinant(x in prop::array::uniform3(-5.0..5.0f64)) {
            prop_assert!((sigma_dot(x).det() + dot(x, x)).norm() <= 1e-12);
        }

        #[test]
        fn b10_cancels(p in prop::array::uniform4(-1.0..1.0f64), b in prop::array::uniform3(-3.0..3.0f64)) {
            let psi = [c(p[0], p[1]), c(p[2], p[3])];
            prop_assert!(b10_residual(psi, b).norm() <= 1e-13);
        }

        #[test]
        fn embedding_is_multiplicative(
            a in -2.0..2.0f64, u in prop::array::uniform3(-2.0..2.0f64),
            b in -2.0..2.0f64, v in prop::array::uniform3(-2.0..2.0f64),
        ) {
            let (p, q) = (Quaternion::new(a, u), Quaternion::new(b, v));
            let err = quaternion_embed(p * q).max_abs_diff(&(quaternion_embed(p) * quaternion_embed(q)));
            prop_assert!(err <= 1e-13);
        }
    }
}
